// usckc: command-line front end for chain reconstruction and scoring.
//
// Exit codes: 0 ok, 1 validation failure, 2 chain cap exceeded, 3 asset load
// failure. Failures print one tab-separated diagnostic line on stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "usckc/corpus.hpp"
#include "usckc/error.hpp"
#include "usckc/io.hpp"
#include "usckc/killchain.hpp"
#include "usckc/metrics.hpp"
#include "usckc/report.hpp"
#include "usckc/sysmodel.hpp"
#include "usckc/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace usckc;

namespace {

struct GlobalFlags {
    std::string config, catalog, graph, corpus, rules, scores, manifest, out;
    std::optional<std::uint64_t> cap;
};

struct Resolved {
    AssetPaths paths;
    PipelineConfig config;
};

Resolved resolve(const GlobalFlags& g) {
    Resolved r;
    r.paths = AssetPaths::in_directory(default_asset_dir());
    if (!g.config.empty()) apply_config_file(g.config, r.paths, r.config);
    auto over = [](const std::string& flag, fs::path& dst) {
        if (!flag.empty()) dst = flag;
    };
    over(g.catalog, r.paths.catalog);
    over(g.graph, r.paths.graph);
    over(g.corpus, r.paths.corpus);
    over(g.rules, r.paths.rules);
    over(g.scores, r.paths.scores);
    over(g.manifest, r.paths.manifest);
    if (g.cap) {
        if (*g.cap == 0) throw ValidationError("--cap must be positive");
        r.config.cap = *g.cap;
    }
    return r;
}

void emit(const GlobalFlags& g, const std::string& text) {
    if (g.out.empty()) std::cout << text;
    else write_text_file(g.out, text);
}

int cmd_ingest(const GlobalFlags& g) {
    const Resolved r = resolve(g);
    const TaxonomyCatalog catalog = load_catalog(r.paths.catalog);
    const auto corpus = load_corpus(r.paths.corpus, catalog);
    std::size_t steps = 0;
    for (const auto& rec : corpus) steps += rec.observed_steps.size();
    std::string text = "records\t" + std::to_string(corpus.size()) + "\n";
    text += "observed_steps\t" + std::to_string(steps) + "\n";
    for (const auto& [t, n] : summarize_by_type(corpus))
        text += "type\t" + std::string(to_string(t)) + "\t" + std::to_string(n) + "\n";
    emit(g, text);
    return 0;
}

int cmd_extrapolate(const GlobalFlags& g, const std::string& record_id) {
    const Resolved r = resolve(g);
    const Assets a = load_assets({r.paths.catalog, r.paths.graph, r.paths.rules, {}, r.paths.corpus, {}});
    const IncidentRecord* rec = find_record(a.corpus, record_id);
    if (!rec) throw ValidationError("no record with incident_id '" + record_id + "'");
    ExtrapolationOptions opts;
    opts.cap = r.config.cap;
    ChainSet set;
    try {
        set = extrapolate_chains(*rec, a.graph, a.catalog, a.rules, opts);
    } catch (Error& e) {
        e.tag_incident(record_id);
        throw;
    }
    std::string profile;
    for (std::size_t k : set.branch_profile) profile += (profile.empty() ? "" : ",") + std::to_string(k);
    const std::string summary = "incident=" + set.incident_id +
                                "\tobserved=" + std::to_string(set.observed_count) +
                                "\tsteps=" + std::to_string(set.total_steps) +
                                "\tbranch_profile=[" + profile + "]" +
                                "\tchains=" + std::to_string(set.chains.size()) +
                                "\tpruned=" + std::to_string(set.pruned_count) +
                                "\telided=" + std::to_string(set.elided_steps) + "\n";
    const std::string chains = export_chains_jsonl({set});
    if (g.out.empty()) {
        std::cerr << summary;
        std::cout << chains;
    } else {
        write_text_file(g.out, chains);
        std::cout << summary;
    }
    return 0;
}

int cmd_score(const GlobalFlags& g, const std::string& chains_path) {
    const Resolved r = resolve(g);
    const TaxonomyCatalog catalog = load_catalog(r.paths.catalog);
    const ScoreTable scores = load_scores(r.paths.scores, &catalog);
    const auto sets = import_chains_jsonl(read_text_file(chains_path), chains_path);
    std::string text =
        "incident_id\tchains\talpha_ta_plus\talpha_te_plus\talpha_ta_minus\talpha_te_minus\t"
        "likelihood\tfallback_ids\n";
    for (const auto& set : sets) {
        const Scorecard c = make_scorecard(set, scores);
        std::string fb;
        for (const auto& id : c.fallback_ids) fb += (fb.empty() ? "" : ",") + id;
        text += c.incident_id + "\t" + std::to_string(c.chain_count) + "\t" +
                format_number(c.alpha_ta_plus) + "\t" + format_number(c.alpha_te_plus) + "\t" +
                format_number(c.alpha_ta_minus) + "\t" + format_number(c.alpha_te_minus) + "\t" +
                format_number(c.likelihood) + "\t" + (fb.empty() ? "-" : fb) + "\n";
    }
    emit(g, text);
    return 0;
}

int cmd_summarize(const GlobalFlags& g, const std::string& series, bool full_dataset) {
    const Resolved r = resolve(g);
    const Assets a = load_assets(r.paths);
    const PipelineResult res = run_pipeline(a.corpus, a.catalog, a.graph, a.rules, a.scores, r.config);
    std::string text;
    if (series.empty()) {
        text = scorecards_to_tsv(res.scorecards);
        text += "# total_chains\t" + std::to_string(res.total_chains) + "\n";
    } else {
        text = series_to_tsv(yearly_series(res.scorecards, series), series);
    }
    emit(g, text);

    std::vector<std::string> diffs;
    if (full_dataset) {
        diffs = reference_discrepancies(a.corpus, res.total_chains);
        for (const auto& d : diffs) std::cerr << "discrepancy\treference\t" << d << "\n";
    } else if (!r.paths.manifest.empty() && fs::exists(r.paths.manifest)) {
        diffs = manifest_discrepancies(a.corpus, load_manifest(r.paths.manifest), &res);
        for (const auto& d : diffs) std::cerr << "discrepancy\tmanifest\t" << d << "\n";
    }
    if (diffs.empty()) std::cerr << "summary\tconsistent\n";
    return 0;
}

int cmd_export(const GlobalFlags& g) {
    if (g.out.empty()) throw ValidationError("export needs --out <directory>");
    const Resolved r = resolve(g);
    const Assets a = load_assets(r.paths);
    const PipelineResult res = run_pipeline(a.corpus, a.catalog, a.graph, a.rules, a.scores, r.config);
    const fs::path dir = g.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw AssetLoadError("cannot create " + dir.string() + ": " + ec.message());
    write_text_file(dir / "chains.jsonl", export_chains_jsonl(res.chain_sets));
    write_text_file(dir / "scorecards.tsv", scorecards_to_tsv(res.scorecards));
    if (!res.scorecards.empty())
        for (auto field : kSeriesFields)
            write_text_file(dir / ("series_" + std::string(field) + ".tsv"),
                            series_to_tsv(yearly_series(res.scorecards, field), field));
    std::cout << "exported\t" << res.chain_sets.size() << " incidents\t" << res.total_chains
              << " chains\t" << dir.string() << "\n";
    return 0;
}

int cmd_import(const GlobalFlags& g, const std::string& stix, const std::string& sparta,
               const std::string& version) {
    if (g.out.empty()) throw ValidationError("import-catalog needs --out <catalog path>");
    std::optional<json> attack_doc, sparta_doc;
    if (!stix.empty()) attack_doc = load_json_file(stix);
    if (!sparta.empty()) sparta_doc = load_json_file(sparta);
    const TaxonomyCatalog c = import_stix_bundles(attack_doc ? &*attack_doc : nullptr,
                                                  sparta_doc ? &*sparta_doc : nullptr, version);
    save_catalog(g.out, c);
    std::cout << "imported\t" << c.tactics().size() << " tactics\t" << c.techniques().size()
              << " techniques\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unified space cyber kill chain reconstruction and scoring"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config, "Config file naming all assets");
    app.add_option("--catalog", g.catalog, "Tactic and technique catalog");
    app.add_option("--graph", g.graph, "Infrastructure graph");
    app.add_option("--corpus", g.corpus, "Incident corpus (one record per line)");
    app.add_option("--rules", g.rules, "Extrapolation rulebase");
    app.add_option("--scores", g.scores, "Score table");
    app.add_option("--manifest", g.manifest, "Corpus manifest");
    app.add_option("--cap", g.cap, "Maximum chains per incident");
    app.add_option("--out", g.out, "Output path");

    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print a summary");
    std::string record_id;
    auto* extrapolate = app.add_subcommand("extrapolate", "Extrapolate the chains of one record");
    extrapolate->add_option("--record", record_id, "incident_id")->required();
    std::string chains_path;
    auto* score = app.add_subcommand("score", "Score an exported chain file");
    score->add_option("--chains", chains_path, "Chain export")->required();
    std::string series;
    bool full_dataset = false;
    auto* summarize = app.add_subcommand("summarize", "Run the pipeline and print scorecards");
    summarize->add_option("--series", series, "Print one yearly series instead")
        ->check(CLI::IsMember(std::vector<std::string>(kSeriesFields.begin(), kSeriesFields.end())));
    summarize->add_flag("--full-dataset", full_dataset,
                        "Compare against the reference 108-incident counts");
    auto* exp = app.add_subcommand("export", "Write chains, scorecards and series to --out");
    std::string stix, sparta, version;
    auto* import = app.add_subcommand("import-catalog", "Convert STIX 2.1 bundles to a catalog");
    import->add_option("--stix", stix, "ATT&CK STIX bundle");
    import->add_option("--sparta", sparta, "SPARTA STIX bundle");
    import->add_option("--catalog-version", version, "Version string to record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(g);
        if (*extrapolate) return cmd_extrapolate(g, record_id);
        if (*score) return cmd_score(g, chains_path);
        if (*summarize) return cmd_summarize(g, series, full_dataset);
        if (*exp) return cmd_export(g);
        if (*import) return cmd_import(g, stix, sparta, version);
    } catch (const Error& e) {
        std::cerr << format_diagnostic(e) << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << format_diagnostic(ValidationError(e.what())) << "\n";
        return 1;
    }
    return 1;
}
