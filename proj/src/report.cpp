#include "usckc/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

#include "json_fields.hpp"
#include "usckc/error.hpp"

#ifndef USCKC_DEFAULT_ASSET_DIR
#define USCKC_DEFAULT_ASSET_DIR "assets"
#endif

namespace usckc {

std::filesystem::path default_asset_dir() {
    if (const char* env = std::getenv("USCKC_ASSET_DIR"); env && *env) return env;
    return USCKC_DEFAULT_ASSET_DIR;
}

AssetPaths AssetPaths::in_directory(const std::filesystem::path& dir) {
    return {dir / "catalog.json",       dir / "default_graph.json",  dir / "rules.json",
            dir / "scores.json",        dir / "sample_corpus.jsonl", dir / "sample_manifest.json"};
}

void apply_config_file(const std::filesystem::path& path, AssetPaths& paths,
                       PipelineConfig& config) {
    using namespace detail;
    const json doc = load_json_file(path);
    require_object(doc, "config");
    const std::filesystem::path base = path.parent_path();
    auto set_path = [&](const char* key, std::filesystem::path& dst) {
        if (auto v = optional_string(doc, key, "config")) {
            std::filesystem::path p = *v;
            dst = p.is_relative() ? base / p : p;
        }
    };
    set_path("catalog", paths.catalog);
    set_path("graph", paths.graph);
    set_path("rules", paths.rules);
    set_path("scores", paths.scores);
    set_path("corpus", paths.corpus);
    set_path("manifest", paths.manifest);
    if (auto it = doc.find("cap"); it != doc.end()) {
        if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0)
            schema_error("config", "'cap' must be a positive integer");
        config.cap = it->get<std::uint64_t>();
    }
    if (auto it = doc.find("weights"); it != doc.end()) {
        require_object(*it, "config.weights");
        for (const auto& [key, arr] : it->items()) {
            if (!arr.is_array()) schema_error("config.weights." + key, "expected an array");
            std::vector<double> w;
            for (const auto& x : arr) w.push_back(require_number(x, "config.weights." + key));
            config.weights[key] = std::move(w);
        }
    }
    for (const auto& [key, v] : doc.items()) {
        static const std::set<std::string> known = {"catalog", "graph",    "rules", "scores",
                                                    "corpus",  "manifest", "cap",   "weights"};
        if (!known.count(key)) schema_error("config", "unknown key '" + key + "'");
    }
}

Assets load_assets(const AssetPaths& paths) {
    Assets a;
    if (!paths.catalog.empty()) a.catalog = load_catalog(paths.catalog);
    if (!paths.graph.empty()) a.graph = load_graph(paths.graph);
    if (!paths.rules.empty()) a.rules = load_rules(paths.rules, a.catalog);
    if (!paths.scores.empty()) a.scores = load_scores(paths.scores, &a.catalog);
    if (!paths.corpus.empty()) a.corpus = load_corpus(paths.corpus, a.catalog);
    return a;
}

// ---------------------------------------------------------------------------

Scorecard make_scorecard(const ChainSet& chains, const ScoreTable& scores,
                         const IncidentRecord* record) {
    Scorecard c;
    c.incident_id = chains.incident_id;
    c.chain_count = chains.chains.size();
    c.branch_profile = chains.branch_profile;
    c.pruned_count = chains.pruned_count;
    if (record) {
        c.attack_type = record->attack_type;
        c.year = record->date.year;
        if (record->consequence) c.consequence = segment_peaks(*record->consequence);
    }
    if (chains.chains.empty()) return c;
    const SophisticationSummary s = attack_sophistication(chains, scores);
    c.alpha_ta_plus = s.ta_plus;
    c.alpha_te_plus = s.te_plus;
    c.alpha_ta_minus = s.ta_minus;
    c.alpha_te_minus = s.te_minus;
    c.fallback_ids = s.fallback_ids;
    const AttackLikelihood l = attack_likelihood(chains, scores);
    c.likelihood = l.value;
    c.best_chain = l.best_index;
    return c;
}

PipelineResult run_pipeline(const std::vector<IncidentRecord>& corpus,
                            const TaxonomyCatalog& catalog, const SegmentGraph& graph,
                            const Rulebase& rules, const ScoreTable& scores,
                            const PipelineConfig& config) {
    PipelineResult out;
    ExtrapolationOptions opts;
    opts.cap = config.cap;
    for (const auto& record : corpus) {
        try {
            ChainSet set = extrapolate_chains(record, graph, catalog, rules, opts);
            if (set.chains.empty())
                throw ValidationError("no plausible chain survives (" +
                                      std::to_string(set.pruned_count) + " pruned)");
            Scorecard card = make_scorecard(set, scores, &record);
            if (record.consequence) aggregate_consequence(*record.consequence, config.weights);
            out.total_chains += set.chains.size();
            out.scorecards.push_back(std::move(card));
            out.chain_sets.push_back(std::move(set));
        } catch (Error& e) {
            e.tag_incident(record.incident_id);
            throw;
        }
    }
    return out;
}

namespace {

std::string num_or_na(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::string profile_string(const std::vector<std::size_t>& p) {
    std::string s = "[";
    for (std::size_t n = 0; n < p.size(); ++n) s += (n ? "," : "") + std::to_string(p[n]);
    return s + "]";
}

std::optional<double> field_value(const Scorecard& c, std::string_view field) {
    if (field == "alpha_ta_plus") return c.alpha_ta_plus;
    if (field == "alpha_te_plus") return c.alpha_te_plus;
    if (field == "likelihood") return c.likelihood;
    if (!c.consequence) return std::nullopt;
    if (field == "consequence_space") return c.consequence->space;
    if (field == "consequence_ground") return c.consequence->ground;
    if (field == "consequence_user") return c.consequence->user;
    if (field == "consequence_link") return c.consequence->link;
    return std::nullopt;
}

}  // namespace

std::string scorecards_to_tsv(const std::vector<Scorecard>& cards) {
    std::string out =
        "incident_id\tattack_type\tyear\tchain_count\tbranch_profile\tpruned\talpha_ta_plus\t"
        "alpha_te_plus\talpha_ta_minus\talpha_te_minus\tlikelihood\tbest_chain\t"
        "consequence_space\tconsequence_ground\tconsequence_user\tconsequence_link\t"
        "band_space\tband_ground\tband_user\tband_link\tfallback_ids\n";
    for (const auto& c : cards) {
        std::vector<std::string> f;
        f.push_back(c.incident_id);
        f.push_back(c.attack_type ? std::string(to_string(*c.attack_type)) : "NA");
        f.push_back(c.year ? std::to_string(*c.year) : "NA");
        f.push_back(std::to_string(c.chain_count));
        f.push_back(profile_string(c.branch_profile));
        f.push_back(std::to_string(c.pruned_count));
        f.push_back(format_number(c.alpha_ta_plus));
        f.push_back(format_number(c.alpha_te_plus));
        f.push_back(format_number(c.alpha_ta_minus));
        f.push_back(format_number(c.alpha_te_minus));
        f.push_back(format_number(c.likelihood));
        f.push_back(std::to_string(c.best_chain));
        std::optional<double> seg[4];
        if (c.consequence)
            seg[0] = c.consequence->space, seg[1] = c.consequence->ground,
            seg[2] = c.consequence->user, seg[3] = c.consequence->link;
        for (const auto& v : seg) f.push_back(num_or_na(v));
        for (const auto& v : seg)
            f.push_back(v ? std::string(to_string(classify_consequence_band(*v))) : "NA");
        std::string fb;
        for (const auto& id : c.fallback_ids) fb += (fb.empty() ? "" : ",") + id;
        f.push_back(fb.empty() ? "-" : fb);
        for (std::size_t n = 0; n < f.size(); ++n) out += (n ? "\t" : "") + f[n];
        out += '\n';
    }
    return out;
}

std::vector<SeriesRow> yearly_series(const std::vector<Scorecard>& cards, std::string_view field) {
    if (std::find(kSeriesFields.begin(), kSeriesFields.end(), field) == kSeriesFields.end())
        throw ValidationError("unknown series field '" + std::string(field) + "'");
    if (cards.empty()) throw ValidationError("yearly_series needs at least one scorecard");
    std::vector<SeriesRow> rows;
    for (const auto& c : cards) {
        if (!c.year) throw ValidationError("scorecard " + c.incident_id + " has no year");
        rows.push_back({*c.year, c.incident_id, c.attack_type, field_value(c, field)});
    }
    std::sort(rows.begin(), rows.end(), [](const SeriesRow& a, const SeriesRow& b) {
        return std::tie(a.year, a.incident_id) < std::tie(b.year, b.incident_id);
    });
    return rows;
}

std::string series_to_tsv(const std::vector<SeriesRow>& rows, std::string_view field) {
    std::string out = "year\tincident_id\tattack_type\t" + std::string(field) + "\n";
    for (const auto& r : rows)
        out += std::to_string(r.year) + "\t" + r.incident_id + "\t" +
               (r.attack_type ? std::string(to_string(*r.attack_type)) : "NA") + "\t" +
               num_or_na(r.value) + "\n";
    return out;
}

std::vector<std::string> manifest_discrepancies(const std::vector<IncidentRecord>& corpus,
                                                const CorpusManifest& manifest,
                                                const PipelineResult* result) {
    std::vector<std::string> out;
    if (corpus.size() != manifest.record_count)
        out.push_back("record_count: corpus " + std::to_string(corpus.size()) + ", manifest " +
                      std::to_string(manifest.record_count));
    const auto counts = summarize_by_type(corpus);
    for (AttackType t : kAllAttackTypes) {
        const std::size_t want = manifest.by_type.count(t) ? manifest.by_type.at(t) : 0;
        if (counts.at(t) != want)
            out.push_back("by_type." + std::string(to_string(t)) + ": corpus " +
                          std::to_string(counts.at(t)) + ", manifest " + std::to_string(want));
    }
    if (result) {
        if (result->total_chains != manifest.total_chains)
            out.push_back("total_chains: pipeline " + std::to_string(result->total_chains) +
                          ", manifest " + std::to_string(manifest.total_chains));
        for (const auto& set : result->chain_sets) {
            auto it = manifest.chains_per_incident.find(set.incident_id);
            if (it == manifest.chains_per_incident.end()) continue;
            if (it->second != set.chains.size())
                out.push_back("chains." + set.incident_id + ": pipeline " +
                              std::to_string(set.chains.size()) + ", manifest " +
                              std::to_string(it->second));
        }
    }
    return out;
}

std::vector<std::string> reference_discrepancies(const std::vector<IncidentRecord>& corpus,
                                                 std::size_t total_chains) {
    std::vector<std::string> out;
    if (corpus.size() != kReferenceDatasetRecords)
        out.push_back("record_count: corpus " + std::to_string(corpus.size()) + ", reference " +
                      std::to_string(kReferenceDatasetRecords));
    const auto counts = summarize_by_type(corpus);
    for (const auto& [t, want] : reference_dataset_type_counts())
        if (counts.at(t) != want)
            out.push_back("by_type." + std::string(to_string(t)) + ": corpus " +
                          std::to_string(counts.at(t)) + ", reference " + std::to_string(want));
    if (total_chains != kReferenceDatasetChains)
        out.push_back("total_chains: pipeline " + std::to_string(total_chains) + ", reference " +
                      std::to_string(kReferenceDatasetChains));
    return out;
}

}  // namespace usckc
