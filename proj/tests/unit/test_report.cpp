#include <tuple>

#include "doctest.h"
#include "support.hpp"
#include "usckc/error.hpp"

using namespace usckc;

namespace {

PipelineResult bundled_pipeline() {
    const auto& a = testing::bundled();
    return run_pipeline(a.corpus, a.catalog, a.graph, a.rules, a.scores);
}

Scorecard card(const std::string& id, int year, double ta) {
    Scorecard c;
    c.incident_id = id;
    c.year = year;
    c.alpha_ta_plus = ta;
    return c;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("pipeline over the bundled corpus agrees with the manifest") {
    const PipelineResult r = bundled_pipeline();
    const CorpusManifest m = load_manifest(testing::asset_dir() / "sample_manifest.json");
    CHECK(r.scorecards.size() == testing::bundled().corpus.size());
    CHECK(r.total_chains == m.total_chains);
    CHECK(manifest_discrepancies(testing::bundled().corpus, m, &r).empty());
    CHECK(r.scorecards.front().incident_id == "rosat-1998");
    CHECK(r.scorecards.front().chain_count == 432);
    CHECK_FALSE(reference_discrepancies(testing::bundled().corpus, r.total_chains).empty());
}

TEST_CASE("empty corpus gives no scorecards") {
    const auto& a = testing::bundled();
    const PipelineResult r = run_pipeline({}, a.catalog, a.graph, a.rules, a.scores);
    CHECK(r.scorecards.empty());
    CHECK(r.total_chains == 0);
}

TEST_CASE("pipeline errors carry the incident id") {
    const auto& a = testing::bundled();
    PipelineConfig cfg;
    cfg.cap = 10;
    try {
        run_pipeline(a.corpus, a.catalog, a.graph, a.rules, a.scores, cfg);
        FAIL("expected CapExceededError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CapExceeded);
        CHECK(e.incident_id() == "rosat-1998");
        CHECK(format_diagnostic(e).rfind("error\tkind=", 0) == 0);
    }
}

TEST_CASE("determinism: repeated runs export identical bytes") {
    const PipelineResult a = bundled_pipeline();
    const PipelineResult b = bundled_pipeline();
    CHECK(export_chains_jsonl(a.chain_sets) == export_chains_jsonl(b.chain_sets));
    CHECK(scorecards_to_tsv(a.scorecards) == scorecards_to_tsv(b.scorecards));
}

TEST_CASE("scorecards recompute from exported chains") {
    const PipelineResult r = bundled_pipeline();
    const auto sets = import_chains_jsonl(export_chains_jsonl(r.chain_sets));
    REQUIRE(sets.size() == r.scorecards.size());
    const ScoreTable& scores = testing::bundled().scores;
    for (std::size_t n = 0; n < sets.size(); ++n) {
        const Scorecard& want = r.scorecards[n];
        const Scorecard got = make_scorecard(sets[n], scores);
        CHECK(got.incident_id == want.incident_id);
        CHECK(got.chain_count == want.chain_count);
        CHECK(got.alpha_ta_plus == want.alpha_ta_plus);
        CHECK(got.alpha_te_plus == want.alpha_te_plus);
        CHECK(got.alpha_ta_minus == want.alpha_ta_minus);
        CHECK(got.alpha_te_minus == want.alpha_te_minus);
        CHECK(got.likelihood == want.likelihood);
        CHECK(got.best_chain == want.best_chain);
        CHECK(got.fallback_ids == want.fallback_ids);
    }
}

TEST_CASE("scorecard consequence comes from the record") {
    const PipelineResult r = bundled_pipeline();
    for (const auto& c : r.scorecards) {
        const IncidentRecord& rec = testing::record(c.incident_id);
        CHECK(c.consequence.has_value() == rec.consequence.has_value());
        if (c.incident_id == "rosat-1998") CHECK(c.consequence->space == 1.0);
    }
}

TEST_CASE("yearly series") {
    const auto rows = yearly_series({card("turla", 2007, 0.8), card("rosat", 1998, 0.9)}, "alpha_ta_plus");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].year == 1998);
    CHECK(rows[0].value == 0.9);
    CHECK(rows[1].year == 2007);
    CHECK(rows[1].value == 0.8);
    CHECK(yearly_series({card("x", 2000, 0.1)}, "likelihood").size() == 1);
    CHECK_THROWS_AS(yearly_series({card("x", 2000, 0.1)}, "colour"), ValidationError);
    CHECK_THROWS_AS(yearly_series({}, "likelihood"), ValidationError);

    const PipelineResult r = bundled_pipeline();
    for (auto field : kSeriesFields) {
        const auto s = yearly_series(r.scorecards, field);
        CHECK(s.size() == r.scorecards.size());
        for (std::size_t n = 1; n < s.size(); ++n)
            CHECK(std::tie(s[n - 1].year, s[n - 1].incident_id) < std::tie(s[n].year, s[n].incident_id));
    }
    const std::string tsv = series_to_tsv(yearly_series(r.scorecards, "consequence_link"), "consequence_link");
    CHECK(tsv.find("\tNA\n") != std::string::npos);
}

TEST_CASE("scorecard TSV layout") {
    const PipelineResult r = bundled_pipeline();
    const std::string tsv = scorecards_to_tsv(r.scorecards);
    CHECK(tsv.rfind("incident_id\tattack_type\tyear\t", 0) == 0);
    CHECK(tsv.find("rosat-1998\tSeizureOfControl\t1998\t432\t[2,3,4,6,3]\t0\t0.9\t") != std::string::npos);
    std::size_t lines = 0;
    for (char ch : tsv) lines += ch == '\n';
    CHECK(lines == r.scorecards.size() + 1);
}

TEST_CASE("config files resolve paths relative to themselves") {
    AssetPaths paths;
    PipelineConfig cfg;
    apply_config_file(testing::asset_dir() / "usckc_config.json", paths, cfg);
    CHECK(paths.catalog == testing::asset_dir() / "catalog.json");
    CHECK(cfg.cap == kDefaultChainCap);
    const auto bad = testing::temp_file("bad_config.json", R"({"catalgo": "x.json"})");
    CHECK_THROWS_AS(apply_config_file(bad, paths, cfg), ValidationError);
    const auto capped = testing::temp_file("cap_config.json", R"({"cap": 5})");
    apply_config_file(capped, paths, cfg);
    CHECK(cfg.cap == 5);
}

}  // TEST_SUITE
