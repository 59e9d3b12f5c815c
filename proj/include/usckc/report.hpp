#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "usckc/corpus.hpp"
#include "usckc/killchain.hpp"
#include "usckc/metrics.hpp"
#include "usckc/sysmodel.hpp"
#include "usckc/taxonomy.hpp"

namespace usckc {

/// USCKC_ASSET_DIR when set, otherwise the assets directory of the source tree.
std::filesystem::path default_asset_dir();

struct AssetPaths {
    std::filesystem::path catalog;
    std::filesystem::path graph;
    std::filesystem::path rules;
    std::filesystem::path scores;
    std::filesystem::path corpus;
    std::filesystem::path manifest;

    /// Bundled file names under `dir`.
    static AssetPaths in_directory(const std::filesystem::path& dir);
};

struct PipelineConfig {
    std::uint64_t cap = kDefaultChainCap;
    ConsequenceWeights weights;
};

/// Config file: asset paths (relative to the config file) plus optional
/// "cap" and "weights". Absent keys leave the current values alone.
void apply_config_file(const std::filesystem::path& path, AssetPaths& paths, PipelineConfig& config);

struct Assets {
    TaxonomyCatalog catalog;
    SegmentGraph graph;
    Rulebase rules;
    ScoreTable scores;
    std::vector<IncidentRecord> corpus;
};

/// Loads everything except the manifest. Any path left empty is skipped.
Assets load_assets(const AssetPaths& paths);

struct Scorecard {
    std::string incident_id;
    std::optional<AttackType> attack_type;
    std::optional<int> year;
    std::size_t chain_count = 0;
    std::vector<std::size_t> branch_profile;
    std::size_t pruned_count = 0;
    double alpha_ta_plus = 0.0;
    double alpha_te_plus = 0.0;
    double alpha_ta_minus = 0.0;
    double alpha_te_minus = 0.0;
    double likelihood = 0.0;
    std::size_t best_chain = 0;
    std::optional<SegmentConsequence> consequence;  // only when the record carries one
    std::set<std::string> fallback_ids;
};

/// Metrics for one incident. `record` supplies type, year and consequence.
Scorecard make_scorecard(const ChainSet& chains, const ScoreTable& scores,
                         const IncidentRecord* record = nullptr);

struct PipelineResult {
    std::vector<Scorecard> scorecards;
    std::vector<ChainSet> chain_sets;
    std::size_t total_chains = 0;
};

/// One scorecard per record, in corpus order. Errors are tagged with the
/// offending incident_id.
PipelineResult run_pipeline(const std::vector<IncidentRecord>& corpus,
                            const TaxonomyCatalog& catalog, const SegmentGraph& graph,
                            const Rulebase& rules, const ScoreTable& scores,
                            const PipelineConfig& config = {});

std::string scorecards_to_tsv(const std::vector<Scorecard>& cards);

inline constexpr std::array<std::string_view, 7> kSeriesFields = {
    "alpha_ta_plus",      "alpha_te_plus",   "likelihood",        "consequence_space",
    "consequence_ground", "consequence_user", "consequence_link",
};

struct SeriesRow {
    int year = 0;
    std::string incident_id;
    std::optional<AttackType> attack_type;
    std::optional<double> value;  // empty when the record has no consequence
};

/// One row per scorecard sorted by (year, incident_id). Throws ValidationError
/// for an unknown field, an empty input, or a scorecard without a year.
std::vector<SeriesRow> yearly_series(const std::vector<Scorecard>& cards, std::string_view field);
std::string series_to_tsv(const std::vector<SeriesRow>& rows, std::string_view field);

/// Differences between a corpus and its manifest; empty when they agree.
std::vector<std::string> manifest_discrepancies(const std::vector<IncidentRecord>& corpus,
                                                const CorpusManifest& manifest,
                                                const PipelineResult* result = nullptr);

/// Differences against the reference 108-incident counts; empty when they agree.
std::vector<std::string> reference_discrepancies(const std::vector<IncidentRecord>& corpus,
                                                 std::size_t total_chains);

}  // namespace usckc
