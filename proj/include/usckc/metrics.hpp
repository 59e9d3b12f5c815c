#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usckc/consequence.hpp"
#include "usckc/io.hpp"
#include "usckc/killchain.hpp"
#include "usckc/taxonomy.hpp"

namespace usckc {

struct ScoreDefaults {
    double tactic_sophistication = 0.5;
    double technique_sophistication = 0.5;
    double technique_likelihood = 0.2;

    friend bool operator==(const ScoreDefaults&, const ScoreDefaults&) = default;
};

struct ScoreLookup {
    double value = 0.0;
    bool fallback = false;  // id was unscored, value is the default
};

/// Sophistication scores in [0,1], likelihoods in (0,1]. Unscored ids fall
/// back to the defaults and the lookup says so.
class ScoreTable {
public:
    ScoreTable() = default;

    /// Tactic keys may be names when a catalog is given; they are stored as ids.
    static ScoreTable from_json(const json& doc, const TaxonomyCatalog* catalog = nullptr);
    json to_json() const;

    void set_tactic_sophistication(const std::string& tactic_id, double v);
    void set_technique_sophistication(const std::string& technique_id, double v);
    void set_technique_likelihood(const std::string& technique_id, double v);
    void set_defaults(const ScoreDefaults& d);

    ScoreLookup tactic_sophistication(std::string_view tactic_id) const;
    ScoreLookup technique_sophistication(std::string_view technique_id) const;
    ScoreLookup technique_likelihood(std::string_view technique_id) const;

    const ScoreDefaults& defaults() const noexcept { return defaults_; }

    friend bool operator==(const ScoreTable&, const ScoreTable&) = default;

private:
    ScoreDefaults defaults_;
    std::map<std::string, double, std::less<>> tactic_soph_;
    std::map<std::string, double, std::less<>> technique_soph_;
    std::map<std::string, double, std::less<>> technique_likelihood_;
};

ScoreTable load_scores(const std::filesystem::path& path, const TaxonomyCatalog* catalog = nullptr);

struct ChainSophistication {
    double max_tactic = 0.0;
    double max_technique = 0.0;
    std::set<std::string> fallback_ids;  // tactic and technique ids scored by default
};

ChainSophistication chain_sophistication(const USCKC& chain, const ScoreTable& scores);

struct SophisticationSummary {
    double ta_plus = 0.0;   // highest: max over chains of max tactic score
    double te_plus = 0.0;   // highest: max over chains of max technique score
    double ta_minus = 0.0;  // lowest: min over chains of max tactic score
    double te_minus = 0.0;  // lowest: min over chains of max technique score
    std::vector<std::pair<double, double>> per_chain;
    std::set<std::string> fallback_ids;
};

/// Throws ValidationError for an empty chain set.
SophisticationSummary attack_sophistication(const std::vector<USCKC>& chains,
                                            const ScoreTable& scores);
SophisticationSummary attack_sophistication(const ChainSet& chains, const ScoreTable& scores);

/// Minimum technique likelihood along the chain.
double chain_likelihood(const USCKC& chain, const ScoreTable& scores);

struct AttackLikelihood {
    double value = 0.0;
    std::size_t best_index = 0;  // first chain attaining the maximum
};

/// Maximum chain likelihood. Throws ValidationError for an empty chain set.
AttackLikelihood attack_likelihood(const std::vector<USCKC>& chains, const ScoreTable& scores);
AttackLikelihood attack_likelihood(const ChainSet& chains, const ScoreTable& scores);

/// Weights per sub-vector key ("space.bus", ..., "user"). Missing keys use
/// uniform weights.
using ConsequenceWeights = std::map<std::string, std::vector<double>>;

struct ConsequenceAggregate {
    std::map<std::string, double> subvectors;  // weighted means, every sub-vector key
    std::map<std::string, CiaTriple> link;     // verbatim, never aggregated
};

/// Throws ValidationError on a weight-dimension mismatch, negative weights,
/// weights not summing to 1, an unknown key, or any request to aggregate a
/// link CIA triple.
ConsequenceAggregate aggregate_consequence(const ConsequenceVector& vec,
                                           const ConsequenceWeights& weights = {});

enum class ConsequenceBand { Superficial, Temporary, NonRecoverable };

std::string_view to_string(ConsequenceBand b);
/// <= 0.3 Superficial, strictly between Temporary, >= 0.8 NonRecoverable.
ConsequenceBand classify_consequence_band(double score);

/// Peak module score per segment and the largest CIA component over all links.
struct SegmentConsequence {
    double space = 0.0;
    double ground = 0.0;
    double user = 0.0;
    double link = 0.0;
};
SegmentConsequence segment_peaks(const ConsequenceVector& vec);

}  // namespace usckc
