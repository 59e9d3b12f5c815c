#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usckc/corpus.hpp"
#include "usckc/io.hpp"
#include "usckc/sysmodel.hpp"
#include "usckc/taxonomy.hpp"

namespace usckc {

enum class Provenance { Observed, Extrapolated };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// Bookkeeping position (i, j): i is the 1-based observed step the entry
/// belongs to, j = 1 for the observed step itself and 0, -1, ... for the
/// steps extrapolated in front of it (nearest first).
struct OriginIndex {
    std::size_t i = 0;
    int j = 1;
    friend bool operator==(const OriginIndex&, const OriginIndex&) = default;
};

struct AttackStep {
    Phase phase = Phase::In;
    ActivityCategory activity = ActivityCategory::Enabling;
    std::string tactic;  // tactic id
    std::string technique;
    Provenance provenance = Provenance::Observed;
    std::optional<OriginIndex> origin;
    std::string rule_id;        // emitting rule for extrapolated steps
    bool continuation = false;  // may open a further Out phase

    /// Equality on (phase, activity, tactic, technique).
    bool same_content(const AttackStep& o) const {
        return phase == o.phase && activity == o.activity && tactic == o.tactic &&
               technique == o.technique;
    }

    friend bool operator==(const AttackStep&, const AttackStep&) = default;
};

struct USCKC {
    std::string incident_id;
    std::vector<AttackStep> steps;
    std::optional<std::string> entry_node;  // copied from the record for check (d)
    std::optional<std::string> objective_node;

    friend bool operator==(const USCKC&, const USCKC&) = default;
};

struct RuleTrigger {
    enum class Kind { Tag, Technique, Tactic };
    Kind kind = Kind::Tag;
    std::string value;  // tag, technique id, or tactic id

    friend bool operator==(const RuleTrigger&, const RuleTrigger&) = default;
};

struct ExtrapolationRule {
    std::string rule_id;
    RuleTrigger trigger;
    Phase phase = Phase::In;
    ActivityCategory activity = ActivityCategory::Enabling;
    std::string tactic;                          // tactic id
    std::vector<std::string> candidate_techniques;  // ordered, nonempty
    bool terminal = true;
    std::vector<std::string> requires_tags;  // tags carried by the emitted step
    bool elidable = false;
    bool continuation = false;

    friend bool operator==(const ExtrapolationRule&, const ExtrapolationRule&) = default;
};

using Rulebase = std::vector<ExtrapolationRule>;

/// Validates each rule against the catalog. File order is match order.
Rulebase rules_from_json(const json& doc, const TaxonomyCatalog& catalog);
json rules_to_json(const Rulebase& rules);
Rulebase load_rules(const std::filesystem::path& path, const TaxonomyCatalog& catalog);

struct PlausibilityResult {
    bool pass = true;
    std::vector<std::string> violations;  // "code: detail", in check order

    friend bool operator==(const PlausibilityResult&, const PlausibilityResult&) = default;
};

/// Checks, each reported under its own code:
///   inconsistent-step  a step disagrees with the catalog partition
///   phase-order        phase instances never go backwards; a second Out phase
///                      needs a continuation step
///   goal-not-last      a same-phase run holding a Milestone/Objective ends with one
///   missing-objective  the chain ends with an Objective step
///   through-count      Through phases match through_phase_count(entry, objective)
///                      when both are declared
///   duplicate-adjacent no two identical neighbouring steps
PlausibilityResult plausibility_check(const USCKC& chain, const SegmentGraph& graph,
                                      const TaxonomyCatalog& catalog);

/// Phase instances as (phase, first step, one past last step). A new instance
/// starts at a phase change or where a non-goal step follows a goal step.
struct PhaseInstance {
    Phase phase;
    std::size_t begin;
    std::size_t end;
};
std::vector<PhaseInstance> phase_instances(const std::vector<AttackStep>& steps);

/// Full-information construction. Throws ValidationError when a hint is
/// missing, inconsistent, or the resulting chain fails plausibility.
USCKC construct_usckc(const IncidentRecord& record, const SegmentGraph& graph,
                      const TaxonomyCatalog& catalog);

/// One position in the chain template: either an observed step (one candidate)
/// or an extrapolated step with its candidate technique list.
struct ChainSlot {
    Phase phase = Phase::In;
    ActivityCategory activity = ActivityCategory::Enabling;
    std::string tactic;
    std::vector<std::string> candidates;
    Provenance provenance = Provenance::Observed;
    OriginIndex origin;
    std::string rule_id;
    bool elidable = false;
    bool continuation = false;
};

struct ExtrapolationPlan {
    std::vector<ChainSlot> slots;         // chain order
    std::vector<std::size_t> branch_profile;  // k of each extrapolated slot, chain order
    std::uint64_t combinations = 1;       // product of branch_profile, saturating
    bool saturated = false;               // product overflowed 64 bits
    std::size_t observed_count = 0;
};

/// Runs the backward rule walk for every observed step without enumerating.
ExtrapolationPlan plan_extrapolation(const IncidentRecord& record, const TaxonomyCatalog& catalog,
                                     const Rulebase& rules);

using PlausibilityFilter = std::function<PlausibilityResult(const USCKC&)>;

inline constexpr std::uint64_t kDefaultChainCap = 100000;
inline constexpr std::size_t kMaxRuleDepth = 16;

struct ExtrapolationOptions {
    std::uint64_t cap = kDefaultChainCap;
    /// Replaces the plausibility check when set (an all-pass filter gives the
    /// raw Cartesian product).
    PlausibilityFilter filter;
    bool elide = true;
};

struct ChainSet {
    std::string incident_id;
    std::vector<USCKC> chains;  // lexicographic order of candidate indices
    std::vector<std::size_t> branch_profile;
    std::size_t observed_count = 0;  // n'
    std::size_t total_steps = 0;     // s, before elision
    std::size_t pruned_count = 0;
    std::size_t elided_steps = 0;  // summed over surviving chains
    std::uint64_t combinations = 0;
};

/// Throws CapExceededError when the product of candidate counts exceeds the cap.
ChainSet extrapolate_chains(const IncidentRecord& record, const SegmentGraph& graph,
                            const TaxonomyCatalog& catalog, const Rulebase& rules,
                            const ExtrapolationOptions& options = {});

/// Drops chains whose (phase, activity, tactic, technique) sequence repeats an
/// earlier one. Stable.
std::vector<USCKC> dedupe_chains(const std::vector<USCKC>& chains);

/// One JSON object per chain: incident_id, chain_index and a steps array
/// holding step_index, phase, activity, tactic, technique, provenance.
json chain_to_json(const USCKC& chain, std::size_t chain_index);
USCKC chain_from_json(const json& doc, std::size_t* chain_index = nullptr);
std::string export_chains_jsonl(const std::vector<ChainSet>& sets);
/// Groups chains by incident_id in first-seen order.
std::vector<ChainSet> import_chains_jsonl(std::string_view text, const std::string& label = "chains");

}  // namespace usckc
