#pragma once

// Shared fixtures: bundled assets loaded once, temp files, seeded RNG helpers.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <unistd.h>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "usckc/corpus.hpp"
#include "usckc/io.hpp"
#include "usckc/killchain.hpp"
#include "usckc/metrics.hpp"
#include "usckc/report.hpp"
#include "usckc/sysmodel.hpp"
#include "usckc/taxonomy.hpp"

namespace testing {

inline std::filesystem::path asset_dir() { return USCKC_TEST_ASSET_DIR; }

inline const usckc::Assets& bundled() {
    static const usckc::Assets a = usckc::load_assets(usckc::AssetPaths::in_directory(asset_dir()));
    return a;
}

inline const usckc::IncidentRecord& record(const std::string& id) {
    const usckc::IncidentRecord* r = usckc::find_record(bundled().corpus, id);
    if (!r) throw std::runtime_error("fixture record missing: " + id);
    return *r;
}

/// Writes text to a fresh file under the system temp directory.
inline std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    static std::uint64_t counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("usckc_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    auto p = dir / (std::to_string(counter++) + "_" + name);
    usckc::write_text_file(p, text);
    return p;
}

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Score on a coarse grid so ties are frequent.
inline double grid_score(std::mt19937_64& rng, bool positive) {
    const std::size_t k = uniform(rng, positive ? 1 : 0, 20);
    return static_cast<double>(k) / 20.0;
}

/// A structurally arbitrary chain over a small id alphabet. Metrics only read
/// tactic and technique ids, so no catalog consistency is needed.
inline usckc::USCKC random_chain(std::mt19937_64& rng, std::size_t max_steps) {
    usckc::USCKC c;
    c.incident_id = "random";
    const std::size_t n = uniform(rng, 1, max_steps);
    for (std::size_t k = 0; k < n; ++k) {
        usckc::AttackStep s;
        s.tactic = "TA" + std::to_string(uniform(rng, 0, 9));
        s.technique = "TE" + std::to_string(uniform(rng, 0, 14));
        c.steps.push_back(s);
    }
    return c;
}

/// Scores for the alphabet used by random_chain; some ids stay unscored.
inline usckc::ScoreTable random_scores(std::mt19937_64& rng) {
    usckc::ScoreTable t;
    usckc::ScoreDefaults d;
    d.tactic_sophistication = grid_score(rng, false);
    d.technique_sophistication = grid_score(rng, false);
    d.technique_likelihood = grid_score(rng, true);
    t.set_defaults(d);
    for (int i = 0; i < 10; ++i)
        if (uniform(rng, 0, 3)) t.set_tactic_sophistication("TA" + std::to_string(i), grid_score(rng, false));
    for (int i = 0; i < 15; ++i) {
        if (uniform(rng, 0, 3))
            t.set_technique_sophistication("TE" + std::to_string(i), grid_score(rng, false));
        if (uniform(rng, 0, 3))
            t.set_technique_likelihood("TE" + std::to_string(i), grid_score(rng, true));
    }
    return t;
}


inline usckc::AttackStep make_step(usckc::Phase phase, const std::string& tactic,
                                   const std::string& technique,
                                   usckc::Provenance prov = usckc::Provenance::Observed) {
    usckc::AttackStep s;
    s.phase = phase;
    s.tactic = tactic;
    s.activity = bundled().catalog.activity_category_of(tactic);
    s.technique = technique;
    s.provenance = prov;
    return s;
}

/// Reference 14-step RoSat chain: In x4, Through x3, Through x2, Out x3, Out x2.
inline usckc::USCKC rosat_example_chain() {
    using usckc::Phase;
    constexpr auto X = usckc::Provenance::Extrapolated;
    usckc::USCKC c;
    c.incident_id = "rosat-1998";
    c.entry_node = "rt.software_access";
    c.objective_node = "bus.command_and_data_handling";
    c.steps = {
        make_step(Phase::In, "TA0043", "T1598"),
        make_step(Phase::In, "TA0043", "T1595.003"),
        make_step(Phase::In, "TA0001", "T1078.003"),
        make_step(Phase::In, "TA0001", "PER-0003"),
        make_step(Phase::Through, "TA0043", "T1595", X),
        make_step(Phase::Through, "TA0005", "T1211"),
        make_step(Phase::Through, "TA0008", "T1021"),
        make_step(Phase::Through, "TA0043", "T1590.004", X),
        make_step(Phase::Through, "TA0008", "T1210", X),
        make_step(Phase::Out, "TA0004", "T1078.001", X),
        make_step(Phase::Out, "TA0002", "EX-0012.08"),
        make_step(Phase::Out, "TA0040", "IMP-0002"),
        make_step(Phase::Out, "TA0003", "T1543", X),
        make_step(Phase::Out, "TA0040", "IMP-0005"),
    };
    c.steps.back().continuation = true;
    return c;
}

/// Technique ids of a chain, in order.
inline std::vector<std::string> techniques_of(const usckc::USCKC& c) {
    std::vector<std::string> out;
    for (const auto& s : c.steps) out.push_back(s.technique);
    return out;
}

/// A record whose observed steps pull in chains of extrapolated steps through
/// private tags, together with the rulebase that serves those tags.
struct SyntheticCase {
    usckc::IncidentRecord record;
    usckc::Rulebase rules;
    /// Candidate lists of every slot in chain order; observed slots hold one id.
    std::vector<std::vector<std::string>> slots;
    std::vector<bool> extrapolated;  // per slot
    std::vector<std::size_t> branch_profile;
};

/// At most `max_extrapolated` extrapolated steps with at most `max_k`
/// candidates each, spread over 1..3 observed steps.
inline SyntheticCase synthetic_case(std::mt19937_64& rng, const usckc::TaxonomyCatalog& catalog,
                                    std::size_t max_extrapolated = 5, std::size_t max_k = 4) {
    using namespace usckc;
    std::vector<std::string> tactic_ids;
    for (const auto& [id, t] : catalog.tactics())
        if (!catalog.techniques_for_tactic(id).empty()) tactic_ids.push_back(id);
    auto pick_tactic = [&](std::size_t min_size) {
        for (;;) {
            const std::string& id = tactic_ids[uniform(rng, 0, tactic_ids.size() - 1)];
            if (catalog.techniques_for_tactic(id).size() >= min_size) return id;
        }
    };
    auto pick_phase = [&] { return static_cast<Phase>(uniform(rng, 0, 2)); };

    SyntheticCase sc;
    sc.record.incident_id = "synthetic";
    sc.record.sources = {"generated"};
    const std::size_t observed = uniform(rng, 1, 3);
    std::size_t budget = uniform(rng, 0, max_extrapolated);
    std::size_t tag_counter = 0;
    for (std::size_t i = 1; i <= observed; ++i) {
        const std::size_t depth = i == observed ? budget : uniform(rng, 0, budget);
        budget -= depth;

        ObservedStep obs;
        obs.index = i;
        const std::string tactic = pick_tactic(1);
        const auto pool = catalog.techniques_for_tactic(tactic);
        obs.technique = *std::next(pool.begin(), static_cast<long>(uniform(rng, 0, pool.size() - 1)));
        obs.tactic_hint = tactic;
        obs.activity_hint = catalog.activity_category_of(tactic);
        obs.phase_hint = pick_phase();

        std::vector<std::vector<std::string>> prefix;  // nearest first
        for (std::size_t d = 0; d < depth; ++d) {
            const std::string this_tag = "t" + std::to_string(tag_counter++);
            if (d == 0) obs.prerequisites.push_back(this_tag);
            else {
                sc.rules.back().terminal = false;
                sc.rules.back().requires_tags = {this_tag};
            }

            const std::size_t k = uniform(rng, 1, max_k);
            const std::string rt = pick_tactic(k);
            const auto members = catalog.techniques_for_tactic(rt);
            std::vector<std::string> all(members.begin(), members.end());
            std::shuffle(all.begin(), all.end(), rng);
            all.resize(k);

            ExtrapolationRule r;
            r.rule_id = "S" + this_tag;
            r.trigger = {RuleTrigger::Kind::Tag, this_tag};
            r.phase = pick_phase();
            r.tactic = rt;
            r.activity = catalog.activity_category_of(rt);
            r.candidate_techniques = all;
            r.terminal = true;
            sc.rules.push_back(r);
            prefix.push_back(all);
        }
        for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
            sc.slots.push_back(*it);
            sc.extrapolated.push_back(true);
            sc.branch_profile.push_back(it->size());
        }
        sc.slots.push_back({obs.technique});
        sc.extrapolated.push_back(false);
        sc.record.observed_steps.push_back(obs);
    }
    return sc;
}

}  // namespace testing
