#include "usckc/killchain.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "json_fields.hpp"
#include "usckc/error.hpp"

namespace usckc {

std::string_view to_string(Provenance p) {
    return p == Provenance::Observed ? "Observed" : "Extrapolated";
}

Provenance parse_provenance(std::string_view s) {
    if (s == "Observed") return Provenance::Observed;
    if (s == "Extrapolated") return Provenance::Extrapolated;
    throw ValidationError("unknown provenance '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Rulebase

Rulebase rules_from_json(const json& doc, const TaxonomyCatalog& catalog) {
    using namespace detail;
    require_object(doc, "rules");
    const json& arr = require_array(doc, "rules", "rules");
    Rulebase out;
    std::set<std::string> ids;
    for (std::size_t n = 0; n < arr.size(); ++n) {
        std::string where = "rules[" + std::to_string(n) + "]";
        const json& rj = arr[n];
        require_object(rj, where);
        ExtrapolationRule r;
        r.rule_id = require_string(rj, "id", where);
        where += " (id=" + r.rule_id + ")";
        if (!ids.insert(r.rule_id).second) schema_error(where, "duplicate rule id");

        const json& tj = require_field(rj, "trigger", where);
        require_object(tj, where + " trigger");
        if (tj.size() != 1)
            schema_error(where, "trigger must hold exactly one of 'tag', 'technique', 'tactic'");
        if (tj.contains("tag")) {
            r.trigger = {RuleTrigger::Kind::Tag, require_string(tj, "tag", where)};
        } else if (tj.contains("technique")) {
            r.trigger = {RuleTrigger::Kind::Technique, require_string(tj, "technique", where)};
            if (!catalog.find_technique(r.trigger.value))
                schema_error(where, "trigger names unknown technique '" + r.trigger.value + "'");
        } else if (tj.contains("tactic")) {
            const std::string t = require_string(tj, "tactic", where);
            auto id = catalog.resolve_tactic(t);
            if (!id) schema_error(where, "trigger names unknown tactic '" + t + "'");
            r.trigger = {RuleTrigger::Kind::Tactic, *id};
        } else {
            schema_error(where, "trigger must hold exactly one of 'tag', 'technique', 'tactic'");
        }

        const json& ej = require_field(rj, "emits", where);
        require_object(ej, where + " emits");
        try {
            r.phase = parse_phase(require_string(ej, "phase", where));
            r.activity = parse_activity_category(require_string(ej, "activity", where));
        } catch (const ValidationError& e) {
            if (e.message().rfind(where, 0) == 0) throw;
            schema_error(where, e.message());
        }
        const std::string tactic = require_string(ej, "tactic", where);
        auto tid = catalog.resolve_tactic(tactic);
        if (!tid) schema_error(where, "emits unknown tactic '" + tactic + "'");
        r.tactic = *tid;
        if (catalog.activity_category_of(r.tactic) != r.activity)
            schema_error(where, "activity " + std::string(to_string(r.activity)) +
                                    " does not match tactic " + r.tactic + " (" +
                                    std::string(to_string(catalog.activity_category_of(r.tactic))) +
                                    ")");
        r.candidate_techniques = string_list(ej, "candidates", where, true);
        if (r.candidate_techniques.empty()) schema_error(where, "candidates must be nonempty");
        std::set<std::string> seen;
        for (const auto& c : r.candidate_techniques) {
            if (!catalog.find_technique(c))
                schema_error(where, "unknown candidate technique '" + c + "'");
            if (!catalog.technique_in_tactic(c, r.tactic))
                schema_error(where, "candidate '" + c + "' does not belong to tactic " + r.tactic);
            if (!seen.insert(c).second) schema_error(where, "duplicate candidate '" + c + "'");
        }

        r.terminal = optional_bool(rj, "terminal", where, true);
        r.requires_tags = string_list(rj, "requires", where, false);
        if (r.terminal && !r.requires_tags.empty())
            schema_error(where, "a terminal rule cannot require further steps");
        r.elidable = optional_bool(rj, "elidable", where);
        r.continuation = optional_bool(rj, "continuation", where);
        out.push_back(std::move(r));
    }
    return out;
}

json rules_to_json(const Rulebase& rules) {
    json arr = json::array();
    for (const auto& r : rules) {
        json t = json::object();
        switch (r.trigger.kind) {
            case RuleTrigger::Kind::Tag: t["tag"] = r.trigger.value; break;
            case RuleTrigger::Kind::Technique: t["technique"] = r.trigger.value; break;
            case RuleTrigger::Kind::Tactic: t["tactic"] = r.trigger.value; break;
        }
        json rj = {{"id", r.rule_id},
                   {"trigger", std::move(t)},
                   {"emits",
                    {{"phase", to_string(r.phase)},
                     {"activity", to_string(r.activity)},
                     {"tactic", r.tactic},
                     {"candidates", r.candidate_techniques}}},
                   {"terminal", r.terminal}};
        if (!r.requires_tags.empty()) rj["requires"] = r.requires_tags;
        if (r.elidable) rj["elidable"] = true;
        if (r.continuation) rj["continuation"] = true;
        arr.push_back(std::move(rj));
    }
    return {{"rules", std::move(arr)}};
}

Rulebase load_rules(const std::filesystem::path& path, const TaxonomyCatalog& catalog) {
    return rules_from_json(load_json_file(path), catalog);
}

// ---------------------------------------------------------------------------
// Plausibility

std::vector<PhaseInstance> phase_instances(const std::vector<AttackStep>& steps) {
    std::vector<PhaseInstance> out;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const bool split = k == 0 || steps[k].phase != steps[k - 1].phase ||
                           (is_goal(steps[k - 1].activity) && !is_goal(steps[k].activity));
        if (split) out.push_back({steps[k].phase, k, k + 1});
        else out.back().end = k + 1;
    }
    return out;
}

PlausibilityResult plausibility_check(const USCKC& chain, const SegmentGraph& graph,
                                      const TaxonomyCatalog& catalog) {
    PlausibilityResult res;
    auto fail = [&](std::string code, std::string detail) {
        res.pass = false;
        res.violations.push_back(std::move(code) + ": " + std::move(detail));
    };
    const auto& steps = chain.steps;
    if (steps.empty()) {
        fail("missing-objective", "chain is empty");
        return res;
    }
    // Structural precondition, reported rather than thrown.
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& s = steps[k];
        auto tid = catalog.resolve_tactic(s.tactic);
        if (!tid || catalog.activity_category_of(*tid) != s.activity ||
            !catalog.technique_in_tactic(s.technique, *tid))
            fail("inconsistent-step", "step " + std::to_string(k + 1) + " (" + s.technique +
                                          ") disagrees with the catalog");
    }
    const auto instances = phase_instances(steps);

    // (a)
    for (std::size_t n = 1; n < instances.size(); ++n) {
        const PhaseInstance& prev = instances[n - 1];
        const PhaseInstance& cur = instances[n];
        if (cur.phase < prev.phase) {
            fail("phase-order", "step " + std::to_string(cur.begin + 1) + " (" +
                                    std::string(to_string(cur.phase)) + ") follows a " +
                                    std::string(to_string(prev.phase)) + " phase");
        } else if (cur.phase == Phase::Out && prev.phase == Phase::Out) {
            bool flagged = false;
            for (std::size_t k = cur.begin; k < cur.end; ++k) flagged = flagged || steps[k].continuation;
            if (!flagged)
                fail("phase-order", "second Out phase at step " + std::to_string(cur.begin + 1) +
                                        " without a continuation step");
        }
    }

    // (b) maximal same-phase runs
    for (std::size_t b = 0; b < steps.size();) {
        std::size_t e = b;
        bool has_goal = false;
        while (e < steps.size() && steps[e].phase == steps[b].phase) {
            has_goal = has_goal || is_goal(steps[e].activity);
            ++e;
        }
        if (has_goal && !is_goal(steps[e - 1].activity))
            fail("goal-not-last", std::string(to_string(steps[b].phase)) + " phase ending at step " +
                                      std::to_string(e) + " ends with " +
                                      std::string(to_string(steps[e - 1].activity)) +
                                      " after a goal step");
        b = e;
    }

    // (c)
    if (steps.back().activity != ActivityCategory::Objective) {
        const bool any = std::any_of(steps.begin(), steps.end(), [](const AttackStep& s) {
            return s.activity == ActivityCategory::Objective;
        });
        fail("missing-objective", any ? "final step is " +
                                            std::string(to_string(steps.back().activity)) +
                                            ", not Objective"
                                      : "chain has no Objective step");
    }

    // (d)
    if (chain.entry_node && chain.objective_node) {
        std::size_t through = 0;
        for (const auto& inst : instances) through += inst.phase == Phase::Through ? 1 : 0;
        try {
            const std::size_t want =
                through_phase_count(graph, *chain.entry_node, *chain.objective_node);
            if (want != through)
                fail("through-count", "chain has " + std::to_string(through) +
                                          " Through phases, graph requires " +
                                          std::to_string(want));
        } catch (const ValidationError& e) {
            fail("through-count", e.message());
        }
    }

    // (e)
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (steps[k].same_content(steps[k - 1]))
            fail("duplicate-adjacent", "steps " + std::to_string(k) + " and " +
                                           std::to_string(k + 1) + " are identical (" +
                                           steps[k].technique + ")");
    return res;
}

// ---------------------------------------------------------------------------
// Observed step resolution

namespace {

struct ResolvedObserved {
    Phase phase;
    ActivityCategory activity;
    std::string tactic;
};

ResolvedObserved resolve_observed(const ObservedStep& s, const TaxonomyCatalog& catalog,
                                  std::optional<Phase> previous_phase) {
    const std::string where = "observed step " + std::to_string(s.index) + " (" + s.technique + ")";
    const TechniqueRef& te = catalog.technique(s.technique);
    ResolvedObserved r;
    if (s.tactic_hint) {
        r.tactic = *s.tactic_hint;
    } else if (te.tactic_ids.size() == 1) {
        r.tactic = *te.tactic_ids.begin();
    } else {
        throw ValidationError(where + ": technique spans " + std::to_string(te.tactic_ids.size()) +
                              " tactics; a tactic hint is required");
    }
    if (!catalog.technique_in_tactic(s.technique, r.tactic))
        throw ValidationError(where + ": inconsistent hint, technique does not belong to tactic " +
                              r.tactic);
    r.activity = catalog.activity_category_of(r.tactic);
    if (s.activity_hint && *s.activity_hint != r.activity)
        throw ValidationError(where + ": inconsistent hint, activity " +
                              std::string(to_string(*s.activity_hint)) + " but tactic " + r.tactic +
                              " is " + std::string(to_string(r.activity)));
    if (s.phase_hint) r.phase = *s.phase_hint;
    else if (r.activity == ActivityCategory::Objective) r.phase = Phase::Out;
    else r.phase = previous_phase.value_or(Phase::In);
    return r;
}

struct Probe {
    std::string tactic;
    std::vector<std::string> candidates;
    std::vector<std::string> tags;
};

bool matches(const ExtrapolationRule& r, const Probe& p) {
    switch (r.trigger.kind) {
        case RuleTrigger::Kind::Tag:
            return std::find(p.tags.begin(), p.tags.end(), r.trigger.value) != p.tags.end();
        case RuleTrigger::Kind::Technique:
            return p.candidates.size() == 1 && p.candidates.front() == r.trigger.value;
        case RuleTrigger::Kind::Tactic: return p.tactic == r.trigger.value;
    }
    return false;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

}  // namespace

USCKC construct_usckc(const IncidentRecord& record, const SegmentGraph& graph,
                      const TaxonomyCatalog& catalog) {
    USCKC chain;
    chain.incident_id = record.incident_id;
    chain.entry_node = record.entry_node;
    chain.objective_node = record.objective_node;
    for (const auto& s : record.observed_steps) {
        if (!s.fully_annotated())
            throw ValidationError("observed step " + std::to_string(s.index) +
                                  " lacks a phase, activity or tactic hint; use "
                                  "extrapolate_chains for incomplete records");
        ResolvedObserved r = resolve_observed(s, catalog, std::nullopt);
        AttackStep step;
        step.phase = r.phase;
        step.activity = r.activity;
        step.tactic = r.tactic;
        step.technique = s.technique;
        step.provenance = Provenance::Observed;
        step.origin = OriginIndex{s.index, 1};
        step.continuation = s.continuation;
        chain.steps.push_back(std::move(step));
    }
    PlausibilityResult pr = plausibility_check(chain, graph, catalog);
    if (!pr.pass) {
        std::string msg = "constructed chain is implausible:";
        for (const auto& v : pr.violations) msg += " [" + v + "]";
        throw ValidationError(msg);
    }
    return chain;
}

ExtrapolationPlan plan_extrapolation(const IncidentRecord& record, const TaxonomyCatalog& catalog,
                                     const Rulebase& rules) {
    if (record.observed_steps.empty())
        throw ValidationError("record has no observed steps");
    ExtrapolationPlan plan;
    plan.observed_count = record.observed_steps.size();
    std::optional<Phase> previous;
    for (const auto& s : record.observed_steps) {
        ResolvedObserved r = resolve_observed(s, catalog, previous);
        previous = r.phase;

        std::vector<ChainSlot> prefix;  // nearest-first
        Probe probe{r.tactic, {s.technique}, s.prerequisites};
        std::set<std::string> fired;
        int j = 0;
        for (;;) {
            const ExtrapolationRule* rule = nullptr;
            for (const auto& cand : rules)
                if (matches(cand, probe)) {
                    rule = &cand;
                    break;
                }
            if (!rule) {
                if (!probe.tags.empty())
                    throw ValidationError("observed step " + std::to_string(s.index) +
                                          ": no rule covers prerequisite tag(s) [" +
                                          join(probe.tags) + "]");
                break;
            }
            if (!fired.insert(rule->rule_id).second)
                throw ValidationError("rule cycle: rule " + rule->rule_id +
                                      " re-fires on its own emission (observed step " +
                                      std::to_string(s.index) + ")");
            if (prefix.size() >= kMaxRuleDepth)
                throw ValidationError("observed step " + std::to_string(s.index) +
                                      ": extrapolation depth exceeds " +
                                      std::to_string(kMaxRuleDepth));
            ChainSlot slot;
            slot.phase = rule->phase;
            slot.activity = rule->activity;
            slot.tactic = rule->tactic;
            slot.candidates = rule->candidate_techniques;
            slot.provenance = Provenance::Extrapolated;
            slot.origin = {s.index, j--};
            slot.rule_id = rule->rule_id;
            slot.elidable = rule->elidable;
            slot.continuation = rule->continuation;
            prefix.push_back(slot);
            if (rule->terminal) break;
            probe = Probe{rule->tactic, rule->candidate_techniques, rule->requires_tags};
        }
        for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) plan.slots.push_back(*it);

        ChainSlot obs;
        obs.phase = r.phase;
        obs.activity = r.activity;
        obs.tactic = r.tactic;
        obs.candidates = {s.technique};
        obs.provenance = Provenance::Observed;
        obs.origin = {s.index, 1};
        obs.continuation = s.continuation;
        plan.slots.push_back(std::move(obs));
    }

    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    for (const auto& slot : plan.slots) {
        if (slot.provenance != Provenance::Extrapolated) continue;
        const std::uint64_t k = slot.candidates.size();
        plan.branch_profile.push_back(slot.candidates.size());
        if (plan.saturated || plan.combinations > kMax / k) {
            plan.saturated = true;
            plan.combinations = kMax;
        } else {
            plan.combinations *= k;
        }
    }
    return plan;
}

ChainSet extrapolate_chains(const IncidentRecord& record, const SegmentGraph& graph,
                            const TaxonomyCatalog& catalog, const Rulebase& rules,
                            const ExtrapolationOptions& options) {
    ExtrapolationPlan plan = plan_extrapolation(record, catalog, rules);
    if (plan.saturated || plan.combinations > options.cap)
        throw CapExceededError(plan.combinations, plan.saturated, options.cap, plan.branch_profile);

    ChainSet out;
    out.incident_id = record.incident_id;
    out.branch_profile = plan.branch_profile;
    out.observed_count = plan.observed_count;
    out.total_steps = plan.slots.size();
    out.combinations = plan.combinations;

    const auto& slots = plan.slots;
    std::vector<std::size_t> pick(slots.size(), 0);
    for (;;) {
        USCKC chain;
        chain.incident_id = record.incident_id;
        chain.entry_node = record.entry_node;
        chain.objective_node = record.objective_node;
        std::size_t elided = 0;
        for (std::size_t n = 0; n < slots.size(); ++n) {
            const ChainSlot& sl = slots[n];
            const std::string& te = sl.candidates[pick[n]];
            if (options.elide && sl.elidable) {
                const bool already = std::any_of(chain.steps.begin(), chain.steps.end(),
                                                 [&](const AttackStep& a) { return a.technique == te; });
                if (already) {
                    ++elided;
                    continue;
                }
            }
            AttackStep st;
            st.phase = sl.phase;
            st.activity = sl.activity;
            st.tactic = sl.tactic;
            st.technique = te;
            st.provenance = sl.provenance;
            st.origin = sl.origin;
            st.rule_id = sl.rule_id;
            st.continuation = sl.continuation;
            chain.steps.push_back(std::move(st));
        }
        const PlausibilityResult pr = options.filter ? options.filter(chain)
                                                     : plausibility_check(chain, graph, catalog);
        if (pr.pass) {
            out.elided_steps += elided;
            out.chains.push_back(std::move(chain));
        } else {
            ++out.pruned_count;
        }

        // odometer, last slot fastest
        std::size_t n = slots.size();
        while (n > 0) {
            --n;
            if (++pick[n] < slots[n].candidates.size()) break;
            pick[n] = 0;
            if (n == 0) return out;
        }
        if (slots.empty()) return out;
    }
}

std::vector<USCKC> dedupe_chains(const std::vector<USCKC>& chains) {
    using Key = std::vector<std::tuple<Phase, ActivityCategory, std::string, std::string>>;
    std::set<Key> seen;
    std::vector<USCKC> out;
    for (const auto& c : chains) {
        Key k;
        for (const auto& s : c.steps) k.emplace_back(s.phase, s.activity, s.tactic, s.technique);
        if (seen.insert(std::move(k)).second) out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export

json chain_to_json(const USCKC& chain, std::size_t chain_index) {
    json doc = json::object();
    doc["incident_id"] = chain.incident_id;
    doc["chain_index"] = chain_index;
    if (chain.entry_node) doc["entry_node"] = *chain.entry_node;
    if (chain.objective_node) doc["objective_node"] = *chain.objective_node;
    json steps = json::array();
    for (std::size_t k = 0; k < chain.steps.size(); ++k) {
        const AttackStep& s = chain.steps[k];
        json sj = {{"step_index", k + 1},
                   {"phase", to_string(s.phase)},
                   {"activity", to_string(s.activity)},
                   {"tactic", s.tactic},
                   {"technique", s.technique},
                   {"provenance", to_string(s.provenance)}};
        if (s.origin) sj["origin"] = {s.origin->i, s.origin->j};
        if (!s.rule_id.empty()) sj["rule"] = s.rule_id;
        if (s.continuation) sj["continuation"] = true;
        steps.push_back(std::move(sj));
    }
    doc["steps"] = std::move(steps);
    return doc;
}

USCKC chain_from_json(const json& doc, std::size_t* chain_index) {
    using namespace detail;
    require_object(doc, "chain");
    USCKC c;
    c.incident_id = require_string(doc, "incident_id", "chain");
    const std::string where = "chain (incident_id=" + c.incident_id + ")";
    if (chain_index) {
        const json& ci = require_field(doc, "chain_index", where);
        if (!ci.is_number_unsigned()) schema_error(where, "chain_index must be a nonnegative integer");
        *chain_index = ci.get<std::size_t>();
    }
    c.entry_node = optional_string(doc, "entry_node", where);
    c.objective_node = optional_string(doc, "objective_node", where);
    const json& steps = require_array(doc, "steps", where);
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const std::string sw = where + " steps[" + std::to_string(k) + "]";
        const json& sj = steps[k];
        require_object(sj, sw);
        AttackStep s;
        try {
            s.phase = parse_phase(require_string(sj, "phase", sw));
            s.activity = parse_activity_category(require_string(sj, "activity", sw));
            s.provenance = parse_provenance(require_string(sj, "provenance", sw));
        } catch (const ValidationError& e) {
            if (e.message().rfind(sw, 0) == 0) throw;
            schema_error(sw, e.message());
        }
        s.tactic = require_string(sj, "tactic", sw);
        s.technique = require_string(sj, "technique", sw);
        if (auto it = sj.find("origin"); it != sj.end()) {
            if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_unsigned() ||
                !(*it)[1].is_number_integer())
                schema_error(sw, "origin must be [i, j]");
            s.origin = OriginIndex{(*it)[0].get<std::size_t>(), (*it)[1].get<int>()};
        }
        s.rule_id = optional_string(sj, "rule", sw).value_or("");
        s.continuation = optional_bool(sj, "continuation", sw);
        c.steps.push_back(std::move(s));
    }
    return c;
}

std::string export_chains_jsonl(const std::vector<ChainSet>& sets) {
    std::string out;
    for (const auto& set : sets)
        for (std::size_t n = 0; n < set.chains.size(); ++n) {
            out += chain_to_json(set.chains[n], n).dump();
            out += '\n';
        }
    return out;
}

std::vector<ChainSet> import_chains_jsonl(std::string_view text, const std::string& label) {
    std::vector<ChainSet> sets;
    std::map<std::string, std::size_t> where_of;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(label + ":" + std::to_string(line_no) + ": " + e.what());
        }
        USCKC c = chain_from_json(doc);
        auto [it, fresh] = where_of.emplace(c.incident_id, sets.size());
        if (fresh) {
            sets.emplace_back();
            sets.back().incident_id = c.incident_id;
        }
        sets[it->second].chains.push_back(std::move(c));
    }
    return sets;
}

}  // namespace usckc
