#include <set>
#include <unordered_set>

#include "doctest.h"
#include "support.hpp"
#include "usckc/error.hpp"

using namespace usckc;
using testing::make_step;

namespace {

const PlausibilityFilter kAllPass = [](const USCKC&) { return PlausibilityResult{}; };

IncidentRecord annotated(std::vector<std::tuple<Phase, std::string, std::string>> steps) {
    IncidentRecord r;
    r.incident_id = "annotated";
    r.sources = {"unit test"};
    std::size_t i = 0;
    for (auto& [phase, tactic, technique] : steps) {
        ObservedStep s;
        s.index = ++i;
        s.technique = technique;
        s.phase_hint = phase;
        s.tactic_hint = testing::bundled().catalog.resolve_tactic(tactic);
        s.activity_hint = testing::bundled().catalog.activity_category_of(tactic);
        r.observed_steps.push_back(s);
    }
    return r;
}

PlausibilityResult check(const USCKC& c) {
    return plausibility_check(c, testing::bundled().graph, testing::bundled().catalog);
}

bool has_code(const PlausibilityResult& r, const std::string& code) {
    for (const auto& v : r.violations)
        if (v.rfind(code + ":", 0) == 0) return true;
    return false;
}

ExtrapolationRule tag_rule(const std::string& id, const std::string& tag,
                           std::vector<std::string> requires_tags = {}) {
    ExtrapolationRule r;
    r.rule_id = id;
    r.trigger = {RuleTrigger::Kind::Tag, tag};
    r.phase = Phase::In;
    r.tactic = "TA0043";
    r.activity = ActivityCategory::InfoDiscovery;
    r.candidate_techniques = {"T1595"};
    r.terminal = requires_tags.empty();
    r.requires_tags = std::move(requires_tags);
    return r;
}

}  // namespace

TEST_SUITE("killchain") {

TEST_CASE("construct_usckc keeps fully annotated steps in order") {
    const auto rec = annotated({{Phase::In, "Reconnaissance", "T1598"},
                                {Phase::In, "Initial Access", "T1078.003"},
                                {Phase::Out, "Impact", "IMP-0002"}});
    const USCKC c = construct_usckc(rec, testing::bundled().graph, testing::bundled().catalog);
    REQUIRE(c.steps.size() == 3);
    CHECK(testing::techniques_of(c) == std::vector<std::string>{"T1598", "T1078.003", "IMP-0002"});
    CHECK(c.steps[0].activity == ActivityCategory::InfoDiscovery);
    CHECK(c.steps[1].activity == ActivityCategory::Milestone);
    CHECK(c.steps[2].phase == Phase::Out);
    for (const auto& s : c.steps) CHECK(s.provenance == Provenance::Observed);

    const auto one = annotated({{Phase::Out, "Impact", "IMP-0002"}});
    CHECK(construct_usckc(one, testing::bundled().graph, testing::bundled().catalog).steps.size() == 1);
}

TEST_CASE("construct_usckc rejects inconsistent and missing hints") {
    auto rec = annotated({{Phase::In, "Reconnaissance", "T1598"},
                          {Phase::Out, "Impact", "IMP-0002"}});
    rec.observed_steps[1].activity_hint = ActivityCategory::Milestone;
    CHECK_THROWS_WITH_AS(construct_usckc(rec, testing::bundled().graph, testing::bundled().catalog),
                         doctest::Contains("inconsistent"), ValidationError);

    auto partial = annotated({{Phase::Out, "Impact", "IMP-0002"}});
    partial.observed_steps[0].phase_hint.reset();
    CHECK_THROWS_WITH_AS(construct_usckc(partial, testing::bundled().graph, testing::bundled().catalog),
                         doctest::Contains("extrapolate_chains"), ValidationError);

    auto backwards = annotated({{Phase::Out, "Impact", "IMP-0002"},
                                {Phase::In, "Initial Access", "T1078.003"},
                                {Phase::In, "Impact", "IMP-0005"}});
    CHECK_THROWS_AS(construct_usckc(backwards, testing::bundled().graph, testing::bundled().catalog),
                    ValidationError);
}

TEST_CASE("construct equals extrapolate on a record needing no extrapolation") {
    const auto rec = annotated({{Phase::In, "Reconnaissance", "T1598"},
                                {Phase::In, "Initial Access", "T1078.003"},
                                {Phase::Out, "Impact", "IMP-0002"}});
    const auto& a = testing::bundled();
    const USCKC built = construct_usckc(rec, a.graph, a.catalog);
    const ChainSet set = extrapolate_chains(rec, a.graph, a.catalog, a.rules);
    REQUIRE(set.chains.size() == 1);
    CHECK(set.branch_profile.empty());
    CHECK(set.total_steps == 3);
    CHECK(set.chains.front() == built);
}

TEST_CASE("RoSat extrapolation yields 432 chains over 14 steps") {
    const auto& a = testing::bundled();
    const ChainSet set = extrapolate_chains(testing::record("rosat-1998"), a.graph, a.catalog, a.rules);
    CHECK(set.observed_count == 9);
    CHECK(set.total_steps == 14);
    CHECK(set.branch_profile == std::vector<std::size_t>{2, 3, 4, 6, 3});
    CHECK(set.chains.size() == 432);
    CHECK(set.pruned_count == 0);

    // The reference chain comes first; the variant with
    // T1590 and T1098 is also present.
    CHECK(testing::techniques_of(set.chains.front()) == testing::techniques_of(testing::rosat_example_chain()));
    bool companion = false;
    for (const auto& c : set.chains) {
        const auto t = testing::techniques_of(c);
        companion = companion || (t[4] == "T1590" && t[7] == "T1590.004" && t[8] == "T1210" &&
                                  t[9] == "T1078.001" && t[12] == "T1098");
    }
    CHECK(companion);
}

TEST_CASE("the RoSat example chain passes plausibility") {
    const USCKC c = testing::rosat_example_chain();
    const PlausibilityResult r = check(c);
    CHECK(r.pass);
    CHECK(r.violations.empty());
    const auto inst = phase_instances(c.steps);
    REQUIRE(inst.size() == 5);
    const std::vector<std::size_t> sizes = {4, 3, 2, 3, 2};
    for (std::size_t k = 0; k < 5; ++k) CHECK(inst[k].end - inst[k].begin == sizes[k]);
    CHECK(check(c) == r);  // pure
}

TEST_CASE("plausibility violations") {
    SUBCASE("Out before In") {
        USCKC c;
        c.steps = {make_step(Phase::Out, "TA0002", "EX-0012.08"),
                   make_step(Phase::In, "TA0001", "T1078.003"),
                   make_step(Phase::In, "TA0040", "IMP-0002")};
        CHECK(has_code(check(c), "phase-order"));
    }
    SUBCASE("ends with Enabling") {
        USCKC c;
        c.steps = {make_step(Phase::In, "TA0001", "T1078.003"),
                   make_step(Phase::Out, "TA0040", "IMP-0002"),
                   make_step(Phase::Out, "TA0002", "EX-0012.08")};
        const auto r = check(c);
        CHECK_FALSE(r.pass);
        CHECK(has_code(r, "missing-objective"));
    }
    SUBCASE("Through count contradicts the graph") {
        USCKC c = testing::rosat_example_chain();
        // Merge the two Through phases into one by dropping the second Milestone.
        c.steps.erase(c.steps.begin() + 6);
        const auto r = check(c);
        CHECK(has_code(r, "through-count"));
        USCKC undeclared = c;
        undeclared.entry_node.reset();
        CHECK_FALSE(has_code(check(undeclared), "through-count"));
    }
    SUBCASE("second Out phase without continuation") {
        USCKC c = testing::rosat_example_chain();
        c.steps.back().continuation = false;
        CHECK(has_code(check(c), "phase-order"));
    }
    SUBCASE("duplicate adjacent steps") {
        USCKC c;
        c.steps = {make_step(Phase::Out, "TA0002", "EX-0012.08"),
                   make_step(Phase::Out, "TA0002", "EX-0012.08"),
                   make_step(Phase::Out, "TA0040", "IMP-0002")};
        CHECK(has_code(check(c), "duplicate-adjacent"));
    }
    SUBCASE("catalog mismatch") {
        USCKC c;
        c.steps = {make_step(Phase::Out, "TA0040", "IMP-0002")};
        c.steps[0].activity = ActivityCategory::Milestone;
        CHECK(has_code(check(c), "inconsistent-step"));
    }
    SUBCASE("empty chain") {
        CHECK_FALSE(check(USCKC{}).pass);
    }
}

TEST_CASE("two slots of sizes 2 and 3 give six chains in nested-loop order") {
    const auto& a = testing::bundled();
    IncidentRecord rec = annotated({{Phase::Out, "Impact", "IMP-0002"}});
    rec.observed_steps[0].prerequisites = {"x"};
    ExtrapolationRule r1 = tag_rule("A", "x", {"y"});
    r1.phase = Phase::In;
    r1.tactic = "TA0001";
    r1.activity = ActivityCategory::Milestone;
    r1.candidate_techniques = {"T1078.003", "T1566", "T1190"};
    ExtrapolationRule r2 = tag_rule("B", "y");
    r2.candidate_techniques = {"T1595", "T1590"};
    ExtrapolationOptions opts;
    opts.filter = kAllPass;
    const ChainSet set = extrapolate_chains(rec, a.graph, a.catalog, {r1, r2}, opts);
    CHECK(set.branch_profile == std::vector<std::size_t>{2, 3});
    std::vector<std::vector<std::string>> oracle;
    for (const auto& x : r2.candidate_techniques)
        for (const auto& y : r1.candidate_techniques) oracle.push_back({x, y, "IMP-0002"});
    REQUIRE(set.chains.size() == 6);
    for (std::size_t n = 0; n < 6; ++n) CHECK(testing::techniques_of(set.chains[n]) == oracle[n]);
    CHECK(set.chains[0].steps[0].origin == OriginIndex{1, -1});
    CHECK(set.chains[0].steps[1].origin == OriginIndex{1, 0});
    CHECK(set.chains[0].steps[2].origin == OriginIndex{1, 1});
    CHECK(set.chains[0].steps[0].rule_id == "B");
}

TEST_CASE("random synthetic records: chain count and order match a nested-loop oracle") {
    const auto& a = testing::bundled();
    std::mt19937_64 rng(9001);
    for (int trial = 0; trial < 300; ++trial) {
        const testing::SyntheticCase sc = testing::synthetic_case(rng, a.catalog);
        INFO("trial " << trial);
        ExtrapolationOptions opts;
        opts.filter = kAllPass;
        opts.elide = false;
        const ChainSet set = extrapolate_chains(sc.record, a.graph, a.catalog, sc.rules, opts);
        CHECK(set.branch_profile == sc.branch_profile);
        std::size_t product = 1;
        for (auto k : sc.branch_profile) product *= k;
        REQUIRE(set.chains.size() == product);

        // Odometer order with the last slot fastest.
        std::vector<std::size_t> idx(sc.slots.size(), 0);
        for (std::size_t n = 0; n < product; ++n) {
            std::vector<std::string> want;
            for (std::size_t s = 0; s < sc.slots.size(); ++s) want.push_back(sc.slots[s][idx[s]]);
            CHECK(testing::techniques_of(set.chains[n]) == want);
            for (std::size_t s = sc.slots.size(); s-- > 0;) {
                if (++idx[s] < sc.slots[s].size()) break;
                idx[s] = 0;
            }
        }

        const ChainSet real = extrapolate_chains(sc.record, a.graph, a.catalog, sc.rules);
        CHECK(real.chains.size() <= product);
        CHECK(real.chains.size() + real.pruned_count == product);
    }
}

TEST_CASE("observed steps survive in order and extrapolated steps trace to one rule") {
    const auto& a = testing::bundled();
    for (const auto& rec : a.corpus) {
        const ChainSet set = extrapolate_chains(rec, a.graph, a.catalog, a.rules);
        std::set<std::string> rule_ids;
        for (const auto& r : a.rules) rule_ids.insert(r.rule_id);
        for (const auto& c : set.chains) {
            std::vector<std::string> observed;
            for (const auto& s : c.steps) {
                REQUIRE(s.origin);
                if (s.provenance == Provenance::Observed) {
                    observed.push_back(s.technique);
                    CHECK(s.origin->j == 1);
                } else {
                    CHECK(s.origin->j <= 0);
                    CHECK(rule_ids.count(s.rule_id) == 1);
                    CHECK(rec.observed_steps.at(s.origin->i - 1).index == s.origin->i);
                }
            }
            std::vector<std::string> want;
            for (const auto& o : rec.observed_steps) want.push_back(o.technique);
            CHECK(observed == want);
        }
    }
}

TEST_CASE("elidable steps are dropped when their technique already appears") {
    const auto& a = testing::bundled();
    const ChainSet set = extrapolate_chains(testing::record("synthetic-dos-01"), a.graph, a.catalog, a.rules);
    CHECK(set.elided_steps == 1);
    std::size_t shorter = 0;
    for (const auto& c : set.chains) shorter += c.steps.size() < set.total_steps ? 1 : 0;
    CHECK(shorter == 1);

    ExtrapolationOptions keep;
    keep.elide = false;
    keep.filter = kAllPass;
    const ChainSet full = extrapolate_chains(testing::record("synthetic-dos-01"), a.graph, a.catalog, a.rules, keep);
    for (const auto& c : full.chains) CHECK(c.steps.size() == full.total_steps);
}

TEST_CASE("cap is enforced before enumeration") {
    const auto& a = testing::bundled();
    ExtrapolationOptions opts;
    opts.cap = 431;
    try {
        extrapolate_chains(testing::record("rosat-1998"), a.graph, a.catalog, a.rules, opts);
        FAIL("expected CapExceededError");
    } catch (const CapExceededError& e) {
        CHECK(e.would_be_count() == 432);
        CHECK(e.cap() == 431);
        CHECK_FALSE(e.saturated());
        CHECK(e.branch_profile() == std::vector<std::size_t>{2, 3, 4, 6, 3});
        CHECK(exit_code_for(e.kind()) == 2);
    }
    opts.cap = 432;
    CHECK(extrapolate_chains(testing::record("rosat-1998"), a.graph, a.catalog, a.rules, opts).chains.size() == 432);
}

TEST_CASE("rule walk errors") {
    const auto& a = testing::bundled();
    IncidentRecord rec = annotated({{Phase::Out, "Impact", "IMP-0002"}});
    rec.observed_steps[0].prerequisites = {"t0"};

    SUBCASE("uncovered tag") {
        CHECK_THROWS_WITH_AS(extrapolate_chains(rec, a.graph, a.catalog, {}), doctest::Contains("no rule covers"),
                             ValidationError);
    }
    SUBCASE("cycle") {
        const Rulebase rules = {tag_rule("A", "t0", {"t1"}), tag_rule("B", "t1", {"t0"})};
        CHECK_THROWS_WITH_AS(extrapolate_chains(rec, a.graph, a.catalog, rules), doctest::Contains("rule cycle"),
                             ValidationError);
    }
    SUBCASE("depth limit") {
        Rulebase rules;
        for (std::size_t d = 0; d <= kMaxRuleDepth; ++d)
            rules.push_back(tag_rule("R" + std::to_string(d), "t" + std::to_string(d),
                                     d == kMaxRuleDepth ? std::vector<std::string>{}
                                                        : std::vector<std::string>{"t" + std::to_string(d + 1)}));
        CHECK_THROWS_WITH_AS(plan_extrapolation(rec, a.catalog, rules), doctest::Contains("depth"),
                             ValidationError);
        rules.pop_back();
        rules.back().terminal = true;
        rules.back().requires_tags.clear();
        CHECK(plan_extrapolation(rec, a.catalog, rules).slots.size() == kMaxRuleDepth + 1);
    }
}

TEST_CASE("technique and tactic triggers") {
    const auto& a = testing::bundled();
    IncidentRecord rec = annotated({{Phase::Out, "Impact", "IMP-0002"}});
    ExtrapolationRule by_tech = tag_rule("T", "");
    by_tech.trigger = {RuleTrigger::Kind::Technique, "IMP-0002"};
    CHECK(plan_extrapolation(rec, a.catalog, {by_tech}).branch_profile.size() == 1);
    ExtrapolationRule by_tactic = tag_rule("U", "");
    by_tactic.trigger = {RuleTrigger::Kind::Tactic, "TA0040"};
    CHECK(plan_extrapolation(rec, a.catalog, {by_tactic}).branch_profile.size() == 1);
    by_tactic.trigger.value = "TA0010";
    CHECK(plan_extrapolation(rec, a.catalog, {by_tactic}).branch_profile.empty());
}

TEST_CASE("missing hints are inferred when unambiguous") {
    const auto& a = testing::bundled();
    IncidentRecord rec = annotated({{Phase::In, "Initial Access", "T1190"},
                                    {Phase::Out, "Impact", "IMP-0002"}});
    for (auto& s : rec.observed_steps) {
        s.phase_hint.reset();
        s.activity_hint.reset();
        s.tactic_hint.reset();
    }
    const ExtrapolationPlan plan = plan_extrapolation(rec, a.catalog, a.rules);
    REQUIRE(plan.slots.size() == 2);
    CHECK(plan.slots[0].phase == Phase::In);
    CHECK(plan.slots[0].tactic == "TA0001");
    CHECK(plan.slots[1].phase == Phase::Out);

    rec.observed_steps[0].technique = "T1078.003";  // spans several tactics
    CHECK_THROWS_WITH_AS(plan_extrapolation(rec, a.catalog, a.rules), doctest::Contains("tactic hint"),
                         ValidationError);
}

TEST_CASE("rulebase validation and round trip") {
    const auto& a = testing::bundled();
    CHECK(rules_from_json(rules_to_json(a.rules), a.catalog) == a.rules);
    const json good = rules_to_json({tag_rule("A", "x")});
    CHECK_NOTHROW(rules_from_json(good, a.catalog));

    auto broken = [&](auto edit) {
        json doc = good;
        edit(doc["rules"][0]);
        return doc;
    };
    CHECK_THROWS_AS(rules_from_json(broken([](json& r) { r["emits"]["candidates"] = {"IMP-0002"}; }), a.catalog),
                    ValidationError);
    CHECK_THROWS_AS(rules_from_json(broken([](json& r) { r["emits"]["candidates"] = json::array(); }), a.catalog),
                    ValidationError);
    CHECK_THROWS_AS(rules_from_json(broken([](json& r) { r["emits"]["activity"] = "Objective"; }), a.catalog),
                    ValidationError);
    CHECK_THROWS_AS(rules_from_json(broken([](json& r) { r["requires"] = {"y"}; r["terminal"] = true; }), a.catalog),
                    ValidationError);
    json dup = good;
    dup["rules"].push_back(dup["rules"][0]);
    CHECK_THROWS_AS(rules_from_json(dup, a.catalog), ValidationError);
}

TEST_CASE("dedupe_chains") {
    const USCKC c1 = testing::rosat_example_chain();
    USCKC c2 = c1;
    c2.steps[4].technique = "T1590";
    CHECK(dedupe_chains({c1, c1, c2}) == std::vector<USCKC>{c1, c2});
    CHECK(dedupe_chains({c2, c1}) == std::vector<USCKC>{c2, c1});

    // Hash-set oracle over technique/phase sequences.
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<USCKC> pool;
        const std::size_t distinct = testing::uniform(rng, 1, 5);
        for (std::size_t k = 0; k < distinct; ++k) pool.push_back(testing::random_chain(rng, 3));
        std::vector<USCKC> input;
        const std::size_t n = testing::uniform(rng, 0, 12);
        for (std::size_t k = 0; k < n; ++k) input.push_back(pool[testing::uniform(rng, 0, pool.size() - 1)]);
        std::unordered_set<std::string> seen;
        std::vector<USCKC> want;
        for (const auto& c : input) {
            std::string key;
            for (const auto& s : c.steps)
                key += std::string(to_string(s.phase)) + "|" + std::string(to_string(s.activity)) + "|" +
                       s.tactic + "|" + s.technique + ";";
            if (seen.insert(key).second) want.push_back(c);
        }
        const auto got = dedupe_chains(input);
        CHECK(got.size() == seen.size());
        CHECK(got == want);
    }
}

TEST_CASE("chain JSONL export round trip") {
    const auto& a = testing::bundled();
    std::vector<ChainSet> sets;
    for (const auto& rec : a.corpus) sets.push_back(extrapolate_chains(rec, a.graph, a.catalog, a.rules));
    const std::string text = export_chains_jsonl(sets);
    const auto back = import_chains_jsonl(text);
    REQUIRE(back.size() == sets.size());
    for (std::size_t n = 0; n < sets.size(); ++n) {
        CHECK(back[n].incident_id == sets[n].incident_id);
        CHECK(back[n].chains == sets[n].chains);
    }
    CHECK(export_chains_jsonl(back) == text);
    CHECK_THROWS_AS(import_chains_jsonl("{\"incident_id\": 3}\n"), ValidationError);
}

}  // TEST_SUITE
