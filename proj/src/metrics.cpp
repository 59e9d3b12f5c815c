#include "usckc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json_fields.hpp"
#include "usckc/error.hpp"

namespace usckc {

namespace {

void check_soph(double v, const std::string& what) {
    if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError(what + ": sophistication score must lie in [0,1]");
}

void check_likelihood(double v, const std::string& what) {
    if (!(v > 0.0 && v <= 1.0)) throw ValidationError(what + ": likelihood must lie in (0,1]");
}

template <class Map>
ScoreLookup lookup(const Map& m, std::string_view id, double fallback) {
    auto it = m.find(id);
    if (it == m.end()) return {fallback, true};
    return {it->second, false};
}

template <class Map>
json map_to_json(const Map& m) {
    json o = json::object();
    for (const auto& [k, v] : m) o[k] = v;
    return o;
}

}  // namespace

void ScoreTable::set_tactic_sophistication(const std::string& id, double v) {
    check_soph(v, "tactic " + id);
    tactic_soph_[id] = v;
}

void ScoreTable::set_technique_sophistication(const std::string& id, double v) {
    check_soph(v, "technique " + id);
    technique_soph_[id] = v;
}

void ScoreTable::set_technique_likelihood(const std::string& id, double v) {
    check_likelihood(v, "technique " + id);
    technique_likelihood_[id] = v;
}

void ScoreTable::set_defaults(const ScoreDefaults& d) {
    check_soph(d.tactic_sophistication, "defaults.tactic_sophistication");
    check_soph(d.technique_sophistication, "defaults.technique_sophistication");
    check_likelihood(d.technique_likelihood, "defaults.technique_likelihood");
    defaults_ = d;
}

ScoreLookup ScoreTable::tactic_sophistication(std::string_view id) const {
    return lookup(tactic_soph_, id, defaults_.tactic_sophistication);
}

ScoreLookup ScoreTable::technique_sophistication(std::string_view id) const {
    return lookup(technique_soph_, id, defaults_.technique_sophistication);
}

ScoreLookup ScoreTable::technique_likelihood(std::string_view id) const {
    return lookup(technique_likelihood_, id, defaults_.technique_likelihood);
}

ScoreTable ScoreTable::from_json(const json& doc, const TaxonomyCatalog* catalog) {
    using namespace detail;
    require_object(doc, "scores");
    ScoreTable t;
    ScoreDefaults d;
    if (auto it = doc.find("defaults"); it != doc.end()) {
        require_object(*it, "scores.defaults");
        if (it->contains("tactic_sophistication"))
            d.tactic_sophistication =
                require_number((*it)["tactic_sophistication"], "scores.defaults.tactic_sophistication");
        if (it->contains("technique_sophistication"))
            d.technique_sophistication = require_number((*it)["technique_sophistication"],
                                                        "scores.defaults.technique_sophistication");
        if (it->contains("technique_likelihood"))
            d.technique_likelihood =
                require_number((*it)["technique_likelihood"], "scores.defaults.technique_likelihood");
    }
    t.set_defaults(d);

    auto section = [&](const char* key, auto&& set) {
        auto it = doc.find(key);
        if (it == doc.end()) return;
        const std::string where = std::string("scores.") + key;
        require_object(*it, where);
        for (const auto& [id, v] : it->items()) set(id, require_number(v, where + "." + id));
    };
    section("tactic_sophistication", [&](const std::string& id, double v) {
        std::string key = id;
        if (catalog) {
            auto r = catalog->resolve_tactic(id);
            if (!r) schema_error("scores.tactic_sophistication", "unknown tactic '" + id + "'");
            key = *r;
        }
        t.set_tactic_sophistication(key, v);
    });
    section("technique_sophistication", [&](const std::string& id, double v) {
        if (catalog && !catalog->find_technique(id))
            schema_error("scores.technique_sophistication", "unknown technique '" + id + "'");
        t.set_technique_sophistication(id, v);
    });
    section("technique_likelihood", [&](const std::string& id, double v) {
        if (catalog && !catalog->find_technique(id))
            schema_error("scores.technique_likelihood", "unknown technique '" + id + "'");
        t.set_technique_likelihood(id, v);
    });
    return t;
}

json ScoreTable::to_json() const {
    return {{"defaults",
             {{"tactic_sophistication", defaults_.tactic_sophistication},
              {"technique_sophistication", defaults_.technique_sophistication},
              {"technique_likelihood", defaults_.technique_likelihood}}},
            {"tactic_sophistication", map_to_json(tactic_soph_)},
            {"technique_sophistication", map_to_json(technique_soph_)},
            {"technique_likelihood", map_to_json(technique_likelihood_)}};
}

ScoreTable load_scores(const std::filesystem::path& path, const TaxonomyCatalog* catalog) {
    return ScoreTable::from_json(load_json_file(path), catalog);
}

// ---------------------------------------------------------------------------

ChainSophistication chain_sophistication(const USCKC& chain, const ScoreTable& scores) {
    ChainSophistication out;
    bool first = true;
    for (const auto& s : chain.steps) {
        const ScoreLookup ta = scores.tactic_sophistication(s.tactic);
        const ScoreLookup te = scores.technique_sophistication(s.technique);
        if (ta.fallback) out.fallback_ids.insert(s.tactic);
        if (te.fallback) out.fallback_ids.insert(s.technique);
        if (first) {
            out.max_tactic = ta.value;
            out.max_technique = te.value;
            first = false;
        } else {
            out.max_tactic = std::max(out.max_tactic, ta.value);
            out.max_technique = std::max(out.max_technique, te.value);
        }
    }
    return out;
}

SophisticationSummary attack_sophistication(const std::vector<USCKC>& chains,
                                            const ScoreTable& scores) {
    if (chains.empty()) throw ValidationError("attack_sophistication: empty chain set");
    SophisticationSummary s;
    for (std::size_t n = 0; n < chains.size(); ++n) {
        ChainSophistication c = chain_sophistication(chains[n], scores);
        s.per_chain.emplace_back(c.max_tactic, c.max_technique);
        s.fallback_ids.insert(c.fallback_ids.begin(), c.fallback_ids.end());
        if (n == 0) {
            s.ta_plus = s.ta_minus = c.max_tactic;
            s.te_plus = s.te_minus = c.max_technique;
        } else {
            s.ta_plus = std::max(s.ta_plus, c.max_tactic);
            s.te_plus = std::max(s.te_plus, c.max_technique);
            s.ta_minus = std::min(s.ta_minus, c.max_tactic);
            s.te_minus = std::min(s.te_minus, c.max_technique);
        }
    }
    return s;
}

SophisticationSummary attack_sophistication(const ChainSet& chains, const ScoreTable& scores) {
    return attack_sophistication(chains.chains, scores);
}

double chain_likelihood(const USCKC& chain, const ScoreTable& scores) {
    if (chain.steps.empty()) throw ValidationError("chain_likelihood: empty chain");
    double m = scores.technique_likelihood(chain.steps.front().technique).value;
    for (const auto& s : chain.steps) m = std::min(m, scores.technique_likelihood(s.technique).value);
    return m;
}

AttackLikelihood attack_likelihood(const std::vector<USCKC>& chains, const ScoreTable& scores) {
    if (chains.empty()) throw ValidationError("attack_likelihood: empty chain set");
    AttackLikelihood best{chain_likelihood(chains.front(), scores), 0};
    for (std::size_t n = 1; n < chains.size(); ++n) {
        const double l = chain_likelihood(chains[n], scores);
        if (l > best.value) best = {l, n};
    }
    return best;
}

AttackLikelihood attack_likelihood(const ChainSet& chains, const ScoreTable& scores) {
    return attack_likelihood(chains.chains, scores);
}

// ---------------------------------------------------------------------------

ConsequenceAggregate aggregate_consequence(const ConsequenceVector& vec,
                                           const ConsequenceWeights& weights) {
    const auto& keys = consequence_subvector_keys();
    for (const auto& [key, w] : weights) {
        if (key == "link" || key.rfind("link.", 0) == 0 || is_link_class_key(key))
            throw ValidationError("refusing to aggregate link CIA triple '" + key +
                                  "': confidentiality, integrity and availability are reported "
                                  "separately");
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ValidationError("unknown consequence sub-vector '" + key + "'");
    }
    ConsequenceAggregate out;
    for (const auto& key : keys) {
        const std::vector<double> v = vec.sub_vector(key);
        std::vector<double> w(v.size(), 1.0 / static_cast<double>(v.size()));
        if (auto it = weights.find(key); it != weights.end()) {
            if (it->second.size() != v.size())
                throw ValidationError("weights for '" + key + "' have " +
                                      std::to_string(it->second.size()) + " entries, expected " +
                                      std::to_string(v.size()));
            double sum = 0.0;
            for (double x : it->second) {
                if (!(x >= 0.0)) throw ValidationError("weights for '" + key + "' must be nonnegative");
                sum += x;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw ValidationError("weights for '" + key + "' sum to " + format_number(sum) +
                                      ", expected 1");
            w = it->second;
        }
        double acc = 0.0;
        for (std::size_t n = 0; n < v.size(); ++n) acc += w[n] * v[n];
        out.subvectors[key] = acc;
    }
    out.link = vec.link;
    return out;
}

std::string_view to_string(ConsequenceBand b) {
    switch (b) {
        case ConsequenceBand::Superficial: return "Superficial";
        case ConsequenceBand::Temporary: return "Temporary";
        case ConsequenceBand::NonRecoverable: return "NonRecoverable";
    }
    return "?";
}

ConsequenceBand classify_consequence_band(double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw ValidationError("consequence score " + format_number(score) + " outside [0,1]");
    if (score <= 0.3) return ConsequenceBand::Superficial;
    if (score >= 0.8) return ConsequenceBand::NonRecoverable;
    return ConsequenceBand::Temporary;
}

SegmentConsequence segment_peaks(const ConsequenceVector& vec) {
    auto peak = [](std::initializer_list<std::vector<double>> parts) {
        double m = 0.0;
        for (const auto& p : parts)
            for (double x : p) m = std::max(m, x);
        return m;
    };
    SegmentConsequence s;
    s.space = peak({vec.sub_vector("space.bus"), vec.sub_vector("space.payload")});
    s.ground = peak({vec.sub_vector("ground.ground_station"), vec.sub_vector("ground.mission_control"),
                     vec.sub_vector("ground.data_processing"),
                     vec.sub_vector("ground.remote_terminal")});
    s.user = peak({vec.sub_vector("user")});
    for (const auto& [k, t] : vec.link)
        for (double x : t) s.link = std::max(s.link, x);
    return s;
}

}  // namespace usckc
