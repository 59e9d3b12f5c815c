#include "usckc/corpus.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <set>

#include "json_fields.hpp"
#include "usckc/error.hpp"

namespace usckc {

namespace {

constexpr std::array<std::string_view, 13> kAttackTypeNames = {
    "HighPoweredLaser", "HighPoweredMicrowaves", "RFInterference",  "Eavesdropping",
    "Spoofing",         "UltrawidebandWeapon",   "EMPWeapon",       "Jamming",
    "SignalHijacking",  "SeizureOfControl",      "DataCorruptionInterception",
    "DenialOfService",  "SSADeception",
};

std::map<AttackType, std::size_t> zero_type_map() {
    std::map<AttackType, std::size_t> m;
    for (AttackType t : kAllAttackTypes) m[t] = 0;
    return m;
}

int parse_int(std::string_view s, const char* what, std::string_view whole) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ValidationError("malformed date '" + std::string(whole) + "': bad " + what);
    return v;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : d[m - 1];
}

void put_optional(json& obj, const char* key, const std::optional<std::string>& v) {
    if (v) obj[key] = *v;
}

}  // namespace

std::string_view to_string(AttackType t) { return kAttackTypeNames[static_cast<std::size_t>(t)]; }

AttackType parse_attack_type(std::string_view s) {
    for (std::size_t i = 0; i < kAttackTypeNames.size(); ++i)
        if (kAttackTypeNames[i] == s) return kAllAttackTypes[i];
    throw ValidationError("unknown attack_type '" + std::string(s) + "'");
}

IncidentDate IncidentDate::parse(std::string_view text) {
    IncidentDate d;
    const std::size_t n = text.size();
    if (!(n == 4 || n == 7 || n == 10) || (n >= 7 && text[4] != '-') || (n == 10 && text[7] != '-'))
        throw ValidationError("malformed date '" + std::string(text) +
                              "': expected YYYY, YYYY-MM or YYYY-MM-DD");
    d.year = parse_int(text.substr(0, 4), "year", text);
    if (n >= 7) {
        d.month = parse_int(text.substr(5, 2), "month", text);
        if (d.month < 1 || d.month > 12)
            throw ValidationError("malformed date '" + std::string(text) + "': month out of range");
        d.precision = Precision::Month;
    }
    if (n == 10) {
        d.day = parse_int(text.substr(8, 2), "day", text);
        if (d.day < 1 || d.day > days_in_month(d.year, d.month))
            throw ValidationError("malformed date '" + std::string(text) + "': day out of range");
        d.precision = Precision::Day;
    }
    return d;
}

std::string IncidentDate::to_string() const {
    char buf[16];
    switch (precision) {
        case Precision::Year: std::snprintf(buf, sizeof buf, "%04d", year); break;
        case Precision::Month: std::snprintf(buf, sizeof buf, "%04d-%02d", year, month); break;
        case Precision::Day:
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
            break;
    }
    return buf;
}

// ---------------------------------------------------------------------------

IncidentRecord IncidentRecord::from_json(const json& doc, const TaxonomyCatalog& catalog,
                                         const std::string& where_in) {
    using namespace detail;
    require_object(doc, where_in);
    IncidentRecord r;
    r.incident_id = require_string(doc, "incident_id", where_in);
    const std::string where = where_in + " (incident_id=" + r.incident_id + ")";

    try {
        r.attack_type = parse_attack_type(require_string(doc, "attack_type", where));
        r.date = IncidentDate::parse(require_string(doc, "date", where));
    } catch (const ValidationError& e) {
        if (e.message().rfind(where, 0) == 0) throw;
        schema_error(where, e.message());
    }

    if (auto it = doc.find("locations"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) schema_error(where, "field 'locations' must be an array");
        for (const auto& lj : *it) {
            require_object(lj, where + " locations[]");
            Location l;
            l.facility = optional_string(lj, "facility", where);
            l.city = optional_string(lj, "city", where);
            l.state = optional_string(lj, "state", where);
            l.country = optional_string(lj, "country", where);
            r.locations.push_back(std::move(l));
        }
    }
    r.description = optional_string(doc, "description", where).value_or("");
    if (auto it = doc.find("attacker"); it != doc.end() && !it->is_null()) {
        require_object(*it, where + " attacker");
        r.attacker.name = optional_string(*it, "name", where + " attacker");
        r.attacker.alias = optional_string(*it, "alias", where + " attacker");
        r.attacker.country = optional_string(*it, "country", where + " attacker");
    }
    if (auto it = doc.find("victim"); it != doc.end() && !it->is_null()) {
        require_object(*it, where + " victim");
        r.victim.name = optional_string(*it, "name", where + " victim");
        r.victim.industry = optional_string(*it, "industry", where + " victim");
    }
    r.sources = string_list(doc, "sources", where, true);
    if (r.sources.empty()) schema_error(where, "sources must be nonempty");
    r.entry_node = optional_string(doc, "entry_node", where);
    r.objective_node = optional_string(doc, "objective_node", where);
    if (auto it = doc.find("consequence"); it != doc.end() && !it->is_null())
        r.consequence = ConsequenceVector::from_json(*it, where + " consequence");

    const json& steps = require_array(doc, "observed_steps", where);
    if (steps.empty()) schema_error(where, "observed_steps must be nonempty");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string sw = where + " observed_steps[" + std::to_string(i) + "]";
        const json& sj = steps[i];
        require_object(sj, sw);
        ObservedStep s;
        const json& idx = require_field(sj, "index", sw);
        if (!idx.is_number_integer() || idx.get<std::int64_t>() != static_cast<std::int64_t>(i + 1))
            schema_error(sw, "index must be " + std::to_string(i + 1) +
                                 " (indices are consecutive from 1)");
        s.index = i + 1;
        s.technique = require_string(sj, "technique", sw);
        if (!catalog.find_technique(s.technique))
            schema_error(sw, "unresolvable technique id '" + s.technique + "'");
        try {
            if (auto p = optional_string(sj, "phase", sw)) s.phase_hint = parse_phase(*p);
            if (auto a = optional_string(sj, "activity", sw))
                s.activity_hint = parse_activity_category(*a);
        } catch (const ValidationError& e) {
            schema_error(sw, e.message());
        }
        if (auto t = optional_string(sj, "tactic", sw)) {
            auto id = catalog.resolve_tactic(*t);
            if (!id) schema_error(sw, "unknown tactic '" + *t + "'");
            s.tactic_hint = *id;
        }
        s.prerequisites = string_list(sj, "prerequisites", sw, false);
        s.note = optional_string(sj, "note", sw).value_or("");
        s.continuation = optional_bool(sj, "continuation", sw);
        r.observed_steps.push_back(std::move(s));
    }
    return r;
}

json IncidentRecord::to_json() const {
    json doc = json::object();
    doc["incident_id"] = incident_id;
    doc["attack_type"] = to_string(attack_type);
    doc["date"] = date.to_string();
    json locs = json::array();
    for (const auto& l : locations) {
        json lj = json::object();
        put_optional(lj, "facility", l.facility);
        put_optional(lj, "city", l.city);
        put_optional(lj, "state", l.state);
        put_optional(lj, "country", l.country);
        locs.push_back(std::move(lj));
    }
    doc["locations"] = std::move(locs);
    doc["description"] = description;
    json a = json::object();
    put_optional(a, "name", attacker.name);
    put_optional(a, "alias", attacker.alias);
    put_optional(a, "country", attacker.country);
    doc["attacker"] = std::move(a);
    json v = json::object();
    put_optional(v, "name", victim.name);
    put_optional(v, "industry", victim.industry);
    doc["victim"] = std::move(v);
    doc["sources"] = sources;
    if (entry_node) doc["entry_node"] = *entry_node;
    if (objective_node) doc["objective_node"] = *objective_node;
    json steps = json::array();
    for (const auto& s : observed_steps) {
        json sj = json::object();
        sj["index"] = s.index;
        sj["technique"] = s.technique;
        if (s.phase_hint) sj["phase"] = to_string(*s.phase_hint);
        if (s.activity_hint) sj["activity"] = to_string(*s.activity_hint);
        if (s.tactic_hint) sj["tactic"] = *s.tactic_hint;
        sj["prerequisites"] = s.prerequisites;
        if (!s.note.empty()) sj["note"] = s.note;
        if (s.continuation) sj["continuation"] = true;
        steps.push_back(std::move(sj));
    }
    doc["observed_steps"] = std::move(steps);
    if (consequence) doc["consequence"] = consequence->to_json();
    return doc;
}

std::vector<IncidentRecord> parse_corpus(std::string_view text, const TaxonomyCatalog& catalog,
                                         const std::string& label) {
    std::vector<IncidentRecord> out;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        const std::string where = label + ":" + std::to_string(line_no);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(where + ": " + e.what());
        }
        IncidentRecord r = IncidentRecord::from_json(doc, catalog, where);
        if (!seen.insert(r.incident_id).second)
            throw ValidationError(where + ": duplicate incident_id '" + r.incident_id + "'");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<IncidentRecord> load_corpus(const std::filesystem::path& path,
                                        const TaxonomyCatalog& catalog) {
    return parse_corpus(read_text_file(path), catalog, path.filename().string());
}

std::string serialize_corpus(const std::vector<IncidentRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.to_json().dump();
        out += '\n';
    }
    return out;
}

const IncidentRecord* find_record(const std::vector<IncidentRecord>& corpus,
                                  std::string_view incident_id) {
    for (const auto& r : corpus)
        if (r.incident_id == incident_id) return &r;
    return nullptr;
}

std::map<AttackType, std::size_t> summarize_by_type(const std::vector<IncidentRecord>& corpus) {
    auto counts = zero_type_map();
    for (const auto& r : corpus) ++counts[r.attack_type];
    return counts;
}

// ---------------------------------------------------------------------------

CorpusManifest CorpusManifest::from_json(const json& doc) {
    using namespace detail;
    require_object(doc, "manifest");
    CorpusManifest m;
    m.by_type = zero_type_map();
    auto count = [](const json& v, const std::string& where) {
        if (!v.is_number_unsigned()) schema_error(where, "expected a nonnegative integer");
        return v.get<std::size_t>();
    };
    m.record_count = count(require_field(doc, "record_count", "manifest"), "manifest.record_count");
    const json& bt = require_field(doc, "by_type", "manifest");
    require_object(bt, "manifest.by_type");
    for (const auto& [k, v] : bt.items()) {
        try {
            m.by_type[parse_attack_type(k)] = count(v, "manifest.by_type." + k);
        } catch (const ValidationError& e) {
            if (e.message().rfind("manifest", 0) == 0) throw;
            schema_error("manifest.by_type", e.message());
        }
    }
    if (auto it = doc.find("chains_per_incident"); it != doc.end()) {
        require_object(*it, "manifest.chains_per_incident");
        for (const auto& [k, v] : it->items())
            m.chains_per_incident[k] = count(v, "manifest.chains_per_incident." + k);
    }
    m.total_chains = count(require_field(doc, "total_chains", "manifest"), "manifest.total_chains");
    return m;
}

json CorpusManifest::to_json() const {
    json doc = json::object();
    doc["record_count"] = record_count;
    json bt = json::object();
    for (const auto& [t, n] : by_type) bt[std::string(to_string(t))] = n;
    doc["by_type"] = std::move(bt);
    doc["chains_per_incident"] = chains_per_incident;
    doc["total_chains"] = total_chains;
    return doc;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    return CorpusManifest::from_json(load_json_file(path));
}

const std::map<AttackType, std::size_t>& reference_dataset_type_counts() {
    static const std::map<AttackType, std::size_t> counts = [] {
        auto m = zero_type_map();
        m[AttackType::DataCorruptionInterception] = 26;
        m[AttackType::DenialOfService] = 9;
        m[AttackType::Eavesdropping] = 3;
        m[AttackType::HighPoweredLaser] = 2;
        m[AttackType::Jamming] = 41;
        m[AttackType::SeizureOfControl] = 3;
        m[AttackType::SignalHijacking] = 15;
        m[AttackType::Spoofing] = 9;
        return m;
    }();
    return counts;
}

}  // namespace usckc
