#include "usckc/consequence.hpp"

#include <algorithm>

#include "json_fields.hpp"
#include "usckc/error.hpp"

namespace usckc {

const std::vector<std::string>& consequence_subvector_keys() {
    static const std::vector<std::string> keys = {
        "space.bus",
        "space.payload",
        "ground.ground_station",
        "ground.mission_control",
        "ground.data_processing",
        "ground.remote_terminal",
        "user",
    };
    return keys;
}

const std::vector<std::string>& link_class_keys() {
    static const std::vector<std::string> keys = {
        "S",        "SS",        "GG",       "SG",        "SU",       "GU",       "UU",
        "G:GS-MC",  "G:GS-DPC",  "G:GS-RT",  "G:MC-DPC",  "G:MC-RT",  "G:DPC-RT",
    };
    return keys;
}

bool is_link_class_key(std::string_view key) {
    const auto& keys = link_class_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

namespace {

double read_score(const json& v, const std::string& where) {
    double x = detail::require_number(v, where);
    if (!(x >= 0.0 && x <= 1.0)) detail::schema_error(where, "score must lie in [0,1]");
    return x;
}

template <std::size_t N>
void read_fixed(const json& parent, const char* key, std::array<double, N>& out,
                const std::string& where) {
    auto it = parent.find(key);
    if (it == parent.end() || it->is_null()) return;
    const std::string w = where + "." + key;
    if (!it->is_array() || it->size() != N)
        detail::schema_error(w, "expected " + std::to_string(N) + " scores");
    for (std::size_t i = 0; i < N; ++i) out[i] = read_score((*it)[i], w);
}

template <std::size_t N>
json write_fixed(const std::array<double, N>& a) {
    return json(std::vector<double>(a.begin(), a.end()));
}

const json* sub_object(const json& doc, const char* key, const std::string& where) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return nullptr;
    if (!it->is_object()) detail::schema_error(where + "." + key, "expected an object");
    return &*it;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) detail::schema_error(where, "unknown key '" + k + "'");
    }
}

}  // namespace

ConsequenceVector ConsequenceVector::from_json(const json& doc, const std::string& where) {
    detail::require_object(doc, where);
    reject_unknown(doc, {"space", "ground", "user", "link"}, where);
    ConsequenceVector c;
    if (const json* s = sub_object(doc, "space", where)) {
        reject_unknown(*s, {"bus", "payload"}, where + ".space");
        read_fixed(*s, "bus", c.bus, where + ".space");
        read_fixed(*s, "payload", c.payload, where + ".space");
    }
    if (const json* g = sub_object(doc, "ground", where)) {
        reject_unknown(*g,
                       {"ground_station", "mission_control", "data_processing", "remote_terminal"},
                       where + ".ground");
        read_fixed(*g, "ground_station", c.ground_station, where + ".ground");
        read_fixed(*g, "mission_control", c.mission_control, where + ".ground");
        read_fixed(*g, "data_processing", c.data_processing, where + ".ground");
        read_fixed(*g, "remote_terminal", c.remote_terminal, where + ".ground");
    }
    read_fixed(doc, "user", c.user, where);
    if (const json* l = sub_object(doc, "link", where)) {
        for (const auto& [key, triple] : l->items()) {
            const std::string w = where + ".link." + key;
            if (!is_link_class_key(key)) detail::schema_error(w, "unknown link class");
            if (!triple.is_array() || triple.size() != 3)
                detail::schema_error(w, "expected a [c, i, a] triple");
            CiaTriple t{};
            for (std::size_t i = 0; i < 3; ++i) t[i] = read_score(triple[i], w);
            c.link[key] = t;
        }
    }
    return c;
}

json ConsequenceVector::to_json() const {
    json doc = json::object();
    doc["space"] = {{"bus", write_fixed(bus)}, {"payload", write_fixed(payload)}};
    doc["ground"] = {{"ground_station", write_fixed(ground_station)},
                     {"mission_control", write_fixed(mission_control)},
                     {"data_processing", write_fixed(data_processing)},
                     {"remote_terminal", write_fixed(remote_terminal)}};
    doc["user"] = write_fixed(user);
    json l = json::object();
    for (const auto& [k, t] : link) l[k] = write_fixed(t);
    doc["link"] = std::move(l);
    return doc;
}

std::vector<double> ConsequenceVector::sub_vector(std::string_view key) const {
    auto v = [](const auto& a) { return std::vector<double>(a.begin(), a.end()); };
    if (key == "space.bus") return v(bus);
    if (key == "space.payload") return v(payload);
    if (key == "ground.ground_station") return v(ground_station);
    if (key == "ground.mission_control") return v(mission_control);
    if (key == "ground.data_processing") return v(data_processing);
    if (key == "ground.remote_terminal") return v(remote_terminal);
    if (key == "user") return v(user);
    return {};
}

}  // namespace usckc
