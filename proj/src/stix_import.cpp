#include <map>
#include <string>
#include <vector>

#include "json_fields.hpp"
#include "usckc/error.hpp"
#include "usckc/taxonomy.hpp"

namespace usckc {

namespace {

// Both upstream exports are STIX 2.1 bundles. Objects carry their public id in
// external_references; the source_name tells ATT&CK and SPARTA apart.
std::optional<std::string> external_id(const json& obj) {
    auto refs = obj.find("external_references");
    if (refs == obj.end() || !refs->is_array()) return std::nullopt;
    for (const auto& r : *refs) {
        if (!r.is_object()) continue;
        auto src = r.find("source_name");
        auto id = r.find("external_id");
        if (src == r.end() || id == r.end() || !src->is_string() || !id->is_string()) continue;
        const std::string s = src->get<std::string>();
        if (s == "mitre-attack" || s == "sparta" || s == "SPARTA") return id->get<std::string>();
    }
    return std::nullopt;
}

bool skipped(const json& obj) {
    return obj.value("revoked", false) || obj.value("x_mitre_deprecated", false);
}

struct TacticEntry {
    std::string id;
    std::string name;
    bool attack = false;
    bool sparta = false;
};

struct Bundle {
    const json* doc;
    TaxonomySource source;
    const char* label;
};

const json& bundle_objects(const Bundle& b) {
    detail::require_object(*b.doc, b.label);
    const json& objs = detail::require_array(*b.doc, "objects", b.label);
    return objs;
}

}  // namespace

TaxonomyCatalog import_stix_bundles(const json* attack_bundle, const json* sparta_bundle,
                                    std::string version) {
    std::vector<Bundle> bundles;
    if (attack_bundle) bundles.push_back({attack_bundle, TaxonomySource::Attack, "attack bundle"});
    if (sparta_bundle) bundles.push_back({sparta_bundle, TaxonomySource::Sparta, "sparta bundle"});
    if (bundles.empty()) throw ValidationError("import needs at least one bundle");

    const auto& partition = joint_tactic_partition();

    // Pass 1: tactics, merged across bundles by display name. The ATT&CK id
    // wins when both bundles define the tactic.
    std::map<std::string, TacticEntry> by_name;
    std::map<std::string, std::string> shortname_to_name;
    for (const Bundle& b : bundles) {
        for (const auto& obj : bundle_objects(b)) {
            if (!obj.is_object() || obj.value("type", "") != "x-mitre-tactic" || skipped(obj))
                continue;
            const std::string name = obj.value("name", "");
            auto id = external_id(obj);
            if (name.empty() || !id)
                throw ValidationError(std::string(b.label) + ": tactic object " +
                                      obj.value("id", "?") + " lacks a name or external id");
            if (!partition.count(name))
                throw ValidationError(std::string(b.label) + ": tactic '" + name +
                                      "' is outside the joint tactic partition");
            TacticEntry& e = by_name[name];
            e.name = name;
            if (b.source == TaxonomySource::Attack) {
                e.id = *id;
                e.attack = true;
            } else {
                if (e.id.empty()) e.id = *id;
                e.sparta = true;
            }
            if (auto sn = obj.find("x_mitre_shortname"); sn != obj.end() && sn->is_string())
                shortname_to_name[sn->get<std::string>()] = name;
        }
    }

    CatalogBuilder builder;
    builder.set_version(std::move(version));
    std::map<std::string, std::string> name_to_id;
    for (const auto& [name, e] : by_name) {
        TaxonomySource src = e.attack && e.sparta ? TaxonomySource::Both
                             : e.attack           ? TaxonomySource::Attack
                                                  : TaxonomySource::Sparta;
        builder.add_tactic({e.id, name, src});
        builder.assign_category(e.id, partition.at(name));
        name_to_id[name] = e.id;
    }

    // Pass 2: techniques. kill_chain_phases name tactics by shortname.
    for (const Bundle& b : bundles) {
        for (const auto& obj : bundle_objects(b)) {
            if (!obj.is_object() || obj.value("type", "") != "attack-pattern" || skipped(obj))
                continue;
            auto id = external_id(obj);
            if (!id) continue;
            TechniqueRef te;
            te.id = *id;
            te.name = obj.value("name", *id);
            te.source = b.source;
            auto phases = obj.find("kill_chain_phases");
            if (phases != obj.end() && phases->is_array()) {
                for (const auto& p : *phases) {
                    const std::string shortname = p.value("phase_name", "");
                    auto it = shortname_to_name.find(shortname);
                    if (it == shortname_to_name.end())
                        throw ValidationError(std::string(b.label) + ": technique " + te.id +
                                              " names unknown tactic '" + shortname + "'");
                    te.tactic_ids.insert(name_to_id.at(it->second));
                }
            }
            if (te.tactic_ids.empty()) continue;
            builder.merge_technique(std::move(te));
        }
    }
    return std::move(builder).build();
}

}  // namespace usckc
