#include "usckc/taxonomy.hpp"

#include "json_fields.hpp"
#include "usckc/error.hpp"

namespace usckc {

using detail::schema_error;

std::string_view to_string(TaxonomySource s) {
    switch (s) {
        case TaxonomySource::Sparta: return "SPARTA";
        case TaxonomySource::Attack: return "ATTACK";
        case TaxonomySource::Both: return "BOTH";
    }
    return "?";
}

std::string_view to_string(ActivityCategory c) {
    switch (c) {
        case ActivityCategory::Objective: return "Objective";
        case ActivityCategory::Milestone: return "Milestone";
        case ActivityCategory::Enabling: return "Enabling";
        case ActivityCategory::InfoDiscovery: return "InfoDiscovery";
    }
    return "?";
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::In: return "In";
        case Phase::Through: return "Through";
        case Phase::Out: return "Out";
    }
    return "?";
}

TaxonomySource parse_taxonomy_source(std::string_view s) {
    if (s == "SPARTA") return TaxonomySource::Sparta;
    if (s == "ATTACK") return TaxonomySource::Attack;
    if (s == "BOTH") return TaxonomySource::Both;
    throw ValidationError("unknown taxonomy source '" + std::string(s) + "'");
}

ActivityCategory parse_activity_category(std::string_view s) {
    for (ActivityCategory c : kAllActivityCategories)
        if (to_string(c) == s) return c;
    throw ValidationError("unknown activity category '" + std::string(s) + "'");
}

Phase parse_phase(std::string_view s) {
    if (s == "In") return Phase::In;
    if (s == "Through") return Phase::Through;
    if (s == "Out") return Phase::Out;
    throw ValidationError("unknown phase '" + std::string(s) + "'");
}

const std::map<std::string, ActivityCategory>& joint_tactic_partition() {
    static const std::map<std::string, ActivityCategory> partition = {
        {"Exfiltration", ActivityCategory::Objective},
        {"Impact", ActivityCategory::Objective},
        {"Initial Access", ActivityCategory::Milestone},
        {"Lateral Movement", ActivityCategory::Milestone},
        {"Credential Access", ActivityCategory::Milestone},
        {"Resource Development", ActivityCategory::Enabling},
        {"Execution", ActivityCategory::Enabling},
        {"Privilege Escalation", ActivityCategory::Enabling},
        {"Persistence", ActivityCategory::Enabling},
        {"Command and Control", ActivityCategory::Enabling},
        {"Defense Evasion", ActivityCategory::Enabling},
        {"Reconnaissance", ActivityCategory::InfoDiscovery},
        {"Discovery", ActivityCategory::InfoDiscovery},
        {"Collection", ActivityCategory::InfoDiscovery},
    };
    return partition;
}

// ---------------------------------------------------------------------------
// TaxonomyCatalog queries

std::optional<std::string> TaxonomyCatalog::resolve_tactic(std::string_view id_or_name) const {
    if (auto it = tactics_.find(std::string(id_or_name)); it != tactics_.end()) return it->first;
    for (const auto& [id, t] : tactics_)
        if (t.name == id_or_name) return id;
    return std::nullopt;
}

const TacticRef& TaxonomyCatalog::tactic(std::string_view id_or_name) const {
    auto id = resolve_tactic(id_or_name);
    if (!id) throw ValidationError("unknown tactic '" + std::string(id_or_name) + "'");
    return tactics_.at(*id);
}

const TechniqueRef* TaxonomyCatalog::find_technique(std::string_view id) const {
    auto it = techniques_.find(std::string(id));
    return it == techniques_.end() ? nullptr : &it->second;
}

const TechniqueRef& TaxonomyCatalog::technique(std::string_view id) const {
    const TechniqueRef* t = find_technique(id);
    if (!t) throw ValidationError("unknown technique '" + std::string(id) + "'");
    return *t;
}

ActivityCategory TaxonomyCatalog::activity_category_of(std::string_view tactic_ref) const {
    return activity_of_.at(tactic(tactic_ref).id);
}

std::set<std::string> TaxonomyCatalog::techniques_for_tactic(std::string_view tactic_ref) const {
    const std::string& id = tactic(tactic_ref).id;
    auto it = by_tactic_.find(id);
    return it == by_tactic_.end() ? std::set<std::string>{} : it->second;
}

bool TaxonomyCatalog::technique_in_tactic(std::string_view technique_id,
                                          std::string_view tactic_ref) const {
    const TechniqueRef* te = find_technique(technique_id);
    auto ta = resolve_tactic(tactic_ref);
    return te && ta && te->tactic_ids.count(*ta) > 0;
}

std::map<ActivityCategory, std::size_t> TaxonomyCatalog::category_sizes() const {
    std::map<ActivityCategory, std::size_t> sizes;
    for (ActivityCategory c : kAllActivityCategories) sizes[c] = 0;
    for (const auto& [id, c] : activity_of_) ++sizes[c];
    return sizes;
}

ActivityCategory activity_category_of(const TaxonomyCatalog& catalog, std::string_view tactic) {
    return catalog.activity_category_of(tactic);
}

std::set<std::string> techniques_for_tactic(const TaxonomyCatalog& catalog,
                                            std::string_view tactic) {
    return catalog.techniques_for_tactic(tactic);
}

// ---------------------------------------------------------------------------
// Builder

void CatalogBuilder::add_tactic(TacticRef tactic) {
    if (tactic.id.empty()) throw ValidationError("tactic with empty id");
    if (catalog_.tactics_.count(tactic.id))
        throw ValidationError("duplicate tactic id '" + tactic.id + "'");
    for (const auto& [id, t] : catalog_.tactics_)
        if (t.name == tactic.name)
            throw ValidationError("duplicate tactic name '" + tactic.name + "'");
    std::string id = tactic.id;
    catalog_.tactics_.emplace(std::move(id), std::move(tactic));
}

void CatalogBuilder::assign_category(const std::string& tactic_id, ActivityCategory category) {
    assignments_[tactic_id].push_back(category);
}

void CatalogBuilder::add_technique(TechniqueRef technique) {
    if (technique.id.empty()) throw ValidationError("technique with empty id");
    if (catalog_.techniques_.count(technique.id))
        throw ValidationError("duplicate technique id '" + technique.id + "'");
    std::string id = technique.id;
    catalog_.techniques_.emplace(std::move(id), std::move(technique));
}

void CatalogBuilder::merge_technique(TechniqueRef technique) {
    auto it = catalog_.techniques_.find(technique.id);
    if (it == catalog_.techniques_.end()) {
        add_technique(std::move(technique));
        return;
    }
    it->second.tactic_ids.insert(technique.tactic_ids.begin(), technique.tactic_ids.end());
}

TaxonomyCatalog CatalogBuilder::build() && {
    TaxonomyCatalog& c = catalog_;

    for (const auto& [tactic_id, cats] : assignments_) {
        if (!c.tactics_.count(tactic_id))
            throw ValidationError("activity_map: unknown tactic '" + tactic_id + "'");
        if (cats.size() > 1)
            throw ValidationError("partition violation: tactic '" + tactic_id +
                                  "' is assigned to " + std::to_string(cats.size()) +
                                  " activity categories");
        c.activity_of_[tactic_id] = cats.front();
    }
    for (const auto& [id, t] : c.tactics_)
        if (!c.activity_of_.count(id))
            throw ValidationError("partition violation: tactic '" + id + "' (" + t.name +
                                  ") has no activity category");

    c.by_tactic_.clear();
    for (const auto& [id, te] : c.techniques_) {
        if (te.tactic_ids.empty())
            throw ValidationError("technique '" + id + "' has no tactics");
        for (const auto& ta : te.tactic_ids) {
            if (!c.tactics_.count(ta))
                throw ValidationError("dangling tactic reference: technique '" + id +
                                      "' names unknown tactic '" + ta + "'");
            c.by_tactic_[ta].insert(id);
        }
    }
    return std::move(c);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

struct PendingTechnique {
    TechniqueRef ref;
    std::vector<std::string> tactic_refs;
    std::string where;
};

std::vector<PendingTechnique> read_techniques(const json& doc, const std::string& origin) {
    std::vector<PendingTechnique> out;
    auto it = doc.find("techniques");
    if (it == doc.end()) return out;
    if (!it->is_array()) schema_error(origin, "'techniques' must be an array");
    std::size_t i = 0;
    for (const auto& tj : *it) {
        std::string where = origin + " techniques[" + std::to_string(i++) + "]";
        detail::require_object(tj, where);
        PendingTechnique p;
        p.ref.id = detail::require_string(tj, "id", where);
        where += " (id=" + p.ref.id + ")";
        p.ref.name = detail::optional_string(tj, "name", where).value_or(p.ref.id);
        auto src = detail::optional_string(tj, "source", where);
        try {
            p.ref.source = src ? parse_taxonomy_source(*src) : TaxonomySource::Attack;
        } catch (const ValidationError& e) {
            schema_error(where, e.message());
        }
        if (p.ref.source == TaxonomySource::Both)
            schema_error(where, "techniques must be SPARTA or ATTACK");
        p.tactic_refs = detail::string_list(tj, "tactics", where, true);
        if (p.tactic_refs.empty()) schema_error(where, "'tactics' must be nonempty");
        p.where = where;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

TaxonomyCatalog TaxonomyCatalog::from_json(const json& doc,
                                           const std::filesystem::path& base_dir) {
    detail::require_object(doc, "catalog");
    CatalogBuilder b;
    if (auto v = detail::optional_string(doc, "version", "catalog")) b.set_version(*v);

    const json& tactics = detail::require_array(doc, "tactics", "catalog");
    std::map<std::string, std::string> name_to_id;
    std::size_t i = 0;
    for (const auto& tj : tactics) {
        std::string where = "catalog tactics[" + std::to_string(i++) + "]";
        detail::require_object(tj, where);
        TacticRef t;
        t.id = detail::require_string(tj, "id", where);
        where += " (id=" + t.id + ")";
        t.name = detail::require_string(tj, "name", where);
        try {
            t.source = parse_taxonomy_source(detail::require_string(tj, "source", where));
            name_to_id[t.name] = t.id;
            b.add_tactic(t);
        } catch (const ValidationError& e) {
            schema_error(where, e.message());
        }
    }
    auto resolve = [&](const std::string& ref) -> std::string {
        if (b.has_tactic(ref)) return ref;
        if (auto it = name_to_id.find(ref); it != name_to_id.end()) return it->second;
        return ref;  // left dangling; build() reports it
    };

    const json& amap = detail::require_field(doc, "activity_map", "catalog");
    detail::require_object(amap, "catalog activity_map");
    for (const auto& [cat_name, members] : amap.items()) {
        ActivityCategory cat;
        try {
            cat = parse_activity_category(cat_name);
        } catch (const ValidationError& e) {
            schema_error("catalog activity_map", e.message());
        }
        if (!members.is_array())
            schema_error("catalog activity_map." + cat_name, "expected an array of tactic ids");
        for (const auto& m : members) {
            if (!m.is_string())
                schema_error("catalog activity_map." + cat_name, "expected tactic id strings");
            b.assign_category(resolve(m.get<std::string>()), cat);
        }
    }

    std::vector<PendingTechnique> pending = read_techniques(doc, "catalog");
    if (auto inc = doc.find("includes"); inc != doc.end()) {
        if (!inc->is_array()) schema_error("catalog", "'includes' must be an array");
        for (const auto& p : *inc) {
            if (!p.is_string()) schema_error("catalog", "'includes' entries must be paths");
            std::filesystem::path ip = p.get<std::string>();
            if (ip.is_relative()) ip = base_dir / ip;
            json extra = load_json_file(ip);
            detail::require_object(extra, ip.string());
            auto more = read_techniques(extra, ip.string());
            for (auto& m : more) pending.push_back(std::move(m));
        }
    }

    std::set<std::string> seen;
    for (auto& p : pending) {
        for (const auto& ref : p.tactic_refs) {
            std::string id = resolve(ref);
            if (!b.has_tactic(id))
                throw ValidationError("dangling tactic reference: " + p.where +
                                      " names unknown tactic '" + ref + "'");
            p.ref.tactic_ids.insert(id);
        }
        // Duplicates inside one document are errors; an included catalog may
        // restate a technique, in which case its tactic sets are merged.
        if (!seen.insert(p.ref.id).second && p.where.rfind("catalog ", 0) == 0)
            schema_error(p.where, "duplicate technique id");
        b.merge_technique(std::move(p.ref));
    }
    return std::move(b).build();
}

json TaxonomyCatalog::to_json() const {
    json doc = json::object();
    doc["version"] = version_;
    json tactics = json::array();
    for (const auto& [id, t] : tactics_)
        tactics.push_back({{"id", t.id}, {"name", t.name}, {"source", to_string(t.source)}});
    doc["tactics"] = std::move(tactics);
    json techniques = json::array();
    for (const auto& [id, te] : techniques_) {
        techniques.push_back({{"id", te.id},
                              {"name", te.name},
                              {"source", to_string(te.source)},
                              {"tactics", te.tactic_ids}});
    }
    doc["techniques"] = std::move(techniques);
    json amap = json::object();
    for (ActivityCategory c : kAllActivityCategories) {
        json members = json::array();
        for (const auto& [id, cat] : activity_of_)
            if (cat == c) members.push_back(id);
        amap[std::string(to_string(c))] = std::move(members);
    }
    doc["activity_map"] = std::move(amap);
    return doc;
}

TaxonomyCatalog load_catalog(const std::filesystem::path& path) {
    json doc = load_json_file(path);
    return TaxonomyCatalog::from_json(doc, path.parent_path());
}

void save_catalog(const std::filesystem::path& path, const TaxonomyCatalog& catalog) {
    write_text_file(path, catalog.to_json().dump(2) + "\n");
}

}  // namespace usckc
