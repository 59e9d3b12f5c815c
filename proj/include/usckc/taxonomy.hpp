#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "usckc/io.hpp"

namespace usckc {

/// Which upstream taxonomy a tactic or technique comes from. Tactics shared by
/// both taxonomies are a single entry marked Both.
enum class TaxonomySource { Sparta, Attack, Both };

/// Role a tactic plays inside a kill-chain phase.
enum class ActivityCategory { Objective, Milestone, Enabling, InfoDiscovery };

inline constexpr std::array<ActivityCategory, 4> kAllActivityCategories = {
    ActivityCategory::Objective, ActivityCategory::Milestone, ActivityCategory::Enabling,
    ActivityCategory::InfoDiscovery};

/// Unified kill chain phase. Ordered In < Through < Out.
enum class Phase { In, Through, Out };

std::string_view to_string(TaxonomySource s);
std::string_view to_string(ActivityCategory c);
std::string_view to_string(Phase p);

/// Parsers throw ValidationError on unknown spellings.
TaxonomySource parse_taxonomy_source(std::string_view s);
ActivityCategory parse_activity_category(std::string_view s);
Phase parse_phase(std::string_view s);

/// Milestone and Objective steps complete a phase.
constexpr bool is_goal(ActivityCategory c) {
    return c == ActivityCategory::Milestone || c == ActivityCategory::Objective;
}

struct TacticRef {
    std::string id;
    std::string name;
    TaxonomySource source = TaxonomySource::Attack;

    friend bool operator==(const TacticRef&, const TacticRef&) = default;
};

struct TechniqueRef {
    std::string id;  // opaque, sub-technique suffixes included ("T1595.003", "EX-0012.08")
    std::string name;
    TaxonomySource source = TaxonomySource::Attack;
    std::set<std::string> tactic_ids;

    friend bool operator==(const TechniqueRef&, const TechniqueRef&) = default;
};

/// Joint SPARTA / ATT&CK tactic and technique universe plus the
/// tactic -> activity category partition. Immutable once built.
class TaxonomyCatalog {
public:
    TaxonomyCatalog() = default;

    /// Builds and validates. Relative `includes` entries resolve against base_dir.
    static TaxonomyCatalog from_json(const json& doc,
                                     const std::filesystem::path& base_dir = {});
    json to_json() const;

    const std::string& version() const noexcept { return version_; }
    const std::map<std::string, TacticRef>& tactics() const noexcept { return tactics_; }
    const std::map<std::string, TechniqueRef>& techniques() const noexcept {
        return techniques_;
    }
    const std::map<std::string, ActivityCategory>& activity_map() const noexcept {
        return activity_of_;
    }

    /// Accepts a tactic id ("TA0040") or its display name ("Impact").
    std::optional<std::string> resolve_tactic(std::string_view id_or_name) const;
    /// As resolve_tactic but throws ValidationError for unknown tactics.
    const TacticRef& tactic(std::string_view id_or_name) const;

    const TechniqueRef* find_technique(std::string_view id) const;
    const TechniqueRef& technique(std::string_view id) const;

    ActivityCategory activity_category_of(std::string_view tactic) const;
    std::set<std::string> techniques_for_tactic(std::string_view tactic) const;
    bool technique_in_tactic(std::string_view technique, std::string_view tactic) const;

    /// Number of tactics per activity category.
    std::map<ActivityCategory, std::size_t> category_sizes() const;

    friend bool operator==(const TaxonomyCatalog&, const TaxonomyCatalog&) = default;

private:
    friend class CatalogBuilder;

    std::string version_;
    std::map<std::string, TacticRef> tactics_;
    std::map<std::string, TechniqueRef> techniques_;
    std::map<std::string, ActivityCategory> activity_of_;
    std::map<std::string, std::set<std::string>> by_tactic_;
};

/// Incremental construction used by the JSON loader and the STIX importer.
class CatalogBuilder {
public:
    void set_version(std::string v) { catalog_.version_ = std::move(v); }
    /// Fails on duplicate id.
    void add_tactic(TacticRef tactic);
    /// Records one tactic -> category assignment; a second assignment for the
    /// same tactic is kept so build() can report the partition violation.
    void assign_category(const std::string& tactic_id, ActivityCategory category);
    /// Fails on duplicate id; tactic references are checked in build().
    void add_technique(TechniqueRef technique);
    /// Adds tactic references to an existing technique, or inserts it.
    void merge_technique(TechniqueRef technique);
    bool has_tactic(const std::string& id) const { return catalog_.tactics_.count(id) > 0; }

    TaxonomyCatalog build() &&;

private:
    TaxonomyCatalog catalog_;
    std::map<std::string, std::vector<ActivityCategory>> assignments_;
};

TaxonomyCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const std::filesystem::path& path, const TaxonomyCatalog& catalog);

/// Free-function forms of the catalog queries.
ActivityCategory activity_category_of(const TaxonomyCatalog& catalog, std::string_view tactic);
std::set<std::string> techniques_for_tactic(const TaxonomyCatalog& catalog,
                                            std::string_view tactic);

/// Converts upstream STIX 2.1 bundles (ATT&CK enterprise, SPARTA) into a native
/// catalog. Either bundle may be null. Tactics are matched across bundles by
/// display name; a tactic present in both becomes TaxonomySource::Both.
/// Activity categories come from the built-in joint partition and any tactic
/// outside it is rejected.
TaxonomyCatalog import_stix_bundles(const json* attack_bundle, const json* sparta_bundle,
                                    std::string version);

/// The joint partition of the 14 tactics, keyed by display name.
const std::map<std::string, ActivityCategory>& joint_tactic_partition();

}  // namespace usckc
