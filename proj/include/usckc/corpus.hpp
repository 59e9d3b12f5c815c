#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usckc/consequence.hpp"
#include "usckc/io.hpp"
#include "usckc/taxonomy.hpp"

namespace usckc {

enum class AttackType {
    HighPoweredLaser,
    HighPoweredMicrowaves,
    RFInterference,
    Eavesdropping,
    Spoofing,
    UltrawidebandWeapon,
    EMPWeapon,
    Jamming,
    SignalHijacking,
    SeizureOfControl,
    DataCorruptionInterception,
    DenialOfService,
    SSADeception,
};

inline constexpr std::array<AttackType, 13> kAllAttackTypes = {
    AttackType::HighPoweredLaser,  AttackType::HighPoweredMicrowaves,
    AttackType::RFInterference,    AttackType::Eavesdropping,
    AttackType::Spoofing,          AttackType::UltrawidebandWeapon,
    AttackType::EMPWeapon,         AttackType::Jamming,
    AttackType::SignalHijacking,   AttackType::SeizureOfControl,
    AttackType::DataCorruptionInterception, AttackType::DenialOfService,
    AttackType::SSADeception,
};

std::string_view to_string(AttackType t);
AttackType parse_attack_type(std::string_view s);  // throws ValidationError

/// Calendar date with optional month and day ("2007", "2014-09", "1998-09-20").
struct IncidentDate {
    enum class Precision { Year, Month, Day };

    int year = 0;
    int month = 0;  // 0 when unknown
    int day = 0;    // 0 when unknown
    Precision precision = Precision::Year;

    static IncidentDate parse(std::string_view text);  // throws ValidationError
    std::string to_string() const;

    friend bool operator==(const IncidentDate&, const IncidentDate&) = default;
};

struct Location {
    std::optional<std::string> facility, city, state, country;
    friend bool operator==(const Location&, const Location&) = default;
};

struct Attacker {
    std::optional<std::string> name, alias, country;
    friend bool operator==(const Attacker&, const Attacker&) = default;
};

struct Victim {
    std::optional<std::string> name, industry;
    friend bool operator==(const Victim&, const Victim&) = default;
};

/// One analyst-partitioned attack step. Hints are optional; the tactic hint is
/// stored as a resolved tactic id.
struct ObservedStep {
    std::size_t index = 0;  // 1-based
    std::string technique;
    std::optional<Phase> phase_hint;
    std::optional<ActivityCategory> activity_hint;
    std::optional<std::string> tactic_hint;
    std::vector<std::string> prerequisites;  // rulebase tags
    std::string note;
    bool continuation = false;  // opens a further Out phase after a completed one

    bool fully_annotated() const {
        return phase_hint.has_value() && activity_hint.has_value() && tactic_hint.has_value();
    }

    friend bool operator==(const ObservedStep&, const ObservedStep&) = default;
};

struct IncidentRecord {
    std::string incident_id;
    AttackType attack_type = AttackType::Jamming;
    IncidentDate date;
    std::vector<Location> locations;
    std::string description;
    Attacker attacker;
    Victim victim;
    std::vector<std::string> sources;
    std::vector<ObservedStep> observed_steps;
    std::optional<std::string> entry_node;
    std::optional<std::string> objective_node;
    std::optional<ConsequenceVector> consequence;

    static IncidentRecord from_json(const json& doc, const TaxonomyCatalog& catalog,
                                    const std::string& where = "record");
    json to_json() const;

    friend bool operator==(const IncidentRecord&, const IncidentRecord&) = default;
};

/// One record per line; blank lines are skipped. Errors carry `label:line`.
std::vector<IncidentRecord> parse_corpus(std::string_view text, const TaxonomyCatalog& catalog,
                                         const std::string& label = "corpus");
std::vector<IncidentRecord> load_corpus(const std::filesystem::path& path,
                                        const TaxonomyCatalog& catalog);
std::string serialize_corpus(const std::vector<IncidentRecord>& records);

const IncidentRecord* find_record(const std::vector<IncidentRecord>& corpus,
                                  std::string_view incident_id);

/// Every attack type is present as a key, absent types count 0.
std::map<AttackType, std::size_t> summarize_by_type(const std::vector<IncidentRecord>& corpus);

/// Counts written alongside a corpus file.
struct CorpusManifest {
    std::size_t record_count = 0;
    std::map<AttackType, std::size_t> by_type;  // all 13 keys
    std::map<std::string, std::size_t> chains_per_incident;
    std::size_t total_chains = 0;

    static CorpusManifest from_json(const json& doc);
    json to_json() const;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

CorpusManifest load_manifest(const std::filesystem::path& path);

/// Type counts and total chain count of the authors' 108-incident dataset.
const std::map<AttackType, std::size_t>& reference_dataset_type_counts();
inline constexpr std::size_t kReferenceDatasetRecords = 108;
inline constexpr std::size_t kReferenceDatasetChains = 6206;

}  // namespace usckc
