#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "usckc/io.hpp"

namespace usckc {

using CiaTriple = std::array<double, 3>;  // confidentiality, integrity, availability

/// Analyst-assigned per-module degradation scores in [0,1]. Sub-vectors that
/// are absent in the input are all zero. Link classes carry CIA triples.
struct ConsequenceVector {
    std::array<double, 6> bus{};  // electrical power, attitude control, communication,
                                  // command and data handling, propulsion, thermal control
    std::array<double, 5> payload{};  // communication, navigation, scientific experiment,
                                      // remote sensing, defense
    std::array<double, 4> ground_station{};   // tracking, ranging, transmission, reception
    std::array<double, 3> mission_control{};  // telemetry processing, commanding,
                                              // analysis and support
    std::array<double, 2> data_processing{};  // mission analysis, payload processing
    std::array<double, 2> remote_terminal{};  // network access, software access
    std::array<double, 3> user{};             // transmission, reception, processing
    std::map<std::string, CiaTriple> link;

    static ConsequenceVector from_json(const json& doc, const std::string& where = "consequence");
    json to_json() const;

    /// Module-score sub-vector by aggregation key ("space.bus", "user", ...);
    /// empty for unknown keys.
    std::vector<double> sub_vector(std::string_view key) const;

    friend bool operator==(const ConsequenceVector&, const ConsequenceVector&) = default;
};

/// Keys of the module-score sub-vectors, in canonical order.
const std::vector<std::string>& consequence_subvector_keys();

/// Accepted link class keys: S, SS, GG, SG, SU, GU, UU and G:<pair> for the six
/// ground component pairs.
const std::vector<std::string>& link_class_keys();
bool is_link_class_key(std::string_view key);

}  // namespace usckc
