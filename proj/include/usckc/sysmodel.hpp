#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usckc/io.hpp"

namespace usckc {

enum class Segment { Space, Ground, User, Link };

std::string_view to_string(Segment s);
Segment parse_segment(std::string_view s);

struct InfraNode {
    std::string id;
    Segment segment = Segment::Space;
    std::string component;  // "Bus System", "Remote Terminal", or a link class key
    std::string module;     // "attitude control", "network access", ...

    friend bool operator==(const InfraNode&, const InfraNode&) = default;
};

/// Directed module-level graph. An arc (a, b) means a can initiate
/// communication with b; bidirectional links are two arcs.
class SegmentGraph {
public:
    SegmentGraph() = default;
    /// Validates: unique ids, unique (segment, component, module), arc endpoints exist.
    SegmentGraph(std::vector<InfraNode> nodes, std::vector<std::pair<std::string, std::string>> arcs,
                 std::string notes = {});

    static SegmentGraph from_json(const json& doc);
    json to_json() const;

    const std::vector<InfraNode>& nodes() const noexcept { return nodes_; }
    const std::set<std::pair<std::string, std::string>>& arcs() const noexcept { return arcs_; }
    const std::string& notes() const noexcept { return notes_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    const InfraNode* find(std::string_view id) const;
    const InfraNode& node(std::string_view id) const;  // throws ValidationError
    /// Resolves either a node id or "component/module" (first match).
    std::optional<std::string> resolve(std::string_view id_or_path) const;
    const std::vector<std::size_t>& successors(std::size_t index) const { return adj_[index]; }
    std::size_t index_of(std::string_view id) const;

    /// Returns a copy with one extra arc.
    SegmentGraph with_arc(const std::string& from, const std::string& to) const;

    friend bool operator==(const SegmentGraph& a, const SegmentGraph& b) {
        return a.nodes_ == b.nodes_ && a.arcs_ == b.arcs_;
    }

private:
    std::vector<InfraNode> nodes_;
    std::set<std::pair<std::string, std::string>> arcs_;
    std::string notes_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::size_t>> adj_;
};

SegmentGraph load_graph(const std::filesystem::path& path);

struct PivotPath {
    std::size_t crossings = 0;
    std::vector<std::string> nodes;  // entry .. objective
};

/// Path from entry to objective minimizing component crossings, then arc count.
/// Interior Link nodes are transit points and do not count as a component of
/// their own. Throws ValidationError for unknown nodes or an unreachable objective.
PivotPath shortest_pivot_path(const SegmentGraph& graph, std::string_view entry,
                              std::string_view objective);

/// Number of component boundaries an attacker crosses between entry and objective.
std::size_t through_phase_count(const SegmentGraph& graph, std::string_view entry,
                                std::string_view objective);

/// Crossings along an explicit node path under the same counting rule.
std::size_t path_crossings(const SegmentGraph& graph, const std::vector<std::string>& path);

}  // namespace usckc
