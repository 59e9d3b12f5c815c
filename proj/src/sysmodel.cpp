#include "usckc/sysmodel.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "json_fields.hpp"
#include "usckc/error.hpp"

namespace usckc {

std::string_view to_string(Segment s) {
    switch (s) {
        case Segment::Space: return "Space";
        case Segment::Ground: return "Ground";
        case Segment::User: return "User";
        case Segment::Link: return "Link";
    }
    return "?";
}

Segment parse_segment(std::string_view s) {
    if (s == "Space") return Segment::Space;
    if (s == "Ground") return Segment::Ground;
    if (s == "User") return Segment::User;
    if (s == "Link") return Segment::Link;
    throw ValidationError("unknown segment '" + std::string(s) + "'");
}

SegmentGraph::SegmentGraph(std::vector<InfraNode> nodes,
                           std::vector<std::pair<std::string, std::string>> arcs,
                           std::string notes)
    : nodes_(std::move(nodes)), notes_(std::move(notes)) {
    std::set<std::tuple<Segment, std::string, std::string>> triples;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const InfraNode& n = nodes_[i];
        if (n.id.empty()) throw ValidationError("graph node " + std::to_string(i) + " has empty id");
        if (!index_.emplace(n.id, i).second)
            throw ValidationError("duplicate graph node id '" + n.id + "'");
        if (!triples.emplace(n.segment, n.component, n.module).second)
            throw ValidationError("duplicate node triple (" + std::string(to_string(n.segment)) +
                                  ", " + n.component + ", " + n.module + ") at node '" + n.id +
                                  "'");
    }
    adj_.assign(nodes_.size(), {});
    for (auto& [from, to] : arcs) {
        auto a = index_.find(from);
        auto b = index_.find(to);
        if (a == index_.end() || b == index_.end())
            throw ValidationError("arc (" + from + ", " + to + ") has an unknown endpoint '" +
                                  (a == index_.end() ? from : to) + "'");
        if (arcs_.emplace(from, to).second) adj_[a->second].push_back(b->second);
    }
}

SegmentGraph SegmentGraph::from_json(const json& doc) {
    detail::require_object(doc, "graph");
    std::vector<InfraNode> nodes;
    const json& jn = detail::require_array(doc, "nodes", "graph");
    for (std::size_t i = 0; i < jn.size(); ++i) {
        std::string where = "graph nodes[" + std::to_string(i) + "]";
        detail::require_object(jn[i], where);
        InfraNode n;
        n.id = detail::require_string(jn[i], "id", where);
        where += " (id=" + n.id + ")";
        try {
            n.segment = parse_segment(detail::require_string(jn[i], "segment", where));
        } catch (const ValidationError& e) {
            detail::schema_error(where, e.message());
        }
        n.component = detail::require_string(jn[i], "component", where);
        n.module = detail::require_string(jn[i], "module", where);
        nodes.push_back(std::move(n));
    }
    std::vector<std::pair<std::string, std::string>> arcs;
    const json& ja = detail::require_array(doc, "arcs", "graph");
    for (std::size_t i = 0; i < ja.size(); ++i) {
        const json& a = ja[i];
        if (!a.is_array() || a.size() != 2 || !a[0].is_string() || !a[1].is_string())
            detail::schema_error("graph arcs[" + std::to_string(i) + "]",
                                 "expected [from, to] id pair");
        arcs.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
    }
    std::string notes = detail::optional_string(doc, "notes", "graph").value_or("");
    return SegmentGraph(std::move(nodes), std::move(arcs), std::move(notes));
}

json SegmentGraph::to_json() const {
    json doc = json::object();
    if (!notes_.empty()) doc["notes"] = notes_;
    json jn = json::array();
    for (const auto& n : nodes_)
        jn.push_back({{"id", n.id},
                      {"segment", to_string(n.segment)},
                      {"component", n.component},
                      {"module", n.module}});
    doc["nodes"] = std::move(jn);
    json ja = json::array();
    for (const auto& [a, b] : arcs_) ja.push_back({a, b});
    doc["arcs"] = std::move(ja);
    return doc;
}

const InfraNode* SegmentGraph::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

const InfraNode& SegmentGraph::node(std::string_view id) const {
    const InfraNode* n = find(id);
    if (!n) throw ValidationError("unknown graph node '" + std::string(id) + "'");
    return *n;
}

std::size_t SegmentGraph::index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown graph node '" + std::string(id) + "'");
    return it->second;
}

std::optional<std::string> SegmentGraph::resolve(std::string_view id_or_path) const {
    if (find(id_or_path)) return std::string(id_or_path);
    auto slash = id_or_path.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto comp = id_or_path.substr(0, slash);
    auto mod = id_or_path.substr(slash + 1);
    for (const auto& n : nodes_)
        if (n.component == comp && n.module == mod) return n.id;
    return std::nullopt;
}

SegmentGraph SegmentGraph::with_arc(const std::string& from, const std::string& to) const {
    std::vector<std::pair<std::string, std::string>> arcs(arcs_.begin(), arcs_.end());
    arcs.emplace_back(from, to);
    return SegmentGraph(nodes_, std::move(arcs), notes_);
}

SegmentGraph load_graph(const std::filesystem::path& path) {
    return SegmentGraph::from_json(load_json_file(path));
}

namespace {

struct ComponentIndex {
    std::vector<std::size_t> of_node;
    std::size_t count = 0;

    explicit ComponentIndex(const SegmentGraph& g) {
        std::map<std::pair<Segment, std::string>, std::size_t> ids;
        for (const auto& n : g.nodes()) {
            auto [it, fresh] = ids.emplace(std::make_pair(n.segment, n.component), ids.size());
            of_node.push_back(it->second);
        }
        count = ids.size();
    }
};

}  // namespace

PivotPath shortest_pivot_path(const SegmentGraph& graph, std::string_view entry,
                              std::string_view objective) {
    const std::size_t src = graph.index_of(entry);
    const std::size_t dst = graph.index_of(objective);
    if (src == dst) return {0, {std::string(entry)}};

    const ComponentIndex comps(graph);
    const std::size_t n = graph.node_count();
    const std::size_t C = comps.count;
    // State: (node, anchor component). The anchor is the last non-Link
    // component entered; Link nodes in transit leave it unchanged.
    using Cost = std::pair<std::size_t, std::size_t>;  // (crossings, arcs)
    constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
    std::vector<Cost> best(n * C, {kInf, kInf});
    std::vector<std::size_t> prev(n * C, kInf);
    using Item = std::pair<Cost, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;

    const std::size_t start = src * C + comps.of_node[src];
    best[start] = {0, 0};
    pq.push({best[start], start});
    std::size_t goal = kInf;
    while (!pq.empty()) {
        auto [cost, state] = pq.top();
        pq.pop();
        if (cost != best[state]) continue;
        const std::size_t v = state / C;
        const std::size_t anchor = state % C;
        if (v == dst) {
            goal = state;
            break;
        }
        for (std::size_t w : graph.successors(v)) {
            const bool transit = w != dst && graph.nodes()[w].segment == Segment::Link;
            std::size_t next_anchor = anchor;
            std::size_t step = 0;
            if (!transit) {
                step = comps.of_node[w] != anchor ? 1 : 0;
                next_anchor = comps.of_node[w];
            }
            const std::size_t ns = w * C + next_anchor;
            Cost nc{cost.first + step, cost.second + 1};
            if (nc < best[ns]) {
                best[ns] = nc;
                prev[ns] = state;
                pq.push({nc, ns});
            }
        }
    }
    if (goal == kInf)
        throw ValidationError("objective '" + std::string(objective) +
                              "' is unreachable from entry '" + std::string(entry) + "'");
    PivotPath out;
    out.crossings = best[goal].first;
    for (std::size_t s = goal; s != kInf; s = prev[s])
        out.nodes.push_back(graph.nodes()[s / C].id);
    std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

std::size_t through_phase_count(const SegmentGraph& graph, std::string_view entry,
                                std::string_view objective) {
    return shortest_pivot_path(graph, entry, objective).crossings;
}

std::size_t path_crossings(const SegmentGraph& graph, const std::vector<std::string>& path) {
    if (path.empty()) return 0;
    auto comp = [&](const InfraNode& n) { return std::make_pair(n.segment, n.component); };
    auto anchor = comp(graph.node(path.front()));
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (!graph.arcs().count({path[i - 1], path[i]}))
            throw ValidationError("path uses missing arc (" + path[i - 1] + ", " + path[i] + ")");
        const InfraNode& n = graph.node(path[i]);
        if (n.segment == Segment::Link && i + 1 < path.size()) continue;
        if (comp(n) != anchor) ++crossings;
        anchor = comp(n);
    }
    return crossings;
}

}  // namespace usckc
