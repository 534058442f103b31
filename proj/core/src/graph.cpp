#include "cpsrisk/graph.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "cpsrisk/errors.hpp"

namespace cpsrisk {

Graph::Graph(int node_count) {
    if (node_count < 0) throw ConfigError("graph node count must be non-negative");
    adjacency_.resize(static_cast<std::size_t>(node_count));
}

bool Graph::add_edge(int a, int b) {
    if (a < 0 || b < 0 || a >= node_count() || b >= node_count())
        throw ConfigError("edge endpoint out of range: " + std::to_string(a) + " " +
                          std::to_string(b));
    if (a == b) throw ConfigError("self-loop rejected at node " + std::to_string(a));
    if (has_edge(a, b)) return false;
    auto insert_sorted = [](std::vector<int>& v, int x) {
        v.insert(std::lower_bound(v.begin(), v.end(), x), x);
    };
    insert_sorted(adjacency_[a], b);
    insert_sorted(adjacency_[b], a);
    ++edge_count_;
    return true;
}

bool Graph::has_edge(int a, int b) const {
    const auto& adj = adjacency_[a];
    return std::binary_search(adj.begin(), adj.end(), b);
}

int Graph::degree_among(int v, const std::vector<std::uint8_t>& alive) const {
    int d = 0;
    for (int u : adjacency_[v])
        if (alive[u]) ++d;
    return d;
}

bool Graph::connected() const {
    const int n = node_count();
    if (n <= 1) return true;
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adjacency_[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    return reached == n;
}

std::vector<std::pair<int, int>> Graph::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(edge_count_));
    for (int v = 0; v < node_count(); ++v)
        for (int u : adjacency_[v])
            if (v < u) out.emplace_back(v, u);
    return out;
}

Graph parse_edge_list(std::string_view text, int node_count_hint) {
    struct RawEdge {
        int a, b;
    };
    std::vector<RawEdge> raw;
    int max_index = -1;
    int line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                               : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_number;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        // Trim.
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t' || line.front() == '\r'))
            line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.remove_suffix(1);
        if (line.empty()) continue;

        int values[2];
        const char* cur = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 2; ++k) {
            while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
            auto [next, ec] = std::from_chars(cur, end, values[k]);
            if (ec != std::errc{} || next == cur)
                throw ParseError("expected two node indices", line_number);
            cur = next;
        }
        while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
        if (cur != end) throw ParseError("trailing characters after edge", line_number);
        if (values[0] < 0 || values[1] < 0)
            throw ParseError("negative node index", line_number);
        if (values[0] == values[1]) throw ParseError("self-loop", line_number);
        raw.push_back({values[0], values[1]});
        max_index = std::max({max_index, values[0], values[1]});
    }
    int n = std::max(node_count_hint, max_index + 1);
    Graph g(n);
    for (const auto& e : raw) g.add_edge(e.a, e.b);
    return g;
}

}  // namespace cpsrisk
