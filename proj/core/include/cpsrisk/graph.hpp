#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cpsrisk {

// Simple undirected graph: no self-loops, no parallel edges.
class Graph {
  public:
    Graph() = default;
    explicit Graph(int node_count);

    int node_count() const { return static_cast<int>(adjacency_.size()); }
    int edge_count() const { return edge_count_; }

    // Returns false (and leaves the graph unchanged) for duplicates; throws
    // ConfigError for self-loops or out-of-range endpoints.
    bool add_edge(int a, int b);
    bool has_edge(int a, int b) const;

    int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }
    const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }

    // Degree of v counting only neighbors flagged alive.
    int degree_among(int v, const std::vector<std::uint8_t>& alive) const;

    bool connected() const;

    std::vector<std::pair<int, int>> edges() const;

  private:
    std::vector<std::vector<int>> adjacency_;
    int edge_count_ = 0;
};

// One edge per line as two whitespace-separated zero-based indices.
// Blank lines and `#` comments are skipped; duplicate edges are merged.
// Node count is 1 + the largest index mentioned unless a larger hint is given.
Graph parse_edge_list(std::string_view text, int node_count_hint = 0);

}  // namespace cpsrisk
