#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cpsrisk/graph.hpp"

namespace cpsrisk {

enum class Layer : std::uint8_t { Cyber, Physical };

struct NodeId {
    Layer layer;
    int index;
    friend bool operator==(const NodeId&, const NodeId&) = default;
};

enum class PhysicalRole : std::uint8_t { Generator, Load, Substation };
enum class CyberRole : std::uint8_t { Monitor, Control };

// Exponents and tolerances shared by both layers.
//
// alpha, delta   scale/exponent of the monitoring load generated per working
//                physical node (degree-driven).
// theta          exponent of the degree-proportional share a cyber node takes.
// beta, mu       scale/exponent of a physical node's structural load; the same
//                pair sizes the per-bin support capacity of the coupling.
// rho_c, rho_p   load tolerance margins of the cyber / physical constraint.
struct LayerParams {
    double alpha = 1.0;
    double delta = 2.0;
    double theta = 2.0;
    double beta = 1.0;
    double mu = 2.0;
    double rho_c = 0.5;
    double rho_p = 0.5;
};

struct PhysicalNode {
    PhysicalRole role = PhysicalRole::Substation;
    int initial_degree = 0;
    double initial_load = 0.0;    // beta * initial_degree^mu
    double capacity_param = 0.0;  // defaults to initial_load
    double current_load = 0.0;
    bool alive = true;
};

struct CyberNode {
    CyberRole role = CyberRole::Monitor;
    int initial_degree = 0;
    double initial_load = 0.0;  // degree-weighted share of the initial total
    double current_load = 0.0;
    bool alive = true;
    bool backed_up = false;  // exempt from load-driven failure
};

struct CouplingBranch {
    enum class Kind : std::uint8_t { Power, Control, Monitor };
    int cyber;
    int physical;
    Kind kind;
};

// Interdependence between the layers. Every cyber node draws power from
// exactly one physical supplier; every physical node is governed by one
// control-role cyber node and watched by one monitor-role cyber node.
struct CouplingMap {
    std::vector<int> supplier;    // per cyber index -> physical index
    std::vector<int> controller;  // per physical index -> cyber index, -1 if none
    std::vector<int> monitor;     // per physical index -> cyber index, -1 if none
    std::vector<CouplingBranch> branches;

    std::string serialize() const;
    static CouplingMap parse(std::string_view text, int cyber_count, int physical_count);
};

struct CoupledNetwork {
    Graph physical;
    Graph cyber;
    std::vector<PhysicalNode> physical_nodes;
    std::vector<CyberNode> cyber_nodes;
    LayerParams params;
    CouplingMap coupling;

    int physical_count() const { return physical.node_count(); }
    int cyber_count() const { return cyber.node_count(); }
    int total_count() const { return physical_count() + cyber_count(); }

    std::vector<std::uint8_t> physical_alive() const;
    std::vector<std::uint8_t> cyber_alive() const;
};

// Scale-free growth: a seed clique of m0 nodes, then each new node attaches
// m edges by preferential attachment. Requires n > m0 >= m >= 1.
Graph generate_ba_cyber(int n, int m0, int m, std::uint64_t rng_seed);

// Built-in physical topologies by name ("ieee39") or an edge-list text.
Graph load_physical_topology(std::string_view source);

// 39-bus test grid: 39 nodes, 46 lines, plus the standard role split.
Graph ieee39_topology();
std::vector<PhysicalRole> ieee39_roles();

// Total monitoring load generated by the physical layer in its current
// state: sum over alive physical nodes of alpha * (alive degree)^delta.
// Failed physical nodes are not monitored and contribute nothing.
double cyber_total_load(const CoupledNetwork& net);

// Degree-weighted split of a total load over the alive cyber nodes:
// node j gets total * d_j^theta / sum_alive d^theta (alive degrees).
// Failed nodes get zero. Throws TotalCollapseError when no cyber node is
// alive but total > 0.
std::vector<double> distribute_cyber_load(const CoupledNetwork& net, double total);

// Structural load of a physical node: beta * degree^mu.
double physical_node_load(int initial_degree, double beta, double mu);

// Inclusive tolerance checks: a node at exactly its bound still satisfies.
bool check_cyber_constraint(const CyberNode& node, double rho_c);
bool check_physical_constraint(const PhysicalNode& node, double rho_p);

// Assembles node tables and initial loads for the given layer graphs.
// Physical roles default to Substation when not provided.
CoupledNetwork make_network(Graph physical, Graph cyber, LayerParams params,
                            std::vector<PhysicalRole> physical_roles = {});

// Highest-degree cyber nodes (ties by lower index) become Control, the rest
// Monitor. fraction is the Control share of the cyber layer.
void assign_cyber_roles(CoupledNetwork& net, double control_fraction);

}  // namespace cpsrisk
