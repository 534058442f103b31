#include "cpsrisk/network_model.hpp"

namespace cpsrisk {
namespace {

// 39-bus test grid branch list, 1-based bus numbers, transformers included.
// 46 lines over 39 buses.
constexpr int kLines[][2] = {
    {1, 2},   {1, 39},  {2, 3},   {2, 25},  {2, 30},  {3, 4},   {3, 18},  {4, 5},
    {4, 14},  {5, 6},   {5, 8},   {6, 7},   {6, 11},  {6, 31},  {7, 8},   {8, 9},
    {9, 39},  {10, 11}, {10, 13}, {10, 32}, {12, 11}, {12, 13}, {13, 14}, {14, 15},
    {15, 16}, {16, 17}, {16, 19}, {16, 21}, {16, 24}, {17, 18}, {17, 27}, {19, 20},
    {19, 33}, {20, 34}, {21, 22}, {22, 23}, {22, 35}, {23, 24}, {23, 36}, {25, 26},
    {25, 37}, {26, 27}, {26, 28}, {26, 29}, {28, 29}, {29, 38},
};

// Buses with generating units.
constexpr int kGeneratorBuses[] = {30, 31, 32, 33, 34, 35, 36, 37, 38, 39};

// Buses with demand (generator buses that also carry demand keep the
// Generator role).
constexpr int kLoadBuses[] = {3,  4,  7,  8,  12, 15, 16, 18, 20,
                              21, 23, 24, 25, 26, 27, 28, 29};

}  // namespace

Graph ieee39_topology() {
    Graph g(39);
    for (const auto& line : kLines) g.add_edge(line[0] - 1, line[1] - 1);
    return g;
}

std::vector<PhysicalRole> ieee39_roles() {
    std::vector<PhysicalRole> roles(39, PhysicalRole::Substation);
    for (int bus : kLoadBuses) roles[bus - 1] = PhysicalRole::Load;
    for (int bus : kGeneratorBuses) roles[bus - 1] = PhysicalRole::Generator;
    return roles;
}

}  // namespace cpsrisk
