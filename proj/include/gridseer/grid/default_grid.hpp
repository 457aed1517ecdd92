#pragma once

#include <array>

#include "gridseer/grid/model.hpp"

namespace gridseer::grid {

/// The bundled 23-bus, 230 kV test network: a ring 1-2-...-23-1 with seven
/// chords, three conventional units (slack at bus 1, PV units at buses 9 and
/// 17) and five solar plants on PQ buses. Loads total 0.9 x rated
/// generation. All values per-unit on 100 MVA.
inline GridState build_default_grid() {
    struct BranchRow {
        int from, to;
        double r, x, limit;
    };
    static constexpr std::array<BranchRow, 30> kBranches{{
        {1, 2, 0.0178, 0.1187, 2.11},  {2, 3, 0.0154, 0.1029, 0.81},   {3, 4, 0.0194, 0.1290, 0.22},
        {4, 5, 0.0202, 0.1349, 0.65},  {5, 6, 0.0089, 0.0593, 0.81},   {6, 7, 0.0210, 0.1397, 0.27},
        {7, 8, 0.0133, 0.0885, 0.25},  {8, 9, 0.0172, 0.1146, 0.90},   {9, 10, 0.0140, 0.0932, 0.84},
        {10, 11, 0.0122, 0.0812, 0.59}, {11, 12, 0.0197, 0.1314, 0.22}, {12, 13, 0.0220, 0.1468, 0.33},
        {13, 14, 0.0094, 0.0627, 0.31}, {14, 15, 0.0139, 0.0925, 0.50}, {15, 16, 0.0190, 0.1264, 0.97},
        {16, 17, 0.0196, 0.1304, 1.13}, {17, 18, 0.0220, 0.1468, 0.76}, {18, 19, 0.0148, 0.0990, 1.26},
        {19, 20, 0.0086, 0.0573, 0.48}, {20, 21, 0.0215, 0.1430, 0.21}, {21, 22, 0.0214, 0.1428, 0.29},
        {22, 23, 0.0154, 0.1028, 1.90}, {1, 23, 0.0145, 0.0968, 2.37},  {13, 22, 0.0142, 0.0949, 0.70},
        {1, 18, 0.0192, 0.1283, 2.30},  {8, 12, 0.0109, 0.0724, 0.43},  {4, 18, 0.0098, 0.0652, 1.11},
        {9, 19, 0.0221, 0.1472, 0.49},  {5, 22, 0.0091, 0.0609, 0.34},  {2, 16, 0.0199, 0.1325, 0.58},
    }};
    // Loads of buses 2..23 (bus 1 carries none).
    static constexpr std::array<double, 22> kPLoad{
        0.5490, 0.6157, 0.6377, 0.2674, 0.5837, 0.2290, 0.2861, 0.4886, 0.2459, 0.5554, 0.6683,
        0.5147, 0.4699, 0.4283, 0.5778, 0.2738, 0.3657, 0.6601, 0.3163, 0.3479, 0.5897, 0.2290};
    static constexpr std::array<double, 22> kQLoad{
        0.1982, 0.3072, 0.1811, 0.0789, 0.2638, 0.0625, 0.1024, 0.1779, 0.0514, 0.1799, 0.2640,
        0.1117, 0.1212, 0.1992, 0.2277, 0.0613, 0.0980, 0.2159, 0.0984, 0.1211, 0.2412, 0.0950};

    GridState g;
    g.base_mva = 100.0;
    for (int id = 1; id <= 23; ++id) {
        Bus b;
        b.id = id;
        b.base_kv = 230.0;
        if (id == 1) {
            b.kind = BusKind::Slack;
            b.v_mag = 1.04;
        } else {
            b.kind = (id == 9 || id == 17) ? BusKind::PV : BusKind::PQ;
            b.v_mag = b.kind == BusKind::PV ? 1.02 : 1.0;
            b.p_load = kPLoad[static_cast<std::size_t>(id - 2)];
            b.q_load = kQLoad[static_cast<std::size_t>(id - 2)];
        }
        g.buses.push_back(b);
    }
    for (const auto& row : kBranches)
        g.branches.push_back({row.from, row.to, row.r, row.x, 0.03, row.limit, true});

    g.generators = {
        {1, GenKind::Conventional, 4.0, 2.0, -2.0, 3.0, 45.0, true},
        {9, GenKind::Conventional, 2.0, 1.6, -1.0, 1.5, 38.0, true},
        {17, GenKind::Conventional, 2.0, 1.6, -1.0, 1.5, 38.0, true},
        {5, GenKind::Solar, 0.9, 0.9, 0.0, 0.0, 0.0, true},
        {12, GenKind::Solar, 0.45, 0.45, 0.0, 0.0, 0.0, true},
        {14, GenKind::Solar, 0.75, 0.75, 0.0, 0.0, 0.0, true},
        {20, GenKind::Solar, 0.3, 0.3, 0.0, 0.0, 0.0, true},
        {22, GenKind::Solar, 0.6, 0.6, 0.0, 0.0, 0.0, true},
    };
    return g;
}

}  // namespace gridseer::grid
