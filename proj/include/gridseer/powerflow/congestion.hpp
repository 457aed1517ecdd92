#pragma once

#include <vector>

#include "gridseer/grid/model.hpp"
#include "gridseer/powerflow/newton.hpp"

namespace gridseer::powerflow {

struct Overload {
    std::size_t branch = 0;
    double loading = 0.0;  ///< flow / mva_limit
    bool operator==(const Overload&) const = default;
};

struct CongestionReport {
    bool congested = false;
    std::vector<Overload> overloaded;
};

/// A branch is congested when its apparent flow exceeds its MVA limit.
inline CongestionReport check_congestion(const PowerFlowSolution& sol, const grid::GridState& g) {
    CongestionReport rep;
    for (std::size_t k = 0; k < g.branches.size(); ++k) {
        const auto& br = g.branches[k];
        if (!br.in_service) continue;
        const double ratio = sol.branch_flows[k] / br.mva_limit;
        if (sol.branch_flows[k] > br.mva_limit) rep.overloaded.push_back({k, ratio});
    }
    rep.congested = !rep.overloaded.empty();
    return rep;
}

}  // namespace gridseer::powerflow
