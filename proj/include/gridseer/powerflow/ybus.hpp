#pragma once

#include <complex>
#include <string>

#include "gridseer/common/dense.hpp"
#include "gridseer/common/error.hpp"
#include "gridseer/grid/model.hpp"

namespace gridseer::powerflow {

using cdouble = std::complex<double>;

struct AdmittanceMatrix {
    std::size_t n = 0;
    ComplexMatrix entries;

    const cdouble& operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
};

inline cdouble series_admittance(const grid::Branch& br) { return 1.0 / cdouble(br.r, br.x); }

/// pi-model assembly. Out-of-service branches contribute nothing; a bus whose
/// row ends up all-zero is isolated and makes the network singular.
inline AdmittanceMatrix build_ybus(const grid::GridState& g) {
    const std::size_t n = g.bus_count();
    AdmittanceMatrix y{n, ComplexMatrix(n, n)};
    for (const auto& br : g.branches) {
        if (!br.in_service) continue;
        const auto i = static_cast<std::size_t>(br.from_bus - 1);
        const auto j = static_cast<std::size_t>(br.to_bus - 1);
        const cdouble ys = series_admittance(br);
        const cdouble ysh(0.0, br.b_shunt / 2.0);
        y.entries(i, i) += ys + ysh;
        y.entries(j, j) += ys + ysh;
        y.entries(i, j) -= ys;
        y.entries(j, i) -= ys;
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool zero = true;
        for (std::size_t j = 0; j < n && zero; ++j) zero = y.entries(i, j) == cdouble{};
        if (zero) throw SingularNetwork("bus " + std::to_string(i + 1) + " is isolated");
    }
    return y;
}

}  // namespace gridseer::powerflow
