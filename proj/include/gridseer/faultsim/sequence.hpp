#pragma once

#include <array>
#include <complex>
#include <numbers>

#include "gridseer/common/dense.hpp"
#include "gridseer/common/error.hpp"
#include "gridseer/grid/model.hpp"
#include "gridseer/powerflow/ybus.hpp"

namespace gridseer::faultsim {

using cdouble = std::complex<double>;
using PhaseValues = std::array<cdouble, 3>;  ///< phases a, b, c

struct SequenceValues {
    cdouble zero;
    cdouble positive;
    cdouble negative;
};

/// Fortescue operator a = 1 at 120 degrees.
inline const cdouble kA = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);

inline SequenceValues symmetrical_components(const PhaseValues& abc) {
    const cdouble a = kA, a2 = kA * kA;
    return {(abc[0] + abc[1] + abc[2]) / 3.0, (abc[0] + a * abc[1] + a2 * abc[2]) / 3.0,
            (abc[0] + a2 * abc[1] + a * abc[2]) / 3.0};
}

inline PhaseValues phase_values(const SequenceValues& s) {
    const cdouble a = kA, a2 = kA * kA;
    return {s.zero + s.positive + s.negative, s.zero + a2 * s.positive + a * s.negative,
            s.zero + a * s.positive + a2 * s.negative};
}

/// Machine and line data used to build the sequence networks.
struct SequenceModel {
    double gen_subtransient_x = 0.2;  ///< x'' behind which every machine is a 1.0 pu source
    double gen_zero_seq_x = 0.05;     ///< solidly grounded neutral
    double line_zero_seq_factor = 3.0;
};

struct SequenceImpedances {
    cdouble z1, z2, z0;
};

/// Bus impedance matrices (inverse admittance) for the three sequence
/// networks. Negative sequence equals positive for non-salient machines, so
/// only z1 and z0 are stored. Loads are not part of the networks.
class SequenceNetworks {
public:
    SequenceNetworks(const grid::GridState& g, const SequenceModel& model = {}) {
        const std::size_t n = g.bus_count();
        ComplexMatrix y1(n, n), y0(n, n);
        for (const auto& br : g.branches) {
            if (!br.in_service) continue;
            const auto i = static_cast<std::size_t>(br.from_bus - 1);
            const auto j = static_cast<std::size_t>(br.to_bus - 1);
            const cdouble ys1 = 1.0 / cdouble(br.r, br.x);
            const cdouble ysh(0.0, br.b_shunt / 2.0);
            const cdouble ys0 = ys1 / model.line_zero_seq_factor;
            y1(i, i) += ys1 + ysh;
            y1(j, j) += ys1 + ysh;
            y1(i, j) -= ys1;
            y1(j, i) -= ys1;
            y0(i, i) += ys0;
            y0(j, j) += ys0;
            y0(i, j) -= ys0;
            y0(j, i) -= ys0;
        }
        for (const auto& gen : g.generators) {
            if (!gen.on) continue;
            const auto i = static_cast<std::size_t>(gen.bus_id - 1);
            y1(i, i) += 1.0 / cdouble(0.0, model.gen_subtransient_x);
            y0(i, i) += 1.0 / cdouble(0.0, model.gen_zero_seq_x);
        }
        try {
            z1_ = invert(std::move(y1));
            z0_ = invert(std::move(y0));
        } catch (const SingularJacobian& e) {
            throw SingularNetwork(std::string("sequence network not invertible: ") + e.what());
        }
    }

    std::size_t size() const noexcept { return z1_.rows(); }

    /// Transfer impedances, 0-based bus indices.
    cdouble z1(std::size_t i, std::size_t j) const { return z1_(i, j); }
    cdouble z2(std::size_t i, std::size_t j) const { return z1_(i, j); }
    cdouble z0(std::size_t i, std::size_t j) const { return z0_(i, j); }

    SequenceImpedances thevenin(int bus_id) const {
        const auto k = static_cast<std::size_t>(bus_id - 1);
        if (bus_id < 1 || k >= size()) throw ValidationError("bus " + std::to_string(bus_id) + " not in grid");
        return {z1(k, k), z2(k, k), z0(k, k)};
    }

private:
    ComplexMatrix z1_;
    ComplexMatrix z0_;
};

inline SequenceImpedances thevenin_sequence_impedances(const grid::GridState& g, int bus_id,
                                                       const SequenceModel& model = {}) {
    return SequenceNetworks(g, model).thevenin(bus_id);
}

}  // namespace gridseer::faultsim
