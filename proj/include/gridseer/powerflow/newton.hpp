#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "gridseer/common/dense.hpp"
#include "gridseer/common/error.hpp"
#include "gridseer/grid/model.hpp"
#include "gridseer/powerflow/ybus.hpp"

namespace gridseer::powerflow {

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 20;
    /// PV->PQ switching on generator reactive limits. Off for fault-window
    /// solves, on for steady-state dispatch solves.
    bool enforce_q_limits = false;
};

struct PowerFlowSolution {
    std::vector<double> v_mag;
    std::vector<double> v_ang;
    int iterations = 0;
    double max_mismatch = 0.0;
    /// Apparent power per branch (max of the two ends), per-unit. Zero for
    /// out-of-service branches.
    std::vector<double> branch_flows;
    /// Net complex injection computed from the solved voltages, per bus.
    std::vector<cdouble> injections;

    std::vector<cdouble> phasors() const {
        std::vector<cdouble> v(v_mag.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(v_mag[i], v_ang[i]);
        return v;
    }

    bool operator==(const PowerFlowSolution&) const = default;
};

/// Bus roles and specified injections after resolving generator status. A
/// PV bus with no committed generator behaves as PQ.
struct BusSchedule {
    std::vector<grid::BusKind> kind;
    std::vector<double> p_spec;
    std::vector<double> q_spec;
    std::vector<double> v_set;
    std::vector<double> q_gen_min;
    std::vector<double> q_gen_max;
};

inline BusSchedule make_schedule(const grid::GridState& g) {
    const std::size_t n = g.bus_count();
    BusSchedule s;
    s.kind.resize(n);
    s.p_spec.assign(n, 0.0);
    s.q_spec.assign(n, 0.0);
    s.v_set.assign(n, 1.0);
    s.q_gen_min.assign(n, 0.0);
    s.q_gen_max.assign(n, 0.0);
    std::vector<int> voltage_control(n, 0);
    for (const auto& gen : g.generators) {
        if (!gen.on) continue;
        const auto i = static_cast<std::size_t>(gen.bus_id - 1);
        s.p_spec[i] += gen.p_set;
        s.q_gen_min[i] += gen.q_min;
        s.q_gen_max[i] += gen.q_max;
        if (gen.kind == grid::GenKind::Conventional) ++voltage_control[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = g.buses[i];
        s.kind[i] = b.kind;
        if (b.kind == grid::BusKind::PV && voltage_control[i] == 0) s.kind[i] = grid::BusKind::PQ;
        s.p_spec[i] -= b.p_load;
        s.q_spec[i] -= b.q_load;
        if (s.kind[i] != grid::BusKind::PQ) s.v_set[i] = b.v_mag;
    }
    return s;
}

/// Computed injections S_i = V_i conj((Y V)_i).
inline std::vector<cdouble> compute_injections(const AdmittanceMatrix& y,
                                               std::span<const double> vm,
                                               std::span<const double> va) {
    const std::size_t n = y.n;
    std::vector<cdouble> v(n), s(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(vm[i], va[i]);
    for (std::size_t i = 0; i < n; ++i) {
        cdouble acc{};
        for (std::size_t j = 0; j < n; ++j) acc += y(i, j) * v[j];
        s[i] = v[i] * std::conj(acc);
    }
    return s;
}

/// Unknown ordering: angles of every non-slack bus, then magnitudes of every
/// PQ bus. The mismatch vector uses the same ordering (P rows then Q rows).
struct StateIndex {
    std::vector<std::size_t> angle_buses;
    std::vector<std::size_t> mag_buses;
    std::size_t size() const noexcept { return angle_buses.size() + mag_buses.size(); }
};

inline StateIndex make_index(const BusSchedule& s) {
    StateIndex idx;
    for (std::size_t i = 0; i < s.kind.size(); ++i) {
        if (s.kind[i] != grid::BusKind::Slack) idx.angle_buses.push_back(i);
        if (s.kind[i] == grid::BusKind::PQ) idx.mag_buses.push_back(i);
    }
    return idx;
}

inline std::vector<double> mismatch_vector(const AdmittanceMatrix& y, const BusSchedule& s,
                                           const StateIndex& idx, std::span<const double> vm,
                                           std::span<const double> va) {
    const auto inj = compute_injections(y, vm, va);
    std::vector<double> f;
    f.reserve(idx.size());
    for (auto i : idx.angle_buses) f.push_back(s.p_spec[i] - inj[i].real());
    for (auto i : idx.mag_buses) f.push_back(s.q_spec[i] - inj[i].imag());
    return f;
}

/// Jacobian of the computed injections (P rows, Q rows) with respect to the
/// state (angles, magnitudes). The mismatch Jacobian is its negative.
inline RealMatrix injection_jacobian(const AdmittanceMatrix& y, const StateIndex& idx,
                                     std::span<const double> vm, std::span<const double> va) {
    const std::size_t n = y.n;
    const auto inj = compute_injections(y, vm, va);
    const std::size_t na = idx.angle_buses.size();
    const std::size_t m = idx.size();
    RealMatrix jac(m, m);

    auto dp_dth = [&](std::size_t i, std::size_t j) {
        if (i == j) return -inj[i].imag() - y(i, i).imag() * vm[i] * vm[i];
        const double t = va[i] - va[j];
        return vm[i] * vm[j] * (y(i, j).real() * std::sin(t) - y(i, j).imag() * std::cos(t));
    };
    auto dp_dv = [&](std::size_t i, std::size_t j) {
        if (i == j) return inj[i].real() / vm[i] + y(i, i).real() * vm[i];
        const double t = va[i] - va[j];
        return vm[i] * (y(i, j).real() * std::cos(t) + y(i, j).imag() * std::sin(t));
    };
    auto dq_dth = [&](std::size_t i, std::size_t j) {
        if (i == j) return inj[i].real() - y(i, i).real() * vm[i] * vm[i];
        const double t = va[i] - va[j];
        return -vm[i] * vm[j] * (y(i, j).real() * std::cos(t) + y(i, j).imag() * std::sin(t));
    };
    auto dq_dv = [&](std::size_t i, std::size_t j) {
        if (i == j) return inj[i].imag() / vm[i] - y(i, i).imag() * vm[i];
        const double t = va[i] - va[j];
        return vm[i] * (y(i, j).real() * std::sin(t) - y(i, j).imag() * std::cos(t));
    };

    for (std::size_t r = 0; r < m; ++r) {
        const bool p_row = r < na;
        const std::size_t i = p_row ? idx.angle_buses[r] : idx.mag_buses[r - na];
        for (std::size_t c = 0; c < m; ++c) {
            const bool th_col = c < na;
            const std::size_t j = th_col ? idx.angle_buses[c] : idx.mag_buses[c - na];
            if (i != j && y(i, j) == cdouble{}) continue;
            jac(r, c) = p_row ? (th_col ? dp_dth(i, j) : dp_dv(i, j))
                              : (th_col ? dq_dth(i, j) : dq_dv(i, j));
        }
    }
    (void)n;
    return jac;
}

/// Apparent power at both ends of every branch; reports the larger.
inline std::vector<double> branch_apparent_flows(const grid::GridState& g,
                                                 std::span<const double> vm,
                                                 std::span<const double> va) {
    std::vector<double> flows(g.branches.size(), 0.0);
    for (std::size_t k = 0; k < g.branches.size(); ++k) {
        const auto& br = g.branches[k];
        if (!br.in_service) continue;
        const auto i = static_cast<std::size_t>(br.from_bus - 1);
        const auto j = static_cast<std::size_t>(br.to_bus - 1);
        const cdouble vi = std::polar(vm[i], va[i]);
        const cdouble vj = std::polar(vm[j], va[j]);
        const cdouble ys = series_admittance(br);
        const cdouble ysh(0.0, br.b_shunt / 2.0);
        const cdouble s_ij = vi * std::conj((vi - vj) * ys + vi * ysh);
        const cdouble s_ji = vj * std::conj((vj - vi) * ys + vj * ysh);
        flows[k] = std::max(std::abs(s_ij), std::abs(s_ji));
    }
    return flows;
}

/// True when voltages in the grid differ from a flat profile, i.e. the caller
/// supplied a warm start.
inline bool has_warm_start(const grid::GridState& g) {
    for (const auto& b : g.buses) {
        if (b.v_ang != 0.0) return true;
        if (b.kind == grid::BusKind::PQ && b.v_mag != 1.0) return true;
    }
    return false;
}

namespace detail {

struct NewtonResult {
    std::vector<double> vm, va;
    int iterations;
    double mismatch;
};

inline NewtonResult newton(const AdmittanceMatrix& y, const BusSchedule& s,
                           std::vector<double> vm, std::vector<double> va,
                           const SolveOptions& opt) {
    const StateIndex idx = make_index(s);
    const std::size_t na = idx.angle_buses.size();
    double last = 0.0;
    for (int it = 0; it <= opt.max_iter; ++it) {
        const auto f = mismatch_vector(y, s, idx, vm, va);
        last = 0.0;
        for (double v : f) last = std::max(last, std::abs(v));
        if (!std::isfinite(last)) break;
        if (last <= opt.tol) return {std::move(vm), std::move(va), it, last};
        if (it == opt.max_iter) break;
        // J_inj * dx = f  (mismatch = spec - calc)
        const auto dx = gauss_solve(injection_jacobian(y, idx, vm, va), std::span<const double>(f));
        for (std::size_t k = 0; k < na; ++k) va[idx.angle_buses[k]] += dx[k];
        for (std::size_t k = 0; k < idx.mag_buses.size(); ++k) vm[idx.mag_buses[k]] += dx[na + k];
    }
    throw NonConvergence("Newton-Raphson did not converge in " + std::to_string(opt.max_iter) +
                             " iterations (last mismatch " + std::to_string(last) + " pu)",
                         last, opt.max_iter);
}

}  // namespace detail

/// Polar Newton-Raphson. Starts flat (1.0 pu, 0 rad with PV/slack magnitudes
/// at setpoint) unless the grid carries a warm start.
inline PowerFlowSolution solve_powerflow(const grid::GridState& g, const SolveOptions& opt = {}) {
    if (!(opt.tol > 0.0) || opt.max_iter < 1)
        throw ValidationError("solve_powerflow needs tol > 0 and max_iter >= 1");
    const AdmittanceMatrix y = build_ybus(g);
    BusSchedule s = make_schedule(g);
    const std::size_t n = g.bus_count();

    const bool warm = has_warm_start(g);
    std::vector<double> vm(n), va(n);
    for (std::size_t i = 0; i < n; ++i) {
        vm[i] = s.kind[i] == grid::BusKind::PQ ? (warm ? g.buses[i].v_mag : 1.0) : s.v_set[i];
        va[i] = warm ? g.buses[i].v_ang : 0.0;
    }
    const std::size_t slack = g.slack_index();
    va[slack] = g.buses[slack].v_ang;

    auto res = detail::newton(y, s, vm, va, opt);
    int total_iter = res.iterations;

    if (opt.enforce_q_limits) {
        for (int pass = 0; pass < static_cast<int>(n); ++pass) {
            const auto inj = compute_injections(y, res.vm, res.va);
            bool switched = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (s.kind[i] != grid::BusKind::PV) continue;
                const double q_gen = inj[i].imag() + g.buses[i].q_load;
                if (q_gen > s.q_gen_max[i] || q_gen < s.q_gen_min[i]) {
                    const double q_fix = q_gen > s.q_gen_max[i] ? s.q_gen_max[i] : s.q_gen_min[i];
                    s.kind[i] = grid::BusKind::PQ;
                    s.q_spec[i] = q_fix - g.buses[i].q_load;
                    switched = true;
                }
            }
            if (!switched) break;
            res = detail::newton(y, s, res.vm, res.va, opt);
            total_iter += res.iterations;
        }
    }

    PowerFlowSolution sol;
    sol.branch_flows = branch_apparent_flows(g, res.vm, res.va);
    sol.injections = compute_injections(y, res.vm, res.va);
    sol.v_mag = std::move(res.vm);
    sol.v_ang = std::move(res.va);
    sol.iterations = total_iter;
    sol.max_mismatch = res.mismatch;
    return sol;
}

/// Copy of `g` whose bus voltages hold `sol`, usable as a warm start.
inline grid::GridState with_voltages(grid::GridState g, const PowerFlowSolution& sol) {
    for (std::size_t i = 0; i < g.buses.size(); ++i) {
        if (g.buses[i].kind == grid::BusKind::PQ) g.buses[i].v_mag = sol.v_mag[i];
        if (g.buses[i].kind != grid::BusKind::Slack) g.buses[i].v_ang = sol.v_ang[i];
    }
    return g;
}

}  // namespace gridseer::powerflow
