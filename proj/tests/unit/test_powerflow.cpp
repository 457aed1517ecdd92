#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <complex>

#include "gridseer/grid/default_grid.hpp"
#include "gridseer/powerflow/congestion.hpp"
#include "gridseer/powerflow/newton.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/tiny_grids.hpp"

using namespace gridseer;
using namespace gridseer::powerflow;
using cd = std::complex<double>;

namespace {

/// High-voltage root of the two-bus load equation by bisection. With the
/// sending end at 1 pu and S the load, V2 = conj(c) + |V2|^2 where
/// c = conj(S) z, so |V2| solves (Re c + V^2)^2 + (Im c)^2 = V^2.
cd two_bus_oracle(double r, double x, double p, double q) {
    const cd c = std::conj(cd(p, q)) * cd(r, x);
    auto f = [&](double v) { return (c.real() + v * v) * (c.real() + v * v) + c.imag() * c.imag() - v * v; };
    double lo = 0.6, hi = 1.5;
    EXPECT_LT(f(lo), 0.0);
    EXPECT_GT(f(hi), 0.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double v = 0.5 * (lo + hi);
    return std::conj(c) + v * v;
}

}  // namespace

TEST(Ybus, RowSumsEqualShuntAdmittance) {
    const auto g = grid::build_default_grid();
    const auto y = build_ybus(g);
    std::vector<double> shunt(g.bus_count(), 0.0);
    for (const auto& br : g.branches) {
        shunt[static_cast<std::size_t>(br.from_bus - 1)] += br.b_shunt / 2.0;
        shunt[static_cast<std::size_t>(br.to_bus - 1)] += br.b_shunt / 2.0;
    }
    for (std::size_t i = 0; i < g.bus_count(); ++i) {
        cd sum{};
        for (std::size_t j = 0; j < g.bus_count(); ++j) sum += y(i, j);
        EXPECT_NEAR(sum.real(), 0.0, 1e-10) << "row " << i;
        EXPECT_NEAR(sum.imag(), shunt[i], 1e-10) << "row " << i;
    }
}

TEST(Ybus, SymmetricAndSparseLikeTopology) {
    const auto g = grid::build_default_grid();
    const auto y = build_ybus(g);
    for (std::size_t i = 0; i < g.bus_count(); ++i)
        for (std::size_t j = 0; j < g.bus_count(); ++j) EXPECT_EQ(y(i, j), y(j, i));
    EXPECT_EQ(y(0, 11), cd{});  // buses 1 and 12 are not adjacent
}

TEST(Ybus, IsolatedBusIsSingular) {
    auto g = testkit::two_bus(0.01, 0.1, 0.5, 0.1);
    g.branches[0].in_service = false;
    EXPECT_THROW(build_ybus(g), SingularNetwork);
}

TEST(PowerFlow, DefaultGridConvergesTightly) {
    const auto g = grid::build_default_grid();
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_powerflow(g);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(sol.max_mismatch, 1e-8);
    EXPECT_LE(sol.iterations, 20);
    EXPECT_LT(secs, 1.0);
    EXPECT_EQ(sol.v_ang[g.slack_index()], 0.0);
    for (double v : sol.v_mag) {
        EXPECT_GT(v, 0.9);
        EXPECT_LT(v, 1.1);
    }
}

TEST(PowerFlow, ComplexPowerBalance) {
    const auto g = grid::build_default_grid();
    const auto sol = solve_powerflow(g);
    cd total{};
    for (const auto& s : sol.injections) total += s;
    const cd loss = testkit::branch_losses(g, sol);
    EXPECT_NEAR(total.real(), loss.real(), 1e-7);
    EXPECT_NEAR(total.imag(), loss.imag(), 1e-7);

    // scheduled injections are met at every non-slack bus
    const auto sched = make_schedule(g);
    for (std::size_t i = 0; i < g.bus_count(); ++i) {
        if (sched.kind[i] == grid::BusKind::Slack) continue;
        EXPECT_NEAR(sol.injections[i].real(), sched.p_spec[i], 1e-7) << "bus " << i + 1;
        if (sched.kind[i] == grid::BusKind::PQ) { EXPECT_NEAR(sol.injections[i].imag(), sched.q_spec[i], 1e-7); }
    }
}

TEST(PowerFlow, TwoBusMatchesBisectionOracle) {
    struct Case { double r, x, p, q; };
    for (const Case c : {Case{0.0, 0.1, 0.5, 0.2}, Case{0.02, 0.08, 0.8, 0.3}, Case{0.05, 0.25, 0.3, -0.1}}) {
        const auto sol = solve_powerflow(testkit::two_bus(c.r, c.x, c.p, c.q));
        const cd v = two_bus_oracle(c.r, c.x, c.p, c.q);
        EXPECT_NEAR(sol.v_mag[1], std::abs(v), 1e-9);
        EXPECT_NEAR(sol.v_ang[1], std::arg(v), 1e-9);
    }
}

TEST(PowerFlow, LosslessTwoBusClosedForm) {
    // r = 0: V^4 + (2Qx - 1) V^2 + x^2 (P^2 + Q^2) = 0, upper root
    const double x = 0.1, p = 0.6, q = 0.2;
    const double b = 2.0 * q * x - 1.0;
    const double v2 = (-b + std::sqrt(b * b - 4.0 * x * x * (p * p + q * q))) / 2.0;
    const auto sol = solve_powerflow(testkit::two_bus(0.0, x, p, q));
    EXPECT_NEAR(sol.v_mag[1], std::sqrt(v2), 1e-10);
}

TEST(PowerFlow, JacobianMatchesFiniteDifferences) {
    const auto g = grid::build_default_grid();
    for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_LT(testkit::jacobian_fd_error(g, seed), 1e-6) << "seed " << seed;
}

TEST(PowerFlow, WarmStartConvergesFaster) {
    const auto g = grid::build_default_grid();
    const auto cold = solve_powerflow(g);
    const auto warm = solve_powerflow(with_voltages(g, cold));
    EXPECT_LE(warm.iterations, 1);
    for (std::size_t i = 0; i < g.bus_count(); ++i) EXPECT_NEAR(warm.v_mag[i], cold.v_mag[i], 1e-9);
}

TEST(PowerFlow, InfeasibleLoadDoesNotConverge) {
    auto g = testkit::two_bus(0.0, 0.5, 5.0, 2.0);
    try {
        solve_powerflow(g);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_GT(e.last_mismatch(), 1e-8);
    } catch (const SingularJacobian&) {
    }
}

TEST(PowerFlow, ReactiveLimitsSwitchPvToPq) {
    auto g = testkit::three_bus();
    g.generators[1].q_min = -0.01;
    g.generators[1].q_max = 0.01;
    const auto free = solve_powerflow(g);
    SolveOptions opt;
    opt.enforce_q_limits = true;
    const auto limited = solve_powerflow(g, opt);
    const double q_gen = limited.injections[1].imag() + g.buses[1].q_load;
    EXPECT_LE(q_gen, 0.01 + 1e-7);
    EXPECT_GE(q_gen, -0.01 - 1e-7);
    EXPECT_NE(limited.v_mag[1], free.v_mag[1]);
}

TEST(Congestion, FlagsOverloadedBranches) {
    auto g = testkit::two_bus(0.01, 0.1, 0.5, 0.1);
    auto sol = solve_powerflow(g);
    EXPECT_FALSE(check_congestion(sol, g).congested);
    g.branches[0].mva_limit = 0.3;
    const auto rep = check_congestion(sol, g);
    ASSERT_TRUE(rep.congested);
    ASSERT_EQ(rep.overloaded.size(), 1u);
    EXPECT_GT(rep.overloaded[0].loading, 1.0);
}

TEST(Congestion, AllSolarOffMatchesIndependentBranchCurrents) {
    auto g = grid::build_default_grid();
    for (auto& gen : g.generators)
        if (gen.kind == grid::GenKind::Solar) gen.on = false;
    const auto sol = solve_powerflow(g);
    bool any = false;
    for (const auto& br : g.branches) {
        const auto i = static_cast<std::size_t>(br.from_bus - 1), j = static_cast<std::size_t>(br.to_bus - 1);
        const cd vi = std::polar(sol.v_mag[i], sol.v_ang[i]), vj = std::polar(sol.v_mag[j], sol.v_ang[j]);
        const cd ys = 1.0 / cd(br.r, br.x), ysh(0.0, br.b_shunt / 2.0);
        const double s_from = std::abs(vi * std::conj((vi - vj) * ys + vi * ysh));
        const double s_to = std::abs(vj * std::conj((vj - vi) * ys + vj * ysh));
        any = any || std::max(s_from, s_to) > br.mva_limit;
    }
    EXPECT_EQ(check_congestion(sol, g).congested, any);
}

TEST(Ybus, SingleLineIsOneOverZ) {
    const auto y = build_ybus(testkit::two_bus(0.0, 0.1, 0.0, 0.0));
    EXPECT_NEAR(std::abs(y(0, 0) - cd(0, -10)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y(0, 1) - cd(0, 10)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y(1, 0) - cd(0, 10)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y(1, 1) - cd(0, -10)), 0.0, 1e-12);
}

TEST(PowerFlow, FlatSystemIsItsOwnSolution) {
    auto g = grid::build_default_grid();
    for (auto& b : g.buses) {
        b.p_load = b.q_load = 0.0;
        b.v_mag = 1.0;
    }
    for (auto& gen : g.generators) gen.p_set = 0.0;
    for (auto& br : g.branches) br.b_shunt = 0.0;
    const auto sol = solve_powerflow(g);
    EXPECT_LE(sol.iterations, 2);
    for (std::size_t i = 0; i < g.bus_count(); ++i) {
        EXPECT_NEAR(sol.v_mag[i], 1.0, 1e-8);
        EXPECT_NEAR(sol.v_ang[i], 0.0, 1e-8);
    }
}

TEST(PowerFlow, UnityPowerFactorTwoBus) {
    const auto sol = solve_powerflow(testkit::two_bus(0.0, 0.1, 0.5, 0.0));
    const cd v = two_bus_oracle(0.0, 0.1, 0.5, 0.0);
    EXPECT_NEAR(sol.v_mag[1], std::abs(v), 1e-8);
    EXPECT_NEAR(sol.v_ang[1], std::arg(v), 1e-8);
}

TEST(PowerFlow, HundredPuLoadOnDefaultGridDiverges) {
    auto g = grid::build_default_grid();
    g.buses[10].p_load = 100.0;
    EXPECT_THROW(solve_powerflow(g), NonConvergence);
}
