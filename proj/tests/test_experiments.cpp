#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "ctqw/closed_form.hpp"
#include "ctqw/experiments.hpp"

using namespace ctqw;

namespace {

WalkConfig reference_config(double g0, double g1, double t_max, std::size_t n = 500)
{
    WalkConfig c;
    c.couplings = HoppingPair(g0, g1);
    c.topology = LatticeTopology(n);
    c.t_max = t_max;
    c.dt = 0.01;
    c.record_stride = 100;
    c.integrator = Integrator::Reference;
    return c;
}

} // namespace

TEST(PhaseGrid, DefaultGridDropsAxes)
{
    const auto grid = default_phase_grid();
    EXPECT_EQ(grid.size(), 40u * 40u);
    std::set<double> values;
    for (const auto& p : grid) {
        EXPECT_NE(p.gamma0, 0.0);
        EXPECT_NE(p.gamma1, 0.0);
        values.insert(p.gamma0);
    }
    EXPECT_EQ(values.size(), 40u);
    EXPECT_EQ(*values.begin(), -1.0);
    EXPECT_EQ(*values.rbegin(), 1.0);
    EXPECT_TRUE(values.count(0.5) && values.count(-0.5));
}

TEST(PhaseGrid, ObservationThresholds)
{
    EXPECT_EQ(observe_phase(0.3, 0.05), Observation::Localized);
    EXPECT_EQ(observe_phase(0.005, 0.05), Observation::Delocalized);
    EXPECT_EQ(observe_phase(0.02, 0.05), Observation::Inconclusive);
    EXPECT_LT(kDefaultEpsilon / 5.0, limit_measure(0, HoppingPair(0.95, 1.0)));
}

TEST(SweepPhaseDiagram, PaperPointsAndRejection)
{
    const std::vector<GridPoint> grid{{1.0 / 3.0, 0.5}, {0.5, 1.0 / 3.0}, {-1.0 / 3.0, 0.5}, {0.0, 0.5}};
    const auto pts = sweep_phase_diagram(grid, default_sweep_budget());
    ASSERT_EQ(pts.size(), 4u);

    EXPECT_EQ(pts[0].predicted, Phase::Localized);
    EXPECT_EQ(pts[0].observed, Observation::Localized);
    EXPECT_NEAR(pts[0].indicator_value, 25.0 / 81.0, 0.02);

    EXPECT_EQ(pts[1].predicted, Phase::Delocalized);
    EXPECT_EQ(pts[1].observed, Observation::Delocalized);

    EXPECT_EQ(pts[2].predicted, Phase::Localized);
    EXPECT_EQ(pts[2].observed, Observation::Localized);

    ASSERT_TRUE(pts[3].rejection.has_value());
    EXPECT_NE(pts[3].rejection->find("ZeroCoupling"), std::string::npos);

    const auto summary = summarize(pts);
    EXPECT_EQ(summary.rejected, 1u);
    EXPECT_EQ(summary.contradictions, 0u);
    for (const auto& p : pts)
        EXPECT_FALSE(p.contradiction);
}

TEST(SweepPhaseDiagram, OrderingIndependentOfWorkerCount)
{
    auto grid = default_phase_grid(5);
    grid.push_back({0.0, 0.0});
    auto budget = default_sweep_budget();
    budget.t_max = 40.0;
    budget.record_start = 32.0;
    const auto serial = sweep_phase_diagram(grid, budget, {kDefaultEpsilon, 1});
    const auto parallel = sweep_phase_diagram(grid, budget, {kDefaultEpsilon, 3});
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].gamma0, parallel[i].gamma0);
        EXPECT_EQ(serial[i].gamma1, parallel[i].gamma1);
        EXPECT_EQ(serial[i].indicator_value, parallel[i].indicator_value);
        EXPECT_EQ(serial[i].observed, parallel[i].observed);
    }
}

TEST(SweepPhaseDiagram, SignFlipsLeaveOriginTraceUnchanged)
{
    auto trace = [](double g0, double g1) {
        const auto traj = evolve(reference_config(g0, g1, 100.0));
        std::vector<double> p;
        for (const auto& s : traj.samples)
            p.push_back(std::norm(s.values[0]));
        return p;
    };
    for (auto [a, b] : {std::pair{1.0 / 3.0, 0.5}, std::pair{0.5, 1.0 / 3.0}}) {
        const auto base = trace(a, b);
        for (auto [sa, sb] : {std::pair{-1.0, 1.0}, std::pair{1.0, -1.0}, std::pair{-1.0, -1.0}}) {
            const auto flipped = trace(sa * a, sb * b);
            ASSERT_EQ(base.size(), flipped.size());
            for (std::size_t i = 0; i < base.size(); ++i)
                EXPECT_NEAR(base[i], flipped[i], 1e-10);
        }
        EXPECT_EQ(classify_phase(HoppingPair(a, b)), classify_phase(HoppingPair(-a, -b)));
    }
}

TEST(SpreadProfile, StationaryStateHasNoSpeed)
{
    const HoppingPair g(1.0 / 3.0, 0.5);
    auto c = reference_config(1.0 / 3.0, 0.5, 50.0, 100);
    c.initial = normalized_invariant_state(g, 100);
    const auto prof = spread_profile(evolve(c));
    for (double f : prof.front_position)
        EXPECT_EQ(f, prof.front_position.front());
    EXPECT_NEAR(prof.fitted_speed, 0.0, 1e-12);
    EXPECT_EQ(prof.fit_r2, 1.0);
}

TEST(SpreadProfile, BallisticInBothPhases)
{
    for (auto [a, b] : {std::pair{1.0 / 3.0, 0.5}, std::pair{0.5, 1.0 / 3.0}}) {
        const auto prof = spread_profile(evolve(reference_config(a, b, 400.0)), 1e-6);
        EXPECT_GT(prof.fit_r2, 0.99);
        EXPECT_GT(prof.fitted_speed, 0.0);
        // Jitter of the threshold crossing stays within two unit cells.
        for (std::size_t i = 1; i < prof.front_position.size(); ++i)
            EXPECT_GE(prof.front_position[i], prof.front_position[i - 1] - 4.0);
    }
}

TEST(SpreadProfile, FrontReachedBoundary)
{
    auto c = reference_config(0.9, 0.9, 40.0, 10);
    c.record_stride = 10;
    try {
        spread_profile(evolve(c));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FrontReachedBoundary);
    }
}

TEST(ConvergenceStudy, LocalizedGapShrinks)
{
    const HoppingPair g(1.0 / 3.0, 0.5);
    const auto rows = convergence_study(g, {0.0, 100.0, 250.0, 500.0});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(rows[0].p_sim, 1.0);
    EXPECT_NEAR(rows[0].p_sim - rows[0].p_limit, 56.0 / 81.0, 1e-15);
    for (std::size_t i = 2; i < rows.size(); ++i)
        EXPECT_LT(std::abs(rows[i].p_sim - rows[i].p_limit), std::abs(rows[i - 1].p_sim - rows[i - 1].p_limit));
}

TEST(ConvergenceStudy, DelocalizedDecays)
{
    const auto rows = convergence_study(HoppingPair(0.5, 1.0 / 3.0), {100.0, 250.0, 500.0});
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LT(rows[i].p_sim, rows[i - 1].p_sim);
    for (const auto& r : rows)
        EXPECT_EQ(r.p_limit, 0.0);
}

TEST(ConvergenceStudy, RejectsUnorderedCheckpoints)
{
    EXPECT_THROW(convergence_study(HoppingPair(0.3, 0.5), {10.0, 5.0}), Error);
}
