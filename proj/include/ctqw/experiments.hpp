#ifndef CTQW_EXPERIMENTS_HPP
#define CTQW_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "closed_form.hpp"
#include "error.hpp"
#include "laplace_oracle.hpp"
#include "propagator.hpp"

namespace ctqw {

// ---------------------------------------------------------------------------
// Phase diagram
// ---------------------------------------------------------------------------

enum class Observation { Localized, Delocalized, Inconclusive };

inline const char* to_string(Observation o) noexcept
{
    switch (o) {
    case Observation::Localized: return "Localized";
    case Observation::Delocalized: return "Delocalized";
    case Observation::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

struct GridPoint {
    double gamma0;
    double gamma1;
};

struct PhasePoint {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    /// Set when the point could not be simulated (zero coupling).
    std::optional<std::string> rejection;
    Phase predicted = Phase::Delocalized;
    Observation observed = Observation::Inconclusive;
    /// Tail-averaged P(X_t = 0).
    double indicator_value = 0.0;
    bool boundary_leak = false;
    bool contradiction = false;
    /// P(X_t = 0) per recorded sample, kept only for contradicting points.
    std::vector<double> archived_times;
    std::vector<double> archived_p0;
};

/// Localization threshold on the tail-averaged P(X_t = 0); readings below
/// epsilon / 5 count as delocalized. epsilon / 5 has to stay under the
/// smallest localized limit on the default grid, (1 - 0.95^2)^2 = 0.0095.
inline constexpr double kDefaultEpsilon = 0.04;

struct SweepOptions {
    double epsilon = kDefaultEpsilon;
    unsigned workers = 1;
};

/// n x n uniform grid over [lo, hi]^2 with the two axes removed.
inline std::vector<GridPoint> default_phase_grid(std::size_t n = 41, double lo = -1.0, double hi = 1.0)
{
    std::vector<double> axis;
    if (n == 1) {
        axis.push_back(lo);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            // Evaluate symmetric grids as (2i - (n-1)) / (n-1) so the midpoint is exactly 0.
            const double u = (2.0 * static_cast<double>(i) - static_cast<double>(n - 1)) /
                             static_cast<double>(n - 1);
            axis.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * u);
        }
    }
    std::vector<GridPoint> grid;
    for (double g0 : axis)
        for (double g1 : axis)
            if (g0 != 0.0 && g1 != 0.0)
                grid.push_back({g0, g1});
    return grid;
}

/// t_max = 200, N = 500, reference integrator, samples every 0.5.
inline WalkConfig default_sweep_budget()
{
    WalkConfig c;
    c.topology = LatticeTopology(kDefaultSites);
    c.t_max = 200.0;
    c.dt = 0.01;
    c.record_stride = 50;
    c.integrator = Integrator::Reference;
    c.record_start = 0.8 * c.t_max;
    return c;
}

inline Observation observe_phase(double indicator, double epsilon) noexcept
{
    if (indicator > epsilon)
        return Observation::Localized;
    if (indicator < epsilon / 5.0)
        return Observation::Delocalized;
    return Observation::Inconclusive;
}

inline PhasePoint evaluate_phase_point(GridPoint pt, const WalkConfig& budget, double epsilon)
{
    PhasePoint out;
    out.gamma0 = pt.gamma0;
    out.gamma1 = pt.gamma1;
    std::optional<HoppingPair> g;
    try {
        g.emplace(pt.gamma0, pt.gamma1);
    } catch (const Error& e) {
        out.rejection = std::string(to_string(e.kind())) + ": " + e.what();
        return out;
    }
    out.predicted = classify_phase(*g);

    WalkConfig cfg = budget;
    cfg.couplings = *g;
    cfg.initial.reset();
    const Trajectory traj = evolve(cfg);
    out.indicator_value = tail_average_probability(traj, 0);
    out.boundary_leak = traj.truncation_contaminated();
    out.observed = out.boundary_leak ? Observation::Inconclusive : observe_phase(out.indicator_value, epsilon);

    const bool predicted_loc = out.predicted == Phase::Localized;
    out.contradiction = (out.observed == Observation::Localized && !predicted_loc) ||
                        (out.observed == Observation::Delocalized && predicted_loc);
    if (out.contradiction) {
        for (const auto& s : traj.samples) {
            out.archived_times.push_back(s.time);
            out.archived_p0.push_back(std::norm(s.values[0]));
        }
    }
    return out;
}

/// Runs every grid point (in parallel when options.workers > 1). Results are
/// ordered by grid index; zero-coupling points come back with `rejection` set.
inline std::vector<PhasePoint> sweep_phase_diagram(const std::vector<GridPoint>& grid, const WalkConfig& budget,
                                                   const SweepOptions& options = {})
{
    budget.validate();
    std::vector<PhasePoint> results(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < grid.size(); i = next++)
            results[i] = evaluate_phase_point(grid[i], budget, options.epsilon);
    };
    const unsigned n_workers =
        std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(grid.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
    }
    return results;
}

struct SweepSummary {
    std::size_t total = 0;
    std::size_t rejected = 0;
    std::size_t localized = 0;
    std::size_t delocalized = 0;
    std::size_t inconclusive = 0;
    std::size_t contradictions = 0;
    std::size_t leaks = 0;
};

inline SweepSummary summarize(const std::vector<PhasePoint>& points)
{
    SweepSummary s;
    for (const auto& p : points) {
        ++s.total;
        if (p.rejection) {
            ++s.rejected;
            continue;
        }
        switch (p.observed) {
        case Observation::Localized: ++s.localized; break;
        case Observation::Delocalized: ++s.delocalized; break;
        case Observation::Inconclusive: ++s.inconclusive; break;
        }
        s.contradictions += p.contradiction ? 1 : 0;
        s.leaks += p.boundary_leak ? 1 : 0;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Ballistic front
// ---------------------------------------------------------------------------

inline constexpr double kDefaultFrontThreshold = 1e-6;

struct SpreadProfile {
    std::vector<double> times;
    std::vector<double> front_position;
    double fitted_speed = 0.0;
    double fit_intercept = 0.0;
    double fit_r2 = 0.0;
};

/// Rightmost site with P > threshold at each sample before the boundary-leak
/// monitor trips, and a least-squares line through those positions.
inline SpreadProfile spread_profile(const Trajectory& traj, double front_threshold = kDefaultFrontThreshold)
{
    const std::size_t clean = traj.first_leak_index().value_or(traj.samples.size());
    if (clean < 10)
        throw Error(ErrorKind::FrontReachedBoundary, "trajectory",
                    "boundary leak before 10 samples (" + std::to_string(clean) + " clean)");

    SpreadProfile prof;
    for (std::size_t i = 0; i < clean; ++i) {
        const auto& v = traj.samples[i].values;
        std::size_t front = 0;
        for (std::size_t x = v.size(); x-- > 0;) {
            if (std::norm(v[x]) > front_threshold) {
                front = x;
                break;
            }
        }
        prof.times.push_back(traj.samples[i].time);
        prof.front_position.push_back(static_cast<double>(front));
    }

    const auto n = static_cast<double>(prof.times.size());
    double mt = 0.0, mf = 0.0;
    for (std::size_t i = 0; i < prof.times.size(); ++i) {
        mt += prof.times[i];
        mf += prof.front_position[i];
    }
    mt /= n;
    mf /= n;
    double stt = 0.0, stf = 0.0, sff = 0.0;
    for (std::size_t i = 0; i < prof.times.size(); ++i) {
        const double dt = prof.times[i] - mt, df = prof.front_position[i] - mf;
        stt += dt * dt;
        stf += dt * df;
        sff += df * df;
    }
    prof.fitted_speed = stt > 0.0 ? stf / stt : 0.0;
    prof.fit_intercept = mf - prof.fitted_speed * mt;
    // A constant front is fitted exactly by a zero-slope line.
    prof.fit_r2 = sff > 0.0 ? (stf * stf) / (stt * sff) : 1.0;
    return prof;
}

// ---------------------------------------------------------------------------
// Convergence at the origin
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    double t;
    double p_sim;
    double p_limit;
};

/// Reference-propagated P(X_t = 0) at each checkpoint next to its long-time limit.
inline std::vector<ConvergenceRow> convergence_study(const HoppingPair& g, const std::vector<double>& checkpoints,
                                                     std::size_t n_sites = kDefaultSites)
{
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (!(checkpoints[i] >= 0.0) || (i > 0 && !(checkpoints[i] > checkpoints[i - 1])))
            throw Error(ErrorKind::InvalidConfig, "checkpoints",
                        "checkpoints must be non-negative and strictly increasing");
    }
    const HamiltonianOperator h = build_hamiltonian(g, LatticeTopology(n_sites));
    ChebyshevPropagator prop(h);
    std::vector<Complex> psi = delta_at_origin(n_sites).values;
    const double p_limit = limit_measure(0, g);
    std::vector<ConvergenceRow> rows;
    double t = 0.0;
    for (double target : checkpoints) {
        prop.advance(psi, target - t);
        t = target;
        if (!all_finite(psi))
            throw Error(ErrorKind::NonFiniteDetected, "checkpoints", "non-finite amplitude");
        rows.push_back({t, std::norm(psi[0]), p_limit});
    }
    return rows;
}

} // namespace ctqw

#endif // CTQW_EXPERIMENTS_HPP
