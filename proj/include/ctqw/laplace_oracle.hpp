#ifndef CTQW_LAPLACE_ORACLE_HPP
#define CTQW_LAPLACE_ORACLE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amplitude_field.hpp"
#include "error.hpp"
#include "propagator.hpp"

namespace ctqw {

/// Truncated Laplace transform of one site's amplitude. The neglected tail
/// integral over [T, oo) is bounded by e^{-sT}/s since |psi| <= 1.
struct LaplaceSample {
    double s = 0.0;
    std::size_t x = 0;
    Complex value{};
    double truncation_T = 0.0;
    double tail_bound = 0.0;
};

namespace detail {

inline void require_site(const Trajectory& traj, std::size_t x)
{
    if (traj.samples.empty())
        throw Error(ErrorKind::EmptyWindow, "trajectory", "trajectory has no samples");
    if (x >= traj.samples.front().size())
        throw Error(ErrorKind::SizeMismatch, "x",
                    "site " + std::to_string(x) + " outside lattice of " +
                        std::to_string(traj.samples.front().size()));
}

/// Composite rule over `f` on a uniform grid of spacing h: Simpson on pairs of
/// intervals, Simpson 3/8 on a trailing triple when the count is odd.
inline Complex uniform_quadrature(std::span<const Complex> f, double h)
{
    const std::size_t m = f.size() - 1; // intervals
    if (m == 0)
        return {};
    if (m == 1)
        return 0.5 * h * (f[0] + f[1]);
    const std::size_t simpson_end = (m % 2 == 0) ? m : m - 3;
    Complex sum{};
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
        sum += (h / 3.0) * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (simpson_end != m) {
        const std::size_t i = simpson_end;
        sum += (3.0 * h / 8.0) * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
    }
    return sum;
}

} // namespace detail

/// Integral of e^{-st} psi_t(x) over the recorded span [0, T]. Samples must
/// be uniformly spaced, except that a shorter final interval is integrated
/// by the trapezoid rule.
inline LaplaceSample numeric_laplace(const Trajectory& traj, double s, std::size_t x)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw Error(ErrorKind::NonPositiveS, "s", "Laplace variable must be a finite positive real");
    detail::require_site(traj, x);

    const auto& samples = traj.samples;
    LaplaceSample out;
    out.s = s;
    out.x = x;
    out.truncation_T = samples.back().time;
    out.tail_bound = std::exp(-s * out.truncation_T) / s;
    if (samples.size() < 2)
        return out;

    const double h = samples[1].time - samples[0].time;
    const double tol = 1e-9 * h;
    std::size_t uniform_end = samples.size() - 1; // index of last sample on the uniform grid
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double step = samples[i + 1].time - samples[i].time;
        if (std::abs(step - h) > tol) {
            const bool trailing = (i + 2 == samples.size()) && step < h;
            if (!trailing)
                throw Error(ErrorKind::NonUniformGrid, "trajectory",
                            "sample spacing changes at t = " + std::to_string(samples[i].time));
            uniform_end = i;
        }
    }

    std::vector<Complex> f(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        f[i] = std::exp(-s * samples[i].time) * samples[i].values[x];

    out.value = detail::uniform_quadrature(std::span<const Complex>(f).first(uniform_end + 1), h);
    if (uniform_end + 1 < samples.size()) {
        const double tail_h = samples.back().time - samples[uniform_end].time;
        out.value += 0.5 * tail_h * (f[uniform_end] + f.back());
    }
    return out;
}

struct FinalValueEstimate {
    Complex value{};
    double uncertainty = 0.0;
    std::vector<double> s_grid;
    /// Tail-corrected s F_T(s) at each grid point.
    std::vector<Complex> scaled_values;
};

/// Largest tolerated tail share: e^{-sT} (the tail's contribution to sF,
/// whose magnitude is at most 1) must stay below this.
inline constexpr double kMaxTailShare = 0.1;

/// Halving sequence from 0.1 down to the smallest s whose tail share is acceptable for horizon T.
inline std::vector<double> default_s_grid(double horizon)
{
    std::vector<double> grid;
    const double s_min = std::log(1.0 / kMaxTailShare) / horizon;
    for (double s = 0.1; s >= s_min && grid.size() < 6; s *= 0.5)
        grid.push_back(s);
    return grid;
}

/// Estimates lim_{t->oo} psi_t(x) = lim_{s->0+} s F_x(s).
///
/// Each grid point contributes g(s) = s F_T(s) / (1 - e^{-sT}), which is exact
/// for a trajectory that is constant after transients; the values are then
/// extrapolated to s = 0 by Neville's scheme in s. Odd sites vanish only
/// linearly in s, so an expansion in s^2 would leave a bias there. The uncertainty is the change caused by dropping the largest s.
inline FinalValueEstimate final_value_estimate(const Trajectory& traj, std::size_t x,
                                               std::vector<double> s_grid = {})
{
    detail::require_site(traj, x);
    const double horizon = traj.samples.back().time;
    if (s_grid.empty())
        s_grid = default_s_grid(horizon);
    if (s_grid.empty())
        throw Error(ErrorKind::TailDominates, "trajectory",
                    "horizon too short for any s in the default grid");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 0.0))
            throw Error(ErrorKind::NonPositiveS, "s_grid", "grid values must be positive");
        if (i > 0 && !(s_grid[i] < s_grid[i - 1]))
            throw Error(ErrorKind::InvalidConfig, "s_grid", "grid must be strictly decreasing");
    }
    const double s_min = s_grid.back();
    if (std::exp(-s_min * horizon) > kMaxTailShare)
        throw Error(ErrorKind::TailDominates, "s_grid",
                    "tail e^{-sT}/s exceeds 10% of the amplitude bound 1/s at s = " + std::to_string(s_min));

    FinalValueEstimate est;
    est.s_grid = s_grid;
    std::vector<double> u;
    for (double s : s_grid) {
        const LaplaceSample ls = numeric_laplace(traj, s, x);
        est.scaled_values.push_back(s * ls.value / (1.0 - std::exp(-s * horizon)));
        u.push_back(s);
    }

    auto neville_at_zero = [&](std::size_t first) {
        std::vector<Complex> p(est.scaled_values.begin() + static_cast<std::ptrdiff_t>(first),
                               est.scaled_values.end());
        std::vector<double> nodes(u.begin() + static_cast<std::ptrdiff_t>(first), u.end());
        for (std::size_t level = 1; level < p.size(); ++level)
            for (std::size_t i = 0; i + level < p.size(); ++i)
                p[i] = (nodes[i + level] * p[i] - nodes[i] * p[i + 1]) / (nodes[i + level] - nodes[i]);
        return p[0];
    };

    est.value = neville_at_zero(0);
    if (s_grid.size() >= 2)
        est.uncertainty = std::abs(est.value - neville_at_zero(1));
    return est;
}

struct TimeWindow {
    double lo;
    double hi;
};

/// Final 20% of the recorded span.
inline TimeWindow default_tail_window(const Trajectory& traj)
{
    const double t_end = traj.samples.empty() ? 0.0 : traj.samples.back().time;
    return {0.8 * t_end, t_end};
}

namespace detail {

template <class Fn>
std::size_t for_each_in_window(const Trajectory& traj, TimeWindow window, Fn&& fn)
{
    if (!(window.lo <= window.hi))
        throw Error(ErrorKind::EmptyWindow, "window", "window bounds are reversed");
    const double slack = 1e-9 * std::max(1.0, std::abs(window.hi));
    std::size_t count = 0;
    for (const auto& sample : traj.samples) {
        if (sample.time >= window.lo - slack && sample.time <= window.hi + slack) {
            fn(sample);
            ++count;
        }
    }
    if (count == 0)
        throw Error(ErrorKind::EmptyWindow, "window",
                    "no samples in [" + std::to_string(window.lo) + ", " + std::to_string(window.hi) + "]");
    return count;
}

} // namespace detail

/// Mean of |psi_t(x)|^2 over the samples recorded inside `window`.
inline double tail_average_probability(const Trajectory& traj, std::size_t x, TimeWindow window)
{
    detail::require_site(traj, x);
    double sum = 0.0;
    const std::size_t count =
        detail::for_each_in_window(traj, window, [&](const AmplitudeField& a) { sum += std::norm(a.values[x]); });
    return sum / static_cast<double>(count);
}

inline double tail_average_probability(const Trajectory& traj, std::size_t x)
{
    return tail_average_probability(traj, x, default_tail_window(traj));
}

/// Per-site version of tail_average_probability.
inline std::vector<double> tail_average_distribution(const Trajectory& traj, TimeWindow window)
{
    if (traj.samples.empty())
        throw Error(ErrorKind::EmptyWindow, "trajectory", "trajectory has no samples");
    std::vector<double> avg(traj.samples.front().size(), 0.0);
    const std::size_t count = detail::for_each_in_window(traj, window, [&](const AmplitudeField& a) {
        for (std::size_t x = 0; x < avg.size(); ++x)
            avg[x] += std::norm(a.values[x]);
    });
    for (double& v : avg)
        v /= static_cast<double>(count);
    return avg;
}

} // namespace ctqw

#endif // CTQW_LAPLACE_ORACLE_HPP
