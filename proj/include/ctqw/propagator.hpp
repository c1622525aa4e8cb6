#ifndef CTQW_PROPAGATOR_HPP
#define CTQW_PROPAGATOR_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amplitude_field.hpp"
#include "error.hpp"
#include "lattice_hamiltonian.hpp"

namespace ctqw {

enum class Integrator { Euler, Reference };

inline const char* to_string(Integrator integrator) noexcept
{
    return integrator == Integrator::Euler ? "euler" : "reference";
}

inline constexpr double kDefaultDt = 1e-4;
inline constexpr std::size_t kDefaultSites = 500;
inline constexpr std::size_t kMaxSamples = 5001;
inline constexpr std::size_t kLeakSites = 10;
inline constexpr double kLeakThreshold = 1e-6;

// ---------------------------------------------------------------------------
// Forward Euler: phi_{t+dt} = phi_t - i dt H phi_t
// ---------------------------------------------------------------------------

namespace detail {

/// next = cur - i*dt*(H cur), written out so the hot loop stays branch-free.
inline void euler_kernel(std::span<const double> bonds, std::span<const Complex> cur,
                         std::span<Complex> next, double dt) noexcept
{
    const std::size_t n = cur.size();
    const double* b = bonds.data();
    auto update = [dt](Complex c, Complex h) {
        // c - i*dt*h
        return Complex(c.real() + dt * h.imag(), c.imag() - dt * h.real());
    };
    next[0] = update(cur[0], b[0] * cur[1]);
    for (std::size_t x = 1; x + 1 < n; ++x)
        next[x] = update(cur[x], b[x - 1] * cur[x - 1] + b[x] * cur[x + 1]);
    next[n - 1] = update(cur[n - 1], b[n - 2] * cur[n - 2]);
}

} // namespace detail

inline AmplitudeField euler_step(const AmplitudeField& psi, const HamiltonianOperator& h, double dt)
{
    if (!(dt > 0.0))
        throw Error(ErrorKind::InvalidConfig, "dt", "time step must be positive");
    if (psi.size() != h.size())
        throw Error(ErrorKind::SizeMismatch, "psi",
                    "expected " + std::to_string(h.size()) + " sites, got " + std::to_string(psi.size()));
    AmplitudeField out{std::vector<Complex>(psi.size()), psi.time + dt};
    detail::euler_kernel(h.bonds(), psi.values, out.values, dt);
    return out;
}

/// Repeated Euler steps on a double buffer.
class EulerStepper {
public:
    explicit EulerStepper(const HamiltonianOperator& h) : h_(&h) {}

    void advance(std::vector<Complex>& psi, double dt, std::uint64_t steps)
    {
        scratch_.resize(psi.size());
        for (std::uint64_t k = 0; k < steps; ++k) {
            detail::euler_kernel(h_->bonds(), psi, scratch_, dt);
            psi.swap(scratch_);
        }
    }

private:
    const HamiltonianOperator* h_;
    std::vector<Complex> scratch_;
};

// ---------------------------------------------------------------------------
// Reference propagator: Chebyshev expansion of exp(-iHt)
// ---------------------------------------------------------------------------

/// Evaluates exp(-i H dt) psi by the Chebyshev series
///   exp(-i z X) = J_0(z) + 2 sum_k (-i)^k J_k(z) T_k(X),  X = H / b, z = b dt,
/// where b bounds the spectrum. The series is cut once k > |z| and
/// |J_k(z)| drops below `truncation`; long intervals are split so that
/// |z| <= max_argument.
class ChebyshevPropagator {
public:
    explicit ChebyshevPropagator(const HamiltonianOperator& h, double truncation = 1e-18,
                                 double max_argument = 20.0)
        : h_(&h), bound_(h.spectral_bound() * (1.0 + 1e-12)), truncation_(truncation),
          max_argument_(max_argument)
    {}

    /// psi <- exp(-i H dt) psi. Negative dt runs the evolution backward.
    void advance(std::vector<Complex>& psi, double dt)
    {
        if (dt == 0.0)
            return;
        const double z_total = bound_ * std::abs(dt);
        const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(z_total / max_argument_)));
        const double sub_dt = dt / static_cast<double>(pieces);
        const auto& coeffs = coefficients(sub_dt);
        for (std::size_t p = 0; p < pieces; ++p)
            apply_series(psi, coeffs);
    }

    std::size_t last_term_count() const noexcept { return cached_.size(); }

private:
    const std::vector<Complex>& coefficients(double dt)
    {
        if (dt == cached_dt_ && !cached_.empty())
            return cached_;
        cached_dt_ = dt;
        cached_.clear();
        const double z = bound_ * std::abs(dt);
        const double sign = dt < 0.0 ? -1.0 : 1.0;
        // (-i)^k cycles through 1, -i, -1, i
        const Complex phases[4] = {Complex(1, 0), Complex(0, -1), Complex(-1, 0), Complex(0, 1)};
        for (unsigned k = 0;; ++k) {
            const double jk = std::cyl_bessel_j(static_cast<double>(k), z);
            const double weight = (k == 0 ? 1.0 : 2.0) * ((k % 2 == 1) ? sign : 1.0);
            cached_.push_back(weight * jk * phases[k % 4]);
            if (k > z && std::abs(jk) < truncation_)
                break;
        }
        return cached_;
    }

    void apply_series(std::vector<Complex>& psi, const std::vector<Complex>& coeffs)
    {
        const std::size_t n = psi.size();
        const double inv_b = 1.0 / bound_;
        const auto bonds = h_->bonds();
        t_prev_ = psi;
        t_cur_.resize(n);
        acc_.resize(n);
        // T_1 = X psi
        scaled_apply(bonds, t_prev_, t_cur_, inv_b, 1.0, nullptr);
        for (std::size_t x = 0; x < n; ++x)
            acc_[x] = coeffs[0] * t_prev_[x] + coeffs[1] * t_cur_[x];
        for (std::size_t k = 2; k < coeffs.size(); ++k) {
            // T_{k} = 2 X T_{k-1} - T_{k-2}, written into t_prev_
            scaled_apply(bonds, t_cur_, t_prev_, 2.0 * inv_b, -1.0, &t_prev_);
            t_prev_.swap(t_cur_);
            const Complex c = coeffs[k];
            for (std::size_t x = 0; x < n; ++x)
                acc_[x] += c * t_cur_[x];
        }
        psi.swap(acc_);
    }

    /// out = scale * H in + beta * prev (prev may alias out).
    static void scaled_apply(std::span<const double> b, const std::vector<Complex>& in,
                             std::vector<Complex>& out, double scale, double beta,
                             const std::vector<Complex>* prev) noexcept
    {
        const std::size_t n = in.size();
        auto combine = [&](std::size_t x, Complex hx) {
            out[x] = prev ? scale * hx + beta * (*prev)[x] : scale * hx;
        };
        combine(0, b[0] * in[1]);
        for (std::size_t x = 1; x + 1 < n; ++x)
            combine(x, b[x - 1] * in[x - 1] + b[x] * in[x + 1]);
        combine(n - 1, b[n - 2] * in[n - 2]);
    }

    const HamiltonianOperator* h_;
    double bound_;
    double truncation_;
    double max_argument_;
    double cached_dt_ = 0.0;
    std::vector<Complex> cached_;
    std::vector<Complex> t_prev_, t_cur_, acc_;
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct WalkConfig {
    HoppingPair couplings{1.0 / 3.0, 0.5};
    LatticeTopology topology{kDefaultSites};
    double dt = kDefaultDt;
    double t_max = 1.0;
    Integrator integrator = Integrator::Reference;
    /// Record every k-th step; 0 selects the default (at most kMaxSamples samples).
    std::uint64_t record_stride = 0;
    /// Samples strictly between t = 0 and this time are skipped.
    double record_start = 0.0;
    /// Empty means the walker starts at the origin.
    std::optional<AmplitudeField> initial;

    std::uint64_t total_steps() const
    {
        if (t_max == 0.0)
            return 0;
        return static_cast<std::uint64_t>(std::ceil(t_max / dt - 1e-9));
    }

    std::uint64_t effective_stride() const
    {
        if (record_stride > 0)
            return record_stride;
        const std::uint64_t steps = total_steps();
        return std::max<std::uint64_t>(1, (steps + kMaxSamples - 2) / (kMaxSamples - 1));
    }

    void validate() const
    {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw Error(ErrorKind::InvalidConfig, "dt", "time step must be positive");
        if (!(t_max >= 0.0) || !std::isfinite(t_max))
            throw Error(ErrorKind::InvalidConfig, "t_max", "horizon must be non-negative");
        if (t_max > 0.0 && dt > t_max)
            throw Error(ErrorKind::InvalidConfig, "dt", "time step exceeds horizon");
        if (!(record_start >= 0.0))
            throw Error(ErrorKind::InvalidConfig, "record_start", "must be non-negative");
        if (initial && initial->size() != topology.size())
            throw Error(ErrorKind::SizeMismatch, "initial",
                        "initial state has " + std::to_string(initial->size()) + " sites, lattice has " +
                            std::to_string(topology.size()));
    }

    AmplitudeField initial_state() const
    {
        AmplitudeField psi = initial ? *initial : delta_at_origin(topology.size());
        psi.time = 0.0;
        return psi;
    }
};

/// Time-stamped amplitudes plus per-sample monitors.
struct Trajectory {
    WalkConfig config;
    std::vector<AmplitudeField> samples;
    std::vector<double> norm_log;
    /// Probability on the rightmost kLeakSites sites, per sample.
    std::vector<double> leak_log;

    double initial_norm() const { return norm_log.empty() ? 0.0 : norm_log.front(); }

    double max_norm_drift() const
    {
        double drift = 0.0;
        for (double n : norm_log)
            drift = std::max(drift, std::abs(n - initial_norm()));
        return drift;
    }

    double max_leak() const
    {
        return leak_log.empty() ? 0.0 : *std::max_element(leak_log.begin(), leak_log.end());
    }

    /// Index of the first sample whose boundary leak exceeds the threshold.
    std::optional<std::size_t> first_leak_index(double threshold = kLeakThreshold) const
    {
        for (std::size_t i = 0; i < leak_log.size(); ++i)
            if (leak_log[i] > threshold)
                return i;
        return std::nullopt;
    }

    bool truncation_contaminated(double threshold = kLeakThreshold) const
    {
        return first_leak_index(threshold).has_value();
    }

    std::vector<double> times() const
    {
        std::vector<double> t(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            t[i] = samples[i].time;
        return t;
    }
};

inline double boundary_leak(std::span<const Complex> values)
{
    const std::size_t n = values.size();
    const std::size_t m = std::min(kLeakSites, n);
    return squared_norm(values.subspan(n - m));
}

inline Trajectory evolve(const WalkConfig& config)
{
    config.validate();
    const HamiltonianOperator h = build_hamiltonian(config.couplings, config.topology);
    const std::uint64_t steps = config.total_steps();
    const std::uint64_t stride = config.effective_stride();

    Trajectory traj;
    traj.config = config;
    AmplitudeField init = config.initial_state();
    std::vector<Complex> psi = init.values;

    auto record = [&](std::uint64_t step) {
        if (!all_finite(psi))
            throw Error(ErrorKind::NonFiniteDetected, "dt",
                        "non-finite amplitude at t = " + std::to_string(static_cast<double>(step) * config.dt));
        traj.samples.push_back(AmplitudeField{psi, static_cast<double>(step) * config.dt});
        traj.norm_log.push_back(squared_norm(psi));
        traj.leak_log.push_back(boundary_leak(psi));
    };
    record(0);

    std::vector<std::uint64_t> marks;
    for (std::uint64_t k = stride; k <= steps; k += stride)
        if (static_cast<double>(k) * config.dt >= config.record_start - 1e-12)
            marks.push_back(k);
    if (steps > 0 && (marks.empty() || marks.back() != steps))
        marks.push_back(steps);

    std::uint64_t at = 0;
    if (config.integrator == Integrator::Euler) {
        EulerStepper stepper(h);
        for (std::uint64_t k : marks) {
            stepper.advance(psi, config.dt, k - at);
            at = k;
            record(k);
        }
    } else {
        ChebyshevPropagator prop(h);
        for (std::uint64_t k : marks) {
            // Differences of integer step counts keep the time grid exact.
            prop.advance(psi, static_cast<double>(k - at) * config.dt);
            at = k;
            record(k);
        }
    }
    return traj;
}

/// exp(-iHt) applied to `psi` for a single horizon, via the reference propagator.
inline AmplitudeField propagate_reference(const HamiltonianOperator& h, const AmplitudeField& psi, double t)
{
    if (psi.size() != h.size())
        throw Error(ErrorKind::SizeMismatch, "psi", "state size does not match lattice");
    AmplitudeField out = psi;
    ChebyshevPropagator prop(h);
    prop.advance(out.values, t);
    out.time = psi.time + t;
    return out;
}

} // namespace ctqw

#endif // CTQW_PROPAGATOR_HPP
