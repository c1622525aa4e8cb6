#ifndef CTQW_CLOSED_FORM_HPP
#define CTQW_CLOSED_FORM_HPP

// Laplace-domain solution of the half-line walk started at the origin, the
// long-time limits it implies, and the stationary states of the chain.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "amplitude_field.hpp"
#include "error.hpp"
#include "lattice_hamiltonian.hpp"

namespace ctqw {

namespace detail {

inline void require_positive_s(double s)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw Error(ErrorKind::NonPositiveS, "s", "Laplace variable must be a finite positive real");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Transfer matrices
// ---------------------------------------------------------------------------

struct Mat2 {
    std::array<Complex, 4> a{}; // row-major

    Complex& operator()(int r, int c) { return a[2 * r + c]; }
    Complex operator()(int r, int c) const { return a[2 * r + c]; }

    static Mat2 identity() { return Mat2{{Complex(1), Complex(0), Complex(0), Complex(1)}}; }

    Complex det() const { return a[0] * a[3] - a[1] * a[2]; }

    double frobenius() const
    {
        double s = 0.0;
        for (const auto& v : a)
            s += std::norm(v);
        return std::sqrt(s);
    }

    friend Mat2 operator*(const Mat2& x, const Mat2& y)
    {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
        return r;
    }

    friend Mat2 operator-(const Mat2& x, const Mat2& y)
    {
        Mat2 r;
        for (int i = 0; i < 4; ++i)
            r.a[i] = x.a[i] - y.a[i];
        return r;
    }
};

/// M0 maps (F_{2n-1}, F_{2n-2}) to (F_{2n}, F_{2n-1}); M1 maps
/// (F_{2n}, F_{2n-1}) to (F_{2n+1}, F_{2n}).
struct TransferMatrices {
    Mat2 m0;
    Mat2 m1;

    Mat2 period() const { return m1 * m0; }
};

inline TransferMatrices transfer_matrices(double s, const HoppingPair& g)
{
    detail::require_positive_s(s);
    const double g0 = g.gamma0(), g1 = g.gamma1();
    const Complex is(0.0, s);
    TransferMatrices t;
    t.m0.a = {is / g1, Complex(-g0 / g1), Complex(1), Complex(0)};
    t.m1.a = {is / g0, Complex(-g1 / g0), Complex(1), Complex(0)};
    return t;
}

// ---------------------------------------------------------------------------
// Eigenvalues of M1 M0
// ---------------------------------------------------------------------------

/// q_plus, q_minus: eigenvalues of M1 M0 (q_plus * q_minus = 1, |q_minus| < 1);
/// p = {s^2 + (g0+g1)^2}{s^2 + (g0-g1)^2}.
struct SpectralPair {
    double s;
    double q_plus;
    double q_minus;
    double p;
};

/// With A = sqrt(s^2 + (g0+g1)^2) and B = sqrt(s^2 + (g0-g1)^2) we have
/// A^2 - B^2 = 4 g0 g1, so (A - B)^2 / (4 g0 g1) = 4 g0 g1 / (A + B)^2 and
/// neither root needs a subtraction.
inline SpectralPair spectral_pair(double s, const HoppingPair& g)
{
    detail::require_positive_s(s);
    const double g0 = g.gamma0(), g1 = g.gamma1();
    const double a = std::hypot(s, g0 + g1);
    const double b = std::hypot(s, g0 - g1);
    const double sum_sq = (a + b) * (a + b);
    const double four_g0g1 = 4.0 * g0 * g1;
    SpectralPair sp;
    sp.s = s;
    sp.q_plus = -sum_sq / four_g0g1;
    sp.q_minus = -four_g0g1 / sum_sq;
    sp.p = (a * a) * (b * b);
    return sp;
}

/// Closed-form (M1 M0)^n from the eigen-decomposition:
///   1/2 {q+^n + q-^n + c (q+^n - q-^n)} E11 + i s g0 d/sqrt(p) E12
///   - i s g0 d/sqrt(p) E21 + 1/2 {q+^n + q-^n - c (q+^n - q-^n)} E22,
/// with d = q+^n - q-^n and c = (s^2 - g0^2 + g1^2) / sqrt(p), sqrt(p) > 0.
inline Mat2 transfer_power_closed_form(double s, const HoppingPair& g, std::uint32_t n)
{
    const SpectralPair sp = spectral_pair(s, g);
    const double g0 = g.gamma0(), g1 = g.gamma1();
    const double root_p = std::sqrt(sp.p);
    const double qp_n = std::pow(sp.q_plus, static_cast<double>(n));
    const double qm_n = std::pow(sp.q_minus, static_cast<double>(n));
    const double sum = qp_n + qm_n;
    const double diff = qp_n - qm_n;
    const double c = (s * s - g0 * g0 + g1 * g1) / root_p;
    const Complex off(0.0, s * g0 * diff / root_p);
    return Mat2{{Complex(0.5 * (sum + c * diff)), off, -off, Complex(0.5 * (sum - c * diff))}};
}

// ---------------------------------------------------------------------------
// Laplace transform of the amplitude
// ---------------------------------------------------------------------------

/// F_x(s) for the walker started at the origin:
///   F_{2n}(s)   = (g1 + g0 q-) / (s g1) * q-^n
///   F_{2n+1}(s) = i / g1 * q-^{n+1}
inline Complex laplace_amplitude(std::size_t x, double s, const HoppingPair& g)
{
    const SpectralPair sp = spectral_pair(s, g);
    const double g0 = g.gamma0(), g1 = g.gamma1();
    const double q = sp.q_minus;
    const auto n = static_cast<double>(x / 2);
    if (x % 2 == 0)
        return Complex((g1 + g0 * q) / (s * g1) * std::pow(q, n), 0.0);
    return Complex(0.0, std::pow(q, n + 1.0) / g1);
}

struct RecurrenceReport {
    double max_residual = 0.0;
    std::size_t relations_checked = 0;
    /// Site index of the equation with the largest residual.
    std::size_t worst_site = 0;
    bool passed(double tolerance) const { return max_residual < tolerance; }
};

/// Substitutes the closed forms into the Laplace-domain equations
///   i(s F_0 - 1)   = g0 F_1
///   i s F_{2n}     = g1 F_{2n-1} + g0 F_{2n+1}   (n >= 1)
///   i s F_{2n+1}   = g0 F_{2n}   + g1 F_{2n+2}   (n >= 0)
/// for every equation with n <= n_max, and reports the largest relative
/// residual |lhs - rhs| / max(|lhs|, |terms|). Equations whose terms all
/// underflow are skipped.
inline RecurrenceReport verify_laplace_recurrences(double s, const HoppingPair& g, std::size_t n_max)
{
    detail::require_positive_s(s);
    const double g0 = g.gamma0(), g1 = g.gamma1();
    const Complex i(0.0, 1.0);
    std::vector<Complex> f(2 * n_max + 3);
    for (std::size_t x = 0; x < f.size(); ++x)
        f[x] = laplace_amplitude(x, s, g);

    RecurrenceReport report;
    auto check = [&](std::size_t site, Complex lhs, Complex t1, Complex t2) {
        const double scale = std::max({std::abs(lhs), std::abs(t1), std::abs(t2)});
        if (scale < 1e-280)
            return;
        const double r = std::abs(lhs - (t1 + t2)) / scale;
        ++report.relations_checked;
        if (r >= report.max_residual) {
            report.max_residual = r;
            report.worst_site = site;
        }
    };

    check(0, i * (s * f[0] - 1.0), g0 * f[1], Complex{});
    if (n_max == 0)
        return report;
    for (std::size_t n = 1; n <= n_max; ++n)
        check(2 * n, i * s * f[2 * n], g1 * f[2 * n - 1], g0 * f[2 * n + 1]);
    for (std::size_t n = 0; n <= n_max; ++n)
        check(2 * n + 1, i * s * f[2 * n + 1], g0 * f[2 * n], g1 * f[2 * n + 2]);
    return report;
}

// ---------------------------------------------------------------------------
// Long-time limits
// ---------------------------------------------------------------------------

enum class Phase { Localized, Delocalized };

inline const char* to_string(Phase phase) noexcept
{
    return phase == Phase::Localized ? "Localized" : "Delocalized";
}

/// Localized iff |g0| < |g1|; the line |g0| = |g1| is delocalized.
inline Phase classify_phase(const HoppingPair& g) noexcept
{
    return std::abs(g.gamma0()) < std::abs(g.gamma1()) ? Phase::Localized : Phase::Delocalized;
}

/// lim_{t->oo} psi_t(x): (1 - r^2)(-r)^n at x = 2n with r = g0/g1 when
/// |g0| < |g1|, zero otherwise and at every odd site.
inline Complex limiting_amplitude(std::size_t x, const HoppingPair& g)
{
    if (x % 2 == 1 || classify_phase(g) == Phase::Delocalized)
        return Complex{};
    const double r = g.ratio();
    return Complex((1.0 - r * r) * std::pow(-r, static_cast<double>(x / 2)), 0.0);
}

inline double limit_measure(std::size_t x, const HoppingPair& g)
{
    return std::norm(limiting_amplitude(x, g));
}

/// Sum over all sites of the limiting measure: 1 - r^2 or 0. Always < 1.
inline double total_limit_mass(const HoppingPair& g)
{
    if (classify_phase(g) == Phase::Delocalized)
        return 0.0;
    const double r = g.ratio();
    return 1.0 - r * r;
}

/// Per-site long-time values, evaluated on demand.
class LimitMeasure {
public:
    explicit LimitMeasure(HoppingPair g) : g_(g) {}

    const HoppingPair& couplings() const noexcept { return g_; }
    double operator()(std::size_t x) const { return limit_measure(x, g_); }
    double total_mass() const { return total_limit_mass(g_); }

    /// Running sum over sites until terms fall below `term_cutoff`.
    double truncated_sum(double term_cutoff = 1e-15, std::size_t max_sites = 1'000'000) const
    {
        if (classify_phase(g_) == Phase::Delocalized)
            return 0.0;
        double sum = 0.0;
        for (std::size_t x = 0; x < max_sites; x += 2) {
            const double term = (*this)(x);
            sum += term;
            if (term < term_cutoff)
                break;
        }
        return sum;
    }

private:
    HoppingPair g_;
};

// ---------------------------------------------------------------------------
// Stationary states (H phi = 0 on the half line)
// ---------------------------------------------------------------------------

/// phi(2n) = phi0 (-g0/g1)^n, phi(2n+1) = 0, truncated to n_sites.
inline AmplitudeField invariant_state(const HoppingPair& g, Complex phi0, std::size_t n_sites)
{
    if (phi0 == Complex{})
        throw Error(ErrorKind::ZeroPhi0, "phi0", "amplitude at the origin must be nonzero");
    AmplitudeField phi{std::vector<Complex>(n_sites), 0.0};
    const double step = -g.ratio();
    Complex v = phi0;
    for (std::size_t x = 0; x < n_sites; x += 2) {
        phi.values[x] = v;
        v *= step;
    }
    return phi;
}

/// |phi0| making the half-line state square-summable to one:
/// sqrt(1 - (g0/g1)^2). Requires |g0| < |g1|.
inline double normalized_phi0_modulus(const HoppingPair& g)
{
    if (classify_phase(g) == Phase::Delocalized)
        throw Error(ErrorKind::NotNormalizable, "couplings",
                    "invariant state is square-summable only when |gamma0| < |gamma1|");
    const double r = g.ratio();
    return std::sqrt(1.0 - r * r);
}

inline AmplitudeField normalized_invariant_state(const HoppingPair& g, std::size_t n_sites,
                                                 double phase = 0.0)
{
    return invariant_state(g, std::polar(normalized_phi0_modulus(g), phase), n_sites);
}

} // namespace ctqw

#endif // CTQW_CLOSED_FORM_HPP
