#ifndef CTQW_AMPLITUDE_FIELD_HPP
#define CTQW_AMPLITUDE_FIELD_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ctqw {

using Complex = std::complex<double>;

/// Complex amplitude per lattice site at a fixed time.
struct AmplitudeField {
    std::vector<Complex> values;
    double time = 0.0;

    std::size_t size() const noexcept { return values.size(); }
    Complex operator[](std::size_t x) const { return values[x]; }
};

/// Walker launched at the edge: psi(0) = 1, zero elsewhere.
inline AmplitudeField delta_at_origin(std::size_t n_sites)
{
    AmplitudeField psi{std::vector<Complex>(n_sites, Complex{}), 0.0};
    if (n_sites > 0)
        psi.values[0] = 1.0;
    return psi;
}

inline double squared_norm(std::span<const Complex> values) noexcept
{
    double sum = 0.0;
    for (const auto& v : values)
        sum += std::norm(v);
    return sum;
}

inline bool all_finite(std::span<const Complex> values) noexcept
{
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            return false;
    return true;
}

/// P(x) = |psi(x)|^2.
inline std::vector<double> probability_distribution(const AmplitudeField& psi)
{
    std::vector<double> p(psi.size());
    for (std::size_t x = 0; x < psi.size(); ++x)
        p[x] = std::norm(psi.values[x]);
    return p;
}

} // namespace ctqw

#endif // CTQW_AMPLITUDE_FIELD_HPP
