#ifndef CTQW_LATTICE_HAMILTONIAN_HPP
#define CTQW_LATTICE_HAMILTONIAN_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "amplitude_field.hpp"
#include "error.hpp"

namespace ctqw {

/// The two real couplings of the 2-periodic chain. Both must be nonzero.
class HoppingPair {
public:
    HoppingPair(double gamma0, double gamma1) : gamma0_(gamma0), gamma1_(gamma1)
    {
        if (gamma0 == 0.0 || !std::isfinite(gamma0))
            throw Error(ErrorKind::ZeroCoupling, "gamma0", "coupling must be a finite nonzero real");
        if (gamma1 == 0.0 || !std::isfinite(gamma1))
            throw Error(ErrorKind::ZeroCoupling, "gamma1", "coupling must be a finite nonzero real");
    }

    double gamma0() const noexcept { return gamma0_; }
    double gamma1() const noexcept { return gamma1_; }
    /// gamma0 / gamma1, the ratio that governs localization.
    double ratio() const noexcept { return gamma0_ / gamma1_; }

    friend bool operator==(const HoppingPair&, const HoppingPair&) = default;

private:
    double gamma0_;
    double gamma1_;
};

enum class LatticeKind { HalfLineTruncated, FiniteLine };

inline const char* to_string(LatticeKind kind) noexcept
{
    return kind == LatticeKind::HalfLineTruncated ? "half_line_truncated" : "finite_line";
}

/// Site count plus intent. Both kinds produce the same operator; the kind is
/// metadata used by the boundary-leak policy.
class LatticeTopology {
public:
    explicit LatticeTopology(std::size_t n_sites, LatticeKind kind = LatticeKind::HalfLineTruncated)
        : n_sites_(n_sites), kind_(kind)
    {
        if (n_sites < 4 || n_sites % 2 != 0)
            throw Error(ErrorKind::BadSize, "n_sites",
                        "site count must be even and at least 4, got " + std::to_string(n_sites));
    }

    std::size_t size() const noexcept { return n_sites_; }
    LatticeKind kind() const noexcept { return kind_; }

private:
    std::size_t n_sites_;
    LatticeKind kind_;
};

/// Real symmetric tridiagonal operator with zero diagonal. Bond k joins
/// sites k and k+1 and carries gamma0 for even k, gamma1 for odd k.
class HamiltonianOperator {
public:
    HamiltonianOperator(HoppingPair couplings, LatticeTopology topology)
        : couplings_(couplings), topology_(topology), bonds_(topology.size() - 1)
    {
        for (std::size_t k = 0; k < bonds_.size(); ++k)
            bonds_[k] = (k % 2 == 0) ? couplings.gamma0() : couplings.gamma1();
    }

    const HoppingPair& couplings() const noexcept { return couplings_; }
    const LatticeTopology& topology() const noexcept { return topology_; }
    std::size_t size() const noexcept { return topology_.size(); }
    std::span<const double> bonds() const noexcept { return bonds_; }

    /// Gershgorin bound on the spectral radius.
    double spectral_bound() const noexcept
    {
        return std::abs(couplings_.gamma0()) + std::abs(couplings_.gamma1());
    }

    /// out = H * in. `in` and `out` must not alias.
    void apply(std::span<const Complex> in, std::span<Complex> out) const
    {
        const std::size_t n = size();
        if (in.size() != n || out.size() != n)
            throw Error(ErrorKind::SizeMismatch, "psi",
                        "expected " + std::to_string(n) + " sites, got " + std::to_string(in.size()));
        const double* b = bonds_.data();
        out[0] = b[0] * in[1];
        for (std::size_t x = 1; x + 1 < n; ++x)
            out[x] = b[x - 1] * in[x - 1] + b[x] * in[x + 1];
        out[n - 1] = b[n - 2] * in[n - 2];
    }

    std::vector<Complex> apply(std::span<const Complex> in) const
    {
        std::vector<Complex> out(in.size());
        apply(in, out);
        return out;
    }

    AmplitudeField apply(const AmplitudeField& psi) const
    {
        return AmplitudeField{apply(std::span<const Complex>(psi.values)), psi.time};
    }

private:
    HoppingPair couplings_;
    LatticeTopology topology_;
    std::vector<double> bonds_;
};

inline HamiltonianOperator build_hamiltonian(const HoppingPair& couplings, const LatticeTopology& topology)
{
    return HamiltonianOperator(couplings, topology);
}

} // namespace ctqw

#endif // CTQW_LATTICE_HAMILTONIAN_HPP
