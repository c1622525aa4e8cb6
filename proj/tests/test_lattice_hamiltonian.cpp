#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ctqw/closed_form.hpp"
#include "ctqw/lattice_hamiltonian.hpp"
#include "dense_oracles.hpp"

using namespace ctqw;

namespace {

std::vector<Complex> delta(std::size_t n, std::size_t at)
{
    std::vector<Complex> v(n);
    v[at] = 1.0;
    return v;
}

} // namespace

TEST(HoppingPair, RejectsZeroCouplings)
{
    try {
        HoppingPair(0.0, 0.5);
        FAIL() << "expected ZeroCoupling";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroCoupling);
        EXPECT_EQ(e.field(), "gamma0");
    }
    try {
        HoppingPair(0.5, 0.0);
        FAIL() << "expected ZeroCoupling";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroCoupling);
        EXPECT_EQ(e.field(), "gamma1");
    }
    EXPECT_NO_THROW(HoppingPair(-0.2, 0.7));
}

TEST(LatticeTopology, RejectsOddOrSmallSizes)
{
    for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 501u}) {
        try {
            LatticeTopology t(n);
            FAIL() << "expected BadSize for " << n;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::BadSize);
        }
    }
    EXPECT_EQ(LatticeTopology(4).size(), 4u);
}

TEST(BuildHamiltonian, BondPatternSixSites)
{
    const auto h = build_hamiltonian(HoppingPair(1.0 / 3.0, 0.5), LatticeTopology(6));
    const std::vector<double> expected{1.0 / 3.0, 0.5, 1.0 / 3.0, 0.5, 1.0 / 3.0};
    ASSERT_EQ(h.bonds().size(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k)
        EXPECT_EQ(h.bonds()[k], expected[k]);
}

TEST(BuildHamiltonian, UniformWhenCouplingsEqual)
{
    const auto h = build_hamiltonian(HoppingPair(0.7, 0.7), LatticeTopology(12));
    for (double b : h.bonds())
        EXPECT_EQ(b, 0.7);
}

TEST(BuildHamiltonian, FourSiteMatrixWrittenOut)
{
    // Rows from the equations of motion with g0 = 1/2, g1 = 1/3.
    const double a = 0.5, b = 1.0 / 3.0;
    const double expected[4][4] = {{0, a, 0, 0}, {a, 0, b, 0}, {0, b, 0, a}, {0, 0, a, 0}};
    const auto h = build_hamiltonian(HoppingPair(a, b), LatticeTopology(4));
    for (std::size_t c = 0; c < 4; ++c) {
        const auto col = h.apply(delta(4, c));
        for (std::size_t r = 0; r < 4; ++r) {
            EXPECT_EQ(col[r].imag(), 0.0);
            EXPECT_EQ(col[r].real(), expected[r][c]) << r << "," << c;
        }
    }
}

TEST(BuildHamiltonian, BothKindsGiveSameOperator)
{
    const HoppingPair g(0.3, -0.8);
    const auto h1 = build_hamiltonian(g, LatticeTopology(10, LatticeKind::HalfLineTruncated));
    const auto h2 = build_hamiltonian(g, LatticeTopology(10, LatticeKind::FiniteLine));
    EXPECT_TRUE(std::equal(h1.bonds().begin(), h1.bonds().end(), h2.bonds().begin()));
}

TEST(Apply, DeltaAtOrigin)
{
    const auto h = build_hamiltonian(HoppingPair(1.0 / 3.0, 0.5), LatticeTopology(8));
    const auto out = h.apply(delta(8, 0));
    EXPECT_EQ(out[1], Complex(1.0 / 3.0));
    for (std::size_t x = 0; x < 8; ++x)
        if (x != 1) {
            EXPECT_EQ(out[x], Complex(0.0));
        }
}

TEST(Apply, DeltaAtTwo)
{
    const auto h = build_hamiltonian(HoppingPair(1.0 / 3.0, 0.5), LatticeTopology(8));
    const auto out = h.apply(delta(8, 2));
    const std::vector<Complex> expected{0.0, 0.5, 0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t x = 0; x < 8; ++x)
        EXPECT_EQ(out[x], expected[x]) << x;
}

TEST(Apply, InvariantStateIsAnnihilatedAwayFromTheCut)
{
    const HoppingPair g(1.0 / 3.0, 0.5);
    const std::size_t n = 40;
    const auto phi = invariant_state(g, 1.0, n);
    const auto h = build_hamiltonian(g, LatticeTopology(n));
    const auto out = h.apply(phi).values;
    for (std::size_t x = 0; x + 2 < n; ++x)
        EXPECT_LE(std::abs(out[x]), 1e-15) << x;
    // The truncated chain leaves gamma0 * phi(N-2) on the last site.
    EXPECT_NEAR(out[n - 1].real(), g.gamma0() * phi.values[n - 2].real(), 1e-18);
}

TEST(Apply, SizeMismatchThrows)
{
    const auto h = build_hamiltonian(HoppingPair(0.2, 0.4), LatticeTopology(6));
    try {
        h.apply(std::vector<Complex>(5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SizeMismatch);
    }
}

TEST(Apply, MatchesDenseProductOnSmallLattices)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n = 4; n <= 16; n += 2) {
        double g0 = u(rng), g1 = u(rng);
        if (g0 == 0.0 || g1 == 0.0)
            continue;
        const auto dense = oracle::dense_hamiltonian(g0, g1, n);
        const auto h = build_hamiltonian(HoppingPair(g0, g1), LatticeTopology(n));
        std::vector<Complex> v(n);
        Eigen::VectorXcd ev(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = {u(rng), u(rng)};
            ev(static_cast<Eigen::Index>(i)) = v[i];
        }
        const auto got = h.apply(v);
        const Eigen::VectorXcd want = dense.cast<Complex>() * ev;
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(std::abs(got[i] - want(static_cast<Eigen::Index>(i))), 0.0, 1e-15);
    }
}

TEST(Apply, SymmetricUnderRandomPairs)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + 2 * (static_cast<std::size_t>(trial) % 40);
        const auto h = build_hamiltonian(HoppingPair(u(rng) + 2.0, u(rng) - 2.0), LatticeTopology(n));
        std::vector<Complex> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        const auto ha = h.apply(a), hb = h.apply(b);
        double lhs = 0.0, rhs = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lhs += a[i].real() * hb[i].real();
            rhs += ha[i].real() * b[i].real();
            scale += std::abs(a[i].real() * hb[i].real());
        }
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * scale);
    }
}
