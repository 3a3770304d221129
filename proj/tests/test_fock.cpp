#include <gtest/gtest.h>

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

#include "pathid/fock_state.hpp"

using namespace pathid::fock;

namespace {

TruncationPolicy exact_policy(int cap) {
    TruncationPolicy p;
    p.max_total_photons = cap;
    return p;
}

TruncationPolicy series_policy(int order, int cap = 12) {
    TruncationPolicy p;
    p.max_total_photons = cap;
    p.series_order = order;
    return p;
}

// exp(g (e^{i phi} a^dag b^dag - h.c.)) |00> in a dense box of n_max per mode.
Eigen::VectorXcd dense_two_mode_squeeze(double g, double phi, int n_max) {
    const int d = n_max + 1;
    Eigen::MatrixXcd ad = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n < n_max; ++n) ad(n + 1, n) = std::sqrt(double(n + 1));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    Eigen::MatrixXcd adad = Eigen::kroneckerProduct(ad, ad);
    Eigen::MatrixXcd gen = std::polar(g, phi) * adad - std::polar(g, -phi) * adad.adjoint();
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(d * d);
    vac(0) = 1.0;
    return gen.exp() * vac;
}

}  // namespace

TEST(FockState, VacuumHasUnitAmplitude) {
    const auto s = FockState::vacuum(4);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(s.amplitude({0, 0, 0, 0}), Complex(1.0));
    EXPECT_EQ(s.amplitude({1, 0, 0, 0}), Complex(0.0));
    EXPECT_THROW(s.amplitude({0, 0, 0}), std::invalid_argument);
}

TEST(FockState, ExactSqueezerMatchesThermalAmplitudes) {
    const double g = 0.3, phi = 0.4;
    const auto s = apply_squeezer(FockState::vacuum(2, exact_policy(40)), {0, 1, g, phi});
    for (int n = 0; n <= 20; ++n) {
        const Complex expect = std::polar(std::pow(std::tanh(g), n) / std::cosh(g), n * phi);
        const Occupation k{static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(n)};
        EXPECT_NEAR(std::abs(s.amplitude(k) - expect), 0.0, 1e-13) << "n=" << n;
    }
}

TEST(FockState, ExactSqueezerMatchesDenseMatrixExponential) {
    const double g = 0.45, phi = -1.1;
    const int n_max = 30;
    const auto dense = dense_two_mode_squeeze(g, phi, n_max);
    const auto s = apply_squeezer(FockState::vacuum(2, exact_policy(24)), {0, 1, g, phi});
    for (int n = 0; n <= 12; ++n) {
        const Complex ref = dense(n * (n_max + 1) + n);
        const Occupation k{static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(n)};
        EXPECT_NEAR(std::abs(s.amplitude(k) - ref), 0.0, 1e-10) << "n=" << n;
    }
}

TEST(FockState, SecondSqueezerOnOccupiedModesMatchesDenseOracle) {
    // Two squeezers sharing a mode, checked against a dense three-mode box.
    const double g1 = 0.2, g2 = 0.25;
    auto s = FockState::vacuum(3, exact_policy(30));
    s = apply_squeezer(s, {0, 1, g1, 0.0});
    s = apply_squeezer(s, {0, 2, g2, 0.7});

    const int n_max = 14, d = n_max + 1;
    using Sparse = Eigen::SparseMatrix<Complex>;
    Sparse ad(d, d), id(d, d);
    for (int n = 0; n < n_max; ++n) ad.insert(n + 1, n) = std::sqrt(double(n + 1));
    id.setIdentity();
    auto kron3 = [](const Sparse& x, const Sparse& y, const Sparse& z) {
        Sparse xy = Eigen::kroneckerProduct(x, y);
        return Sparse(Eigen::kroneckerProduct(xy, z));
    };
    const Sparse x01 = kron3(ad, ad, id);
    const Sparse x02 = kron3(ad, id, ad);
    const Sparse gen1 = Complex(g1) * x01 - Complex(g1) * Sparse(x01.adjoint());
    const Sparse gen2 = std::polar(g2, 0.7) * x02 - std::polar(g2, -0.7) * Sparse(x02.adjoint());
    // exp(G) v by its Taylor series; the box is deep enough for these gains.
    auto expv = [](const Sparse& gen, Eigen::VectorXcd v) {
        Eigen::VectorXcd sum = v;
        for (int k = 1; k < 200 && v.norm() > 1e-20; ++k) {
            v = (gen * v) / double(k);
            sum += v;
        }
        return sum;
    };
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(d * d * d);
    vac(0) = 1.0;
    const Eigen::VectorXcd psi = expv(gen2, expv(gen1, vac));
    for (const auto& k : std::vector<Occupation>{{0, 0, 0}, {1, 1, 0}, {1, 0, 1}, {2, 1, 1}, {3, 2, 1}, {2, 0, 2}}) {
        const Complex ref = psi((k[0] * d + k[1]) * d + k[2]);
        EXPECT_NEAR(std::abs(s.amplitude(k) - ref), 0.0, 1e-10) << format_ket(k);
    }
}

TEST(FockState, PhaseShifterMultipliesByPhotonNumber) {
    auto s = apply_squeezer(FockState::vacuum(2, exact_policy(12)), {0, 1, 0.2, 0.0});
    const auto before = s.amplitude({3, 3});
    s = apply_phase(s, {0, 0.9});
    EXPECT_NEAR(std::abs(s.amplitude({3, 3}) - before * std::polar(1.0, 3 * 0.9)), 0.0, 1e-15);
}

TEST(FockState, ZeroGainAndZeroPhaseAreIdentity) {
    const auto s = apply_squeezer(FockState::vacuum(2, exact_policy(12)), {0, 1, 0.2, 0.0});
    const auto t = apply_phase(apply_squeezer(s, {0, 1, 0.0, 0.3}), {1, 0.0});
    EXPECT_EQ(s.terms(), t.terms());
}

TEST(FockState, SeriesCoefficientsOfSingleSqueezer) {
    const auto s = apply_squeezer(FockState::vacuum(2, series_policy(2)), {0, 1, 0.1, 0.0});
    const auto vac = s.series({0, 0});
    ASSERT_EQ(vac.size(), 3u);
    EXPECT_NEAR(vac[0].real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(vac[1]), 0.0, 1e-15);
    // Entry k carries the full g^k contribution.
    EXPECT_NEAR(vac[2].real(), -0.5 * 0.01, 1e-15);
    const auto one = s.series({1, 1});
    ASSERT_GE(one.size(), 2u);
    EXPECT_NEAR(one[1].real(), 0.1, 1e-15);
    const auto two = s.series({2, 2});
    ASSERT_EQ(two.size(), 3u);
    EXPECT_NEAR(two[2].real(), 0.01, 1e-15);
    EXPECT_TRUE(s.series({3, 3}).empty());
}

TEST(FockState, VacuumReferencedSeriesFixesVacuumToOne) {
    const double g = 0.1;
    const auto s = apply_squeezer(FockState::vacuum(2, series_policy(2)), {0, 1, g, 0.0}).vacuum_referenced();
    EXPECT_NEAR(std::abs(s.amplitude({0, 0}) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude({1, 1}) - g), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude({2, 2}) - g * g), 0.0, 1e-15);
    EXPECT_THROW(FockState::vacuum(2).vacuum_referenced(), std::logic_error);
}

TEST(FockState, ExactTruncationIsReported) {
    const double g = 0.5;
    const auto s = apply_squeezer(FockState::vacuum(2, exact_policy(4)), {0, 1, g, 0.0});
    double kept = 0.0;
    for (int n = 0; n <= 2; ++n) kept += std::pow(std::tanh(g), 2 * n) / std::pow(std::cosh(g), 2);
    EXPECT_NEAR(s.squared_norm(), kept, 1e-14);
    EXPECT_NEAR(s.diagnostics().truncated_mass, 1.0 - kept, 1e-14);
    EXPECT_FALSE(s.diagnostics().warnings.empty());
}

TEST(FockState, NormIsPreservedWithoutTruncation) {
    auto s = FockState::vacuum(4, exact_policy(30));
    s = apply_squeezer(s, {0, 2, 0.15, 0.0});
    s = apply_squeezer(s, {3, 1, 0.15, 0.0});
    s = apply_phase(s, {0, 0.3});
    s = apply_squeezer(s, {0, 1, 0.15, 0.0});
    s = apply_squeezer(s, {3, 2, 0.15, 0.0});
    EXPECT_NEAR(s.squared_norm() + s.diagnostics().truncated_mass + s.diagnostics().pruned_mass, 1.0, 1e-12);
    EXPECT_LT(s.diagnostics().truncated_mass, 1e-12);
}

TEST(FockState, MomentsOfTwoModeSqueezedVacuum) {
    const double g = 0.3;
    const auto s = apply_squeezer(FockState::vacuum(2, exact_policy(60)), {0, 1, g, 0.0});
    const double nbar = std::pow(std::sinh(g), 2);
    const LadderOp n_a[] = {{0, true}, {0, false}};
    EXPECT_NEAR(s.moment(n_a).real(), nbar, 1e-12);
    const std::size_t both[] = {0, 1};
    EXPECT_NEAR(s.expectation_nn(both), 2 * nbar * nbar + nbar, 1e-12);
    const LadderOp ab[] = {{0, false}, {1, false}};
    EXPECT_NEAR(s.moment(ab).real(), std::sinh(g) * std::cosh(g), 1e-12);
}

TEST(FockState, RejectsBadSqueezers) {
    const auto s = FockState::vacuum(2);
    EXPECT_THROW(apply_squeezer(s, {0, 0, 0.1, 0.0}), std::invalid_argument);
    EXPECT_THROW(apply_squeezer(s, {0, 2, 0.1, 0.0}), std::out_of_range);
    EXPECT_THROW(apply_squeezer(s, {0, 1, -0.1, 0.0}), std::invalid_argument);
    EXPECT_THROW(apply_phase(s, {5, 0.1}), std::out_of_range);
}

TEST(FockState, PolicyValidation) {
    TruncationPolicy p;
    p.max_total_photons = -1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.series_order = -2;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(FockState, KetFormatting) {
    EXPECT_EQ(format_ket({2, 1, 1, 0}), "|2110>");
    EXPECT_EQ(format_ket({12, 0}), "|12,0>");
    EXPECT_EQ(total_photons({2, 1, 1, 0}), 4);
}
