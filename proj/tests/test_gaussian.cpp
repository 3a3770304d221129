#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pathid/gaussian.hpp"
#include "pathid/interferometer.hpp"

using namespace pathid;
using namespace pathid::gaussian;

namespace {

double eq_closed_form_nn(double g) {
    const double s = std::sinh(g), c = std::cosh(g);
    return 6 * std::pow(s, 4) * std::pow(c, 4) + s * s * std::pow(c, 6) + std::pow(s, 6) * c * c;
}

enum : std::size_t { a1, a2, b1, b2 };

}  // namespace

TEST(Bogoliubov, SqueezerEntries) {
    const double g = 0.3, phi = 0.5;
    const auto t = squeezer_transform(3, 0, 2, g, phi);
    EXPECT_NEAR(t.A(0, 0).real(), std::cosh(g), 1e-15);
    EXPECT_NEAR(t.A(2, 2).real(), std::cosh(g), 1e-15);
    EXPECT_NEAR(t.A(1, 1).real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(t.B(0, 2) - std::polar(std::sinh(g), phi)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(t.B(2, 0) - std::polar(std::sinh(g), phi)), 0.0, 1e-15);
    EXPECT_TRUE(t.is_symplectic());
}

TEST(Bogoliubov, RandomCompositionChainsStaySymplectic) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> gain(0.0, 0.3), phase(-M_PI, M_PI);
    std::uniform_int_distribution<std::size_t> mode(0, 3);
    for (int trial = 0; trial < 50; ++trial) {
        auto t = BogoliubovTransform::identity(4);
        for (int step = 0; step < 12; ++step) {
            if (step % 3 == 2) {
                t = compose(t, phase_transform(4, mode(rng), phase(rng)));
            } else {
                std::size_t a = mode(rng), b = mode(rng);
                while (b == a) b = mode(rng);
                t = compose(t, squeezer_transform(4, a, b, gain(rng), phase(rng)));
            }
        }
        EXPECT_LT(t.symplectic_defect(), 1e-12) << "trial " << trial;
    }
}

TEST(Bogoliubov, RejectsBadArguments) {
    EXPECT_THROW(squeezer_transform(2, 0, 0, 0.1), std::invalid_argument);
    EXPECT_THROW(squeezer_transform(2, 0, 2, 0.1), std::out_of_range);
    EXPECT_THROW(squeezer_transform(2, 0, 1, -0.1), std::invalid_argument);
    EXPECT_THROW(compose(BogoliubovTransform::identity(2), BogoliubovTransform::identity(3)), std::invalid_argument);
}

TEST(Wick, PairingCounts) {
    EXPECT_EQ(wick_pairings(0).size(), 1u);
    EXPECT_EQ(wick_pairings(2).size(), 1u);
    EXPECT_EQ(wick_pairings(4).size(), 3u);
    EXPECT_EQ(wick_pairings(6).size(), 15u);
    EXPECT_EQ(wick_pairings(8).size(), 105u);
    EXPECT_TRUE(wick_pairings(3).empty());
}

TEST(Wick, ThermalMomentsOfTwoModeSqueezer) {
    const double g = 0.4;
    const auto t = squeezer_transform(2, 0, 1, g);
    const double nbar = std::pow(std::sinh(g), 2);
    const LadderOp n_a[] = {{0, true}, {0, false}};
    EXPECT_NEAR(vacuum_moment(t, n_a).value.real(), nbar, 1e-14);
    const LadderOp nn[] = {{0, true}, {0, false}, {1, true}, {1, false}};
    EXPECT_NEAR(vacuum_moment(t, nn).value.real(), 2 * nbar * nbar + nbar, 1e-13);
    // <(a^dag)^2 a^2> of a thermal mode is 2 nbar^2.
    const LadderOp aadag[] = {{0, true}, {0, true}, {0, false}, {0, false}};
    EXPECT_NEAR(vacuum_moment(t, aadag).value.real(), 2 * nbar * nbar, 1e-13);
}

TEST(Wick, OddAndOversizedRequests) {
    const auto t = squeezer_transform(2, 0, 1, 0.2);
    const LadderOp odd[] = {{0, true}, {0, false}, {1, false}};
    const auto r = vacuum_moment(t, odd);
    EXPECT_TRUE(r.odd_length);
    EXPECT_EQ(r.value, Complex(0.0));
    const std::vector<LadderOp> nine(9, LadderOp{0, false});
    EXPECT_THROW(vacuum_moment(t, nine), std::invalid_argument);
}

TEST(Wick, LocalCorrelationMatchesClosedForm) {
    for (double g : {0.05, 0.096, 0.15}) {
        for (double beta : {0.0, 0.7, M_PI / 2, M_PI, 4.0}) {
            const auto t = interferometer::heisenberg_transform(interferometer::canonical_layout(g),
                                                                {{"alpha", 0.0}, {"beta", beta}});
            const LadderOp ops[] = {{a1, true}, {a1, false}, {a2, true}, {a2, false}};
            EXPECT_NEAR(vacuum_moment(t, ops).value.real(), eq_closed_form_nn(g), 1e-10)
                << "g=" << g << " beta=" << beta;
        }
    }
}

TEST(Wick, AliceMomentsIgnoreBetaAndBobMomentsIgnoreAlpha) {
    const auto layout = interferometer::canonical_layout(0.12);
    const std::vector<std::vector<LadderOp>> alice = {
        {{a1, true}, {a1, false}},
        {{a1, false}, {a2, false}},
        {{a1, true}, {a2, true}, {a2, false}, {a1, false}},
        {{a1, true}, {a1, true}, {a1, false}, {a1, false}},
        {{a2, false}, {a1, true}, {a2, true}, {a1, false}, {a1, true}, {a2, false}},
    };
    auto swap_side = [](std::vector<LadderOp> ops) {
        for (auto& op : ops) op.mode = op.mode == a1 ? b2 : (op.mode == a2 ? b1 : op.mode);
        return ops;
    };
    for (const auto& ops : alice) {
        const auto ref_a = vacuum_moment(interferometer::heisenberg_transform(layout, {{"alpha", 0.3}, {"beta", 0.0}}), ops);
        const auto bob = swap_side(ops);
        const auto ref_b = vacuum_moment(interferometer::heisenberg_transform(layout, {{"alpha", 0.0}, {"beta", 0.3}}), bob);
        for (double x : {0.5, 1.9, M_PI, 5.0}) {
            const auto ta = interferometer::heisenberg_transform(layout, {{"alpha", 0.3}, {"beta", x}});
            EXPECT_NEAR(std::abs(vacuum_moment(ta, ops).value - ref_a.value), 0.0, 1e-10);
            const auto tb = interferometer::heisenberg_transform(layout, {{"alpha", x}, {"beta", 0.3}});
            EXPECT_NEAR(std::abs(vacuum_moment(tb, bob).value - ref_b.value), 0.0, 1e-10);
        }
    }
}

TEST(Bogoliubov, OutputModesOfCanonicalLayout) {
    // Output-mode coefficients at alpha = 0.  The phase convention here is
    // a -> e^{i theta} a, so beta enters with the sign opposite to the
    // textbook listing of these expressions.
    const double g = 0.2, beta = 0.8;
    const auto t =
        interferometer::heisenberg_transform(interferometer::canonical_layout(g), {{"alpha", 0.0}, {"beta", beta}});
    const double c2 = std::pow(std::cosh(g), 2), s2 = std::pow(std::sinh(g), 2), sc = std::sinh(g) * std::cosh(g);
    const Complex e = std::polar(1.0, -beta);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4, 4), B = Eigen::MatrixXcd::Zero(4, 4);
    A(a1, a1) = c2, A(a1, b2) = s2, B(a1, b1) = sc, B(a1, a2) = sc;
    A(a2, a2) = c2, A(a2, b1) = s2, B(a2, a1) = sc, B(a2, b2) = sc;
    A(b1, b1) = c2, A(b1, a2) = e * s2, B(b1, a1) = sc, B(b1, b2) = e * sc;
    A(b2, b2) = std::conj(e) * c2, A(b2, a1) = s2, B(b2, b1) = sc, B(b2, a2) = std::conj(e) * sc;
    EXPECT_LT((t.A - A).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((t.B - B).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Bogoliubov, AlphaAndBetaEnterOnlyThroughTheirSum) {
    const auto layout = interferometer::canonical_layout(0.1);
    const LadderOp ops[] = {{a1, true}, {a2, true}, {b1, true}, {b2, true}, {b2, false}, {b1, false}, {a2, false}, {a1, false}};
    const auto ref = vacuum_moment(interferometer::heisenberg_transform(layout, {{"alpha", 1.1}, {"beta", 0.0}}), ops);
    const auto moved = vacuum_moment(interferometer::heisenberg_transform(layout, {{"alpha", 0.4}, {"beta", 0.7}}), ops);
    EXPECT_NEAR(std::abs(ref.value - moved.value), 0.0, 1e-14);
}

TEST(Fringe, VisibilityOfSamples) {
    std::vector<double> flat(16, 3.0);
    EXPECT_DOUBLE_EQ(fringe_visibility(flat), 0.0);
    std::vector<double> fringe;
    for (int i = 0; i < 16; ++i) fringe.push_back(2.0 + 1.0 * std::cos(2 * M_PI * i / 16));
    EXPECT_NEAR(fringe_visibility(fringe), 0.5, 1e-15);
    EXPECT_THROW(fringe_visibility(std::vector<double>(4, 1.0)), std::invalid_argument);
    EXPECT_THROW(fringe_visibility(std::vector<double>(8, 0.0)), std::domain_error);
}
