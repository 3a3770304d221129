#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pathid/bell_stats.hpp"

using namespace pathid::bell;

namespace {

const double kPi = M_PI;

// Four-fold counts of a 60 s CHSH run, rows alpha in {0, pi, pi/2, 3pi/2},
// columns beta in {pi/4, 5pi/4, 3pi/4, 7pi/4}.
CountTable measured_table() {
    const double alphas[] = {0, kPi, kPi / 2, 3 * kPi / 2};
    const double betas[] = {kPi / 4, 5 * kPi / 4, 3 * kPi / 4, 7 * kPi / 4};
    const std::uint64_t counts[4][4] = {
        {77, 295, 271, 63}, {371, 58, 107, 364}, {331, 139, 333, 54}, {129, 327, 97, 296}};
    CountTable t;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) t.add(alphas[i], betas[j], counts[i][j], 60);
    }
    return t;
}

std::vector<SweepPoint> fringe_points(double v, double scale, int n, double offset = 0.0) {
    std::vector<SweepPoint> pts;
    for (int i = 0; i < n; ++i) {
        const double x = 2 * kPi * i / n;
        pts.push_back({x, scale * (1 + v * std::cos(x + offset))});
    }
    return pts;
}

}  // namespace

TEST(Outcomes, OrthogonalSettingMapping) {
    const SettingsPair base{0.3, 1.1};
    auto s = count_setting(Outcome::Plus, Outcome::Plus, base);
    EXPECT_DOUBLE_EQ(s.alpha, 0.3);
    EXPECT_DOUBLE_EQ(s.beta, 1.1);
    s = count_setting(Outcome::Plus, Outcome::Minus, base);
    EXPECT_DOUBLE_EQ(s.alpha, 0.3);
    EXPECT_DOUBLE_EQ(s.beta, 1.1 + kPi);
    s = count_setting(Outcome::Minus, Outcome::Plus, base);
    EXPECT_DOUBLE_EQ(s.alpha, 0.3 + kPi);
    EXPECT_DOUBLE_EQ(s.beta, 1.1);
    s = count_setting(Outcome::Minus, Outcome::Minus, base);
    EXPECT_DOUBLE_EQ(s.alpha, 0.3 + kPi);
    EXPECT_DOUBLE_EQ(s.beta, 1.1 + kPi);
}

TEST(Outcomes, AngleHelpers) {
    EXPECT_NEAR(reduce_angle(-kPi / 2), 3 * kPi / 2, 1e-15);
    EXPECT_NEAR(reduce_angle(5 * kPi), kPi, 1e-14);
    EXPECT_EQ(angle_label(3 * kPi / 4), "3pi/4");
    EXPECT_EQ(angle_label(0.0), "0");
    EXPECT_EQ(angle_label(kPi), "pi");
}

TEST(CountTable, PoolsSettingsModuloTwoPi) {
    CountTable t;
    t.add(0.0, kPi / 4, 10, 60);
    t.add(2 * kPi, kPi / 4 + 2 * kPi, 5, 60);
    t.add(1e-12, kPi / 4, 1, 60);
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.find({0.0, kPi / 4}), 16u);
    EXPECT_FALSE(t.find({kPi, 0.0}).has_value());
}

TEST(Probabilities, MeasuredTable) {
    const auto t = measured_table();
    const auto p = joint_probabilities(t, {0, kPi / 4});
    EXPECT_EQ(p.counts, (std::array<std::uint64_t, 4>{77, 295, 371, 58}));
    EXPECT_EQ(p.total, 801u);
    EXPECT_DOUBLE_EQ(p.pp() + p.pm() + p.mp() + p.mm(), 1.0);
}

TEST(Correlation, MeasuredTable) {
    const auto t = measured_table();
    const double expect[] = {(77.0 + 58 - 295 - 371) / 801, (271.0 + 364 - 63 - 107) / 805,
                             (331.0 + 327 - 139 - 129) / 926, (333.0 + 296 - 54 - 97) / 780};
    const SettingsPair bases[] = {{0, kPi / 4}, {0, 3 * kPi / 4}, {kPi / 2, kPi / 4}, {kPi / 2, 3 * kPi / 4}};
    for (int i = 0; i < 4; ++i) {
        const auto e = correlation(t, bases[i]);
        EXPECT_NEAR(e.E, expect[i], 1e-15);
        EXPECT_GT(e.sigma_E, 0.0);
        EXPECT_LE(std::abs(e.E), 1.0);
    }
}

TEST(Chsh, MeasuredTable) {
    const auto r = chsh(measured_table(), optimal_settings());
    EXPECT_NEAR(r.S, 2.2745, 5e-5);
    EXPECT_NEAR(r.sigma_S, 0.0567, 1e-4);
    EXPECT_TRUE(r.violation);
    EXPECT_GT(r.violation_sigmas, 4.0);
    EXPECT_NEAR(r.violation_sigmas, (r.S - 2) / r.sigma_S, 1e-12);
    double recomputed = 0.0;
    for (int i = 0; i < 4; ++i) recomputed += kChshSigns[i] * r.terms[i].E;
    EXPECT_DOUBLE_EQ(r.S, std::abs(recomputed));
    EXPECT_GE(r.max_over_placements, r.S);
}

TEST(Chsh, IdealCorrelations) {
    const auto r = chsh(&ideal_rate, optimal_settings());
    EXPECT_NEAR(r.S, 2 * std::sqrt(2.0), 1e-12);
    EXPECT_EQ(r.sigma_S, 0.0);
    EXPECT_EQ(r.violation_sigmas, 0.0);
    EXPECT_TRUE(r.violation);
}

TEST(Chsh, FlatCountsGiveNoViolation) {
    CountTable t;
    for (const auto& s : chsh_grid(optimal_settings())) t.add(s.alpha, s.beta, 100, 60);
    const auto r = chsh(t, optimal_settings());
    EXPECT_EQ(r.S, 0.0);
    EXPECT_FALSE(r.violation);
}

TEST(Chsh, MissingEntriesAreListed) {
    CountTable t;
    t.add(0, kPi / 4, 10, 60);
    try {
        chsh(t, optimal_settings());
        FAIL() << "expected MissingEntryError";
    } catch (const MissingEntryError& e) {
        EXPECT_EQ(e.missing().size(), 15u);
    }
    CountTable zeros;
    for (const auto& s : chsh_grid(optimal_settings())) zeros.add(s.alpha, s.beta, 0, 60);
    EXPECT_THROW(chsh(zeros, optimal_settings()), std::domain_error);
}

TEST(Chsh, ReportAndCsv) {
    const auto r = chsh(measured_table(), optimal_settings());
    EXPECT_NE(chsh_report(r).find("violation_sigmas"), std::string::npos);
    const auto terms = chsh_terms_csv(r);
    EXPECT_EQ(terms.substr(0, terms.find('\n')), "term,E,sigma_E");
    const auto summary = chsh_summary_csv(r);
    EXPECT_EQ(summary.substr(0, summary.find('\n')), "S,sigma_S,violation_sigmas");
}

TEST(Chsh, DeterministicStrategiesReachTwo) {
    EXPECT_EQ(lhv_bound(), 2.0);
    EXPECT_EQ(lhv_bound({1, 1, 1, 1}), 4.0);
}

TEST(Visibility, FitRecoversNoiselessFringe) {
    const auto r = visibility(fringe_points(0.8, 200, 32, 0.4));
    EXPECT_NEAR(r.V, 0.8, 1e-9);
    EXPECT_NEAR(r.mean, 200, 1e-7);
    EXPECT_GT(r.sigma_V, 0.0);
    const auto mm = visibility(fringe_points(0.8, 200, 32), VisibilityMethod::MaxMin);
    EXPECT_NEAR(mm.V, 0.8, 1e-12);
}

TEST(Visibility, IdealAndConstantData) {
    EXPECT_NEAR(visibility(fringe_points(1.0, 300, 16)).V, 1.0, 1e-9);
    EXPECT_NEAR(visibility(fringe_points(0.0, 300, 16)).V, 0.0, 1e-12);
}

TEST(Visibility, InputChecks) {
    EXPECT_THROW(visibility(fringe_points(0.5, 100, 3)), std::invalid_argument);
    auto narrow = fringe_points(0.5, 100, 16);
    for (auto& p : narrow) p.phase /= 4;
    EXPECT_THROW(visibility(narrow), std::invalid_argument);
    EXPECT_THROW(visibility(fringe_points(0.5, 0, 16)), FitError);
}

TEST(Visibility, WernerRelation) {
    const auto s = s_from_visibility(0.828, 0.018);
    EXPECT_NEAR(s.value, 2.342, 5e-4);
    EXPECT_NEAR(s.sigma, 0.051, 5e-4);
    EXPECT_DOUBLE_EQ(s.value, 2 * std::sqrt(2.0) * 0.828);
    EXPECT_THROW(s_from_visibility(1.2, 0.0), std::invalid_argument);
}

TEST(MonteCarlo, SeededTablesAreReproducible) {
    const NoiseModel noise{0.78, 400};
    const auto grid = chsh_grid(optimal_settings());
    const auto t1 = simulate_counts(&cosine_fringe, noise, grid, 60, 99);
    const auto t2 = simulate_counts(&cosine_fringe, noise, grid, 60, 99);
    const auto t3 = simulate_counts(&cosine_fringe, noise, grid, 60, 100);
    std::vector<std::uint64_t> c1, c2, c3;
    for (const auto& e : t1.entries()) c1.push_back(e.counts);
    for (const auto& e : t2.entries()) c2.push_back(e.counts);
    for (const auto& e : t3.entries()) c3.push_back(e.counts);
    EXPECT_EQ(c1, c2);
    EXPECT_NE(c1, c3);
    const auto reps = monte_carlo_chsh(&cosine_fringe, noise, optimal_settings(), 60, 8, 5);
    const auto again = monte_carlo_chsh(&cosine_fringe, noise, optimal_settings(), 60, 8, 5);
    for (std::size_t i = 0; i < reps.size(); ++i) EXPECT_EQ(reps[i].S, again[i].S);
}

TEST(MonteCarlo, MeanCountsFollowNoiseModel) {
    const NoiseModel noise{0.5, 1000};
    const std::vector<SettingsPair> grid(400, SettingsPair{0, 0});
    const auto t = simulate_counts(&cosine_fringe, noise, grid, 120, 3);
    double sum = 0.0;
    for (const auto& e : t.entries()) sum += double(e.counts);
    // Mean 1000 * 2 * (1 + 0.5) / 2 = 1500 per entry, sd of the mean ~ 1.9.
    EXPECT_NEAR(sum / 400, 1500, 10);
}

TEST(MonteCarlo, NoiseModelValidation) {
    EXPECT_THROW((NoiseModel{1.5, 10}.validate()), std::invalid_argument);
    EXPECT_THROW((NoiseModel{0.5, -1}.validate()), std::invalid_argument);
    EXPECT_EQ(poisson_count(0.0, 1), 0u);
    EXPECT_THROW(poisson_count(-1.0, 1), std::invalid_argument);
}

TEST(MonteCarlo, SeedDerivationSeparatesStreams) {
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
    EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}
