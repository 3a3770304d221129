#include "pathid/bell_stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "pathid/angle_expr.hpp"
#include "pathid/parallel.hpp"

namespace pathid::bell {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleResolution = 1e-6;

std::string setting_name(SettingsPair s) {
    return "N(alpha=" + angle_label(s.alpha) + ", beta=" + angle_label(s.beta) + ")";
}

std::array<SettingsPair, 4> outcome_settings(SettingsPair base) {
    return {count_setting(Outcome::Plus, Outcome::Plus, base), count_setting(Outcome::Plus, Outcome::Minus, base),
            count_setting(Outcome::Minus, Outcome::Plus, base), count_setting(Outcome::Minus, Outcome::Minus, base)};
}

double poisson_variance(double n) { return std::max(n, 1.0); }

CorrelationResult correlation_from_counts(const std::array<std::uint64_t, 4>& n, std::uint64_t total) {
    const auto signed_sum = static_cast<long long>(n[0]) + static_cast<long long>(n[3]) -
                            static_cast<long long>(n[1]) - static_cast<long long>(n[2]);
    const double T = double(total);
    const double E = double(signed_sum) / T;
    const std::array<double, 4> grad = {(1 - E) / T, (-1 - E) / T, (-1 - E) / T, (1 - E) / T};
    double var = 0.0;
    for (std::size_t i = 0; i < 4; ++i) var += grad[i] * grad[i] * poisson_variance(double(n[i]));
    return {E, std::sqrt(var)};
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

SettingsPair count_setting(Outcome a, Outcome b, SettingsPair base) {
    const double shift_a = a == Outcome::Plus ? 0.0 : kPi;
    const double shift_b = b == Outcome::Plus ? 0.0 : kPi;
    return {base.alpha + shift_a, base.beta + shift_b};
}

double reduce_angle(double angle) {
    double r = std::fmod(angle, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    return r;
}

std::string angle_label(double angle) {
    const double quarters = reduce_angle(angle) / (kPi / 4);
    const double nearest = std::round(quarters);
    if (std::abs(quarters - nearest) < 1e-9) {
        static const char* names[] = {"0", "pi/4", "pi/2", "3pi/4", "pi", "5pi/4", "3pi/2", "7pi/4"};
        return names[static_cast<int>(nearest) % 8];
    }
    return format_double(angle);
}

CountTable::Key CountTable::key(double alpha, double beta) {
    const long long full = std::llround(2.0 * kPi / kAngleResolution);
    auto k = [full](double angle) {
        long long v = std::llround(reduce_angle(angle) / kAngleResolution);
        return v >= full ? v - full : v;
    };
    return {k(alpha), k(beta)};
}

void CountTable::add(double alpha, double beta, std::uint64_t counts, double duration_s) {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw std::invalid_argument("settings must be finite");
    if (!(duration_s >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    entries_.push_back({alpha, beta, counts, duration_s});
    totals_[key(alpha, beta)] += counts;
}

std::optional<std::uint64_t> CountTable::find(SettingsPair setting) const {
    auto it = totals_.find(key(setting.alpha, setting.beta));
    if (it == totals_.end()) return std::nullopt;
    return it->second;
}

MissingEntryError::MissingEntryError(std::vector<std::string> missing)
    : std::runtime_error([&] {
          std::string msg = "missing count entries:";
          for (const auto& m : missing) msg += " " + m;
          return msg;
      }()),
      missing_(std::move(missing)) {}

JointProbabilities joint_probabilities(const CountTable& counts, SettingsPair base) {
    JointProbabilities out;
    std::vector<std::string> missing;
    const auto settings = outcome_settings(base);
    for (std::size_t i = 0; i < 4; ++i) {
        if (auto n = counts.find(settings[i])) {
            out.counts[i] = *n;
            out.total += *n;
        } else {
            missing.push_back(setting_name(settings[i]));
        }
    }
    if (!missing.empty()) throw MissingEntryError(std::move(missing));
    if (out.total == 0) throw std::domain_error("all four counts are zero at " + setting_name(base));
    return out;
}

RealJointProbabilities joint_probabilities(const std::function<double(double, double)>& rate, SettingsPair base) {
    std::array<double, 4> n{};
    const auto settings = outcome_settings(base);
    for (std::size_t i = 0; i < 4; ++i) n[i] = rate(settings[i].alpha, settings[i].beta);
    const double total = n[0] + n[1] + n[2] + n[3];
    if (!(total > 0.0)) throw std::domain_error("all four rates are zero at " + setting_name(base));
    return {n[0] / total, n[1] / total, n[2] / total, n[3] / total};
}

CorrelationResult correlation(const CountTable& counts, SettingsPair base) {
    const auto p = joint_probabilities(counts, base);
    return correlation_from_counts(p.counts, p.total);
}

CorrelationResult correlation(const std::function<double(double, double)>& rate, SettingsPair base) {
    const auto p = joint_probabilities(rate, base);
    return {p.pp - p.pm - p.mp + p.mm, 0.0};
}

CHSHSettings optimal_settings() { return {0.0, kPi / 2, kPi / 4, 3 * kPi / 4}; }

CHSHResult chsh_from_terms(const std::array<CorrelationResult, 4>& terms, const CHSHSettings& settings) {
    CHSHResult out;
    out.terms = terms;
    out.settings = settings;
    double sum = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        sum += kChshSigns[i] * terms[i].E;
        var += terms[i].sigma_E * terms[i].sigma_E;
    }
    out.S = std::abs(sum);
    out.sigma_S = std::sqrt(var);
    out.violation = out.S - 2.0 > 0.0;
    out.violation_sigmas = out.sigma_S > 0.0 ? (out.S - 2.0) / out.sigma_S : 0.0;
    for (std::size_t minus = 0; minus < 4; ++minus) {
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i) s += (i == minus ? -1.0 : 1.0) * terms[i].E;
        out.max_over_placements = std::max(out.max_over_placements, std::abs(s));
    }
    return out;
}

CHSHResult chsh(const CountTable& counts, const CHSHSettings& settings) {
    const std::array<SettingsPair, 4> bases = {SettingsPair{settings.alpha1, settings.beta1},
                                               SettingsPair{settings.alpha1, settings.beta2},
                                               SettingsPair{settings.alpha2, settings.beta1},
                                               SettingsPair{settings.alpha2, settings.beta2}};
    std::vector<std::string> missing;
    for (const auto& s : chsh_grid(settings)) {
        if (!counts.find(s)) {
            auto name = setting_name(s);
            if (std::find(missing.begin(), missing.end(), name) == missing.end()) missing.push_back(name);
        }
    }
    if (!missing.empty()) throw MissingEntryError(std::move(missing));
    std::array<CorrelationResult, 4> terms;
    for (std::size_t i = 0; i < 4; ++i) terms[i] = correlation(counts, bases[i]);
    return chsh_from_terms(terms, settings);
}

CHSHResult chsh(const std::function<double(double, double)>& rate, const CHSHSettings& settings) {
    const std::array<SettingsPair, 4> bases = {SettingsPair{settings.alpha1, settings.beta1},
                                               SettingsPair{settings.alpha1, settings.beta2},
                                               SettingsPair{settings.alpha2, settings.beta1},
                                               SettingsPair{settings.alpha2, settings.beta2}};
    std::array<CorrelationResult, 4> terms;
    for (std::size_t i = 0; i < 4; ++i) terms[i] = correlation(rate, bases[i]);
    return chsh_from_terms(terms, settings);
}

std::string chsh_report(const CHSHResult& r) {
    static const char* names[4] = {"E11", "E12", "E21", "E22"};
    const double alphas[2] = {r.settings.alpha1, r.settings.alpha2};
    const double betas[2] = {r.settings.beta1, r.settings.beta2};
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "settings: alpha1=" << angle_label(r.settings.alpha1) << " alpha2=" << angle_label(r.settings.alpha2)
       << " beta1=" << angle_label(r.settings.beta1) << " beta2=" << angle_label(r.settings.beta2) << "\n";
    for (std::size_t i = 0; i < 4; ++i) {
        os << "  " << names[i] << " = E(" << angle_label(alphas[i / 2]) << ", " << angle_label(betas[i % 2])
           << ") = " << std::showpos << r.terms[i].E << std::noshowpos << " +- " << r.terms[i].sigma_E << "\n";
    }
    os << "S = |-E11 + E12 + E21 + E22| = " << r.S << " +- " << r.sigma_S << "\n";
    os << "max |S| over single-minus sign placements = " << r.max_over_placements << "\n";
    os << "violation_sigmas = " << std::setprecision(2) << r.violation_sigmas << "\n";
    os << (r.violation ? "CHSH bound 2 violated\n" : "no violation of the CHSH bound 2\n");
    return os.str();
}

std::string chsh_terms_csv(const CHSHResult& r) {
    static const char* names[4] = {"E11", "E12", "E21", "E22"};
    std::ostringstream os;
    os << "term,E,sigma_E\n";
    for (std::size_t i = 0; i < 4; ++i) {
        os << names[i] << ',' << format_double(r.terms[i].E) << ',' << format_double(r.terms[i].sigma_E) << '\n';
    }
    return os.str();
}

std::string chsh_summary_csv(const CHSHResult& r) {
    return "S,sigma_S,violation_sigmas\n" + format_double(r.S) + ',' + format_double(r.sigma_S) + ',' +
           format_double(r.violation_sigmas) + '\n';
}

double ideal_rate(double alpha, double beta) { return 2.0 + 2.0 * std::cos(alpha + beta); }

VisibilityResult visibility(std::span<const SweepPoint> sweep, VisibilityMethod method) {
    if (sweep.size() < 4) throw std::invalid_argument("visibility needs at least four sweep points");
    const auto [lo_it, hi_it] = std::minmax_element(sweep.begin(), sweep.end(),
                                                    [](const auto& a, const auto& b) { return a.phase < b.phase; });
    const double range = hi_it->phase - lo_it->phase;
    const double n = double(sweep.size());
    if (range * n / (n - 1.0) < 2.0 * kPi * (1.0 - 1e-9)) {
        throw std::invalid_argument("visibility sweep must cover at least one 2pi period");
    }

    VisibilityResult out;
    out.method = method;
    if (method == VisibilityMethod::MaxMin) {
        const auto [mn, mx] = std::minmax_element(sweep.begin(), sweep.end(),
                                                  [](const auto& a, const auto& b) { return a.counts < b.counts; });
        const double hi = mx->counts;
        const double lo = mn->counts;
        const double sum = hi + lo;
        if (!(sum > 0.0)) throw FitError("visibility undefined: no counts in the sweep");
        out.V = (hi - lo) / sum;
        const double d_hi = 2.0 * lo / (sum * sum);
        const double d_lo = -2.0 * hi / (sum * sum);
        out.sigma_V = std::sqrt(d_hi * d_hi * poisson_variance(hi) + d_lo * d_lo * poisson_variance(lo));
        out.mean = sum / 2.0;
        return out;
    }

    const auto m = static_cast<Eigen::Index>(sweep.size());
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = sweep[static_cast<std::size_t>(i)].phase;
        X(i, 0) = 1.0;
        X(i, 1) = std::cos(x);
        X(i, 2) = std::sin(x);
        y(i) = sweep[static_cast<std::size_t>(i)].counts;
    }
    Eigen::VectorXd w = y.unaryExpr([](double c) { return 1.0 / poisson_variance(c); });
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Matrix3d normal;
    bool converged = false;
    constexpr int kMaxIterations = 100;
    for (int it = 1; it <= kMaxIterations; ++it) {
        normal = X.transpose() * w.asDiagonal() * X;
        Eigen::LDLT<Eigen::Matrix3d> solver(normal);
        if (solver.info() != Eigen::Success || !solver.isPositive()) throw FitError("singular visibility fit");
        const Eigen::Vector3d next = solver.solve(X.transpose() * w.asDiagonal() * y);
        if (!next.allFinite()) throw FitError("visibility fit diverged");
        const double change = (next - p).cwiseAbs().maxCoeff();
        const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
        p = next;
        out.iterations = it;
        if (change <= 1e-12 * scale) {
            converged = true;
            break;
        }
        w = (X * p).unaryExpr([](double model) { return 1.0 / poisson_variance(model); });
    }
    if (!converged) throw FitError("visibility fit did not converge");
    if (!(p(0) > 0.0)) throw FitError("visibility fit has non-positive mean level");

    const Eigen::Matrix3d cov = normal.inverse();
    const double amp = std::hypot(p(1), p(2));
    out.mean = p(0);
    out.V = amp / p(0);
    out.phase = std::atan2(-p(2), p(1));
    if (amp > 0.0) {
        const Eigen::Vector3d grad(-out.V / p(0), p(1) / (p(0) * amp), p(2) / (p(0) * amp));
        out.sigma_V = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
    } else {
        out.sigma_V = std::sqrt(std::max(0.0, cov(1, 1) + cov(2, 2))) / p(0);
    }
    return out;
}

ValueWithSigma s_from_visibility(double V, double sigma_V) {
    if (!(V >= 0.0 && V <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
    if (!(sigma_V >= 0.0)) throw std::invalid_argument("visibility uncertainty must be non-negative");
    const double k = 2.0 * std::numbers::sqrt2;
    return {k * V, k * sigma_V};
}

void NoiseModel::validate() const {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("noise visibility must lie in [0, 1]");
    if (!(rate_scale >= 0.0)) throw std::invalid_argument("rate scale must be non-negative");
    if (!(window_s > 0.0)) throw std::invalid_argument("integration window must be positive");
}

double cosine_fringe(double alpha, double beta) { return std::cos(alpha + beta); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (stream * 0xD1B54A32D192ED03ULL));
    return splitmix64(h ^ (index * 0x8CB92BA72F3D8DD7ULL));
}

std::uint64_t poisson_count(double mean, std::uint64_t seed) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("Poisson mean must be finite and non-negative");
    if (mean == 0.0) return 0;
    std::mt19937_64 rng(seed);
    std::poisson_distribution<std::uint64_t> draw(mean);
    return draw(rng);
}

CountTable simulate_counts(const Fringe& fringe, const NoiseModel& noise, std::span<const SettingsPair> grid,
                           double duration_s, std::uint64_t seed) {
    noise.validate();
    if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
    CountTable table;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double f = std::clamp(fringe(grid[i].alpha, grid[i].beta), -1.0, 1.0);
        const double mean = noise.rate_scale * (duration_s / noise.window_s) * (1.0 + noise.visibility * f) / 2.0;
        table.add(grid[i].alpha, grid[i].beta, poisson_count(mean, derive_seed(seed, 0, i)), duration_s);
    }
    return table;
}

std::vector<SettingsPair> chsh_grid(const CHSHSettings& settings) {
    std::vector<SettingsPair> grid;
    for (double a : {settings.alpha1, settings.alpha1 + kPi, settings.alpha2, settings.alpha2 + kPi}) {
        for (double b : {settings.beta1, settings.beta1 + kPi, settings.beta2, settings.beta2 + kPi}) {
            grid.push_back({a, b});
        }
    }
    return grid;
}

std::vector<CHSHResult> monte_carlo_chsh(const Fringe& fringe, const NoiseModel& noise,
                                         const CHSHSettings& settings, double duration_s,
                                         std::size_t replications, std::uint64_t seed) {
    const auto grid = chsh_grid(settings);
    std::vector<CHSHResult> out(replications);
    parallel_for(replications, [&](std::size_t r) {
        const auto table = simulate_counts(fringe, noise, grid, duration_s, derive_seed(seed, 1, r));
        out[r] = chsh(table, settings);
    });
    return out;
}

double lhv_bound(const std::array<int, 4>& signs) {
    double best = 0.0;
    for (int mask = 0; mask < 16; ++mask) {
        const int a[2] = {mask & 1 ? 1 : -1, mask & 2 ? 1 : -1};
        const int b[2] = {mask & 4 ? 1 : -1, mask & 8 ? 1 : -1};
        const int e[4] = {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
        int s = 0;
        for (int i = 0; i < 4; ++i) s += signs[static_cast<std::size_t>(i)] * e[i];
        best = std::max(best, double(std::abs(s)));
    }
    return best;
}

}  // namespace pathid::bell
