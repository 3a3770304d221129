#pragma once

// Count tables, the orthogonal-setting outcome mapping, CHSH evaluation,
// visibility estimation and Monte-Carlo count simulation.
//
// Only (+1,+1) coincidences are ever recorded.  The other outcomes of a
// setting (alpha, beta) are read from the shifted settings:
//
//   N(+1,-1 | a, b) = N(+1,+1 | a,      b + pi)
//   N(-1,+1 | a, b) = N(+1,+1 | a + pi, b)
//   N(-1,-1 | a, b) = N(+1,+1 | a + pi, b + pi)

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathid::bell {

struct SettingsPair {
    double alpha = 0.0;
    double beta = 0.0;
};

enum class Outcome : int { Plus = 1, Minus = -1 };

/// Setting whose (+1,+1) count stands in for outcome (a, b) at `base`.
SettingsPair count_setting(Outcome a, Outcome b, SettingsPair base);

/// Angle reduced to [0, 2pi).
double reduce_angle(double angle);

/// "alpha=pi/4"-style label; multiples of pi/4 print symbolically.
std::string angle_label(double angle);

class CountTable {
public:
    struct Entry {
        double alpha = 0.0;
        double beta = 0.0;
        std::uint64_t counts = 0;
        double duration_s = 0.0;
    };

    /// Appends one measured point.  Lookups sum every point whose setting
    /// agrees modulo 2pi, so repeated sweep periods pool together.
    void add(double alpha, double beta, std::uint64_t counts, double duration_s);
    std::optional<std::uint64_t> find(SettingsPair setting) const;
    /// Raw points in insertion order.
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    using Key = std::pair<long long, long long>;
    static Key key(double alpha, double beta);

    std::vector<Entry> entries_;
    std::map<Key, std::uint64_t> totals_;
};

class MissingEntryError : public std::runtime_error {
public:
    explicit MissingEntryError(std::vector<std::string> missing);
    const std::vector<std::string>& missing() const { return missing_; }

private:
    std::vector<std::string> missing_;
};

/// Joint probabilities as exact integer ratios over a common denominator.
struct JointProbabilities {
    /// Counts for (++), (+-), (-+), (--).
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t total = 0;

    double pp() const { return ratio(0); }
    double pm() const { return ratio(1); }
    double mp() const { return ratio(2); }
    double mm() const { return ratio(3); }
    double ratio(std::size_t i) const { return double(counts[i]) / double(total); }
};

JointProbabilities joint_probabilities(const CountTable& counts, SettingsPair base);

struct RealJointProbabilities {
    double pp = 0, pm = 0, mp = 0, mm = 0;
};

/// Same construction from a (real-valued) rate function.
RealJointProbabilities joint_probabilities(const std::function<double(double, double)>& rate, SettingsPair base);

struct CorrelationResult {
    double E = 0.0;
    double sigma_E = 0.0;
};

CorrelationResult correlation(const CountTable& counts, SettingsPair base);
CorrelationResult correlation(const std::function<double(double, double)>& rate, SettingsPair base);

struct CHSHSettings {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// alpha1 = 0, alpha2 = pi/2, beta1 = pi/4, beta2 = 3pi/4.
CHSHSettings optimal_settings();

struct CHSHResult {
    double S = 0.0;
    double sigma_S = 0.0;
    /// E11, E12, E21, E22 with E_ij = E(alpha_i, beta_j).
    std::array<CorrelationResult, 4> terms{};
    CHSHSettings settings;
    bool violation = false;
    /// (S - 2) / sigma_S; zero when sigma_S is zero.
    double violation_sigmas = 0.0;
    /// Largest |sum| over the four single-minus-sign placements.
    double max_over_placements = 0.0;
};

/// Signs of E11, E12, E21, E22 in S = |-E11 + E12 + E21 + E22|.
inline constexpr std::array<int, 4> kChshSigns = {-1, 1, 1, 1};

CHSHResult chsh_from_terms(const std::array<CorrelationResult, 4>& terms, const CHSHSettings& settings);
CHSHResult chsh(const CountTable& counts, const CHSHSettings& settings);
CHSHResult chsh(const std::function<double(double, double)>& rate, const CHSHSettings& settings);

/// Human-readable summary: settings, the four E terms, S and its margin.
std::string chsh_report(const CHSHResult& result);
/// `term,E,sigma_E` rows for E11, E12, E21, E22.
std::string chsh_terms_csv(const CHSHResult& result);
/// `S,sigma_S,violation_sigmas`.
std::string chsh_summary_csv(const CHSHResult& result);

/// Ideal four-fold rate shape 2 + 2 cos(alpha + beta), scale free.
double ideal_rate(double alpha, double beta);

struct SweepPoint {
    double phase = 0.0;
    double counts = 0.0;
};

enum class VisibilityMethod { Fit, MaxMin };

struct VisibilityResult {
    double V = 0.0;
    double sigma_V = 0.0;
    /// Fit only: mean level c and phase offset phi in c (1 + V cos(x + phi)).
    double mean = 0.0;
    double phase = 0.0;
    VisibilityMethod method = VisibilityMethod::Fit;
    int iterations = 0;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fit: iteratively reweighted least squares of N = c (1 + V cos(x + phi))
/// with Poisson weights 1 / max(model, 1).  MaxMin: (max - min)/(max + min).
VisibilityResult visibility(std::span<const SweepPoint> sweep, VisibilityMethod method = VisibilityMethod::Fit);

struct ValueWithSigma {
    double value = 0.0;
    double sigma = 0.0;
};

/// Werner-form relation S = 2 sqrt(2) V.
ValueWithSigma s_from_visibility(double V, double sigma_V);

struct NoiseModel {
    double visibility = 1.0;
    /// Expected counts for an ideal fringe value of 1 over one window.
    double rate_scale = 0.0;
    double window_s = 60.0;

    void validate() const;
};

/// Fringe f(alpha, beta) in [-1, 1]; the mean count is
/// rate_scale (duration / window) (1 + V f) / 2.
using Fringe = std::function<double(double, double)>;
double cosine_fringe(double alpha, double beta);

/// One Poisson draw from a generator seeded with `seed`.
std::uint64_t poisson_count(double mean, std::uint64_t seed);

/// Independent Poisson draws per setting; entry i uses a generator seeded
/// from (seed, i) so the table does not depend on evaluation order.
CountTable simulate_counts(const Fringe& fringe, const NoiseModel& noise, std::span<const SettingsPair> grid,
                           double duration_s, std::uint64_t seed);

/// The sixteen settings a CHSH evaluation reads.
std::vector<SettingsPair> chsh_grid(const CHSHSettings& settings);

/// `replications` independent CHSH evaluations of simulated tables.
std::vector<CHSHResult> monte_carlo_chsh(const Fringe& fringe, const NoiseModel& noise,
                                         const CHSHSettings& settings, double duration_s,
                                         std::size_t replications, std::uint64_t seed);

/// Exhaustive maximum of |sum_i signs_i E_i| over deterministic local
/// strategies a(alpha_k), b(beta_k) in {+1, -1}.
double lhv_bound(const std::array<int, 4>& signs = kChshSigns);

/// Stream derivation for counter-style seeding.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace pathid::bell
