#include "pathid/vacuum_bound.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pathid/angle_expr.hpp"

namespace pathid::vacuum {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<int, 4> kSigns = {-1, 1, 1, 1};

Eigen::Vector3d bloch(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double chsh_value(const Eigen::Matrix3d& T, const TwoQubitObservablePair& obs) {
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            sum += kSigns[static_cast<std::size_t>(2 * i + j)] * obs.alice[i].dot(T * obs.bob[j]);
        }
    }
    return std::abs(sum);
}

TwoQubitObservablePair from_angles(const double* x) {
    return {{bloch(x[0], x[1]), bloch(x[2], x[3])}, {bloch(x[4], x[5]), bloch(x[6], x[7])}};
}

struct SearchContext {
    const Eigen::Matrix3d* T;
};

double negative_chsh(const gsl_vector* v, void* params) {
    const auto* ctx = static_cast<const SearchContext*>(params);
    double x[8];
    for (std::size_t i = 0; i < 8; ++i) x[i] = gsl_vector_get(v, i);
    return -chsh_value(*ctx->T, from_angles(x));
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// One Nelder-Mead run; returns the best value found and writes the angles back.
double simplex_search(const Eigen::Matrix3d& T, std::array<double, 8>& angles, double step) {
    SearchContext ctx{&T};
    gsl_multimin_function fn{&negative_chsh, 8, &ctx};
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(8));
    std::unique_ptr<gsl_vector, VectorDeleter> steps(gsl_vector_alloc(8));
    for (std::size_t i = 0; i < 8; ++i) gsl_vector_set(x.get(), i, angles[i]);
    gsl_vector_set_all(steps.get(), step);
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 8));
    gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), steps.get());
    for (int iter = 0; iter < 20000; ++iter) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-12) == GSL_SUCCESS) break;
    }
    for (std::size_t i = 0; i < 8; ++i) angles[i] = gsl_vector_get(m->x, i);
    return -m->fval;
}

}  // namespace

VacuumFourPhotonState state_from_g(double g, double alpha, double beta) {
    if (!(g >= 0.0)) throw std::invalid_argument("g must be non-negative");
    const Complex ratio = g * g * (1.0 + std::polar(1.0, alpha + beta));
    auto state = state_from_amplitudes(1.0, ratio);
    state.g = g;
    state.alpha = alpha;
    state.beta = beta;
    return state;
}

VacuumFourPhotonState state_from_amplitudes(Complex c0, Complex c1) {
    const double norm = std::sqrt(std::norm(c0) + std::norm(c1));
    if (!(norm > 0.0)) throw std::invalid_argument("state amplitudes vanish");
    VacuumFourPhotonState state;
    state.c0 = c0 / norm;
    state.c1 = c1 / norm;
    return state;
}

Eigen::Matrix3d correlation_matrix(const VacuumFourPhotonState& state) {
    using Eigen::Matrix2cd;
    const Complex I(0.0, 1.0);
    std::array<Matrix2cd, 3> pauli;
    pauli[0] << 0, 1, 1, 0;
    pauli[1] << 0, -I, I, 0;
    pauli[2] << 1, 0, 0, -1;
    Eigen::Vector4cd psi(state.c0, 0.0, 0.0, state.c1);
    Eigen::Matrix3d T;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            Eigen::Matrix4cd op;
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) op.block<2, 2>(2 * r, 2 * c) = pauli[i](r, c) * pauli[j];
            }
            T(i, j) = (psi.adjoint() * op * psi)(0, 0).real();
        }
    }
    return T;
}

void TwoQubitObservablePair::validate() const {
    for (const auto* side : {&alice, &bob}) {
        for (const auto& v : *side) {
            if (std::abs(v.norm() - 1.0) > 1e-9) throw std::invalid_argument("observables need unit Bloch vectors");
        }
    }
}

double chsh_optimal(const VacuumFourPhotonState& state) {
    const Eigen::Matrix3d T = correlation_matrix(state);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(T.transpose() * T);
    const auto& ev = solver.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, ev(2) + ev(1)));
}

GridSearchResult chsh_grid_search(const VacuumFourPhotonState& state) {
    const Eigen::Matrix3d T = correlation_matrix(state);
    std::vector<std::array<double, 8>> starts;
    const double thetas[] = {0.3, kPi / 2, 2.6};
    const double phis[] = {0.0, kPi / 2};
    for (double ta : thetas) {
        for (double pa : phis) {
            for (double tb : thetas) {
                starts.push_back({ta, pa, kPi - ta, pa + kPi / 2, tb, 0.4, kPi - tb, 1.9});
            }
        }
    }
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    for (int i = 0; i < 16; ++i) {
        std::array<double, 8> s;
        for (auto& x : s) x = angle(rng);
        starts.push_back(s);
    }

    GridSearchResult best;
    best.starts = starts.size();
    for (auto s : starts) {
        double value = simplex_search(T, s, 0.5);
        value = std::max(value, simplex_search(T, s, 0.05));
        if (value > best.S) {
            best.S = value;
            best.observables = from_angles(s.data());
        }
    }
    return best;
}

double chsh_fixed_settings(const VacuumFourPhotonState& state, const TwoQubitObservablePair& observables) {
    observables.validate();
    return chsh_value(correlation_matrix(state), observables);
}

std::vector<MeasurementModel> shipped_models() {
    const double r = 1.0 / std::numbers::sqrt2;
    auto equatorial = [](double phase) { return Eigen::Vector3d(std::cos(phase), std::sin(phase), 0.0); };
    auto xz = [](double theta) { return Eigen::Vector3d(std::sin(theta), 0.0, std::cos(theta)); };
    auto yz = [](double theta) { return Eigen::Vector3d(0.0, std::sin(theta), std::cos(theta)); };
    const double a1 = 0.0, a2 = kPi / 2, b1 = kPi / 4, b2 = 3 * kPi / 4;
    return {
        {"equatorial-phase",
         "cos(t) X + sin(t) Y at the interferometer phases alpha in {0, pi/2}, beta in {pi/4, 3pi/4}",
         {{equatorial(a1), equatorial(a2)}, {equatorial(b1), equatorial(b2)}}},
        {"pauli-chsh",
         "A = Z, X; B = (X - Z)/sqrt2, (X + Z)/sqrt2 (optimal for the maximally entangled state)",
         {{Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)},
          {Eigen::Vector3d(r, 0, -r), Eigen::Vector3d(r, 0, r)}}},
        {"xz-plane", "sin(t) X + cos(t) Z at t = 0, pi/2 (Alice) and pi/4, 3pi/4 (Bob)",
         {{xz(a1), xz(a2)}, {xz(b1), xz(b2)}}},
        {"yz-plane", "sin(t) Y + cos(t) Z at t = 0, pi/2 (Alice) and pi/4, 3pi/4 (Bob)",
         {{yz(a1), yz(a2)}, {yz(b1), yz(b2)}}},
    };
}

ValueWithSigma g_uncertainty_propagation(const std::function<double(double)>& f, double g, double sigma_g,
                                         double step) {
    if (!(sigma_g >= 0.0)) throw std::invalid_argument("sigma_g must be non-negative");
    if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    const double value = f(g);
    const double derivative = g >= step ? (f(g + step) - f(g - step)) / (2.0 * step) : (f(g + step) - value) / step;
    return {value, std::abs(derivative) * sigma_g};
}

BoundReport vacuum_bound_report(double g, double sigma_g) {
    BoundReport report;
    report.g = g;
    report.sigma_g = sigma_g;
    report.state = state_from_g(g);

    auto horodecki = [](double x) { return chsh_optimal(state_from_g(x)); };
    const auto h = g_uncertainty_propagation(horodecki, g, sigma_g);
    report.rows.push_back({"horodecki", h.value, h.sigma});

    const auto grid = chsh_grid_search(report.state);
    const auto h_sigma = h.sigma;
    report.rows.push_back({"grid-search", grid.S, h_sigma});
    report.oracle_gap = std::abs(grid.S - h.value);

    for (const auto& model : shipped_models()) {
        auto f = [&model](double x) { return chsh_fixed_settings(state_from_g(x), model.observables); };
        const auto v = g_uncertainty_propagation(f, g, sigma_g);
        report.rows.push_back({model.name, v.value, v.sigma});
    }
    return report;
}

std::string report_csv(const BoundReport& report) {
    std::ostringstream os;
    os << "model,S,sigma_S\n";
    for (const auto& row : report.rows) {
        os << row.model << ',' << format_double(row.S) << ',' << format_double(row.sigma_S) << '\n';
    }
    return os.str();
}

std::string report_text(const BoundReport& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    os << "vacuum/four-photon state at g = " << report.g << " +- " << report.sigma_g << "\n";
    os << "  c0 = " << std::abs(report.state.c0) << ", c1 = " << std::abs(report.state.c1)
       << ", |c1/c0| = " << std::abs(report.state.c1 / report.state.c0) << "\n";
    os << "  Horodecki vs grid search gap: " << std::scientific << std::setprecision(2) << report.oracle_gap
       << std::fixed << std::setprecision(4) << "\n";
    os << "  reference S_vac = " << kReferenceS << " +- " << kReferenceSigma << "\n\n";
    os << std::left << std::setw(18) << "model" << std::right << std::setw(10) << "S" << std::setw(10) << "sigma_S"
       << std::setw(14) << "ref. dev." << "\n";
    for (const auto& row : report.rows) {
        const double combined = std::hypot(row.sigma_S, kReferenceSigma);
        os << std::left << std::setw(18) << row.model << std::right << std::setw(10) << row.S << std::setw(10)
           << row.sigma_S << std::setw(12) << (row.S - kReferenceS) / combined << " s"
           << (row.S > 2.0 ? "   above 2" : "") << "\n";
    }
    return os.str();
}

}  // namespace pathid::vacuum
