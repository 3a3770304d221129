#pragma once

// CHSH values reachable by the bipartite state
//     C_g [ |00>_A |00>_B + g^2 (1 + e^{i(alpha+beta)}) |11>_A |11>_B ],
// treating |00> and |11> of each party as an effective qubit.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace pathid::vacuum {

using Complex = std::complex<double>;

struct VacuumFourPhotonState {
    double g = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    /// Normalised amplitudes of |00>_A|00>_B and |11>_A|11>_B.
    Complex c0{1.0, 0.0};
    Complex c1{};
};

VacuumFourPhotonState state_from_g(double g, double alpha = 0.0, double beta = 0.0);
/// Normalises (c0, c1); throws if both vanish.
VacuumFourPhotonState state_from_amplitudes(Complex c0, Complex c1);

/// T_ij = <sigma_i (x) sigma_j>, i, j in {x, y, z}.
Eigen::Matrix3d correlation_matrix(const VacuumFourPhotonState& state);

struct TwoQubitObservablePair {
    std::array<Eigen::Vector3d, 2> alice;
    std::array<Eigen::Vector3d, 2> bob;

    /// Throws unless every Bloch vector has unit length (1e-9).
    void validate() const;
};

/// Horodecki maximum 2 sqrt(l1 + l2) over the two largest eigenvalues of T^T T.
double chsh_optimal(const VacuumFourPhotonState& state);

struct GridSearchResult {
    double S = 0.0;
    TwoQubitObservablePair observables;
    std::size_t starts = 0;
};

/// Direct maximisation of |-E11 + E12 + E21 + E22| over the eight Bloch
/// angles: a deterministic set of starting points, each refined by
/// Nelder-Mead simplex search.
GridSearchResult chsh_grid_search(const VacuumFourPhotonState& state);

/// |-E11 + E12 + E21 + E22| with E_ij = alice_i^T T bob_j.
double chsh_fixed_settings(const VacuumFourPhotonState& state, const TwoQubitObservablePair& observables);

struct MeasurementModel {
    std::string name;
    std::string description;
    TwoQubitObservablePair observables;
};

std::vector<MeasurementModel> shipped_models();

struct ValueWithSigma {
    double value = 0.0;
    double sigma = 0.0;
};

inline constexpr double kDefaultGStep = 1e-4;

/// Delta-method uncertainty with a central difference of half-width
/// `step` (forward difference when g < step).
ValueWithSigma g_uncertainty_propagation(const std::function<double(double)>& f, double g, double sigma_g,
                                         double step = kDefaultGStep);

struct BoundReportRow {
    std::string model;
    double S = 0.0;
    double sigma_S = 0.0;
};

struct BoundReport {
    double g = 0.0;
    double sigma_g = 0.0;
    VacuumFourPhotonState state;
    /// Horodecki row first, then the grid search, then shipped models.
    std::vector<BoundReportRow> rows;
    /// |Horodecki - grid search| at the nominal g.
    double oracle_gap = 0.0;
};

inline constexpr double kReferenceS = 1.467;
inline constexpr double kReferenceSigma = 0.009;

BoundReport vacuum_bound_report(double g, double sigma_g);
std::string report_csv(const BoundReport& report);
std::string report_text(const BoundReport& report);

}  // namespace pathid::vacuum
