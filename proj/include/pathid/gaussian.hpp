#pragma once

// Heisenberg-picture Gaussian backend.  A transform maps input ladder
// operators to output ones, a_out = A a_in + B a_in^dag, and vacuum
// moments of output operators follow from Wick's theorem.
//
// Moments here are operator expectation values, not click probabilities;
// post-selected detection probabilities come from the Fock backend.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pathid/fock_state.hpp"

namespace pathid::gaussian {

using Complex = std::complex<double>;
using fock::LadderOp;

struct BogoliubovTransform {
    Eigen::MatrixXcd A;
    Eigen::MatrixXcd B;

    static BogoliubovTransform identity(std::size_t modes);

    std::size_t modes() const { return static_cast<std::size_t>(A.rows()); }

    /// Largest entry of |A A^dag - B B^dag - I| and |A B^T - B A^T|.
    double symplectic_defect() const;
    bool is_symplectic(double tolerance = 1e-10) const { return symplectic_defect() <= tolerance; }
};

/// Two-mode squeezer exp(g(e^{i phi} a^dag b^dag - e^{-i phi} a b)) on (a, b).
BogoliubovTransform squeezer_transform(std::size_t modes, std::size_t a, std::size_t b, double g,
                                       double pump_phase = 0.0);

/// Phase shifter e^{i theta n}; passive, a -> e^{i theta} a.
BogoliubovTransform phase_transform(std::size_t modes, std::size_t mode, double theta);

/// Transform of "first, then second".
BogoliubovTransform compose(const BogoliubovTransform& first, const BogoliubovTransform& second);

using MomentRequest = std::vector<LadderOp>;

struct MomentResult {
    Complex value{};
    /// Set when the request had odd length; value is then exactly zero.
    bool odd_length = false;
};

inline constexpr std::size_t kMaxMomentLength = 8;

/// <0| out(op_1) ... out(op_n) |0> summed over all Wick pairings.
MomentResult vacuum_moment(const BogoliubovTransform& transform, std::span<const LadderOp> request);

/// Perfect matchings of n ordered operators, in deterministic recursion order.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> wick_pairings(std::size_t n);

/// (max - min) / (max + min) over at least eight samples of one period.
double fringe_visibility(std::span<const double> samples);

}  // namespace pathid::gaussian
