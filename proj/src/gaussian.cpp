#include "pathid/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathid::gaussian {

namespace {

// Output operator expanded on input ladder operators: u . a + v . a^dag.
struct LinearForm {
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
};

LinearForm output_form(const BogoliubovTransform& t, const LadderOp& op) {
    if (op.mode >= t.modes()) throw std::out_of_range("moment request names an unknown mode");
    const auto i = static_cast<Eigen::Index>(op.mode);
    if (!op.dagger) return {t.A.row(i).transpose(), t.B.row(i).transpose()};
    return {t.B.row(i).conjugate().transpose(), t.A.row(i).conjugate().transpose()};
}

// <0| x y |0> for linear forms; only <a_j a_j^dag> = 1 survives.
Complex contraction(const LinearForm& x, const LinearForm& y) {
    return (x.u.array() * y.v.array()).sum();
}

void enumerate(std::vector<std::size_t>& open, std::vector<std::pair<std::size_t, std::size_t>>& current,
               std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& out) {
    if (open.empty()) {
        out.push_back(current);
        return;
    }
    const std::size_t first = open.front();
    for (std::size_t k = 1; k < open.size(); ++k) {
        const std::size_t partner = open[k];
        std::vector<std::size_t> rest;
        rest.reserve(open.size() - 2);
        for (std::size_t j = 1; j < open.size(); ++j) {
            if (j != k) rest.push_back(open[j]);
        }
        current.emplace_back(first, partner);
        enumerate(rest, current, out);
        current.pop_back();
    }
}

Complex wick_sum(const std::vector<LinearForm>& forms, std::vector<std::size_t>& open) {
    if (open.empty()) return 1.0;
    const std::size_t first = open.front();
    Complex total{};
    for (std::size_t k = 1; k < open.size(); ++k) {
        const Complex c = contraction(forms[first], forms[open[k]]);
        if (c == Complex{}) continue;
        std::vector<std::size_t> rest;
        rest.reserve(open.size() - 2);
        for (std::size_t j = 1; j < open.size(); ++j) {
            if (j != k) rest.push_back(open[j]);
        }
        total += c * wick_sum(forms, rest);
    }
    return total;
}

}  // namespace

BogoliubovTransform BogoliubovTransform::identity(std::size_t modes) {
    const auto n = static_cast<Eigen::Index>(modes);
    return {Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd::Zero(n, n)};
}

double BogoliubovTransform::symplectic_defect() const {
    const auto n = A.rows();
    const Eigen::MatrixXcd first = A * A.adjoint() - B * B.adjoint() - Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd second = A * B.transpose() - B * A.transpose();
    return std::max(first.cwiseAbs().maxCoeff(), second.cwiseAbs().maxCoeff());
}

BogoliubovTransform squeezer_transform(std::size_t modes, std::size_t a, std::size_t b, double g,
                                       double pump_phase) {
    if (a >= modes || b >= modes) throw std::out_of_range("squeezer mode out of range");
    if (a == b) throw std::invalid_argument("squeezer modes must be distinct");
    if (!(g >= 0.0)) throw std::invalid_argument("squeezer gain must be non-negative");
    auto t = BogoliubovTransform::identity(modes);
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const Complex s = std::polar(std::sinh(g), pump_phase);
    t.A(ia, ia) = std::cosh(g);
    t.A(ib, ib) = std::cosh(g);
    t.B(ia, ib) = s;
    t.B(ib, ia) = s;
    return t;
}

BogoliubovTransform phase_transform(std::size_t modes, std::size_t mode, double theta) {
    if (mode >= modes) throw std::out_of_range("phase mode out of range");
    auto t = BogoliubovTransform::identity(modes);
    const auto i = static_cast<Eigen::Index>(mode);
    t.A(i, i) = std::polar(1.0, theta);
    return t;
}

BogoliubovTransform compose(const BogoliubovTransform& first, const BogoliubovTransform& second) {
    if (first.modes() != second.modes()) throw std::invalid_argument("composing transforms of different size");
    // U = U2 U1, so U^dag a U = U1^dag (A2 a + B2 a^dag) U1.
    return {second.A * first.A + second.B * first.B.conjugate(),
            second.A * first.B + second.B * first.A.conjugate()};
}

MomentResult vacuum_moment(const BogoliubovTransform& transform, std::span<const LadderOp> request) {
    if (request.size() > kMaxMomentLength) {
        throw std::invalid_argument("moment requests are limited to " + std::to_string(kMaxMomentLength) +
                                    " operators");
    }
    std::vector<LinearForm> forms;
    forms.reserve(request.size());
    for (const auto& op : request) forms.push_back(output_form(transform, op));
    if (request.size() % 2 == 1) return {Complex{}, true};
    std::vector<std::size_t> open(request.size());
    for (std::size_t i = 0; i < open.size(); ++i) open[i] = i;
    return {wick_sum(forms, open), false};
}

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> wick_pairings(std::size_t n) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out;
    if (n % 2 == 1) return out;
    std::vector<std::size_t> open(n);
    for (std::size_t i = 0; i < n; ++i) open[i] = i;
    std::vector<std::pair<std::size_t, std::size_t>> current;
    enumerate(open, current, out);
    return out;
}

double fringe_visibility(std::span<const double> samples) {
    if (samples.size() < 8) throw std::invalid_argument("fringe visibility needs at least 8 samples");
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    const double denom = *hi + *lo;
    if (denom == 0.0) throw std::domain_error("visibility undefined: max + min = 0");
    return (*hi - *lo) / denom;
}

}  // namespace pathid::gaussian
