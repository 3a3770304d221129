#include "pathid/fock_state.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pathid::fock {

namespace {

void check_mode(std::size_t mode, std::size_t modes) {
    if (mode >= modes) {
        throw std::out_of_range("unknown mode index " + std::to_string(mode) + " (state has " +
                                std::to_string(modes) + " modes)");
    }
}

double norm2(const FockState::Coefficients& c) {
    Complex sum{};
    for (const auto& x : c) sum += x;
    return std::norm(sum);
}

void accumulate(FockState::Terms& into, const Occupation& ket, const FockState::Coefficients& c,
                Complex scale) {
    auto [it, inserted] = into.try_emplace(ket, c.size(), Complex{});
    auto& dst = it->second;
    for (std::size_t p = 0; p < c.size(); ++p) dst[p] += scale * c[p];
}

}  // namespace

void TruncationPolicy::validate() const {
    if (max_total_photons < 0) throw std::invalid_argument("max_total_photons must be non-negative");
    if (series_order && *series_order < 1) throw std::invalid_argument("series_order must be >= 1");
    if (!(prune_epsilon >= 0.0)) throw std::invalid_argument("prune_epsilon must be non-negative");
}

double PhaseSpec::reduced() const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phase, two_pi);
    if (r < 0) r += two_pi;
    return r;
}

int total_photons(const Occupation& occupation) {
    int total = 0;
    for (auto n : occupation) total += n;
    return total;
}

std::string format_ket(const Occupation& occupation) {
    bool wide = false;
    for (auto n : occupation) wide = wide || n > 9;
    std::string out = "|";
    for (std::size_t i = 0; i < occupation.size(); ++i) {
        if (wide && i) out += ',';
        out += std::to_string(occupation[i]);
    }
    return out + ">";
}

FockState::FockState(std::size_t modes, TruncationPolicy policy) : modes_(modes), policy_(policy) {}

FockState FockState::vacuum(std::size_t modes, const TruncationPolicy& policy) {
    if (modes < 1) throw std::invalid_argument("vacuum needs at least one mode");
    policy.validate();
    FockState state(modes, policy);
    Coefficients c(state.coefficient_count(), Complex{});
    c[0] = 1.0;
    state.terms_.emplace(Occupation(modes, 0), std::move(c));
    return state;
}

std::size_t FockState::coefficient_count() const {
    return policy_.series_order ? static_cast<std::size_t>(*policy_.series_order) + 1 : 1;
}

Complex FockState::amplitude(const Occupation& pattern) const {
    if (pattern.size() != modes_) throw std::invalid_argument("pattern length does not match mode count");
    auto it = terms_.find(pattern);
    if (it == terms_.end()) return {};
    Complex sum{};
    for (const auto& c : it->second) sum += c;
    return sum;
}

FockState::Coefficients FockState::series(const Occupation& pattern) const {
    auto it = terms_.find(pattern);
    return it == terms_.end() ? Coefficients{} : it->second;
}

double FockState::squared_norm() const {
    double total = 0.0;
    for (const auto& [ket, c] : terms_) total += norm2(c);
    return total;
}

double FockState::projection_probability(const Occupation& pattern) const {
    const double n = squared_norm();
    if (n == 0.0) return 0.0;
    return std::norm(amplitude(pattern)) / n;
}

double FockState::expectation_nn(std::span<const std::size_t> modes) const {
    std::set<std::size_t> seen;
    for (auto m : modes) {
        check_mode(m, modes_);
        if (!seen.insert(m).second) throw std::invalid_argument("expectation_nn needs distinct modes");
    }
    const double n = squared_norm();
    if (n == 0.0) return 0.0;
    double total = 0.0;
    for (const auto& [ket, c] : terms_) {
        double weight = 1.0;
        for (auto m : modes) weight *= ket[m];
        if (weight != 0.0) total += weight * norm2(c);
    }
    return total / n;
}

FockState FockState::vacuum_referenced() const {
    if (!series_mode()) throw std::logic_error("vacuum_referenced requires series mode");
    const auto vac = series(Occupation(modes_, 0));
    if (vac.empty() || vac[0] == Complex{}) throw std::domain_error("vacuum coefficient vanishes");
    const std::size_t order = vac.size();
    FockState out(modes_, policy_);
    out.diagnostics_ = diagnostics_;
    for (const auto& [ket, a] : terms_) {
        Coefficients q(order, Complex{});
        for (std::size_t p = 0; p < order; ++p) {
            Complex acc = a[p];
            for (std::size_t j = 1; j <= p; ++j) acc -= vac[j] * q[p - j];
            q[p] = acc / vac[0];
        }
        out.terms_.emplace(ket, std::move(q));
    }
    out.prune();
    return out;
}

FockState FockState::apply_ladder(const LadderOp& op) const {
    check_mode(op.mode, modes_);
    TruncationPolicy raw = policy_;
    raw.series_order.reset();
    FockState out(modes_, raw);
    for (const auto& [ket, c] : terms_) {
        Complex amp{};
        for (const auto& x : c) amp += x;
        Occupation next = ket;
        double factor;
        if (op.dagger) {
            factor = std::sqrt(static_cast<double>(ket[op.mode]) + 1.0);
            ++next[op.mode];
        } else {
            if (ket[op.mode] == 0) continue;
            factor = std::sqrt(static_cast<double>(ket[op.mode]));
            --next[op.mode];
        }
        out.terms_[next].resize(1);
        out.terms_[next][0] += factor * amp;
    }
    return out;
}

Complex FockState::inner_product(const FockState& other) const {
    if (other.modes_ != modes_) throw std::invalid_argument("inner product across different mode counts");
    Complex total{};
    auto a = terms_.begin();
    auto b = other.terms_.begin();
    while (a != terms_.end() && b != other.terms_.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            Complex x{}, y{};
            for (const auto& c : a->second) x += c;
            for (const auto& c : b->second) y += c;
            total += std::conj(x) * y;
            ++a;
            ++b;
        }
    }
    return total;
}

Complex FockState::moment(std::span<const LadderOp> ops) const {
    FockState phi = *this;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) phi = phi.apply_ladder(*it);
    const double n = squared_norm();
    if (n == 0.0) return {};
    return inner_product(phi) / n;
}

std::string FockState::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [ket, c] : terms_) {
        Complex amp{};
        for (const auto& x : c) amp += x;
        if (!first) os << " + ";
        first = false;
        os << "(" << amp.real() << (amp.imag() < 0 ? "" : "+") << amp.imag() << "i)" << format_ket(ket);
    }
    return os.str();
}

void FockState::prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        bool small = true;
        for (const auto& c : it->second) {
            if (std::abs(c) >= policy_.prune_epsilon) {
                small = false;
                break;
            }
        }
        if (small) {
            diagnostics_.pruned_mass += norm2(it->second);
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
}

FockState apply_phase(const FockState& state, const PhaseSpec& spec) {
    check_mode(spec.mode, state.modes_);
    if (spec.phase == 0.0) return state;
    FockState out = state;
    for (auto& [ket, c] : out.terms_) {
        const int n = ket[spec.mode];
        if (n == 0) continue;
        const Complex factor = std::polar(1.0, n * spec.phase);
        for (auto& x : c) x *= factor;
    }
    return out;
}

namespace {

// One application of X = e^{i phi} a^dag b^dag - e^{-i phi} a b, scaled by
// `scale`, shifting every coefficient up one power of g.  Kets above the cap
// are dropped and their mass returned.
double apply_generator_shifted(const FockState::Terms& in, FockState::Terms& out, std::size_t a,
                               std::size_t b, Complex up, Complex down, int cap) {
    double dropped = 0.0;
    for (const auto& [ket, c] : in) {
        const std::size_t order = c.size();
        FockState::Coefficients shifted(order, Complex{});
        bool any = false;
        for (std::size_t p = 0; p + 1 < order; ++p) {
            shifted[p + 1] = c[p];
            any = any || c[p] != Complex{};
        }
        if (!any) continue;
        const double na = ket[a];
        const double nb = ket[b];
        Occupation raised = ket;
        ++raised[a];
        ++raised[b];
        const Complex up_factor = up * std::sqrt((na + 1.0) * (nb + 1.0));
        if (total_photons(raised) <= cap) {
            accumulate(out, raised, shifted, up_factor);
        } else {
            Complex lost{};
            for (const auto& x : shifted) lost += up_factor * x;
            dropped += std::norm(lost);
        }
        if (na > 0 && nb > 0) {
            Occupation lowered = ket;
            --lowered[a];
            --lowered[b];
            accumulate(out, lowered, shifted, -down * std::sqrt(na * nb));
        }
    }
    return dropped;
}

FockState::Terms squeeze_series(const FockState::Terms& terms, const SqueezerSpec& spec, int cap,
                                int order, double& dropped) {
    FockState::Terms result = terms;
    FockState::Terms term = terms;
    const Complex up = std::polar(spec.gain, spec.pump_phase);
    const Complex down = std::polar(spec.gain, -spec.pump_phase);
    for (int k = 1; k <= order && !term.empty(); ++k) {
        FockState::Terms next;
        dropped += apply_generator_shifted(term, next, spec.mode_a, spec.mode_b, up / double(k),
                                           down / double(k), cap);
        for (auto it = next.begin(); it != next.end();) {
            bool zero = true;
            for (const auto& x : it->second) zero = zero && x == Complex{};
            it = zero ? next.erase(it) : std::next(it);
        }
        for (const auto& [ket, c] : next) accumulate(result, ket, c, 1.0);
        term = std::move(next);
    }
    return result;
}

FockState::Terms squeeze_exact(const FockState::Terms& terms, const SqueezerSpec& spec, int cap) {
    const std::size_t a = spec.mode_a;
    const std::size_t b = spec.mode_b;
    const double t = std::tanh(spec.gain);
    const double ch = std::cosh(spec.gain);
    const Complex raise = std::polar(t, spec.pump_phase);
    const Complex lower = -std::polar(t, -spec.pump_phase);

    // exp(-G* a b), then cosh^-(n_a + n_b + 1)
    FockState::Terms middle;
    for (const auto& [ket, c] : terms) {
        const int na = ket[a];
        const int nb = ket[b];
        Complex coef = 1.0;
        Occupation target = ket;
        for (int k = 0; k <= std::min(na, nb); ++k) {
            if (k > 0) {
                coef *= lower * std::sqrt(double(na - k + 1) * double(nb - k + 1)) / double(k);
                --target[a];
                --target[b];
            }
            const double scale = std::pow(ch, -double(target[a] + target[b] + 1));
            accumulate(middle, target, c, coef * scale);
        }
    }

    // exp(G a^dag b^dag), truncated at the cap
    FockState::Terms out;
    for (const auto& [ket, c] : middle) {
        const int ma = ket[a];
        const int mb = ket[b];
        Complex coef = 1.0;
        Occupation target = ket;
        int photons = total_photons(ket);
        for (int k = 0; photons <= cap; ++k) {
            if (k > 0) {
                coef *= raise * std::sqrt(double(ma + k) * double(mb + k)) / double(k);
                ++target[a];
                ++target[b];
                photons += 2;
                if (photons > cap) break;
            }
            accumulate(out, target, c, coef);
        }
    }
    return out;
}

}  // namespace

FockState apply_squeezer(const FockState& state, const SqueezerSpec& spec) {
    check_mode(spec.mode_a, state.modes_);
    check_mode(spec.mode_b, state.modes_);
    if (spec.mode_a == spec.mode_b) throw std::invalid_argument("squeezer modes must be distinct");
    if (!(spec.gain >= 0.0)) throw std::invalid_argument("squeezer gain must be non-negative");
    if (spec.gain == 0.0) return state;

    FockState out = state;
    const int cap = state.policy_.max_total_photons;
    if (state.series_mode()) {
        double dropped = 0.0;
        out.terms_ = squeeze_series(state.terms_, spec, cap, *state.policy_.series_order, dropped);
        out.diagnostics_.truncated_mass += dropped;
    } else {
        const double before = state.squared_norm();
        out.terms_ = squeeze_exact(state.terms_, spec, cap);
        const double loss = std::max(0.0, before - out.squared_norm());
        out.diagnostics_.truncated_mass += loss;
        if (loss > state.policy_.truncation_warning) {
            std::ostringstream msg;
            msg << "squeezer on modes (" << spec.mode_a << "," << spec.mode_b << ") with gain " << spec.gain
                << " lost " << loss << " of squared norm above the photon cap " << cap;
            out.diagnostics_.warnings.push_back(msg.str());
        }
    }
    out.prune();
    return out;
}

}  // namespace pathid::fock
