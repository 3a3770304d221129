#include "pathid/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pathid/angle_expr.hpp"
#include "pathid/parallel.hpp"

namespace pathid::interferometer {

namespace {

double resolve_phase(const PhaseElement& element, const Bindings& bindings) {
    if (const auto* fixed = std::get_if<double>(&element.phase)) return *fixed;
    const auto& symbol = std::get<std::string>(element.phase);
    auto it = bindings.find(symbol);
    if (it == bindings.end()) throw std::invalid_argument("phase symbol '" + symbol + "' is unbound");
    if (!std::isfinite(it->second)) throw std::invalid_argument("phase symbol '" + symbol + "' is not finite");
    return it->second;
}

double local_probability(const fock::FockState& state, LocalModes local) {
    const double norm = state.squared_norm();
    if (norm == 0.0) return 0.0;
    double total = 0.0;
    for (const auto& [ket, c] : state.terms()) {
        if (ket[local.first] != 1 || ket[local.second] != 1) continue;
        fock::Complex amp{};
        for (const auto& x : c) amp += x;
        total += std::norm(amp);
    }
    return total / norm;
}

}  // namespace

void ExperimentLayout::validate(int max_total_photons) const {
    if (modes.empty()) throw std::invalid_argument("layout declares no modes");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].index != i) throw std::invalid_argument("mode ordinals must be contiguous from 0");
        if (!labels.insert(modes[i].label).second) {
            throw std::invalid_argument("duplicate mode label '" + modes[i].label + "'");
        }
    }
    std::map<std::string, std::size_t> seen_symbols;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (const auto* src = std::get_if<SourceElement>(&elements[i])) {
            if (src->spec.mode_a >= modes.size() || src->spec.mode_b >= modes.size()) {
                throw std::invalid_argument("source refers to an unknown mode");
            }
            if (src->spec.mode_a == src->spec.mode_b) throw std::invalid_argument("source modes must be distinct");
            if (!(src->spec.gain >= 0.0)) throw std::invalid_argument("source gain must be non-negative");
        } else {
            const auto& ph = std::get<PhaseElement>(elements[i]);
            if (ph.mode >= modes.size()) throw std::invalid_argument("phase refers to an unknown mode");
            if (const auto* sym = std::get_if<std::string>(&ph.phase)) {
                if (!seen_symbols.emplace(*sym, i).second) {
                    throw std::invalid_argument("phase symbol '" + *sym + "' is bound more than once");
                }
            }
        }
    }
    if (seen_symbols != phase_symbols) throw std::invalid_argument("phase symbol table does not match elements");
    if (postselect.size() != modes.size()) throw std::invalid_argument("postselect length does not match modes");
    if (fock::total_photons(postselect) > max_total_photons) {
        throw std::invalid_argument("postselect total exceeds the truncation cap");
    }
}

std::size_t ExperimentLayout::mode_index(const std::string& label) const {
    for (const auto& m : modes) {
        if (m.label == label) return m.index;
    }
    throw std::out_of_range("unknown mode '" + label + "'");
}

bool ExperimentLayout::same_structure(const ExperimentLayout& other) const {
    if (modes != other.modes || postselect != other.postselect || phase_symbols != other.phase_symbols) return false;
    if (elements.size() != other.elements.size()) return false;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto* a = std::get_if<SourceElement>(&elements[i]);
        const auto* b = std::get_if<SourceElement>(&other.elements[i]);
        if ((a == nullptr) != (b == nullptr)) return false;
        if (a) {
            if (!(a->spec == b->spec)) return false;
        } else if (!(std::get<PhaseElement>(elements[i]) == std::get<PhaseElement>(other.elements[i]))) {
            return false;
        }
    }
    return true;
}

ExperimentLayout canonical_layout(double g) {
    if (!(g >= 0.0)) throw std::invalid_argument("gain must be non-negative");
    enum : std::size_t { a1, a2, b1, b2 };
    ExperimentLayout layout;
    layout.modes = {{"a1", a1}, {"a2", a2}, {"b1", b1}, {"b2", b2}};
    layout.elements = {
        SourceElement{"I", {a1, b1, g, 0.0}},
        SourceElement{"II", {b2, a2, g, 0.0}},
        PhaseElement{a1, std::string("alpha")},
        PhaseElement{b2, std::string("beta")},
        SourceElement{"III", {a1, a2, g, 0.0}},
        SourceElement{"IV", {b2, b1, g, 0.0}},
    };
    layout.postselect = {1, 1, 1, 1};
    layout.phase_symbols = {{"alpha", 2}, {"beta", 3}};
    return layout;
}

fock::FockState evolve(const ExperimentLayout& layout, const Bindings& bindings,
                       const fock::TruncationPolicy& policy) {
    layout.validate(policy.max_total_photons);
    auto state = fock::FockState::vacuum(layout.modes.size(), policy);
    for (const auto& element : layout.elements) {
        if (const auto* src = std::get_if<SourceElement>(&element)) {
            state = fock::apply_squeezer(state, src->spec);
        } else {
            const auto& ph = std::get<PhaseElement>(element);
            state = fock::apply_phase(state, {ph.mode, resolve_phase(ph, bindings)});
        }
    }
    return state;
}

gaussian::BogoliubovTransform heisenberg_transform(const ExperimentLayout& layout, const Bindings& bindings) {
    const std::size_t n = layout.modes.size();
    auto total = gaussian::BogoliubovTransform::identity(n);
    for (const auto& element : layout.elements) {
        if (const auto* src = std::get_if<SourceElement>(&element)) {
            total = gaussian::compose(total, gaussian::squeezer_transform(n, src->spec.mode_a, src->spec.mode_b,
                                                                          src->spec.gain, src->spec.pump_phase));
        } else {
            const auto& ph = std::get<PhaseElement>(element);
            total = gaussian::compose(total, gaussian::phase_transform(n, ph.mode, resolve_phase(ph, bindings)));
        }
    }
    return total;
}

FourfoldRate fourfold_rate(const ExperimentLayout& layout, const Bindings& bindings, double n0,
                           const fock::TruncationPolicy& policy) {
    if (!(n0 > 0.0)) throw std::invalid_argument("N0 must be positive");
    FourfoldRate out;
    const int photons = fock::total_photons(layout.postselect);
    if (photons % 2 == 0 && photons > 0) {
        fock::TruncationPolicy lowest = policy;
        lowest.series_order = photons / 2;
        lowest.max_total_photons = std::max(policy.max_total_photons, photons);
        const auto ref = evolve(layout, bindings, lowest).vacuum_referenced();
        out.leading = n0 * std::norm(ref.amplitude(layout.postselect));
    }
    const auto state = evolve(layout, bindings, policy);
    if (state.series_mode()) {
        out.rate = n0 * std::norm(state.vacuum_referenced().amplitude(layout.postselect));
    } else {
        out.rate = n0 * state.projection_probability(layout.postselect);
    }
    out.correction = out.rate - out.leading;
    return out;
}

TwofoldResult local_twofold_rate(const ExperimentLayout& layout, const Bindings& bindings,
                                 std::optional<int> order, int max_total_photons, LocalModes local) {
    if (local.first == local.second || local.first >= layout.modes.size() ||
        local.second >= layout.modes.size()) {
        throw std::invalid_argument("local modes must be two distinct layout modes");
    }
    fock::TruncationPolicy policy;
    policy.max_total_photons = max_total_photons;
    if (order) {
        if (*order < 2) throw std::invalid_argument("expansion order must be >= 2");
        policy.series_order = *order;
        const auto state = evolve(layout, bindings, policy);
        const std::size_t modes[] = {local.first, local.second};
        return {local_probability(state, local), state.expectation_nn(modes)};
    }
    const auto state = evolve(layout, bindings, policy);
    const auto transform = heisenberg_transform(layout, bindings);
    const gaussian::LadderOp ops[] = {
        {local.first, true}, {local.first, false}, {local.second, true}, {local.second, false}};
    return {local_probability(state, local), gaussian::vacuum_moment(transform, ops).value.real()};
}

std::vector<TruncationRow> truncation_study(const ExperimentLayout& layout, const std::vector<int>& orders,
                                            const std::vector<double>& sweep,
                                            const TruncationStudyOptions& options) {
    if (orders.empty()) throw std::invalid_argument("truncation study needs at least one order");
    for (int k : orders) {
        if (k < 2) throw std::invalid_argument("truncation study orders must be >= 2");
    }
    if (!layout.phase_symbols.contains(options.sweep_symbol)) {
        throw std::invalid_argument("layout has no phase symbol '" + options.sweep_symbol + "'");
    }
    std::vector<TruncationRow> rows(orders.size());
    for (std::size_t r = 0; r < orders.size(); ++r) {
        std::vector<double> twofold(sweep.size());
        std::vector<double> fourfold(sweep.size());
        fock::TruncationPolicy policy;
        policy.max_total_photons = options.max_total_photons;
        policy.series_order = orders[r];
        parallel_for(sweep.size(), [&](std::size_t i) {
            Bindings b = options.base;
            b[options.sweep_symbol] = sweep[i];
            const auto state = evolve(layout, b, policy);
            twofold[i] = local_probability(state, options.local);
            fourfold[i] = state.projection_probability(layout.postselect);
        });
        try {
            rows[r] = {orders[r], gaussian::fringe_visibility(twofold), gaussian::fringe_visibility(fourfold)};
        } catch (const std::domain_error&) {
            throw std::domain_error("degenerate input: the sweep carries no signal (all rates are zero)");
        }
    }
    return rows;
}

std::string truncation_csv(const std::vector<TruncationRow>& rows) {
    std::ostringstream os;
    os << "order,v2,v4\n";
    for (const auto& row : rows) {
        os << row.order << ',' << format_double(row.v2) << ',' << format_double(row.v4) << '\n';
    }
    return os.str();
}

std::vector<double> period_grid(std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = 2.0 * std::numbers::pi * double(i) / double(n);
    return grid;
}

}  // namespace pathid::interferometer
