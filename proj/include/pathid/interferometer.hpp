#pragma once

// Path-identity experiment layouts: an ordered chain of two-mode sources
// and phase shifters over labelled modes, plus a post-selection pattern.
// Phase elements may be bound to symbols (alpha, beta, ...) that are
// resolved at evaluation time.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pathid/fock_state.hpp"
#include "pathid/gaussian.hpp"

namespace pathid::interferometer {

using Bindings = std::map<std::string, double>;

struct SourceElement {
    std::string label;
    fock::SqueezerSpec spec;

    friend bool operator==(const SourceElement&, const SourceElement&) = default;
};

struct PhaseElement {
    std::size_t mode = 0;
    /// Either a fixed phase or the name of a symbol.
    std::variant<double, std::string> phase;

    friend bool operator==(const PhaseElement&, const PhaseElement&) = default;
};

using Element = std::variant<SourceElement, PhaseElement>;

struct ExperimentLayout {
    std::vector<fock::ModeId> modes;
    std::vector<Element> elements;
    fock::Occupation postselect;
    /// Symbol name -> index of the phase element it drives.
    std::map<std::string, std::size_t> phase_symbols;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate(int max_total_photons) const;
    std::size_t mode_index(const std::string& label) const;
    /// Structural equality; source labels are ignored.
    bool same_structure(const ExperimentLayout& other) const;
};

struct PhaseSettings {
    double alpha = 0.0;
    double beta = 0.0;

    Bindings bindings() const { return {{"alpha", alpha}, {"beta", beta}}; }
};

/// Sources I..IV and phases alpha (on a1) and beta (on b2) over modes
/// a1, a2, b1, b2; post-selects |1111>.
ExperimentLayout canonical_layout(double g);

fock::FockState evolve(const ExperimentLayout& layout, const Bindings& bindings,
                       const fock::TruncationPolicy& policy);

gaussian::BogoliubovTransform heisenberg_transform(const ExperimentLayout& layout, const Bindings& bindings);

struct FourfoldRate {
    /// Series mode: N0 |amplitude|^2 of the vacuum-referenced state.
    /// Exact mode: N0 times the normalised post-selection probability.
    double rate = 0.0;
    /// Lowest-order contribution, N0 |amplitude|^2 at order (photons / 2).
    double leading = 0.0;
    /// rate - leading; zero in series mode at the lowest order.
    double correction = 0.0;
};

FourfoldRate fourfold_rate(const ExperimentLayout& layout, const Bindings& bindings, double n0,
                           const fock::TruncationPolicy& policy);

struct TwofoldResult {
    /// P(n_first = 1, n_second = 1), other modes summed.
    double probability = 0.0;
    /// <n_first n_second>.
    double moment = 0.0;
};

struct LocalModes {
    std::size_t first = 0;
    std::size_t second = 1;
};

/// Order-K result when `order` is set (K >= 2); otherwise exact Fock
/// probability and Wick moment.
TwofoldResult local_twofold_rate(const ExperimentLayout& layout, const Bindings& bindings,
                                 std::optional<int> order, int max_total_photons = 12,
                                 LocalModes local = {});

struct TruncationRow {
    int order = 0;
    double v2 = 0.0;
    double v4 = 0.0;
};

struct TruncationStudyOptions {
    std::string sweep_symbol = "beta";
    Bindings base;
    int max_total_photons = 12;
    LocalModes local;
};

/// Two-fold and four-fold visibility over the sweep grid for each order.
/// Throws std::domain_error when the sweep carries no signal (e.g. g = 0).
std::vector<TruncationRow> truncation_study(const ExperimentLayout& layout, const std::vector<int>& orders,
                                            const std::vector<double>& sweep,
                                            const TruncationStudyOptions& options = {});

std::string truncation_csv(const std::vector<TruncationRow>& rows);

/// n evenly spaced points on [0, 2pi).
std::vector<double> period_grid(std::size_t n);

}  // namespace pathid::interferometer
