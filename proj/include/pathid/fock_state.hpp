#pragma once

// Sparse multimode Fock-space states with two-mode squeezers and phase
// shifters.  Two evolution modes are supported:
//
//  * exact mode: every squeezer is applied through its normal-ordered
//    SU(1,1) factorisation
//        S = exp(G a^dag b^dag) cosh(g)^-(n_a+n_b+1) exp(-G* a b),
//    G = e^{i phi} tanh g.  Each factor is a finite (lowering) or positive
//    (raising) series, so every retained ket is exact to rounding; mass
//    that would land above the photon cap is reported as truncation loss.
//
//  * series mode: the unitary exp(g X) is Taylor expanded and every ket
//    carries one coefficient per power of g, so contributions beyond the
//    configured total order are dropped across the whole element chain.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathid::fock {

using Complex = std::complex<double>;

/// Per-mode photon numbers, in layout mode order.
using Occupation = std::vector<std::uint16_t>;

struct ModeId {
    std::string label;
    std::size_t index = 0;

    friend bool operator==(const ModeId&, const ModeId&) = default;
};

struct TruncationPolicy {
    int max_total_photons = 8;
    /// When set, evolution runs in series mode and keeps powers of g up to this order.
    std::optional<int> series_order;
    double prune_epsilon = 1e-15;
    /// Exact-mode loss above which a warning is attached to the diagnostics.
    double truncation_warning = 1e-6;

    void validate() const;
    bool exact() const { return !series_order.has_value(); }
};

struct SqueezerSpec {
    std::size_t mode_a = 0;
    std::size_t mode_b = 1;
    double gain = 0.0;
    double pump_phase = 0.0;

    friend bool operator==(const SqueezerSpec&, const SqueezerSpec&) = default;
};

struct PhaseSpec {
    std::size_t mode = 0;
    /// Raw phase in radians; applied as e^{i n phase}.
    double phase = 0.0;

    /// Phase reduced to [0, 2pi), for comparisons.
    double reduced() const;
};

struct Diagnostics {
    /// Squared magnitude removed by the prune threshold.
    double pruned_mass = 0.0;
    /// Squared magnitude that evolution pushed above the photon cap.
    double truncated_mass = 0.0;
    std::vector<std::string> warnings;
};

struct LadderOp {
    std::size_t mode = 0;
    bool dagger = false;

    friend bool operator==(const LadderOp&, const LadderOp&) = default;
};

class FockState {
public:
    /// Coefficients of one ket: a single amplitude in exact mode, one entry
    /// per power of g (index = power) in series mode.
    using Coefficients = std::vector<Complex>;
    using Terms = std::map<Occupation, Coefficients>;

    static FockState vacuum(std::size_t modes, const TruncationPolicy& policy = {});

    std::size_t num_modes() const { return modes_; }
    const TruncationPolicy& policy() const { return policy_; }
    bool series_mode() const { return policy_.series_order.has_value(); }
    const Diagnostics& diagnostics() const { return diagnostics_; }
    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    /// Stored amplitude (sum over orders in series mode) or exactly zero.
    Complex amplitude(const Occupation& pattern) const;
    /// Per-order coefficients; empty when the ket is absent.
    Coefficients series(const Occupation& pattern) const;
    double squared_norm() const;
    /// |amplitude|^2 divided by the stored squared norm.
    double projection_probability(const Occupation& pattern) const;
    /// <prod n_m> over the normalised state.
    double expectation_nn(std::span<const std::size_t> modes) const;

    /// Series mode only: the amplitude series divided by the vacuum series
    /// and re-truncated to the configured order.  This is the unnormalised
    /// state with the vacuum coefficient fixed to one.
    FockState vacuum_referenced() const;

    /// Applies a ladder operator without any cap (used for moments).
    FockState apply_ladder(const LadderOp& op) const;

    /// <this|other>, using summed amplitudes.
    Complex inner_product(const FockState& other) const;

    /// <psi| op_1 op_2 ... op_n |psi> / <psi|psi>.
    Complex moment(std::span<const LadderOp> ops) const;

    std::string to_string() const;

private:
    FockState(std::size_t modes, TruncationPolicy policy);

    void prune();
    std::size_t coefficient_count() const;

    std::size_t modes_ = 0;
    TruncationPolicy policy_;
    Terms terms_;
    Diagnostics diagnostics_;

    friend FockState apply_phase(const FockState&, const PhaseSpec&);
    friend FockState apply_squeezer(const FockState&, const SqueezerSpec&);
};

FockState apply_phase(const FockState& state, const PhaseSpec& spec);
FockState apply_squeezer(const FockState& state, const SqueezerSpec& spec);

int total_photons(const Occupation& occupation);
std::string format_ket(const Occupation& occupation);

}  // namespace pathid::fock
