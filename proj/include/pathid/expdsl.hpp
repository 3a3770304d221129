#pragma once

// Line-oriented experiment description files (.fi).
//
//     version 1
//     mode a1
//     source a1 b1 gain 0.096 [pump <angle>]
//     phase a1 alpha            # symbol, or a constant angle such as pi/4
//     postselect 1 1 1 1
//     set alpha 0
//     sweep beta from 0 to 4*pi steps 64
//
// Statements run in file order.  Expressions may not contain spaces.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pathid/interferometer.hpp"

namespace pathid::dsl {

struct Diagnostic {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    /// 1-based.
    std::size_t line = 0;
    std::size_t column = 0;
    std::string message;
    std::string excerpt;

    /// "line:col: error: message" followed by the excerpt and a caret.
    std::string format() const;
};

struct SourceStmt {
    std::string mode_a;
    std::string mode_b;
    double gain = 0.0;
    double pump = 0.0;

    friend bool operator==(const SourceStmt&, const SourceStmt&) = default;
};

struct PhaseStmt {
    std::string mode;
    std::variant<double, std::string> phase;

    friend bool operator==(const PhaseStmt&, const PhaseStmt&) = default;
};

using Statement = std::variant<SourceStmt, PhaseStmt>;

struct SweepDecl {
    std::string symbol;
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 1;

    /// Inclusive endpoints; a single step yields `from`.
    std::vector<double> values() const;

    friend bool operator==(const SweepDecl&, const SweepDecl&) = default;
};

struct SetDecl {
    std::string symbol;
    double value = 0.0;

    friend bool operator==(const SetDecl&, const SetDecl&) = default;
};

struct ExperimentDoc {
    int version = 1;
    std::vector<std::string> modes;
    std::vector<Statement> elements;
    std::vector<unsigned> postselect;
    std::vector<SetDecl> sets;
    std::vector<SweepDecl> sweeps;

    friend bool operator==(const ExperimentDoc&, const ExperimentDoc&) = default;
};

struct ParseResult {
    std::optional<ExperimentDoc> doc;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return doc.has_value(); }
    /// All diagnostics, one formatted block each.
    std::string report() const;
};

/// Never throws on malformed text; every problem becomes a diagnostic.
ParseResult parse(std::string_view text);
/// Throws std::runtime_error when the file cannot be read.
ParseResult parse_file(const std::string& path);

/// Canonical text form; parse(print(doc)) reproduces doc.
std::string print(const ExperimentDoc& doc);

struct SettingsAxis {
    std::string symbol;
    std::vector<double> values;
};

/// Fixed symbol values plus a row-major product of sweep axes (the first
/// declared sweep varies slowest).
struct SettingsGrid {
    interferometer::Bindings fixed;
    std::vector<SettingsAxis> axes;

    std::size_t size() const;
    interferometer::Bindings at(std::size_t index) const;
};

struct CompiledExperiment {
    interferometer::ExperimentLayout layout;
    SettingsGrid grid;
};

class CompileError : public std::runtime_error {
public:
    explicit CompileError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Errors: a phase symbol with neither `set` nor `sweep`, or a
/// post-selection pattern above the photon cap.
CompiledExperiment compile(const ExperimentDoc& doc, int max_total_photons = 12);

}  // namespace pathid::dsl
