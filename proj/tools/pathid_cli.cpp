// pathid: command-line front end for the simulation and analysis pipelines.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pathid/angle_expr.hpp"
#include "pathid/bell_stats.hpp"
#include "pathid/count_csv.hpp"
#include "pathid/expdsl.hpp"
#include "pathid/interferometer.hpp"
#include "pathid/parallel.hpp"
#include "pathid/vacuum_bound.hpp"

#ifndef PATHID_VERSION
#define PATHID_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pathid;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string format = "text";
    bool gnuplot = false;
};

// Collects outputs and writes them either into --out-dir or to the
// standard streams, followed by the run manifest.
class Run {
public:
    Run(const Globals& g, std::string subcommand) : globals_(g), subcommand_(std::move(subcommand)) {
        if (globals_.gnuplot && globals_.out_dir.empty()) throw UsageError("--gnuplot needs --out-dir");
        if (!globals_.out_dir.empty()) fs::create_directories(globals_.out_dir);
    }

    json& params() { return params_; }
    void input(const std::string& path) { inputs_.push_back(path); }

    /// Primary output goes to stdout when there is no output directory.
    void primary(const std::string& name, const std::string& content) {
        if (globals_.out_dir.empty()) {
            std::cout << content;
        } else {
            write(name, content);
        }
    }

    /// Secondary outputs only exist inside an output directory.
    void secondary(const std::string& name, const std::string& content) {
        if (!globals_.out_dir.empty()) write(name, content);
    }

    void gnuplot(const std::string& script) {
        if (globals_.gnuplot) write(subcommand_ + ".gp", script);
    }

    void finish() {
        json manifest;
        manifest["tool"] = "pathid";
        manifest["version"] = PATHID_VERSION;
        manifest["subcommand"] = subcommand_;
        manifest["seed"] = globals_.seed;
        manifest["format"] = globals_.format;
        manifest["parameters"] = params_;
        manifest["inputs"] = inputs_;
        manifest["outputs"] = outputs_;
        const std::string text = manifest.dump(2) + "\n";
        if (globals_.out_dir.empty()) {
            std::cerr << text;
        } else {
            write("manifest.json", text, false);
        }
    }

private:
    const Globals& globals_;
    std::string subcommand_;
    json params_ = json::object();
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;

    void write(const std::string& name, const std::string& content, bool record = true) {
        const auto path = fs::path(globals_.out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        out << content;
        if (record) outputs_.push_back(path.string());
    }
};

double angle_option(const std::string& text, const char* flag) {
    const auto parsed = parse_angle_expression(text);
    if (!parsed.ok) throw UsageError(std::string(flag) + ": " + parsed.error + " in '" + text + "'");
    return parsed.value;
}

// ---------------------------------------------------------------- scan

struct ScanOptions {
    std::string experiment;
    std::vector<std::string> sets;
    double n0 = 1.0;
    bool exact = false;
    int cap = 12;
    std::optional<double> noise;
    std::optional<double> rate;
    double duration = 60.0;
};

int cmd_scan(const Globals& g, const ScanOptions& o) {
    Run run(g, "scan");
    run.input(o.experiment);
    const auto parsed = dsl::parse_file(o.experiment);
    if (!parsed.ok()) {
        std::cerr << o.experiment << ":\n" << parsed.report();
        return kExitUsage;
    }
    auto doc = *parsed.doc;
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects symbol=value, got '" + s + "'");
        const std::string sym = s.substr(0, eq);
        const double value = angle_option(s.substr(eq + 1), "--set");
        std::erase_if(doc.sweeps, [&](const dsl::SweepDecl& d) { return d.symbol == sym; });
        std::erase_if(doc.sets, [&](const dsl::SetDecl& d) { return d.symbol == sym; });
        doc.sets.push_back({sym, value});
    }
    dsl::CompiledExperiment exp;
    try {
        exp = dsl::compile(doc, o.cap);
    } catch (const dsl::CompileError& e) {
        for (const auto& d : e.diagnostics()) std::cerr << o.experiment << ": error: " << d.message << "\n";
        return kExitUsage;
    }
    if (o.noise.has_value() != o.rate.has_value()) throw UsageError("--noise and --rate must be given together");
    if (!(o.n0 > 0.0)) throw UsageError("--n0 must be positive");

    fock::TruncationPolicy policy;
    policy.max_total_photons = o.cap;
    if (!o.exact) policy.series_order = static_cast<int>(fock::total_photons(exp.layout.postselect) / 2);
    policy.validate();

    const std::size_t n = exp.grid.size();
    std::vector<double> rates(n);
    parallel_for(n, [&](std::size_t i) {
        rates[i] = interferometer::fourfold_rate(exp.layout, exp.grid.at(i), o.n0, policy).rate;
    });

    std::vector<std::string> counts(n);
    if (o.noise) {
        bell::NoiseModel noise{*o.noise, *o.rate};
        noise.validate();
        if (!(o.duration > 0.0)) throw UsageError("--duration must be positive");
        double peak = 0.0;
        for (double r : rates) peak = std::max(peak, r);
        for (std::size_t i = 0; i < n; ++i) {
            const double f = peak > 0.0 ? 2.0 * rates[i] / peak - 1.0 : -1.0;
            const double mean = noise.rate_scale * (o.duration / noise.window_s) * (1.0 + noise.visibility * f) / 2.0;
            counts[i] = std::to_string(bell::poisson_count(mean, bell::derive_seed(g.seed, 0, i)));
        }
    }

    std::vector<std::string> symbols;
    for (const auto& [sym, slot] : exp.layout.phase_symbols) symbols.push_back(sym);
    std::ostringstream csv;
    for (const auto& s : symbols) csv << s << ',';
    csv << "rate_ideal,counts_mc\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = exp.grid.at(i);
        for (const auto& s : symbols) csv << format_double(b.at(s)) << ',';
        csv << format_double(rates[i]) << ',' << counts[i] << '\n';
    }

    auto& p = run.params();
    p["experiment"] = o.experiment;
    p["overrides"] = o.sets;
    p["n0"] = o.n0;
    p["backend"] = o.exact ? "exact" : "series";
    p["max_total_photons"] = o.cap;
    p["points"] = n;
    if (o.noise) {
        p["noise_visibility"] = *o.noise;
        p["rate_scale"] = *o.rate;
        p["duration_s"] = o.duration;
    }
    run.primary("scan.csv", csv.str());
    const std::string x = symbols.empty() ? "0" : std::to_string(symbols.size());
    run.gnuplot("set datafile separator ','\nset key autotitle columnhead\nset xlabel 'phase (rad)'\n"
                "plot 'scan.csv' using " + x + ":" + std::to_string(symbols.size() + 1) +
                " with lines" + (o.noise ? ", '' using " + x + ":" + std::to_string(symbols.size() + 2) +
                                               " axes x1y2 with points"
                                         : std::string()) +
                "\n");
    run.finish();
    return 0;
}

// ---------------------------------------------------------------- chsh

struct ChshOptions {
    std::string counts;
    bool ideal = false;
    std::string alpha1 = "0", alpha2 = "pi/2", beta1 = "pi/4", beta2 = "3pi/4";
};

int cmd_chsh(const Globals& g, const ChshOptions& o) {
    Run run(g, "chsh");
    if (o.ideal == !o.counts.empty()) throw UsageError("give either a counts file or --ideal");
    const bell::CHSHSettings settings{angle_option(o.alpha1, "--alpha1"), angle_option(o.alpha2, "--alpha2"),
                                      angle_option(o.beta1, "--beta1"), angle_option(o.beta2, "--beta2")};
    bell::CHSHResult result;
    if (o.ideal) {
        result = bell::chsh(&bell::ideal_rate, settings);
    } else {
        run.input(o.counts);
        const auto table = bell::read_count_csv_file(o.counts);
        try {
            result = bell::chsh(table, settings);
        } catch (const bell::MissingEntryError& e) {
            std::cerr << "missing count entries:\n";
            for (const auto& m : e.missing()) std::cerr << "  " << m << "\n";
            return kExitUsage;
        }
    }
    auto& p = run.params();
    p["source"] = o.ideal ? "ideal" : o.counts;
    p["alpha1"] = settings.alpha1;
    p["alpha2"] = settings.alpha2;
    p["beta1"] = settings.beta1;
    p["beta2"] = settings.beta2;

    const auto terms = bell::chsh_terms_csv(result);
    const auto summary = bell::chsh_summary_csv(result);
    if (g.format == "csv") {
        run.primary("chsh_terms.csv", terms);
        run.primary("chsh_summary.csv", summary);
        run.secondary("chsh_report.txt", bell::chsh_report(result));
    } else {
        run.primary("chsh_report.txt", bell::chsh_report(result));
        run.secondary("chsh_terms.csv", terms);
        run.secondary("chsh_summary.csv", summary);
    }
    run.gnuplot("set datafile separator ','\nset style data histogram\nset style fill solid\n"
                "plot 'chsh_terms.csv' using 2:xtic(1) title 'E'\n");
    run.finish();
    return 0;
}

// ---------------------------------------------------------------- truncation

struct TruncationOptions {
    double g = 0.096;
    std::vector<int> orders{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::size_t steps = 16;
    int cap = 12;
};

int cmd_truncation(const Globals& g, const TruncationOptions& o) {
    Run run(g, "truncation");
    if (!(o.g >= 0.0)) throw UsageError("--g must be non-negative");
    for (int k : o.orders) {
        if (k < 2) throw UsageError("orders must be at least 2");
    }
    interferometer::TruncationStudyOptions opts;
    opts.base = {{"alpha", 0.0}};
    opts.max_total_photons = o.cap;
    const auto rows = interferometer::truncation_study(interferometer::canonical_layout(o.g), o.orders,
                                                       interferometer::period_grid(o.steps), opts);
    auto& p = run.params();
    p["g"] = o.g;
    p["orders"] = o.orders;
    p["sweep_points"] = o.steps;
    p["max_total_photons"] = o.cap;
    run.primary("truncation.csv", interferometer::truncation_csv(rows));
    run.gnuplot("set datafile separator ','\nset key autotitle columnhead\nset logscale y\n"
                "set xlabel 'expansion order'\nplot 'truncation.csv' using 1:2 with linespoints, "
                "'' using 1:3 with linespoints\n");
    run.finish();
    return 0;
}

// ---------------------------------------------------------------- vacuum-bound

int cmd_vacuum_bound(const Globals& g, double gain, double sigma_g) {
    Run run(g, "vacuum-bound");
    if (!(gain >= 0.0) || !(sigma_g >= 0.0)) throw UsageError("--g and --sigma-g must be non-negative");
    const auto report = vacuum::vacuum_bound_report(gain, sigma_g);
    auto& p = run.params();
    p["g"] = gain;
    p["sigma_g"] = sigma_g;
    p["reference_S"] = vacuum::kReferenceS;
    p["reference_sigma"] = vacuum::kReferenceSigma;
    if (g.format == "csv") {
        run.primary("vacuum_bound.csv", vacuum::report_csv(report));
        run.secondary("vacuum_bound.txt", vacuum::report_text(report));
    } else {
        run.primary("vacuum_bound.txt", vacuum::report_text(report));
        run.secondary("vacuum_bound.csv", vacuum::report_csv(report));
    }
    run.gnuplot("set datafile separator ','\nset style data histogram\nset style fill solid\n"
                "set arrow from graph 0, first 2 to graph 1, first 2 nohead\n"
                "plot 'vacuum_bound.csv' using 2:xtic(1) title 'S'\n");
    run.finish();
    return 0;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const Globals& g, const std::string& path, const std::string& method_name) {
    Run run(g, "analyze");
    run.input(path);
    const auto method = method_name == "maxmin" ? bell::VisibilityMethod::MaxMin : bell::VisibilityMethod::Fit;
    const auto table = bell::read_count_csv_file(path);
    if (table.empty()) throw UsageError("'" + path + "' holds no data rows");

    std::map<long long, std::vector<bell::SweepPoint>> by_alpha;
    std::map<long long, double> alpha_value;
    for (const auto& e : table.entries()) {
        const double a = bell::reduce_angle(e.alpha);
        auto key = std::llround(a * 1e6);
        if (key == std::llround(2 * std::numbers::pi * 1e6)) key = 0;
        by_alpha[key].push_back({e.beta, static_cast<double>(e.counts)});
        alpha_value.emplace(key, a);
    }

    std::ostringstream csv, text;
    csv << "alpha,V,sigma_V,points\n";
    text << std::fixed << std::setprecision(4);
    text << "visibility method: " << (method == bell::VisibilityMethod::Fit ? "weighted sinusoid fit" : "max/min")
         << "\n";
    double wsum = 0.0, wv = 0.0, plain = 0.0;
    bool all_weighted = true;
    for (const auto& [key, points] : by_alpha) {
        const auto v = bell::visibility(points, method);
        csv << format_double(alpha_value[key]) << ',' << format_double(v.V) << ',' << format_double(v.sigma_V) << ','
            << points.size() << '\n';
        text << "alpha=" << bell::angle_label(alpha_value[key]) << ": V = " << v.V << " +- " << v.sigma_V << "  ("
             << points.size() << " points)\n";
        plain += v.V;
        if (v.sigma_V > 0.0) {
            wsum += 1.0 / (v.sigma_V * v.sigma_V);
            wv += v.V / (v.sigma_V * v.sigma_V);
        } else {
            all_weighted = false;
        }
    }
    double mean = plain / static_cast<double>(by_alpha.size());
    double sigma = 0.0;
    if (all_weighted && wsum > 0.0) {
        mean = wv / wsum;
        sigma = 1.0 / std::sqrt(wsum);
    }
    const auto s = bell::s_from_visibility(std::clamp(mean, 0.0, 1.0), sigma);
    text << "mean V = " << mean << " +- " << sigma << "\n";
    text << "S from V (2 sqrt2 V) = " << s.value << " +- " << s.sigma << "\n";
    csv << "mean," << format_double(mean) << ',' << format_double(sigma) << ',' << table.size() << '\n';

    std::ostringstream summary;
    summary << "V,sigma_V,S,sigma_S\n"
            << format_double(mean) << ',' << format_double(sigma) << ',' << format_double(s.value) << ','
            << format_double(s.sigma) << '\n';

    auto& p = run.params();
    p["counts"] = path;
    p["method"] = method_name;
    p["alpha_groups"] = by_alpha.size();
    if (g.format == "csv") {
        run.primary("analyze.csv", csv.str());
        run.secondary("analyze.txt", text.str());
    } else {
        run.primary("analyze.txt", text.str());
        run.secondary("analyze.csv", csv.str());
    }
    run.secondary("analyze_summary.csv", summary.str());
    run.gnuplot("set datafile separator ','\nset key autotitle columnhead\n"
                "plot '" + fs::absolute(path).string() + "' using 2:3 with points\n");
    run.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-identity four-photon interference: simulation and CHSH analysis", "pathid"};
    app.set_version_flag("--version", PATHID_VERSION);
    app.require_subcommand(1);

    Globals globals;
    app.add_option("--seed", globals.seed, "Seed for every random draw")->capture_default_str();
    app.add_option("--out-dir", globals.out_dir, "Write outputs and manifest.json here instead of stdout/stderr");
    app.add_option("--format", globals.format, "Report format for chsh, vacuum-bound and analyze")
        ->check(CLI::IsMember({"text", "csv"}))
        ->capture_default_str();
    app.add_flag("--gnuplot", globals.gnuplot, "Also write a gnuplot script next to the CSV (needs --out-dir)");

    ScanOptions scan;
    auto* scan_cmd = app.add_subcommand("scan", "Four-fold rate over an experiment file's settings grid");
    scan_cmd->add_option("experiment", scan.experiment, "Experiment description (.fi)")->required()->check(CLI::ExistingFile);
    scan_cmd->add_option("--set", scan.sets, "Override a phase symbol, e.g. --set alpha=pi (replaces any sweep)");
    scan_cmd->add_option("--n0", scan.n0, "Pump repetitions per unit time")->capture_default_str();
    scan_cmd->add_flag("--exact", scan.exact, "Exact Fock evolution instead of the lowest-order series");
    scan_cmd->add_option("--cap", scan.cap, "Photon-number cap")->capture_default_str()->check(CLI::Range(2, 40));
    scan_cmd->add_option("--noise", scan.noise, "Fringe visibility V for the Monte-Carlo column")->check(CLI::Range(0.0, 1.0));
    scan_cmd->add_option("--rate", scan.rate, "Expected counts at the fringe maximum per 60 s window");
    scan_cmd->add_option("--duration", scan.duration, "Integration time per point in seconds")->capture_default_str();

    ChshOptions chsh;
    auto* chsh_cmd = app.add_subcommand("chsh", "CHSH S from a count table or the ideal correlations");
    chsh_cmd->add_option("counts", chsh.counts, "Count CSV (alpha,beta,counts,duration_s)")->check(CLI::ExistingFile);
    chsh_cmd->add_flag("--ideal", chsh.ideal, "Use the ideal rate 2 + 2cos(alpha + beta)");
    chsh_cmd->add_option("--alpha1", chsh.alpha1, "Angle expression")->capture_default_str();
    chsh_cmd->add_option("--alpha2", chsh.alpha2, "Angle expression")->capture_default_str();
    chsh_cmd->add_option("--beta1", chsh.beta1, "Angle expression")->capture_default_str();
    chsh_cmd->add_option("--beta2", chsh.beta2, "Angle expression")->capture_default_str();

    TruncationOptions trunc;
    auto* trunc_cmd = app.add_subcommand("truncation", "Two- and four-fold visibility against expansion order");
    trunc_cmd->add_option("--g", trunc.g, "Squeezing parameter")->capture_default_str();
    trunc_cmd->add_option("--orders", trunc.orders, "Expansion orders (>= 2)")->delimiter(',')->capture_default_str();
    trunc_cmd->add_option("--steps", trunc.steps, "Points in the beta sweep over one period")
        ->capture_default_str()
        ->check(CLI::Range(8, 4096));
    trunc_cmd->add_option("--cap", trunc.cap, "Photon-number cap")->capture_default_str()->check(CLI::Range(4, 40));

    double vac_g = 0.096, vac_sigma = 0.008;
    auto* vac_cmd = app.add_subcommand("vacuum-bound", "CHSH values of the vacuum/four-photon bipartite state");
    vac_cmd->add_option("--g", vac_g, "Squeezing parameter")->capture_default_str();
    vac_cmd->add_option("--sigma-g", vac_sigma, "Uncertainty of g")->capture_default_str();

    std::string analyze_path, analyze_method = "fit";
    auto* analyze_cmd = app.add_subcommand("analyze", "Visibility per alpha, mean visibility and S from V");
    analyze_cmd->add_option("counts", analyze_path, "Count CSV (alpha,beta,counts,duration_s)")
        ->required()
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--method", analyze_method, "Visibility estimator")
        ->check(CLI::IsMember({"fit", "maxmin"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*scan_cmd) return cmd_scan(globals, scan);
        if (*chsh_cmd) return cmd_chsh(globals, chsh);
        if (*trunc_cmd) return cmd_truncation(globals, trunc);
        if (*vac_cmd) return cmd_vacuum_bound(globals, vac_g, vac_sigma);
        if (*analyze_cmd) return cmd_analyze(globals, analyze_path, analyze_method);
    } catch (const bell::FitError& e) {
        std::cerr << "pathid: fit failed: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "pathid: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
