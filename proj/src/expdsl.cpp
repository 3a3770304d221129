#include "pathid/expdsl.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pathid/angle_expr.hpp"

namespace pathid::dsl {

namespace {

struct Token {
    std::string_view text;
    std::size_t column = 0;  // 1-based
};

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

const std::set<std::string_view> kKeywords = {"version", "mode",  "source", "phase", "postselect",
                                              "sweep",   "set",   "gain",   "pump",  "from",
                                              "to",      "steps", "pi"};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ParseResult run() {
        if (text_.starts_with("\xEF\xBB\xBF")) text_.remove_prefix(3);
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos <= text_.size()) {
            const auto nl = text_.find('\n', pos);
            std::string_view line = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++line_no;
            statement(line_no, line);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        finish(line_no);
        ParseResult result;
        bool failed = false;
        for (const auto& d : diags_) failed |= d.severity == Diagnostic::Severity::Error;
        if (!failed) result.doc = std::move(doc_);
        result.diagnostics = std::move(diags_);
        return result;
    }

private:
    std::string_view text_;
    ExperimentDoc doc_;
    std::vector<Diagnostic> diags_;
    bool version_seen_ = false;
    bool header_reported_ = false;
    std::size_t postselect_line_ = 0;
    std::map<std::string, std::size_t> symbols_;  // symbol -> line of its phase statement
    std::set<std::string> configured_;
    std::string_view current_;
    std::size_t line_ = 0;

    void error(std::size_t column, std::string message) {
        diags_.push_back({Diagnostic::Severity::Error, line_, column, std::move(message), std::string(current_)});
    }

    static std::vector<Token> tokenize(std::string_view line) {
        std::vector<Token> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            const char c = line[i];
            if (c == '#') break;
            if (c == ' ' || c == '\t') {
                ++i;
                continue;
            }
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') ++i;
            tokens.push_back({line.substr(start, i - start), start + 1});
        }
        return tokens;
    }

    std::optional<double> number(const Token& tok, const char* what) {
        const auto parsed = parse_angle_expression(tok.text);
        if (!parsed.ok) {
            error(tok.column + parsed.error_offset, std::string("invalid ") + what + " '" + std::string(tok.text) +
                                                        "': " + parsed.error);
            return std::nullopt;
        }
        return parsed.value;
    }

    bool expect_keyword(const Token& tok, std::string_view keyword) {
        if (tok.text == keyword) return true;
        error(tok.column, "expected '" + std::string(keyword) + "', found '" + std::string(tok.text) + "'");
        return false;
    }

    bool declared_mode(const Token& tok) {
        for (const auto& m : doc_.modes) {
            if (m == tok.text) return true;
        }
        error(tok.column, "undeclared mode '" + std::string(tok.text) + "'");
        return false;
    }

    bool arity(const std::vector<Token>& toks, std::initializer_list<std::size_t> allowed, const char* usage) {
        for (auto n : allowed) {
            if (toks.size() == n) return true;
        }
        error(toks.front().column, "wrong number of arguments; usage: " + std::string(usage));
        return false;
    }

    void statement(std::size_t line_no, std::string_view line) {
        line_ = line_no;
        current_ = line;
        const auto toks = tokenize(line);
        if (toks.empty()) return;
        const auto kw = toks[0].text;
        if (!version_seen_ && kw != "version" && !header_reported_) {
            error(toks[0].column, "missing 'version 1' header before the first statement");
            header_reported_ = true;
        }
        if (kw == "version") {
            version_stmt(toks);
        } else if (kw == "mode") {
            mode_stmt(toks);
        } else if (kw == "source") {
            source_stmt(toks);
        } else if (kw == "phase") {
            phase_stmt(toks);
        } else if (kw == "postselect") {
            postselect_stmt(toks);
        } else if (kw == "sweep") {
            sweep_stmt(toks);
        } else if (kw == "set") {
            set_stmt(toks);
        } else {
            error(toks[0].column, "unknown keyword '" + std::string(kw) + "'");
        }
    }

    void version_stmt(const std::vector<Token>& t) {
        if (version_seen_ || header_reported_) {
            error(t[0].column, "'version' must be the first statement and appear once");
            return;
        }
        version_seen_ = true;
        if (!arity(t, {2}, "version 1")) return;
        if (t[1].text != "1") error(t[1].column, "unsupported grammar version '" + std::string(t[1].text) + "'");
    }

    void mode_stmt(const std::vector<Token>& t) {
        if (!arity(t, {2}, "mode <name>")) return;
        const std::string name(t[1].text);
        if (!is_identifier(name) || kKeywords.contains(name)) {
            error(t[1].column, "invalid mode name '" + name + "'");
            return;
        }
        for (const auto& m : doc_.modes) {
            if (m == name) {
                error(t[1].column, "duplicate mode '" + name + "'");
                return;
            }
        }
        if (symbols_.contains(name)) {
            error(t[1].column, "'" + name + "' is already a phase symbol");
            return;
        }
        if (!doc_.elements.empty() || postselect_line_ != 0) {
            error(t[0].column, "modes must be declared before sources, phases and postselect");
            return;
        }
        doc_.modes.push_back(name);
    }

    void source_stmt(const std::vector<Token>& t) {
        if (!arity(t, {5, 7}, "source <mode> <mode> gain <g> [pump <angle>]")) return;
        bool ok = declared_mode(t[1]);
        ok = declared_mode(t[2]) && ok;
        if (ok && t[1].text == t[2].text) {
            error(t[2].column, "source modes must be distinct");
            ok = false;
        }
        ok = expect_keyword(t[3], "gain") && ok;
        const auto gain = number(t[4], "gain");
        if (gain && *gain < 0.0) {
            error(t[4].column, "gain must be non-negative");
            ok = false;
        }
        std::optional<double> pump = 0.0;
        if (t.size() == 7) {
            ok = expect_keyword(t[5], "pump") && ok;
            pump = number(t[6], "pump phase");
        }
        if (ok && gain && pump) {
            doc_.elements.push_back(SourceStmt{std::string(t[1].text), std::string(t[2].text), *gain, *pump});
        }
    }

    void phase_stmt(const std::vector<Token>& t) {
        if (!arity(t, {3}, "phase <mode> <symbol|angle>")) return;
        const bool mode_ok = declared_mode(t[1]);
        const auto arg = t[2].text;
        if (is_identifier(arg) && arg != "pi") {
            const std::string sym(arg);
            if (kKeywords.contains(sym)) {
                error(t[2].column, "keyword '" + sym + "' cannot be a phase symbol");
                return;
            }
            for (const auto& m : doc_.modes) {
                if (m == sym) {
                    error(t[2].column, "'" + sym + "' is a mode, not a phase symbol");
                    return;
                }
            }
            if (symbols_.contains(sym)) {
                error(t[2].column, "duplicate phase symbol '" + sym + "' (first used on line " +
                                       std::to_string(symbols_[sym]) + ")");
                return;
            }
            if (!mode_ok) return;
            symbols_[sym] = line_;
            doc_.elements.push_back(PhaseStmt{std::string(t[1].text), sym});
            return;
        }
        const auto value = number(t[2], "phase");
        if (mode_ok && value) doc_.elements.push_back(PhaseStmt{std::string(t[1].text), *value});
    }

    void postselect_stmt(const std::vector<Token>& t) {
        if (postselect_line_ != 0) {
            error(t[0].column, "duplicate postselect (first on line " + std::to_string(postselect_line_) + ")");
            return;
        }
        postselect_line_ = line_;
        if (t.size() - 1 != doc_.modes.size()) {
            error(t[0].column, "postselect lists " + std::to_string(t.size() - 1) + " counts for " +
                                   std::to_string(doc_.modes.size()) + " declared modes");
            return;
        }
        std::vector<unsigned> counts;
        bool ok = true;
        for (std::size_t i = 1; i < t.size(); ++i) {
            unsigned n = 0;
            const auto s = t[i].text;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
            if (ec != std::errc() || ptr != s.data() + s.size() || n > 64) {
                error(t[i].column, "photon count must be an integer in [0, 64], found '" + std::string(s) + "'");
                ok = false;
            }
            counts.push_back(n);
        }
        if (ok) doc_.postselect = std::move(counts);
    }

    bool settable_symbol(const Token& tok) {
        const std::string sym(tok.text);
        if (!symbols_.contains(sym)) {
            error(tok.column, "unknown phase symbol '" + sym + "'");
            return false;
        }
        if (!configured_.insert(sym).second) {
            error(tok.column, "symbol '" + sym + "' already has a set or sweep");
            return false;
        }
        return true;
    }

    void sweep_stmt(const std::vector<Token>& t) {
        if (!arity(t, {7, 8}, "sweep <symbol> [from] <a> to <b> steps <k>")) return;
        const std::size_t o = t.size() == 8 ? 1 : 0;
        bool ok = true;
        if (o == 1) ok = expect_keyword(t[2], "from");
        ok = expect_keyword(t[3 + o], "to") && ok;
        ok = expect_keyword(t[5 + o], "steps") && ok;
        const auto from = number(t[2 + o], "sweep start");
        const auto to = number(t[4 + o], "sweep end");
        std::size_t steps = 0;
        const auto s = t[6 + o].text;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), steps);
        if (ec != std::errc() || ptr != s.data() + s.size() || steps == 0 || steps > 1000000) {
            error(t[6 + o].column, "steps must be a positive integer, found '" + std::string(s) + "'");
            ok = false;
        }
        ok = settable_symbol(t[1]) && ok;
        if (ok && from && to) doc_.sweeps.push_back({std::string(t[1].text), *from, *to, steps});
    }

    void set_stmt(const std::vector<Token>& t) {
        if (!arity(t, {3}, "set <symbol> <angle>")) return;
        const auto value = number(t[2], "value");
        const bool ok = settable_symbol(t[1]);
        if (ok && value) doc_.sets.push_back({std::string(t[1].text), *value});
    }

    void finish(std::size_t last_line) {
        line_ = last_line;
        current_ = {};
        auto whole_file = [&](std::string message) {
            diags_.push_back({Diagnostic::Severity::Error, 1, 1, std::move(message), {}});
        };
        if (!version_seen_ && !header_reported_) whole_file("missing 'version 1' header");
        if (doc_.modes.empty()) whole_file("no modes declared");
        else if (postselect_line_ == 0) whole_file("no postselect statement");
    }
};

}  // namespace

std::string Diagnostic::format() const {
    std::ostringstream os;
    os << line << ':' << column << ": " << (severity == Severity::Error ? "error" : "warning") << ": " << message;
    if (!excerpt.empty()) {
        os << "\n    " << excerpt << "\n    " << std::string(column > 0 ? column - 1 : 0, ' ') << '^';
    }
    return os.str();
}

std::string ParseResult::report() const {
    std::string out;
    for (const auto& d : diagnostics) out += d.format() + "\n";
    return out;
}

std::vector<double> SweepDecl::values() const {
    std::vector<double> v(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        v[i] = steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    return v;
}

ParseResult parse(std::string_view text) { return Parser(text).run(); }

ParseResult parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open experiment file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string print(const ExperimentDoc& doc) {
    std::ostringstream os;
    os << "version " << doc.version << "\n";
    for (const auto& m : doc.modes) os << "mode " << m << "\n";
    for (const auto& e : doc.elements) {
        if (const auto* s = std::get_if<SourceStmt>(&e)) {
            os << "source " << s->mode_a << ' ' << s->mode_b << " gain " << format_double(s->gain);
            if (s->pump != 0.0) os << " pump " << format_double(s->pump);
            os << "\n";
        } else {
            const auto& p = std::get<PhaseStmt>(e);
            os << "phase " << p.mode << ' ';
            if (const auto* sym = std::get_if<std::string>(&p.phase)) os << *sym;
            else os << format_double(std::get<double>(p.phase));
            os << "\n";
        }
    }
    if (!doc.postselect.empty()) {
        os << "postselect";
        for (auto n : doc.postselect) os << ' ' << n;
        os << "\n";
    }
    for (const auto& s : doc.sets) os << "set " << s.symbol << ' ' << format_double(s.value) << "\n";
    for (const auto& s : doc.sweeps) {
        os << "sweep " << s.symbol << " from " << format_double(s.from) << " to " << format_double(s.to) << " steps "
           << s.steps << "\n";
    }
    return os.str();
}

std::size_t SettingsGrid::size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

interferometer::Bindings SettingsGrid::at(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("settings index out of range");
    auto b = fixed;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
        b[it->symbol] = it->values[index % it->values.size()];
        index /= it->values.size();
    }
    return b;
}

CompileError::CompileError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error([&] {
          std::string msg = "compile failed";
          for (const auto& d : diagnostics) msg += "; " + d.message;
          return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

CompiledExperiment compile(const ExperimentDoc& doc, int max_total_photons) {
    std::vector<Diagnostic> errors;
    auto fail = [&](std::string message) { errors.push_back({Diagnostic::Severity::Error, 0, 0, std::move(message), {}}); };

    CompiledExperiment out;
    auto& layout = out.layout;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < doc.modes.size(); ++i) {
        layout.modes.push_back({doc.modes[i], i});
        index[doc.modes[i]] = i;
    }
    auto mode = [&](const std::string& name) -> std::size_t {
        const auto it = index.find(name);
        if (it == index.end()) {
            fail("undeclared mode '" + name + "'");
            return 0;
        }
        return it->second;
    };
    std::size_t sources = 0;
    for (const auto& e : doc.elements) {
        if (const auto* s = std::get_if<SourceStmt>(&e)) {
            layout.elements.push_back(interferometer::SourceElement{
                "S" + std::to_string(++sources), {mode(s->mode_a), mode(s->mode_b), s->gain, s->pump}});
        } else {
            const auto& p = std::get<PhaseStmt>(e);
            if (const auto* sym = std::get_if<std::string>(&p.phase)) {
                layout.phase_symbols[*sym] = layout.elements.size();
            }
            layout.elements.push_back(interferometer::PhaseElement{mode(p.mode), p.phase});
        }
    }
    layout.postselect.assign(doc.postselect.begin(), doc.postselect.end());
    if (layout.postselect.size() != layout.modes.size()) fail("postselect does not cover every mode");
    if (fock::total_photons(layout.postselect) > max_total_photons) {
        fail("postselect total " + std::to_string(fock::total_photons(layout.postselect)) +
             " exceeds the photon cap " + std::to_string(max_total_photons));
    }

    for (const auto& s : doc.sets) out.grid.fixed[s.symbol] = s.value;
    for (const auto& s : doc.sweeps) out.grid.axes.push_back({s.symbol, s.values()});
    for (const auto& [sym, slot] : layout.phase_symbols) {
        (void)slot;
        const bool swept = std::any_of(out.grid.axes.begin(), out.grid.axes.end(),
                                       [&](const SettingsAxis& a) { return a.symbol == sym; });
        if (!swept && !out.grid.fixed.contains(sym)) {
            fail("phase symbol '" + sym + "' is unbound: give it a set or a sweep");
        }
    }
    if (errors.empty()) {
        try {
            layout.validate(max_total_photons);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (!errors.empty()) throw CompileError(std::move(errors));
    return out;
}

}  // namespace pathid::dsl
