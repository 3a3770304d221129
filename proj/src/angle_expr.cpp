#include "pathid/angle_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pathid {

namespace {

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    AngleParse run() {
        AngleParse result;
        try {
            skip_space();
            if (pos_ == text_.size()) fail("empty expression");
            result.value = expr();
            skip_space();
            if (pos_ != text_.size()) fail("unexpected character");
            if (!std::isfinite(result.value)) fail("expression is not finite");
            result.ok = true;
        } catch (const Failure& f) {
            result.ok = false;
            result.error = f.message;
            result.error_offset = f.offset;
        }
        return result;
    }

private:
    struct Failure {
        std::string message;
        std::size_t offset;
    };

    [[noreturn]] void fail(const std::string& message) { throw Failure{message, pos_}; }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool peek(char c) {
        skip_space();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool at_pi() {
        skip_space();
        return text_.substr(pos_, 2) == "pi";
    }

    double expr() {
        double value = term();
        while (true) {
            if (peek('+')) {
                ++pos_;
                value += term();
            } else if (peek('-')) {
                ++pos_;
                value -= term();
            } else {
                return value;
            }
        }
    }

    double term() {
        double value = unary();
        while (true) {
            if (peek('*')) {
                ++pos_;
                value *= unary();
            } else if (peek('/')) {
                ++pos_;
                const double d = unary();
                if (d == 0.0) fail("division by zero");
                value /= d;
            } else if (at_pi()) {
                pos_ += 2;
                value *= std::numbers::pi;
            } else {
                return value;
            }
        }
    }

    double unary() {
        if (depth_ > 64) fail("expression nested too deeply");
        if (peek('-')) {
            ++pos_;
            ++depth_;
            const double v = -unary();
            --depth_;
            return v;
        }
        if (peek('+')) {
            ++pos_;
            ++depth_;
            const double v = unary();
            --depth_;
            return v;
        }
        return primary();
    }

    double primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("expected a number");
        if (text_[pos_] == '(') {
            ++pos_;
            ++depth_;
            const double v = expr();
            --depth_;
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return v;
        }
        if (at_pi()) {
            pos_ += 2;
            return std::numbers::pi;
        }
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin) fail("expected a number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

AngleParse parse_angle_expression(std::string_view text) { return ExprParser(text).run(); }

double parse_angle(std::string_view text) {
    const auto r = parse_angle_expression(text);
    if (!r.ok) throw std::invalid_argument("bad angle '" + std::string(text) + "': " + r.error);
    return r.value;
}

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw std::runtime_error("cannot format number");
    return std::string(buffer, ptr);
}

}  // namespace pathid
