#include "pathid/count_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "pathid/angle_expr.hpp"

namespace pathid::bell {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view field, std::size_t line, const char* what) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(value)) {
        throw CsvError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

std::uint64_t parse_count(std::string_view field, std::size_t line) {
    field = trim(field);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw CsvError(line, "counts must be a non-negative integer, got '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

CsvError::CsvError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

CountTable read_count_csv(std::istream& in) {
    CountTable table;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (trim(line).empty()) continue;
        if (!header_seen) {
            if (trim(line) != kCountCsvHeader) {
                throw CsvError(line_no, "expected header '" + std::string(kCountCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != 4) {
            throw CsvError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
        }
        const double alpha = parse_real(fields[0], line_no, "alpha");
        const double beta = parse_real(fields[1], line_no, "beta");
        const auto counts = parse_count(fields[2], line_no);
        const double duration = parse_real(fields[3], line_no, "duration_s");
        if (duration < 0.0) throw CsvError(line_no, "duration_s must be non-negative");
        table.add(alpha, beta, counts, duration);
    }
    if (!header_seen) throw CsvError(line_no, "empty count file");
    return table;
}

CountTable read_count_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open count file '" + path + "'");
    return read_count_csv(in);
}

std::string write_count_csv(const CountTable& table) {
    std::ostringstream os;
    os << kCountCsvHeader << '\n';
    for (const auto& e : table.entries()) {
        os << format_double(e.alpha) << ',' << format_double(e.beta) << ',' << e.counts << ','
           << format_double(e.duration_s) << '\n';
    }
    return os.str();
}

}  // namespace pathid::bell
