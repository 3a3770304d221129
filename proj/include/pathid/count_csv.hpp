#pragma once

// Count CSV: header `alpha,beta,counts,duration_s`, angles in decimal
// radians, one measured point per row, LF line endings.

#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pathid/bell_stats.hpp"

namespace pathid::bell {

inline constexpr std::string_view kCountCsvHeader = "alpha,beta,counts,duration_s";

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

CountTable read_count_csv(std::istream& in);
CountTable read_count_csv_file(const std::string& path);
std::string write_count_csv(const CountTable& table);

}  // namespace pathid::bell
