#ifndef STMT_REPORT_IO_HPP
#define STMT_REPORT_IO_HPP

#include <string>
#include <string_view>

namespace stmt {

/// Shortest decimal form of `value` that parses back to the same double.
std::string format_real(double value);

/// Quotes a CSV field when it holds a separator, quote or line break.
std::string csv_escape(std::string_view field);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file. Throws std::runtime_error.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace stmt

#endif  // STMT_REPORT_IO_HPP
