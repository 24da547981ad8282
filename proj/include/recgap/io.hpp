#ifndef RECGAP_IO_HPP_
#define RECGAP_IO_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace recgap {

/// 12 significant digits, the precision used for every reported value.
std::string format_real(double value);

/// Shortest text that parses back to exactly the same double.
std::string format_exact(double value);

/// Writes to `path.tmp` then renames over path, so readers never see a partial
/// file.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace recgap

#endif  // RECGAP_IO_HPP_
