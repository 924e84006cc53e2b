#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecmtk::csv {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Strict parse of a whole field; std::nullopt-style failure via bool.
bool parse_double(std::string_view text, double& out);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

// Writes `# ` prefixed lines; each element of `comments` becomes one line.
void write_comments(std::ostream& os, std::span<const std::string> comments);

void write_row(std::ostream& os, std::span<const double> values);

}  // namespace ecmtk::csv
