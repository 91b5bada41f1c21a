#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace dpgt::csv {

using Row = std::vector<std::string>;

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string join(const Row& fields);

/// RFC 4180 style reader. Blank lines are skipped.
std::vector<Row> parse(std::istream& in);

/// Fixed-point rendering with `decimals` digits, locale independent.
std::string fixed(double value, int decimals);

/// Parses a whole field as a double; throws dpgt::Error(InvalidInput).
double to_double(const std::string& field, std::string_view column);
long long to_integer(const std::string& field, std::string_view column);

}  // namespace dpgt::csv
