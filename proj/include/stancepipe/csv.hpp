#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace stancepipe::csv {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
/// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> parse_line(std::string_view line);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Fixed-point with the given number of decimals, "-0.00" normalized to "0.00".
std::string fixed(double value, int decimals);

}  // namespace stancepipe::csv
