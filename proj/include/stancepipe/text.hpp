#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stancepipe {

/// Full Unicode case folding of a UTF-8 string.
std::string casefold(std::string_view utf8);

/// Matching key for place and location names: case-folded, diacritics
/// removed, every non-alphanumeric run collapsed to one space, trimmed.
/// "Cataluña," and "CATALUNA" produce the same key.
std::string fold_key(std::string_view utf8);

/// Splits a case-folded chunk into runs of letters, digits and combining
/// marks. Everything else separates tokens.
std::vector<std::string> word_runs(std::string_view utf8);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace stancepipe
