#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace stancepipe {

using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]" (space also
/// accepted as date/time separator). Only UTC offsets are accepted.
/// Throws ValidationError on anything else.
Timestamp parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);

}  // namespace stancepipe
