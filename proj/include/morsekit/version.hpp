#pragma once

#include <string_view>

namespace morsekit {

inline constexpr std::string_view version = "0.1.0";

/// CSV/JSON schema revision understood by this build; config files must
/// declare a matching schema_version key.
inline constexpr int schema_version = 1;

} // namespace morsekit
