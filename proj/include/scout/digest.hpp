#pragma once

#include <string>
#include <string_view>

namespace scout {

/// Lowercase hex MD5 of the given bytes.
std::string md5_hex(std::string_view bytes);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace scout
