#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace hhlab {

// %.17g-style text for a double: 17 significant digits, trailing zeros dropped, '.' decimal.
std::string format_double(double value);

// Writes `contents` to `path` with LF line endings preserved, creating parent
// directories. Throws Error(Io) on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace hhlab
