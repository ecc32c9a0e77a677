#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace itinera::files {

std::string read_all(const std::filesystem::path& path);

/// Writes to a sibling temp file, flushes, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Appends one line and flushes it to the OS before returning.
void append_line(const std::filesystem::path& path, std::string_view line);

/// Appends several lines with a single write call.
void append_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace itinera::files
