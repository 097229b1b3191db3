#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sage::fsio {

// Whole-file read. Missing or unreadable -> IoError.
std::string read_file(const std::filesystem::path& path);

// Write-then-rename so readers never observe a half-written file.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace sage::fsio
