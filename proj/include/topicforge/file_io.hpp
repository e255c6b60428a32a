#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace topicforge {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, fsyncs it and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace topicforge
