#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace causalepp {

// Flat `key = value` text. Blank lines and lines starting with '#' are
// ignored; later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& source = "<memory>");
KeyValues read_key_values(const std::filesystem::path& path);

// Writes keys in sorted order, one per line, after an optional comment header.
std::string format_key_values(const KeyValues& values, const std::string& header = {});
void write_key_values(const std::filesystem::path& path, const KeyValues& values, const std::string& header = {});

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace causalepp
