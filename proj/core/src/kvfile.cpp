#include "causalepp/kvfile.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "causalepp/error.hpp"

namespace causalepp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    std::string key = trim(content.substr(0, eq));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    values[std::move(key)] = trim(content.substr(eq + 1));
  }
  return values;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  return parse_key_values(read_text_file(path), path.string());
}

std::string format_key_values(const KeyValues& values, const std::string& header) {
  std::string out;
  if (!header.empty()) out += "# " + header + "\n";
  for (const auto& [key, value] : values) out += key + " = " + value + "\n";
  return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& values, const std::string& header) {
  write_text_file(path, format_key_values(values, header));
}

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw Error("cannot format floating-point value");
  return std::string(buffer.data(), ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace causalepp
