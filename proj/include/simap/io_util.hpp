#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace simap {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& what, int line_no)
      : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

// Shortest decimal string that round-trips the double bit-exactly.
std::string fmt_double(double v);
std::string fmt_fixed(double v, int digits);

double parse_double(const std::string& s, int line_no);
long parse_long(const std::string& s, int line_no);

std::vector<std::string> split_ws(const std::string& line);
std::vector<std::string> split_char(const std::string& line, char sep);

// write-temp-then-rename
void atomic_write(const std::filesystem::path& path, const std::string& data);
std::string read_file(const std::filesystem::path& path);

}  // namespace simap
