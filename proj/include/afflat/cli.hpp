#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "afflat/diophantine.hpp"

namespace afflat::cli {

/// Parses one scalar expression: decimals, p/q, sqrtN or sqrt(expr), cbrt(expr),
/// + - * / and parentheses. Exact form is kept while everything stays within
/// rationals and square roots of non-negative integers.
struct ParsedScalar {
  double value = 0.0;
  std::optional<QuadraticSurd> exact;
};
ParsedScalar parse_scalar(const std::string& text);

/// Comma-separated list of scalar expressions of length d.
ShiftVector parse_xi(const std::string& text, int d);

/// Reads key = value pairs from a config file: plain key = value lines,
/// the `#! key = value` header of a CSV output, or the "config" object of a
/// JSON summary.
std::map<std::string, std::string> load_config_file(const std::string& path);

/// Runs the command line; returns the process exit code
/// (0 ok, 2 usage/config/domain, 3 resource budget, 4 numeric, 1 internal).
/// args[0] is the program name, as in argv.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace afflat::cli
