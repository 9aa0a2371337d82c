#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace afflat {

/// Shortest round-trip decimal form of x ('.' decimal point, no locale).
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Minimal CSV emitter: ',' separator, LF line endings, no quoting (all
/// fields written by this library are numeric or simple identifiers).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(std::string_view line) { os_ << "#! " << line << '\n'; }

  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }

  CsvWriter& field(double x) { return raw(format_double(x)); }
  CsvWriter& field(long long x) { return raw(std::to_string(x)); }
  CsvWriter& field(int x) { return raw(std::to_string(x)); }
  CsvWriter& field(std::string_view x) { return raw(x); }
  void end_row() {
    os_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(std::string_view x) {
    if (!first_) os_ << ',';
    os_ << x;
    first_ = false;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

}  // namespace afflat
