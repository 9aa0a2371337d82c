#include <algorithm>
#include <cctype>
#include <limits>
#include <charconv>
#include <cmath>

#include "afflat/cli.hpp"
#include "afflat/errors.hpp"

namespace afflat::cli {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  ParsedScalar parse() {
    auto v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw UsageError("cannot parse number '" + s_ + "': " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool keyword(const char* kw) {
    skip();
    const std::string k(kw);
    if (s_.compare(pos_, k.size(), k) == 0) {
      pos_ += k.size();
      return true;
    }
    return false;
  }

  static ParsedScalar combine(const ParsedScalar& a, const ParsedScalar& b, char op) {
    ParsedScalar r;
    switch (op) {
      case '+': r.value = a.value + b.value; break;
      case '-': r.value = a.value - b.value; break;
      case '*': r.value = a.value * b.value; break;
      default:
        if (b.value == 0.0) throw DomainError("division by zero in number literal");
        r.value = a.value / b.value;
    }
    if (a.exact && b.exact) {
      try {
        switch (op) {
          case '+': r.exact = *a.exact + *b.exact; break;
          case '-': r.exact = *a.exact - *b.exact; break;
          case '*': r.exact = *a.exact * *b.exact; break;
          default: r.exact = *a.exact / *b.exact;
        }
        r.value = r.exact->to_double();
      } catch (const UsageError&) {
        r.exact.reset();
      }
    }
    return r;
  }

  ParsedScalar expr() {
    auto v = term();
    for (;;) {
      if (eat('+'))
        v = combine(v, term(), '+');
      else if (eat('-'))
        v = combine(v, term(), '-');
      else
        return v;
    }
  }

  ParsedScalar term() {
    auto v = unary();
    for (;;) {
      if (eat('*'))
        v = combine(v, unary(), '*');
      else if (eat('/'))
        v = combine(v, unary(), '/');
      else
        return v;
    }
  }

  ParsedScalar unary() {
    if (eat('-')) {
      auto v = unary();
      v.value = -v.value;
      if (v.exact) v.exact = -*v.exact;
      return v;
    }
    if (eat('+')) return unary();
    return primary();
  }

  ParsedScalar primary() {
    skip();
    if (eat('(')) {
      auto v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (keyword("sqrt")) {
      ParsedScalar arg;
      skip();
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        arg = number();
      else if (eat('(')) {
        arg = expr();
        if (!eat(')')) fail("missing ')'");
      } else {
        fail("sqrt needs an argument");
      }
      if (arg.value < 0.0) throw DomainError("sqrt of a negative number in '" + s_ + "'");
      ParsedScalar r;
      r.value = std::sqrt(arg.value);
      if (arg.exact && arg.exact->is_integer()) {
        const auto q = arg.exact->rational_part();
        if (q <= Rational(std::numeric_limits<long long>::max())) {
          r.exact = QuadraticSurd::sqrt(static_cast<long long>(numerator(q)));
          r.value = r.exact->to_double();
        }
      }
      return r;
    }
    if (keyword("cbrt")) {
      if (!eat('(')) fail("cbrt needs a parenthesized argument");
      auto arg = expr();
      if (!eat(')')) fail("missing ')'");
      return {std::cbrt(arg.value), std::nullopt};
    }
    return number();
  }

  ParsedScalar number() {
    skip();
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t b = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return s_.substr(b, pos_ - b);
    };
    const std::string int_part = digits();
    std::string frac_part;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      frac_part = digits();
    }
    if (int_part.empty() && frac_part.empty()) fail("expected a number");
    long long exp10 = 0;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      bool negative = false;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) negative = s_[p++] == '-';
      const auto res = std::from_chars(s_.data() + p, s_.data() + s_.size(), exp10);
      if (res.ec != std::errc()) fail("bad exponent");
      if (negative) exp10 = -exp10;
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    }
    const long long scale = exp10 - static_cast<long long>(frac_part.size());
    if (std::abs(scale) > 400) fail("exponent out of range");
    using boost::multiprecision::cpp_int;
    // cpp_int reads a leading 0 as an octal prefix.
    std::string digits_all = int_part + frac_part;
    digits_all.erase(0, std::min(digits_all.find_first_not_of('0'), digits_all.size() - 1));
    const cpp_int mantissa(digits_all);
    const cpp_int p10 = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::abs(scale)));
    const Rational q = scale >= 0 ? Rational(mantissa * p10) : Rational(mantissa, p10);
    ParsedScalar r;
    r.exact = QuadraticSurd(q);
    r.value = std::strtod(s_.substr(start, pos_ - start).c_str(), nullptr);
    return r;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

ParsedScalar parse_scalar(const std::string& text) { return Parser(text).parse(); }

ShiftVector parse_xi(const std::string& text, int d) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (static_cast<int>(parts.size()) != d)
    throw UsageError("xi: expected " + std::to_string(d) + " comma-separated entries, got " +
                     std::to_string(parts.size()));
  ShiftVector xi{Eigen::RowVectorXd(d)};
  for (int i = 0; i < d; ++i) {
    const auto p = parse_scalar(parts[static_cast<std::size_t>(i)]);
    xi.value(i) = p.value;
    xi.exact[static_cast<std::size_t>(i)] = p.exact;
  }
  return xi;
}

}  // namespace afflat::cli
