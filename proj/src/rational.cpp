#include "sparse_code/rational.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "sparse_code/error.hpp"

namespace sparse_code {

std::string to_fraction_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Integer parse_integer(std::string_view s) {
  std::string_view digits = s;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
  if (!all_digits(digits)) throw InvalidParameter("not an integer: '" + std::string(s) + "'");
  Integer value(std::string(digits), 10);
  return s.front() == '-' ? Integer(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw InvalidParameter("empty rational");

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const Integer num = parse_integer(text.substr(0, slash));
    const Integer den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw InvalidParameter("zero denominator in '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    const std::string_view mantissa = text.substr(0, e);
    std::string_view exponent = text.substr(e + 1);
    if (mantissa.empty() || mantissa.find('/') != std::string_view::npos) {
      throw InvalidParameter("not a decimal: '" + std::string(text) + "'");
    }
    const bool down = !exponent.empty() && exponent.front() == '-';
    if (!exponent.empty() && (exponent.front() == '-' || exponent.front() == '+')) exponent.remove_prefix(1);
    if (exponent.empty() || exponent.size() > 6 || !all_digits(exponent)) {
      throw InvalidParameter("bad exponent in '" + std::string(text) + "'");
    }
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, std::stoul(std::string(exponent)));
    const Rational m = parse_rational(mantissa);
    return down ? Rational(m / Rational(scale)) : Rational(m * Rational(scale));
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const bool negative = text.front() == '-';
    std::string_view body = text;
    if (negative || body.front() == '+') body.remove_prefix(1);
    const auto d = body.find('.');
    const std::string_view whole = body.substr(0, d);
    const std::string_view frac = body.substr(d + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty())) {
      throw InvalidParameter("not a decimal: '" + std::string(text) + "'");
    }
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    const Integer digits(std::string(whole) + std::string(frac), 10);
    Rational q(negative ? Integer(-digits) : digits, scale);
    q.canonicalize();
    return q;
  }
  return Rational(parse_integer(text));
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw InvalidParameter("non-finite value has no rational form");
  return Rational(value);
}

}  // namespace sparse_code
