#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace sparse_code {

using Integer = mpz_class;
using Rational = mpq_class;

/// Always "numerator/denominator", including "0/1" and "3/1".
std::string to_fraction_string(const Rational& q);

/// Accepts "n/d", "n", or a decimal such as "-0.0217" or "2.5e-3" (converted exactly).
Rational parse_rational(std::string_view text);

/// Exact conversion; every finite double is a dyadic rational.
Rational rational_from_double(double value);

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace sparse_code
