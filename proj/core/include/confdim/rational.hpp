#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace confdim {

using Rational = mpq_class;

// Rational point in [0,1]^n.
struct Point {
  std::vector<Rational> x;

  std::size_t dim() const { return x.size(); }
  bool operator==(const Point& o) const { return x == o.x; }
};

Rational parse_rational(const std::string& s);  // "3/7", "-2", "0.25"
std::string to_string(const Rational& q);         // canonical "num/den" or "num"
std::string to_string(const Point& p);            // "(a,b)"
Point parse_point(const std::string& s);          // "(a,b)" or "a,b" or "a"

// Squared Euclidean distance, exact.
Rational dist2(const Point& a, const Point& b);

Rational rpow(const Rational& r, int n);  // n >= 0

// Exact square root when q is the square of a rational.
bool exact_sqrt(const Rational& q, Rational* root);

// 12 significant digits, the fixed float format of every report.
std::string fmt_double(double v);

std::int64_t ipow(std::int64_t base, int e);

}  // namespace confdim
