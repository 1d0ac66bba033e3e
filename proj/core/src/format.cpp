#include <cmath>
#include <cstdio>
#include <sstream>

#include "confdim/error.hpp"
#include "confdim/rational.hpp"

namespace confdim {

namespace {
std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

Rational parse_rational(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw ParseError("empty rational");
  try {
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      if (s.find_first_of("/eE") != std::string::npos) throw ParseError("bad rational '" + s + "'");
      bool neg = s[0] == '-';
      std::string ip = s.substr(neg || s[0] == '+' ? 1 : 0, dot - (neg || s[0] == '+' ? 1 : 0));
      std::string fp = s.substr(dot + 1);
      if (ip.empty()) ip = "0";
      for (char c : ip + fp)
        if (c < '0' || c > '9') throw ParseError("bad rational '" + s + "'");
      mpz_class den = 1;
      for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
      Rational q(mpz_class(ip + fp), den);
      q.canonicalize();
      return neg ? Rational(-q) : q;
    }
    Rational q(s, 10);
    if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw ParseError("bad rational '" + s + "'");
  }
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::string to_string(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.x.size(); ++i) s += (i ? "," : "") + to_string(p.x[i]);
  return s + ")";
}

Point parse_point(const std::string& raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') throw ParseError("unbalanced point '" + s + "'");
    s = s.substr(1, s.size() - 2);
  }
  Point p;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) p.x.push_back(parse_rational(item));
  if (p.x.empty()) throw ParseError("empty point");
  return p;
}

Rational dist2(const Point& a, const Point& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    Rational d = a.x[i] - b.x[i];
    s += d * d;
  }
  return s;
}

Rational rpow(const Rational& r, int n) {
  Rational out = 1, b = r;
  while (n > 0) {
    if (n & 1) out *= b;
    b *= b;
    n >>= 1;
  }
  return out;
}

bool exact_sqrt(const Rational& q, Rational* root) {
  if (q < 0) return false;
  mpz_class n = q.get_num(), d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
  if (root) {
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    *root = Rational(rn, rd);
    root->canonicalize();
  }
  return true;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

}  // namespace confdim
