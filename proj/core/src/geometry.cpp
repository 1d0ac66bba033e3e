#include "confdim/geometry.hpp"

#include <algorithm>

#include "confdim/error.hpp"

namespace confdim {

bool RationalBox::contains(const Point& p) const {
  if (p.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (p.x[i] < lo[i] || p.x[i] > hi[i]) return false;
  return true;
}

bool RationalBox::degenerate() const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (lo[i] == hi[i]) return true;
  return false;
}

Rational RationalBox::diam2() const {
  Rational s = 0;
  for (std::size_t i = 0; i < dim(); ++i) {
    Rational d = hi[i] - lo[i];
    s += d * d;
  }
  return s;
}

std::string RationalBox::str() const {
  std::string s;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (i) s += "x";
    s += "[" + to_string(lo[i]) + "," + to_string(hi[i]) + "]";
  }
  return s;
}

std::optional<RationalBox> intersect(const RationalBox& a, const RationalBox& b) {
  RationalBox r;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    Rational l = std::max(a.lo[i], b.lo[i]);
    Rational h = std::min(a.hi[i], b.hi[i]);
    if (l > h) return std::nullopt;
    r.lo.push_back(l);
    r.hi.push_back(h);
  }
  return r;
}

bool subset(const RationalBox& a, const RationalBox& b) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.lo[i] < b.lo[i] || a.hi[i] > b.hi[i]) return false;
  return true;
}

RationalBox LatticeBox::to_rational(int base) const {
  RationalBox r;
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), base, level);
  for (int i = 0; i < dim; ++i) {
    Rational l(mpz_class(static_cast<long>(lo[i])), den), h(mpz_class(static_cast<long>(hi[i])), den);
    l.canonicalize();
    h.canonicalize();
    r.lo.push_back(l);
    r.hi.push_back(h);
  }
  return r;
}

LatticeBox LatticeBox::rescaled(int base, int new_level) const {
  LatticeBox r = *this;
  std::int64_t f = ipow(base, new_level - level);
  for (int i = 0; i < dim; ++i) {
    r.lo[i] *= f;
    r.hi[i] *= f;
  }
  r.level = new_level;
  return r;
}

std::optional<LatticeBox> to_lattice(const RationalBox& b, int base, int max_level) {
  for (int L = 0; L <= max_level; ++L) {
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), base, L);
    LatticeBox out;
    out.level = L;
    out.dim = static_cast<int>(b.dim());
    bool ok = true;
    for (std::size_t i = 0; i < b.dim() && ok; ++i) {
      Rational l = b.lo[i] * scale, h = b.hi[i] * scale;
      if (l.get_den() != 1 || h.get_den() != 1) ok = false;
      else {
        out.lo[i] = l.get_num().get_si();
        out.hi[i] = h.get_num().get_si();
      }
    }
    if (ok) return out;
  }
  return std::nullopt;
}

namespace {
std::pair<LatticeBox, LatticeBox> common(const LatticeBox& a, const LatticeBox& b, int base) {
  int L = std::max(a.level, b.level);
  return {a.rescaled(base, L), b.rescaled(base, L)};
}
}  // namespace

std::optional<LatticeBox> intersect(const LatticeBox& a0, const LatticeBox& b0, int base) {
  auto [a, b] = common(a0, b0, base);
  LatticeBox r = a;
  for (int i = 0; i < a.dim; ++i) {
    r.lo[i] = std::max(a.lo[i], b.lo[i]);
    r.hi[i] = std::min(a.hi[i], b.hi[i]);
    if (r.lo[i] > r.hi[i]) return std::nullopt;
  }
  return r;
}

bool subset(const LatticeBox& a0, const LatticeBox& b0, int base) {
  auto [a, b] = common(a0, b0, base);
  for (int i = 0; i < a.dim; ++i)
    if (a.lo[i] < b.lo[i] || a.hi[i] > b.hi[i]) return false;
  return true;
}

bool subset_rel_interior(const LatticeBox& a0, const LatticeBox& r0, int base) {
  auto [a, r] = common(a0, r0, base);
  std::int64_t top = ipow(base, a.level);
  for (int i = 0; i < a.dim; ++i) {
    bool lo_ok = a.lo[i] > r.lo[i] || (a.lo[i] == r.lo[i] && r.lo[i] == 0);
    bool hi_ok = a.hi[i] < r.hi[i] || (a.hi[i] == r.hi[i] && r.hi[i] == top);
    if (!lo_ok || !hi_ok) return false;
  }
  return true;
}

bool contains(const LatticeBox& b, const Point& p, int base) {
  Rational scale(mpz_class(ipow(base, b.level)));
  for (int i = 0; i < b.dim; ++i) {
    Rational v = p.x[i] * scale;
    if (v < Rational(mpz_class(static_cast<long>(b.lo[i]))) || v > Rational(mpz_class(static_cast<long>(b.hi[i]))))
      return false;
  }
  return true;
}

bool rel_interior_contains(const LatticeBox& r, const Point& p, int base) {
  std::int64_t top = ipow(base, r.level);
  Rational scale(mpz_class(static_cast<long>(top)));
  for (int i = 0; i < r.dim; ++i) {
    Rational v = p.x[i] * scale;
    Rational lo(mpz_class(static_cast<long>(r.lo[i]))), hi(mpz_class(static_cast<long>(r.hi[i])));
    bool lo_ok = v > lo || (v == lo && r.lo[i] == 0);
    bool hi_ok = v < hi || (v == hi && r.hi[i] == top);
    if (!lo_ok || !hi_ok) return false;
  }
  return true;
}

}  // namespace confdim
