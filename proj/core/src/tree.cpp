#include "confdim/tree.hpp"

#include <algorithm>
#include <sstream>

#include "confdim/error.hpp"

namespace confdim {

Address::Address(std::initializer_list<int> d) {
  for (int x : d) digits_.push_back(static_cast<std::uint8_t>(x));
}

Address Address::child(int digit) const {
  Address c = *this;
  c.digits_.push_back(static_cast<std::uint8_t>(digit));
  return c;
}

Address Address::prefix(int m) const {
  m = std::clamp(m, 0, depth());
  return Address(std::vector<std::uint8_t>(digits_.begin(), digits_.begin() + m));
}

bool Address::is_prefix_of(const Address& o) const {
  return depth() <= o.depth() && std::equal(digits_.begin(), digits_.end(), o.digits_.begin());
}

std::string Address::str() const {
  std::string s;
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(digits_[i]);
  }
  return s;
}

Address Address::parse(const std::string& s) {
  std::vector<std::uint8_t> d;
  if (s.empty() || s == "root" || s == "-") return Address(d);
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, '.')) {
    if (tok.empty()) throw ParseError("bad address '" + s + "'");
    int v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') throw ParseError("bad address '" + s + "'");
      v = v * 10 + (c - '0');
    }
    if (v > 255) throw ParseError("digit out of range in '" + s + "'");
    d.push_back(static_cast<std::uint8_t>(v));
  }
  return Address(d);
}

std::size_t AddressHash::operator()(const Address& a) const noexcept {
  std::uint64_t h = 1469598103934665603ull ^ a.digits().size();
  for (auto d : a.digits()) h = (h ^ d) * 1099511628211ull;
  return static_cast<std::size_t>(h);
}

Address parent(const Address& w) { return w.is_root() ? w : w.prefix(w.depth() - 1); }

Address confluence(const Address& w, const Address& v) {
  int n = std::min(w.depth(), v.depth());
  int i = 0;
  while (i < n && w[i] == v[i]) ++i;
  return w.prefix(i);
}

TreeShape::TreeShape(Alphabet alphabet, int max_depth)
    : alphabet_(std::move(alphabet)), max_depth_(max_depth) {
  if (max_depth < 0) throw InvalidFamily("max_depth must be nonnegative");
}

TreeShape TreeShape::uniform(std::vector<int> digits, int max_depth) {
  return TreeShape([digits](const Address&) { return digits; }, max_depth);
}

bool TreeShape::valid(const Address& w) const {
  if (w.depth() > max_depth_) return false;
  Address p;
  for (int i = 0; i < w.depth(); ++i) {
    auto a = alphabet_(p);
    if (std::find(a.begin(), a.end(), w[i]) == a.end()) return false;
    p = p.child(w[i]);
  }
  return true;
}

std::vector<Address> TreeShape::children(const Address& w) const {
  if (w.depth() >= max_depth_) throw DepthExceeded("children requested at max_depth " + std::to_string(max_depth_));
  std::vector<Address> out;
  for (int d : alphabet_(w)) out.push_back(w.child(d));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Address> TreeShape::level(int m) const {
  if (m > max_depth_) throw DepthExceeded("level beyond max_depth");
  std::vector<Address> cur{Address()};
  for (int i = 0; i < m; ++i) {
    std::vector<Address> next;
    for (const auto& w : cur)
      for (auto& c : children(w)) next.push_back(std::move(c));
    cur.swap(next);
  }
  return cur;
}

Rational end_metric(const TreeShape& shape, const Address& omega, const Address& tau) {
  if (omega.depth() != shape.max_depth() || tau.depth() != shape.max_depth())
    throw InvalidAddress("end prefixes must have depth max_depth");
  if (omega == tau) return 0;
  Rational r(1);
  int c = confluence(omega, tau).depth();
  mpz_class den = 1;
  den <<= c;
  r = Rational(1, 1) / Rational(den);
  return r;
}

}  // namespace confdim
