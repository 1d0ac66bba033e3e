#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "confdim/rational.hpp"

namespace confdim {

// A word in the tree; the empty word is the root.
class Address {
 public:
  Address() = default;
  explicit Address(std::vector<std::uint8_t> d) : digits_(std::move(d)) {}
  Address(std::initializer_list<int> d);

  int depth() const { return static_cast<int>(digits_.size()); }
  bool is_root() const { return digits_.empty(); }
  const std::vector<std::uint8_t>& digits() const { return digits_; }
  int operator[](int i) const { return digits_[i]; }

  Address child(int digit) const;
  Address prefix(int m) const;  // [w]_m
  bool is_prefix_of(const Address& o) const;

  // "1.2.3"; the root prints as the empty string.
  std::string str() const;
  static Address parse(const std::string& s);

  auto operator<=>(const Address&) const = default;
  bool operator==(const Address&) const = default;

 private:
  std::vector<std::uint8_t> digits_;
};

struct AddressHash {
  std::size_t operator()(const Address& a) const noexcept;
};

Address parent(const Address& w);
Address confluence(const Address& w, const Address& v);

// Allowed child digits of every address plus the truncation horizon.
class TreeShape {
 public:
  using Alphabet = std::function<std::vector<int>(const Address&)>;

  TreeShape(Alphabet alphabet, int max_depth);
  static TreeShape uniform(std::vector<int> digits, int max_depth);

  int max_depth() const { return max_depth_; }
  std::vector<int> alphabet(const Address& w) const { return alphabet_(w); }
  int branching(const Address& w) const { return static_cast<int>(alphabet_(w).size()); }

  bool valid(const Address& w) const;
  std::vector<Address> children(const Address& w) const;  // throws DepthExceeded
  std::vector<Address> level(int m) const;                // lexicographic

 private:
  Alphabet alphabet_;
  int max_depth_;
};

// 2^{-|w ^ t|}, 0 when equal.  Both prefixes must sit at max_depth.
Rational end_metric(const TreeShape& shape, const Address& omega, const Address& tau);

}  // namespace confdim
