#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace levybsde {

/// Ordered tuple of nonnegative exponents p = (p1..pn).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> parts);
  MultiIndex(std::initializer_list<int> parts);

  static MultiIndex zero(std::size_t n);
  static MultiIndex unit(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return parts_.size(); }
  int operator[](std::size_t i) const { return parts_[i]; }
  const std::vector<int>& parts() const noexcept { return parts_; }

  int degree() const noexcept { return degree_; }
  /// Position of the single nonzero part when degree() == 1.
  std::size_t unit_position() const;

  MultiIndex operator+(const MultiIndex& other) const;

  /// x^p = prod x_i^{p_i}; 0^0 is 1.
  double monomial(std::span<const double> x) const;

  std::string to_string() const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.parts_ == b.parts_;
  }

 private:
  std::vector<int> parts_;
  int degree_ = 0;
};

/// Graded lexicographic order: total degree first, then left-to-right with
/// the larger leading exponent first, so (2,0) < (1,1) < (0,2).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    return graded_lex_less(a, b);
  }
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& p) const noexcept;
};

/// All p with |p| == d in graded lex order.
std::vector<MultiIndex> indices_of_degree(std::size_t n, int d);

/// All p with 1 <= |p| <= max_degree in graded lex order.
std::vector<MultiIndex> graded_lex_enumerate(std::size_t n, int max_degree);

/// Parse "(1,0,2)" or "1,0,2" or "1;0;2".
MultiIndex parse_multi_index(const std::string& text);

}  // namespace levybsde
