#include "levybsde/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "levybsde/error.hpp"

namespace levybsde {

MultiIndex::MultiIndex(std::vector<int> parts) : parts_(std::move(parts)) {
  for (int v : parts_) {
    if (v < 0) throw ArgumentError("multi-index parts must be nonnegative");
  }
  degree_ = std::accumulate(parts_.begin(), parts_.end(), 0);
}

MultiIndex::MultiIndex(std::initializer_list<int> parts)
    : MultiIndex(std::vector<int>(parts)) {}

MultiIndex MultiIndex::zero(std::size_t n) {
  return MultiIndex(std::vector<int>(n, 0));
}

MultiIndex MultiIndex::unit(std::size_t n, std::size_t i) {
  if (i >= n) throw ArgumentError("unit index out of range");
  std::vector<int> parts(n, 0);
  parts[i] = 1;
  return MultiIndex(std::move(parts));
}

std::size_t MultiIndex::unit_position() const {
  if (degree_ != 1) throw ArgumentError("unit_position on a non-unit multi-index");
  return static_cast<std::size_t>(
      std::find(parts_.begin(), parts_.end(), 1) - parts_.begin());
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw ArgumentError("multi-index size mismatch");
  std::vector<int> out(parts_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += other.parts_[i];
  return MultiIndex(std::move(out));
}

double MultiIndex::monomial(std::span<const double> x) const {
  double v = 1.0;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    for (int k = 0; k < parts_[i]; ++k) v *= x[i];
  }
  return v;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) os << ',';
    os << parts_[i];
  }
  os << ')';
  return os.str();
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  // Larger leading exponent comes first.
  return std::lexicographical_compare(b.parts().begin(), b.parts().end(),
                                      a.parts().begin(), a.parts().end());
}

std::size_t MultiIndexHash::operator()(const MultiIndex& p) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int v : p.parts()) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

void fill_degree(std::size_t pos, int remaining, std::vector<int>& cur,
                 std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  // Descending leading exponent gives graded lex order directly.
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    fill_degree(pos + 1, remaining - v, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> indices_of_degree(std::size_t n, int d) {
  if (n == 0) throw ArgumentError("dimension must be at least 1");
  if (d < 0) throw ArgumentError("degree must be nonnegative");
  std::vector<MultiIndex> out;
  std::vector<int> cur(n, 0);
  fill_degree(0, d, cur, out);
  return out;
}

std::vector<MultiIndex> graded_lex_enumerate(std::size_t n, int max_degree) {
  if (n == 0) throw ArgumentError("dimension must be at least 1");
  if (max_degree < 1) throw ArgumentError("max degree must be at least 1");
  std::vector<MultiIndex> out;
  for (int d = 1; d <= max_degree; ++d) {
    auto level = indices_of_degree(n, d);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

MultiIndex parse_multi_index(const std::string& text) {
  std::vector<int> parts;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      parts.push_back(std::stoi(token));
      token.clear();
    }
  };
  for (char c : text) {
    if (c == '(' || c == ')' || c == ' ') continue;
    if (c == ',' || c == ';') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (parts.empty()) throw ArgumentError("empty multi-index: '" + text + "'");
  return MultiIndex(std::move(parts));
}

}  // namespace levybsde
