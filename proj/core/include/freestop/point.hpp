#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>

namespace freestop {

inline constexpr std::size_t kMaxDim = 3;

/// A vector in R^d for d <= 3. Used for positions, drifts and covectors.
class Point {
 public:
  Point() = default;
  explicit Point(std::size_t dim) : dim_(dim) { assert(dim >= 1 && dim <= kMaxDim); }
  Point(std::initializer_list<double> values) : dim_(values.size()) {
    assert(dim_ >= 1 && dim_ <= kMaxDim);
    std::copy(values.begin(), values.end(), c_.begin());
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator[](std::size_t i) const noexcept { return c_[i]; }
  double& operator[](std::size_t i) noexcept { return c_[i]; }

  double norm_sq() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
  }
  double norm() const noexcept { return std::sqrt(norm_sq()); }
  double norm1() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += std::abs(c_[i]);
    return s;
  }
  double norm_inf() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s = std::max(s, std::abs(c_[i]));
    return s;
  }
  bool is_finite() const noexcept {
    for (std::size_t i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

  Point& operator+=(const Point& o) noexcept {
    for (std::size_t i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) noexcept {
    for (std::size_t i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) noexcept {
    for (std::size_t i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator*(double s, Point a) noexcept { return a *= s; }

  friend double dot(const Point& a, const Point& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim_; ++i) s += a.c_[i] * b.c_[i];
    return s;
  }

  friend bool operator==(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  /// Lexicographic order over the active components.
  friend std::partial_ordering lex_compare(const Point& a, const Point& b) noexcept {
    for (std::size_t i = 0; i < std::min(a.dim_, b.dim_); ++i) {
      if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
    }
    return a.dim_ <=> b.dim_;
  }

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t dim_ = 1;
};

}  // namespace freestop
