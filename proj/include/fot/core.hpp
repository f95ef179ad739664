#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fot {

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

/// Error carrying a linear-solver failure out of the PDE layer.
struct solve_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small value types
// ---------------------------------------------------------------------------

/// Value in R^2 (real/imaginary pair of a complex-as-vector field).
struct Vec2 {
  double re = 0.0;
  double im = 0.0;

  Vec2() = default;
  Vec2(double r, double i) : re(r), im(i) {}

  Vec2& operator+=(const Vec2& o) { re += o.re; im += o.im; return *this; }
  Vec2& operator-=(const Vec2& o) { re -= o.re; im -= o.im; return *this; }
  Vec2& operator*=(double s) { re *= s; im *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.re * b.re + a.im * b.im; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

/// 2x2 real matrix acting on Vec2; row-major [[rr, ri], [ir, ii]].
struct Mat2 {
  double rr = 0.0, ri = 0.0, ir = 0.0, ii = 0.0;

  Vec2 apply(const Vec2& w) const { return {rr * w.re + ri * w.im, ir * w.re + ii * w.im}; }
  Vec2 apply_transpose(const Vec2& w) const { return {rr * w.re + ir * w.im, ri * w.re + ii * w.im}; }
  Mat2 transposed() const { return {rr, ir, ri, ii}; }

  Mat2& operator+=(const Mat2& o) { rr += o.rr; ri += o.ri; ir += o.ir; ii += o.ii; return *this; }
  Mat2& operator*=(double s) { rr *= s; ri *= s; ir *= s; ii *= s; return *this; }
};

inline Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
inline Mat2 operator*(double s, Mat2 a) { return a *= s; }

/// Rotation-form matrix of a complex scalar c = re + i*im.  Applying it to a
/// Vec2 is exactly complex multiplication by c.
inline Mat2 rotation_form(double re, double im) { return {re, -im, im, re}; }

inline Mat2 identity2() { return {1.0, 0.0, 0.0, 1.0}; }

/// Dense n x n matrix with runtime n in {2,3}; row-major, fixed storage.
struct SmallMat {
  int n = 2;
  std::array<double, 9> a{};

  SmallMat() = default;
  explicit SmallMat(int dim) : n(dim) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }

  static SmallMat identity(int dim) {
    SmallMat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static SmallMat scaled_identity(int dim, double s) {
    SmallMat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = s;
    return m;
  }

  SmallMat& operator+=(const SmallMat& o) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += o.a[k];
    return *this;
  }

  SmallMat& operator*=(double s) {
    for (double& x : a) x *= s;
    return *this;
  }

  std::array<double, 3> apply(const std::array<double, 3>& x) const {
    std::array<double, 3> y{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) y[static_cast<std::size_t>(i)] += (*this)(i, j) * x[static_cast<std::size_t>(j)];
    return y;
  }

  double quad(const std::array<double, 3>& x, const std::array<double, 3>& y) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += x[static_cast<std::size_t>(i)] * (*this)(i, j) * y[static_cast<std::size_t>(j)];
    return s;
  }

  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

  double max_asymmetry() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s = std::max(s, std::abs((*this)(i, j) - (*this)(j, i)));
    return s;
  }
};

inline SmallMat operator+(SmallMat a, const SmallMat& b) { return a += b; }
inline SmallMat operator*(double s, SmallMat a) { return a *= s; }

/// Eigenvalue range of a symmetric 2x2 or 3x3 matrix (closed form; the 3x3
/// case uses the trigonometric solution of the characteristic cubic).
inline std::array<double, 2> sym_eig_range(const SmallMat& m) {
  if (m.n == 2) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double d = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 - d, tr / 2.0 + d};
  }
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  if (p1 == 0.0) {
    double lo = std::min({m(0, 0), m(1, 1), m(2, 2)});
    double hi = std::max({m(0, 0), m(1, 1), m(2, 2)});
    return {lo, hi};
  }
  const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) +
                    (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  SmallMat b(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (m(i, j) - (i == j ? q : 0.0)) / p;
  const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                      b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                      b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  double r = detb / 2.0;
  r = std::min(1.0, std::max(-1.0, r));
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Counter-based deterministic RNG
// ---------------------------------------------------------------------------

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Splittable counter RNG: every draw is a pure function of
/// (seed, stream, counter), so parallel evaluation order cannot change
/// results.
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  CounterRng(std::uint64_t s, std::uint64_t str) : seed(s), stream(str) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
  }

  /// Uniform in (0,1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Standard normal via Box-Muller (two uniforms per draw; implementation
  /// pinned here rather than std::normal_distribution so that streams are
  /// reproducible across standard libraries).
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

/// Sequential convenience stream over a CounterRng.
struct RngStream {
  CounterRng rng;
  std::uint64_t next = 0;

  RngStream(std::uint64_t seed, std::uint64_t stream) : rng(seed, stream) {}

  double uniform() { return rng.uniform(next++); }
  double uniform(double lo, double hi) { return rng.uniform(next++, lo, hi); }
  double normal() { return rng.normal(next++); }
};

}  // namespace fot
