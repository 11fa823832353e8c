// Small fixed-size linear algebra for 4-component conservative states.
#ifndef ADJFLOW_MATRIX4_HPP_
#define ADJFLOW_MATRIX4_HPP_

#include <array>
#include <cmath>
#include <cstddef>

namespace adjflow {

/// 4-vector in state space (rho, rho*u, rho*v, rho*E) ordering.
struct Vec4 {
  std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  Vec4& operator+=(const Vec4& o) {
    for (int i = 0; i < 4; ++i) v[i] += o.v[i];
    return *this;
  }
  Vec4& operator-=(const Vec4& o) {
    for (int i = 0; i < 4; ++i) v[i] -= o.v[i];
    return *this;
  }
  Vec4& operator*=(double s) {
    for (int i = 0; i < 4; ++i) v[i] *= s;
    return *this;
  }
};

inline Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
inline Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }
inline Vec4 operator*(double s, Vec4 a) { return a *= s; }
inline Vec4 operator*(Vec4 a, double s) { return a *= s; }
inline Vec4 operator-(Vec4 a) {
  for (int i = 0; i < 4; ++i) a.v[i] = -a.v[i];
  return a;
}

inline double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm_inf(const Vec4& a) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

inline double norm2(const Vec4& a) { return std::sqrt(dot(a, a)); }

/// Row-major 4x4 matrix acting on Vec4; ordering matches (rho, rho*u, rho*v, rho*E).
struct Mat4 {
  std::array<std::array<double, 4>, 4> m{};

  double& operator()(std::size_t r, std::size_t c) { return m[r][c]; }
  double operator()(std::size_t r, std::size_t c) const { return m[r][c]; }

  static Mat4 identity() {
    Mat4 a;
    for (int i = 0; i < 4; ++i) a.m[i][i] = 1.0;
    return a;
  }

  static Mat4 zero() { return Mat4{}; }

  Mat4& operator+=(const Mat4& o) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m[r][c] += o.m[r][c];
    return *this;
  }
  Mat4& operator-=(const Mat4& o) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m[r][c] -= o.m[r][c];
    return *this;
  }
  Mat4& operator*=(double s) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m[r][c] *= s;
    return *this;
  }

  Mat4 transpose() const {
    Mat4 t;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) t.m[c][r] = m[r][c];
    return t;
  }
};

inline Mat4 operator+(Mat4 a, const Mat4& b) { return a += b; }
inline Mat4 operator-(Mat4 a, const Mat4& b) { return a -= b; }
inline Mat4 operator*(double s, Mat4 a) { return a *= s; }

inline Vec4 operator*(const Mat4& a, const Vec4& x) {
  Vec4 y;
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) s += a.m[r][c] * x[c];
    y[r] = s;
  }
  return y;
}

inline Mat4 operator*(const Mat4& a, const Mat4& b) {
  Mat4 c;
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) {
      const double ark = a.m[r][k];
      for (int j = 0; j < 4; ++j) c.m[r][j] += ark * b.m[k][j];
    }
  return c;
}

/// Max-abs entry, used for relative tolerances on matrix comparisons.
inline double norm_inf(const Mat4& a) {
  double m = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m = std::max(m, std::abs(a.m[r][c]));
  return m;
}

/// Outer product a * b^T.
inline Mat4 outer(const Vec4& a, const Vec4& b) {
  Mat4 c;
  for (int r = 0; r < 4; ++r)
    for (int j = 0; j < 4; ++j) c.m[r][j] = a[r] * b[j];
  return c;
}

/// Solve A x = b by partial-pivot Gaussian elimination (dense 4x4).
/// Returns false if the matrix is numerically singular.
bool solve4(const Mat4& a, const Vec4& b, Vec4& x);

}  // namespace adjflow

#endif  // ADJFLOW_MATRIX4_HPP_
