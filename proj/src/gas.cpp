#include "adjflow/gas.hpp"

#include <cmath>
#include <stdexcept>

namespace adjflow {

bool solve4(const Mat4& a, const Vec4& b, Vec4& x) {
  double aug[4][5];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) aug[r][c] = a(r, c);
    aug[r][4] = b[r];
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
    if (std::abs(aug[piv][col]) < 1e-300) return false;
    if (piv != col)
      for (int c = col; c < 5; ++c) std::swap(aug[piv][c], aug[col][c]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = aug[r][col] / aug[col][col];
      for (int c = col; c < 5; ++c) aug[r][c] -= f * aug[col][c];
    }
  }
  for (int r = 0; r < 4; ++r) x[r] = aug[r][4] / aug[r][r];
  return true;
}

ConservativeState ConservativeState::from_primitive(double rho, double u,
                                                    double v, double p,
                                                    const GasModel& gas) {
  if (rho <= 0.0) throw std::domain_error("from_primitive: rho must be > 0");
  if (p <= 0.0) throw std::domain_error("from_primitive: p must be > 0");
  ConservativeState w;
  w.rho = rho;
  w.mx = rho * u;
  w.my = rho * v;
  w.e = p / (gas.gamma - 1.0) + 0.5 * rho * (u * u + v * v);
  return w;
}

double pressure(const ConservativeState& w, const GasModel& gas) {
  if (w.rho <= 0.0) throw std::domain_error("pressure: rho must be > 0");
  return (gas.gamma - 1.0) * (w.e - (w.mx * w.mx + w.my * w.my) / (2.0 * w.rho));
}

bool is_valid_state(const ConservativeState& w, const GasModel& gas) {
  if (!(w.rho > 0.0)) return false;
  const double p =
      (gas.gamma - 1.0) * (w.e - (w.mx * w.mx + w.my * w.my) / (2.0 * w.rho));
  return p > 0.0 && std::isfinite(p);
}

Primitives primitives(const ConservativeState& w, const GasModel& gas) {
  Primitives q;
  q.rho = w.rho;
  q.p = pressure(w, gas);
  if (q.p <= 0.0) throw std::domain_error("primitives: non-positive pressure");
  q.u = w.mx / w.rho;
  q.v = w.my / w.rho;
  q.E = w.e / w.rho;
  q.H = q.E + q.p / q.rho;
  q.c = std::sqrt(gas.gamma * q.p / q.rho);
  return q;
}

Vec4 pressure_jacobian(const ConservativeState& w, const GasModel& gas) {
  if (w.rho <= 0.0)
    throw std::domain_error("pressure_jacobian: rho must be > 0");
  const double u = w.mx / w.rho;
  const double v = w.my / w.rho;
  const double g1 = gas.gamma - 1.0;
  return Vec4{{g1 * 0.5 * (u * u + v * v), -g1 * u, -g1 * v, g1}};
}

std::pair<Vec4, Vec4> flux(const ConservativeState& w, const GasModel& gas) {
  const Primitives q = primitives(w, gas);
  Vec4 f1{{w.mx, w.mx * q.u + q.p, w.my * q.u, (w.e + q.p) * q.u}};
  Vec4 f2{{w.my, w.mx * q.v, w.my * q.v + q.p, (w.e + q.p) * q.v}};
  return {f1, f2};
}

Vec4 flux_normal(const ConservativeState& w, double nx, double ny,
                 const GasModel& gas) {
  const Primitives q = primitives(w, gas);
  const double un = q.u * nx + q.v * ny;  // weighted normal velocity
  return Vec4{{w.rho * un, w.mx * un + q.p * nx, w.my * un + q.p * ny,
               (w.e + q.p) * un}};
}

Mat4 flux_jacobian_normal(const ConservativeState& w, double nx, double ny,
                          const GasModel& gas) {
  const Primitives q = primitives(w, gas);
  const double g = gas.gamma;
  const double g1 = g - 1.0;
  const double u = q.u, v = q.v;
  const double q2 = u * u + v * v;
  const double un = u * nx + v * ny;
  const double E = q.E;

  Mat4 a;
  a(0, 0) = 0.0;
  a(0, 1) = nx;
  a(0, 2) = ny;
  a(0, 3) = 0.0;

  a(1, 0) = g1 * 0.5 * q2 * nx - u * un;
  a(1, 1) = un - (g - 2.0) * u * nx;
  a(1, 2) = u * ny - g1 * v * nx;
  a(1, 3) = g1 * nx;

  a(2, 0) = g1 * 0.5 * q2 * ny - v * un;
  a(2, 1) = v * nx - g1 * u * ny;
  a(2, 2) = un - (g - 2.0) * v * ny;
  a(2, 3) = g1 * ny;

  a(3, 0) = (g1 * q2 - g * E) * un;
  a(3, 1) = (q.p / q.rho + E) * nx - g1 * u * un;
  a(3, 2) = (q.p / q.rho + E) * ny - g1 * v * un;
  a(3, 3) = g * un;
  return a;
}

EigenSystem eigen_decomposition(const ConservativeState& w, double nx,
                                double ny, const GasModel& gas) {
  const Primitives q = primitives(w, gas);
  const double len = std::sqrt(nx * nx + ny * ny);
  if (len <= 0.0)
    throw std::domain_error("eigen_decomposition: zero normal vector");
  const double nhx = nx / len, nhy = ny / len;
  const double thx = -nhy, thy = nhx;  // unit tangent
  const double u = q.u, v = q.v, c = q.c, H = q.H;
  const double q2 = u * u + v * v;
  const double unh = u * nhx + v * nhy;  // velocity . unit normal
  const double uth = u * thx + v * thy;
  const double un = unh * len;

  EigenSystem es;
  es.lambda = Vec4{{un, un, un + c * len, un - c * len}};

  // Right eigenvectors (columns): entropy, shear, two acoustic waves.
  Mat4& P = es.p;
  P(0, 0) = 1.0;       P(0, 1) = 0.0;  P(0, 2) = 1.0;           P(0, 3) = 1.0;
  P(1, 0) = u;         P(1, 1) = thx;  P(1, 2) = u + c * nhx;   P(1, 3) = u - c * nhx;
  P(2, 0) = v;         P(2, 1) = thy;  P(2, 2) = v + c * nhy;   P(2, 3) = v - c * nhy;
  P(3, 0) = 0.5 * q2;  P(3, 1) = uth;  P(3, 2) = H + c * unh;   P(3, 3) = H - c * unh;

  // Left eigenvectors (rows), standard closed form with b1 = (gamma-1)/c^2.
  const double b1 = (gas.gamma - 1.0) / (c * c);
  const double b2 = 0.5 * b1 * q2;
  Mat4& Pi = es.p_inv;
  Pi(0, 0) = 1.0 - b2;
  Pi(0, 1) = b1 * u;
  Pi(0, 2) = b1 * v;
  Pi(0, 3) = -b1;
  Pi(1, 0) = -uth;
  Pi(1, 1) = thx;
  Pi(1, 2) = thy;
  Pi(1, 3) = 0.0;
  Pi(2, 0) = 0.5 * (b2 - unh / c);
  Pi(2, 1) = 0.5 * (-b1 * u + nhx / c);
  Pi(2, 2) = 0.5 * (-b1 * v + nhy / c);
  Pi(2, 3) = 0.5 * b1;
  Pi(3, 0) = 0.5 * (b2 + unh / c);
  Pi(3, 1) = 0.5 * (-b1 * u - nhx / c);
  Pi(3, 2) = 0.5 * (-b1 * v - nhy / c);
  Pi(3, 3) = 0.5 * b1;
  return es;
}

namespace {

/// Harten-regularized absolute value.
double harten_abs(double lambda, double eps) {
  const double a = std::abs(lambda);
  if (eps <= 0.0 || a >= eps) return a;
  return (lambda * lambda + eps * eps) / (2.0 * eps);
}

}  // namespace

Mat4 abs_jacobian(const ConservativeState& w, double nx, double ny,
                  const GasModel& gas, double entropy_eps_coeff) {
  const double len = std::sqrt(nx * nx + ny * ny);
  if (len <= 0.0) return Mat4::zero();
  const EigenSystem es = eigen_decomposition(w, nx, ny, gas);
  const Primitives q = primitives(w, gas);
  const double un = (q.u * nx + q.v * ny);
  const double eps = entropy_eps_coeff * (std::abs(un) + q.c * len);
  Mat4 absA;
  // P * |Lambda| * P^-1 without forming the diagonal matrix.
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += es.p(r, k) * harten_abs(es.lambda[k], eps) * es.p_inv(k, c);
      absA(r, c) = s;
    }
  return absA;
}

std::pair<Mat4, Mat4> split_jacobians(const ConservativeState& w, double nx,
                                      double ny, const GasModel& gas,
                                      StegerConvention convention,
                                      double entropy_eps_coeff) {
  const Mat4 a = flux_jacobian_normal(w, nx, ny, gas);
  const Mat4 absA = abs_jacobian(w, nx, ny, gas, entropy_eps_coeff);
  Mat4 plus, minus;
  if (convention == StegerConvention::standard) {
    plus = 0.5 * (a + absA);
    minus = 0.5 * (a - absA);
  } else {
    plus = 0.5 * (absA + a);
    minus = 0.5 * (absA - a);
  }
  return {plus, minus};
}

ConservativeState roe_average(const ConservativeState& wi,
                              const ConservativeState& wj,
                              const GasModel& gas) {
  if (wi.rho == wj.rho && wi.mx == wj.mx && wi.my == wj.my && wi.e == wj.e)
    return wi;  // identity case, bitwise
  const Primitives qi = primitives(wi, gas);
  const Primitives qj = primitives(wj, gas);
  const double s = std::sqrt(qj.rho / qi.rho);
  const double w0 = 1.0 / (1.0 + s);
  const double w1 = s * w0;
  const double rho = s * qi.rho;  // = sqrt(rho_i rho_j)
  const double u = w0 * qi.u + w1 * qj.u;
  const double v = w0 * qi.v + w1 * qj.v;
  const double H = w0 * qi.H + w1 * qj.H;
  const double q2 = u * u + v * v;
  const double c2 = (gas.gamma - 1.0) * (H - 0.5 * q2);
  if (!(c2 > 0.0))
    throw std::domain_error("roe_average: degenerate average state");
  const double p = rho * c2 / gas.gamma;
  ConservativeState wr;
  wr.rho = rho;
  wr.mx = rho * u;
  wr.my = rho * v;
  wr.e = rho * H - p;
  return wr;
}

}  // namespace adjflow
