// Conservative states, perfect-gas law, and the analytic flux Jacobian family
// for the 2D Euler equations: A(W,n), its eigendecomposition, |A|, the
// Steger-Warming split parts, and the Roe average.
#ifndef ADJFLOW_GAS_HPP_
#define ADJFLOW_GAS_HPP_

#include <utility>

#include "adjflow/matrix4.hpp"

namespace adjflow {

/// Perfect-gas model; gamma is the specific-heat ratio.
struct GasModel {
  double gamma = 1.4;
};

/// Conservative variables W = (rho, rho*u, rho*v, rho*E).
struct ConservativeState {
  double rho = 1.0;  ///< density, must stay > 0
  double mx = 0.0;   ///< x-momentum rho*u
  double my = 0.0;   ///< y-momentum rho*v
  double e = 1.0;    ///< total energy density rho*E

  Vec4 as_vec() const { return Vec4{{rho, mx, my, e}}; }
  static ConservativeState from_vec(const Vec4& w) {
    return ConservativeState{w[0], w[1], w[2], w[3]};
  }
  /// Build from primitives (rho, u, v, p).
  static ConservativeState from_primitive(double rho, double u, double v,
                                          double p, const GasModel& gas);
};

/// Primitive view of a conservative state (u, v, p, speed of sound, ...).
struct Primitives {
  double rho, u, v, p, E, H, c;  // E = e/rho, H = E + p/rho, c = sqrt(gamma p / rho)
};

/// p = (gamma-1)(rho E - ((rho u)^2 + (rho v)^2) / (2 rho)).
/// Throws std::domain_error when rho <= 0.
double pressure(const ConservativeState& w, const GasModel& gas);

/// True when rho > 0 and the derived pressure is > 0.
bool is_valid_state(const ConservativeState& w, const GasModel& gas);

/// Decode all primitive quantities at once; throws on rho <= 0 or p <= 0.
Primitives primitives(const ConservativeState& w, const GasModel& gas);

/// dp/dW = (gamma-1) * (q^2/2, -u, -v, 1) with q^2 = u^2 + v^2.
Vec4 pressure_jacobian(const ConservativeState& w, const GasModel& gas);

/// Physical fluxes F1 (x-direction) and F2 (y-direction).
std::pair<Vec4, Vec4> flux(const ConservativeState& w, const GasModel& gas);

/// Directional flux F(W).n = F1*nx + F2*ny; n need not be unit length.
Vec4 flux_normal(const ConservativeState& w, double nx, double ny,
                 const GasModel& gas);

/// A(W,n) = d(F(W).n)/dW, linear in n.
Mat4 flux_jacobian_normal(const ConservativeState& w, double nx, double ny,
                          const GasModel& gas);

/// Eigendecomposition A = P Lambda P^-1 with
/// Lambda = diag(u.n, u.n, u.n + c|n|, u.n - c|n|).
struct EigenSystem {
  Vec4 lambda;  ///< eigenvalues in the order above
  Mat4 p;       ///< right eigenvectors as columns
  Mat4 p_inv;   ///< left eigenvectors as rows
};

EigenSystem eigen_decomposition(const ConservativeState& w, double nx,
                                double ny, const GasModel& gas);

/// |A| = P |Lambda| P^-1. Each |lambda| is Harten-regularized to
/// (lambda^2 + eps^2) / (2 eps) when |lambda| < eps, with
/// eps = entropy_eps_coeff * (|u.n| + c|n|); a zero coefficient disables the
/// regularization. n = 0 returns the zero matrix.
Mat4 abs_jacobian(const ConservativeState& w, double nx, double ny,
                  const GasModel& gas, double entropy_eps_coeff = 0.0);

/// Convention for the Steger-Warming split parts of A.
enum class StegerConvention {
  standard,  ///< A+- = (A +- |A|)/2, so A+ + A- = A
  paper      ///< A+- = (|A| +- A)/2, so A+ + A- = |A|
};

/// Split Jacobians (A_plus, A_minus) under the requested convention.
std::pair<Mat4, Mat4> split_jacobians(const ConservativeState& w, double nx,
                                      double ny, const GasModel& gas,
                                      StegerConvention convention,
                                      double entropy_eps_coeff = 0.0);

/// Roe-averaged state of Wi and Wj: rho~ = sqrt(rho_i rho_j), velocities and
/// total enthalpy as sqrt(rho)-weighted means, reconstructed as a
/// conservative state. roe_average(W, W) returns W bitwise.
ConservativeState roe_average(const ConservativeState& wi,
                              const ConservativeState& wj,
                              const GasModel& gas);

}  // namespace adjflow

#endif  // ADJFLOW_GAS_HPP_
