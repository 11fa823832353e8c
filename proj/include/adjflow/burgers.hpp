// Conservative upwind finite-difference solver for Burgers' equation, its
// exact discrete adjoint (transpose of the linearized scheme with frozen
// upwind switches), tangent linearization, functional/gradient evaluation,
// and closed-form continuous-adjoint oracles.
#ifndef ADJFLOW_BURGERS_HPP_
#define ADJFLOW_BURGERS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace adjflow {

/// Uniform grid on [x_min, x_max] with n cells (n+1 nodes) and a fixed time
/// step; n_steps * dt is the horizon T.
struct Grid1D {
  double x_min = -6.0;
  double x_max = 6.0;
  int n = 2400;
  double dt = 0.0;
  int n_steps = 0;

  double dx() const { return (x_max - x_min) / n; }
  double x(int i) const { return x_min + i * dx(); }
  double horizon() const { return n_steps * dt; }

  /// Pick dt from a CFL number against max|u0| and round n_steps up so that
  /// n_steps * dt = T exactly.
  static Grid1D make(double x_min, double x_max, int n, double T, double cfl,
                     double u_max);
};

/// Node interval selecting the functional's support {x : in region}.
struct Region1D {
  double lo = 0.0;
  double hi = 1e300;
  bool lo_strict = false;  // true: x > lo, false: x >= lo
  bool hi_strict = false;

  bool contains(double x) const {
    const bool above = lo_strict ? (x > lo) : (x >= lo);
    const bool below = hi_strict ? (x < hi) : (x <= hi);
    return above && below;
  }
};

/// Forward states u^0..u^M plus the upwind switches of every step.
/// switches[m][i] (i = 1..n) is s_i of the step m -> m+1: 1 iff
/// u^m_i + u^m_{i-1} > 0.
struct BurgersTrajectory {
  Grid1D grid;
  std::vector<std::vector<double>> u;          // n_steps+1 levels, n+1 nodes
  std::vector<std::vector<std::uint8_t>> s;    // n_steps levels, n+1 entries (index 0 unused)
};

/// Adjoint states u*^M..u*^0 stored as levels[m] = u*^m.
struct BurgersAdjoint {
  std::vector<std::vector<double>> levels;  // n_steps+1 levels, n+1 nodes
};

/// Which discrete functional the adjoint is dual to.
enum class BurgersFunctional {
  terminal_region,  ///< J = 1/2 sum_{x_i in region} (u^M_i)^2 dx
  time_average      ///< J = 1/(2T) dt sum_{m<M} sum_i (u^m_i)^2 dx
};

/// One explicit step of the conservative upwind scheme; boundary nodes are
/// held at their previous values. Throws std::runtime_error naming the first
/// node where dt * |u| > dx.
void burgers_step(const std::vector<double>& u_prev, const Grid1D& grid,
                  std::vector<double>& u_next, std::vector<std::uint8_t>& s);

/// March n_steps steps from the sampled initial profile.
BurgersTrajectory run_forward(const std::function<double(double)>& u0,
                              const Grid1D& grid);

/// J = 1/2 sum_{x_i in region} (u^M_i)^2 dx.
double functional_J(const BurgersTrajectory& traj, const Region1D& region);

/// J = 1/(2T) dt sum_{m=0}^{M-1} sum_i (u^m_i)^2 dx (left-endpoint rule, so
/// the adjoint terminal condition is exactly zero).
double functional_J_time_average(const BurgersTrajectory& traj);

/// Exact transpose of the linearized scheme using the stored switches.
/// For terminal_region: u*^M_i = u^M_i on region nodes, 0 elsewhere, and the
/// sensitivity of J is +sum u*^0 du0 dx.
/// For time_average: u*^M = 0 and a source -(dt/T) u^m_i joins every level,
/// following the transport convention d_t u* + mean(u) d_x u* = mean(u)/T;
/// the sensitivity of the time-average J is then -sum u*^0 du0 dx.
BurgersAdjoint burgers_adjoint(const BurgersTrajectory& traj,
                               const Region1D& region,
                               BurgersFunctional kind = BurgersFunctional::terminal_region);

/// Tangent linearization along the trajectory (frozen switches): returns
/// du^0..du^M for the given initial perturbation.
std::vector<std::vector<double>> run_tangent(const BurgersTrajectory& traj,
                                             const std::vector<double>& du0);

/// Gradient dJ/da = sum_i u*^0_i (du0/da)_i dx over all nodes.
double gradient_J(const BurgersTrajectory& traj, const BurgersAdjoint& adj,
                  const std::vector<double>& du0_da);

/// Closed-form continuous adjoints for the two analytic cases.
enum class BurgersCase {
  riemann_decay,      ///< u0 = (1+a)(1-H(x)), whole-line terminal data u*|_T = u(.,T)
  stationary_average  ///< same flow, time-averaged functional (1/2T) int u^2
};

/// u*(x, t) for the requested case at horizon T and parameter a.
double analytic_adjoint_oracle(BurgersCase case_id, double x, double t,
                               double T, double a);

/// Per-node CSV (x, u_T, u_star_0, u_star_T, du_da) for external plotting;
/// du_da is the tangent solution at the horizon.
void write_burgers_csv(const std::string& path, const BurgersTrajectory& traj,
                       const BurgersAdjoint& adj,
                       const std::vector<std::vector<double>>& tangent);

}  // namespace adjflow

#endif  // ADJFLOW_BURGERS_HPP_
