// Adjoint machinery for the steady Euler solver: boundary functionals, the
// transposed-Jacobian adjoint solve, analytic adjoint boundary values for
// verification, parameter gradients, and the shape gradient for descent.
#ifndef ADJFLOW_ADJOINT_HPP_
#define ADJFLOW_ADJOINT_HPP_

#include <string>
#include <vector>

#include "adjflow/solver.hpp"

namespace adjflow {

enum class FunctionalKind {
  outflow_density_target,  // 0.5 * integral of (rho/rho_inf - 1)^2
  ground_pressure_target   // 0.5 * integral of (p - p0)^2
};

struct Functional {
  FunctionalKind kind = FunctionalKind::outflow_density_target;
  BoundaryTag boundary = BoundaryTag::outflow_free;  // integration boundary
  double rho_inf = 1.0;  // density normalization (outflow target)
  double p0 = 1.0;       // constant pressure target (ground)
  /// Optional tabulated target pressure (x, p0), linearly interpolated;
  /// overrides the constant when non-empty.
  std::vector<std::array<double, 2>> p0_profile;
};

double target_p0(const Functional& functional, double x);

/// Trapezoidal boundary quadrature of the functional integrand over all
/// boundary edges carrying the functional's tag. Throws when the mesh has no
/// such edges.
double functional_value(const FieldState& field, const Mesh2D& mesh,
                        const Functional& functional, const GasModel& gas);

/// Exact derivative of the discrete functional_value with respect to the
/// vertex states: nonzero only on the functional's boundary vertices.
BlockVector functional_gradient_rhs(const FieldState& field, const Mesh2D& mesh,
                                    const Functional& functional,
                                    const GasModel& gas);

struct AdjointResult {
  BlockVector wstar;
  bool converged = false;
  double linear_residual = 0.0;  // ||J^T w* - rhs|| / ||rhs||
  std::vector<double> history;   // residual per continuation cycle
};

/// Solves J^T W* = dJ/dW with the first-order frozen-dissipation Jacobian of
/// the flow residual, by GMRES with block-Jacobi preconditioning; falls back
/// to pseudo-time continuation on the transposed system when the direct
/// solve stalls. No explicit adjoint boundary conditions are imposed: the
/// boundary rows are the transposed boundary-flux Jacobians.
AdjointResult solve_adjoint(const FieldState& field, const Mesh2D& mesh,
                            const Functional& functional,
                            const SolverConfig& config);

/// Closed-form adjoint trace on an outflow boundary parallel to the y-axis
/// for the density-target functional: the exact solution of
/// W*^T A(W,(1,0)) = (1/rho_inf)(rho/rho_inf - 1) e1. Throws
/// std::domain_error when the printed denominator vanishes.
Vec4 analytic_outflow_adjoint(const ConservativeState& trace, double rho_inf,
                              const GasModel& gas);

struct OutflowCheckRow {
  int vertex = -1;
  double x = 0.0, y = 0.0;
  Vec4 numeric, analytic;
  double abs_err = 0.0;  // max component difference
  double rel_err = 0.0;  // abs_err / max-norm of the analytic trace set
  bool shock_flag = false;
};

/// Compares the solved adjoint on outflow vertices against the closed form.
/// Vertices where |grad rho| h > shock_threshold * rho_inf are flagged; their
/// traces are evaluated from two-sided samples along the density gradient
/// instead of the point value.  Corner vertices that also carry a wall piece
/// satisfy a mixed balance and are omitted.
std::vector<OutflowCheckRow> verify_outflow_bc(const BlockVector& wstar,
                                               const FieldState& field,
                                               const Mesh2D& mesh,
                                               const Functional& functional,
                                               const SolverConfig& config,
                                               double shock_threshold = 0.1);

struct ScalarCheckRow {
  int vertex = -1;
  double x = 0.0, y = 0.0;
  double numeric = 0.0, analytic = 0.0;
  double abs_err = 0.0, rel_err = 0.0;
  bool shock_flag = false;
};

/// Compares the wall-normal momentum adjoint (W2*, W3*) . n_hat on ground
/// vertices with (p - p0), its continuous-limit boundary value for the
/// pressure-target functional.  On a bottom wall (outward normal (0,-1))
/// this is -W3*.  Corner vertices shared with another boundary satisfy a
/// mixed adjoint balance and are left out.  Rows come back ordered along
/// the wall; vertices astride a jump of the numeric trace itself (the
/// adjoint is discontinuous along characteristics crossing the wall) are
/// flagged like shocked ones.
std::vector<ScalarCheckRow> ground_adjoint_check(const BlockVector& wstar,
                                                 const FieldState& field,
                                                 const Mesh2D& mesh,
                                                 const Functional& functional,
                                                 const SolverConfig& config,
                                                 double shock_threshold = 0.1);

/// (W2*, W3*) . n^ at each wall vertex of the given tag; near-zero values
/// reproduce the continuous wall condition W* . n = 0.
std::vector<ScalarCheckRow> wall_adjoint_normal_residual(
    const BlockVector& wstar, const Mesh2D& mesh, BoundaryTag wall);

struct OutflowZeroReport {
  bool applicable = false;
  double ratio = 0.0;  // ||W*||_inf on the outflow over the global norm
  std::string note;
};

/// Checks that the adjoint vanishes on a supersonic outflow boundary that
/// does not carry the functional; skipped (with note) when it does.
OutflowZeroReport outflow_right_boundary_zero_check(const BlockVector& wstar,
                                                    const Mesh2D& mesh,
                                                    const Functional& functional);

struct ShapeGradientEntry {
  int vertex = -1;
  double x = 0.0, y = 0.0;
  double gradient = 0.0;   // dJ/d(alpha) density: delta J ~ sum w alpha grad
  double alpha = 0.0;      // descent displacement, -lambda * gradient
  double curvature = 0.0;  // circumcircle of consecutive vertices, positive
                           // where the wall is convex toward the fluid
};

/// Shape gradient of the functional with respect to a normal displacement
/// alpha of the tagged wall.  Displacing the wall changes the normal mass
/// flux seen by the slip condition both through the flux profile
/// (alpha d(rho U_n)/dn) and through the tilt of the normal, which projects
/// out tangential mass flux at rate -(d alpha/ds) rho U_t.  Pairing with the
/// adjoint (whose ground trace here is W3* = -(p - p0)) and moving the tilt
/// term onto alpha by parts gives delta J = integral alpha G with
///   G = -(cA d(rho U_n)/dn + d(cA rho U_t)/ds),   cA = W1* + u W2* + v W3*.
/// The normal derivative is one-sided (nearest interior sample); the
/// tangential derivative is centred along the wall polyline.  Polyline
/// endpoints (corner vertices with mixed tags) stay fixed.  `predicted_dj`
/// receives the first-order change -lambda * integral G^2 of the descent
/// step alpha = -lambda G, which is never positive.  Raw G carries
/// mesh-scale spikes wherever the wall or the flow kinks (corners, shock
/// feet); steps taken from it should be smoothed against wall modes that
/// vanish there.
std::vector<ShapeGradientEntry> shape_gradient(const BlockVector& wstar,
                                               const FieldState& field,
                                               const Mesh2D& mesh,
                                               BoundaryTag wall, double lambda,
                                               const GasModel& gas,
                                               double* predicted_dj = nullptr);

/// Edges whose value jump exceeds threshold_factor times the median absolute
/// edge jump; candidate discontinuity set.  A floor of 5% of the global value
/// range keeps the threshold meaningful when the field is exactly constant
/// over most of the mesh (median jump ~ 0).
std::vector<int> jump_detector(const std::vector<double>& values,
                               const Mesh2D& mesh,
                               double threshold_factor = 3.0);

/// Total derivative dJ/drho_inf by the adjoint, at fixed free-stream
/// velocity, pressure and angle (the Mach number varies with rho_inf; the
/// fixed-Mach family is a pure similarity scaling under which J is exactly
/// constant, so its derivative is degenerate).  The functional's rho_inf
/// normalization is treated as an independent constant.  Only the inflow
/// fluxes depend on the free-stream state, so the derivative is
/// -W*^T dR/drho_inf summed over inflow boundary pieces.
double gradient_rho_inf(const FieldState& field, const BlockVector& wstar,
                        const Mesh2D& mesh, const SolverConfig& config);

}  // namespace adjflow

#endif  // ADJFLOW_ADJOINT_HPP_
