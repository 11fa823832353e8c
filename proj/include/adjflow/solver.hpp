// Steady Euler flow solver on median-dual meshes: edge-based Roe fluxes with
// optional MUSCL reconstruction, weakly imposed boundary conditions, SSP-RK2
// explicit stepping and implicit pseudo-time stepping with an assembled
// first-order Jacobian.
#ifndef ADJFLOW_SOLVER_HPP_
#define ADJFLOW_SOLVER_HPP_

#include <utility>
#include <vector>

#include "adjflow/gas.hpp"
#include "adjflow/mesh.hpp"
#include "adjflow/sparse.hpp"

namespace adjflow {

/// Free-stream specification in primitive quantities.
struct FreeStream {
  double mach = 2.0;
  double angle_deg = 0.0;  // flow direction measured from +x
  double rho = 1.0;
  double p = 1.0;
};

ConservativeState freestream_state(const FreeStream& fs, const GasModel& gas);

enum class LimiterKind { dervieux3, minmod };
enum class TimeScheme { explicit_rk2, implicit_euler };

struct SolverConfig {
  GasModel gas;
  double cfl = 0.8;          // explicit Courant number / initial implicit one
  bool muscl_enabled = true;
  LimiterKind limiter = LimiterKind::dervieux3;
  double entropy_eps = 0.05;  // Harten coefficient for |A|; 0 disables
  FreeStream freestream;
  StegerConvention steger = StegerConvention::standard;
  TimeScheme scheme = TimeScheme::implicit_euler;
  double convergence_tol = 1e-8;  // on the residual norm relative to step 1
  int max_steps = 400;
  double cfl_max = 1e6;     // implicit ramping cap
  double cfl_growth = 2.0;  // implicit ramping factor per accepted step
};

/// Per-vertex conservative states aligned with Mesh2D vertices.
using FieldState = std::vector<ConservativeState>;

FieldState uniform_field(const Mesh2D& mesh, const ConservativeState& w);

/// Throws std::runtime_error naming the first vertex with rho <= 0 or p <= 0.
void check_field(const FieldState& field, const GasModel& gas);

/// Number of worker threads for edge-parallel loops: the ADJ_EULER_THREADS
/// environment variable if set (clamped to >= 1), otherwise 1. Results are
/// bitwise-identical for any thread count.
int solver_thread_count();

/// Roe approximate Riemann flux across an interface with integrated normal
/// (nx, ny): 0.5*(F(Wi)+F(Wj)).n + 0.5*|A~(Wi,Wj)|*(Wi-Wj), the dissipation
/// matrix taken at the Roe average with Harten regularization. Antisymmetry
/// roe_flux(Wj,Wi,-n) = -roe_flux(Wi,Wj,n) holds exactly (canonical
/// orientation evaluated once internally).
Vec4 roe_flux(const ConservativeState& wi, const ConservativeState& wj,
              double nx, double ny, const SolverConfig& config);

/// Weak boundary flux for one boundary piece with integrated outward normal.
/// slip_wall/ground: pressure flux (0, p n, 0); inflow_freestream: flux
/// splitting A+(Wi,n) Wi + A-(Wi,n) Winf; outflow_free: F(Wi).n.
Vec4 boundary_flux(const ConservativeState& wi, double nx, double ny,
                   BoundaryTag tag, const SolverConfig& config);

/// Precomputed gradients for MUSCL extrapolation: per-triangle P1 gradients
/// and per-vertex least-squares gradients over the neighbor stencil, stored
/// as (d/dx, d/dy) pairs of state-space vectors.
struct MusclGradients {
  std::vector<std::array<Vec4, 2>> triangle;
  std::vector<std::array<Vec4, 2>> nodal;
};

MusclGradients compute_gradients(const FieldState& field, const Mesh2D& mesh);

/// Limited linear extrapolation of both interface states of an edge. The
/// per-component slope combines the centered, upwind-triangle and nodal
/// increments: zero when their signs disagree, otherwise at most twice the
/// smallest magnitude and never more than the largest. An extrapolated state
/// with nonpositive rho or p falls back to the nodal value (counted in
/// `fallbacks` when given).
std::pair<ConservativeState, ConservativeState> muscl_extrapolate(
    int edge, const FieldState& field, const MusclGradients& grads,
    const Mesh2D& mesh, const SolverConfig& config, int* fallbacks = nullptr);

/// Spatial residual: for each vertex i, sum of interface fluxes to its
/// neighbors plus its boundary-piece fluxes. The steady problem is
/// residual = 0; the semi-discrete evolution is dW_i/dt = -residual_i/|C_i|.
/// Interface fluxes are computed once per edge and gathered in fixed order,
/// so results do not depend on the thread count.
BlockVector residual(const FieldState& field, const Mesh2D& mesh,
                     const SolverConfig& config, int* muscl_fallbacks = nullptr);

/// Per-vertex time steps dt_i = cfl |C_i| / sum_interfaces (|u.n^|+c)|n|.
std::vector<double> local_time_steps(const FieldState& field, const Mesh2D& mesh,
                                     const SolverConfig& config);

/// One 2-stage SSP Runge-Kutta step with the given per-vertex time steps.
/// A stage producing an invalid state halves all time steps and retries (at
/// most 5 times) before throwing.
FieldState ssp_rk2_step(const FieldState& field, const Mesh2D& mesh,
                        const SolverConfig& config, std::vector<double> dt);

/// Exact Jacobian of the first-order residual with the dissipation matrix
/// |A~| and the inflow splitting frozen at the current states:
/// d(flux)/dWi = 0.5 (A(Wi,n) + |A~|), d(flux)/dWj = 0.5 (A(Wj,n) - |A~|);
/// boundary rows add the pressure-flux Jacobian (slip), A+(Wi,n) (inflow)
/// or A(Wi,n) (outflow).
void assemble_first_order_jacobian(const FieldState& field, const Mesh2D& mesh,
                                   const SolverConfig& config,
                                   BlockSparseMatrix& out);

/// One implicit Euler step: solves (|C_i|/dt_i I + J) dW = -residual and
/// returns field + dW. Halves the working CFL (in `io_cfl`) and retries when
/// the linear solve stagnates or the update leaves the valid-state region;
/// throws after 5 consecutive reductions.
FieldState implicit_step(const FieldState& field, const Mesh2D& mesh,
                         const SolverConfig& config, double& io_cfl);

struct ConvergenceEntry {
  int step = 0;
  double residual_inf = 0.0;            // max_i ||residual_i||_inf / |C_i|
  std::array<double, 4> by_equation{};  // same norm per component
  double cfl = 0.0;
};

struct SteadyResult {
  FieldState field;
  std::vector<ConvergenceEntry> log;
  bool converged = false;
};

/// Pseudo-time iteration (explicit or implicit per config) until the
/// residual norm drops below convergence_tol relative to the first step,
/// or max_steps is reached (then converged = false, partial field kept).
SteadyResult solve_steady(FieldState initial, const Mesh2D& mesh,
                          const SolverConfig& config);

}  // namespace adjflow

#endif  // ADJFLOW_SOLVER_HPP_
