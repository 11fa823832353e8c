#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "adjflow/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace adjflow;

namespace {

Mesh2D channel(double angle_deg, double h,
               BoundaryTag bottom = BoundaryTag::slip_wall) {
  WedgeChannelParams p;
  p.wedge_angle_deg = angle_deg;
  p.target_h = h;
  p.bottom_tag = bottom;
  return generate_wedge_channel(p);
}

// Wedge hanging from the top wall with the ground underneath: the shock
// runs down onto the instrumented bottom boundary.
Mesh2D ground_channel(double h) {
  WedgeChannelParams p;
  p.target_h = h;
  p.wedge_on_top = true;
  p.wedge_start = 1.2;
  p.bottom_tag = BoundaryTag::ground;
  return generate_wedge_channel(p);
}

// Shock-capturing runs use the first-order scheme, which the implicit
// iteration drives to machine-level residuals.
SolverConfig shock_config() {
  SolverConfig config;
  config.muscl_enabled = false;
  config.convergence_tol = 1e-12;
  config.max_steps = 400;
  return config;
}

FieldState solved(const Mesh2D& mesh, const SolverConfig& config) {
  SteadyResult out = solve_steady(
      uniform_field(mesh, freestream_state(config.freestream, config.gas)),
      mesh, config);
  REQUIRE(out.converged);
  return std::move(out.field);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (sab - sa * sb / n) /
         std::sqrt((saa - sa * sa / n) * (sbb - sb * sb / n));
}

// Trapezoidal weight of a vertex on the tagged boundary: half the length of
// its incident tagged edges.
double boundary_weight(const Mesh2D& mesh, BoundaryTag tag, int v) {
  double w = 0.0;
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    if (be.tag != tag || (be.a != v && be.b != v)) continue;
    w += 0.5 * std::hypot(mesh.vertices[be.b][0] - mesh.vertices[be.a][0],
                          mesh.vertices[be.b][1] - mesh.vertices[be.a][1]);
  }
  return w;
}

bool vertex_has_tag(const Mesh2D& mesh, int v, BoundaryTag tag) {
  for (const BoundaryPiece& p : mesh.boundary_pieces[v])
    if (p.tag == tag) return true;
  return false;
}

bool vertex_tag_is_pure(const Mesh2D& mesh, int v, BoundaryTag tag) {
  if (mesh.boundary_pieces[v].empty()) return false;
  for (const BoundaryPiece& p : mesh.boundary_pieces[v])
    if (p.tag != tag) return false;
  return true;
}

}  // namespace

TEST_CASE("functional values: exact targets, offset scaling, missing tags") {
  const Mesh2D mesh = channel(0.0, 0.2, BoundaryTag::ground);
  SolverConfig config;
  const FieldState flat =
      uniform_field(mesh, freestream_state(config.freestream, config.gas));

  Functional density;  // outflow density target, rho_inf = 1
  CHECK(functional_value(flat, mesh, density, config.gas) == 0.0);

  // The pressure recomputed from conservative variables carries one ulp of
  // noise against the free-stream p, so "exact" means squared-roundoff here.
  Functional pressure_target;
  pressure_target.kind = FunctionalKind::ground_pressure_target;
  pressure_target.boundary = BoundaryTag::ground;
  pressure_target.p0 = config.freestream.p;
  CHECK(functional_value(flat, mesh, pressure_target, config.gas) < 1e-28);

  // Doubling the density against rho_inf = 1 makes the misfit integrand
  // exactly 1/2, so the value is half the boundary length.
  FieldState doubled = flat;
  for (auto& w : doubled) {
    const Primitives prim = primitives(w, config.gas);
    w = ConservativeState::from_primitive(2.0 * prim.rho, prim.u, prim.v,
                                          prim.p, config.gas);
  }
  double outflow_len = 0.0;
  for (const BoundaryEdge& be : mesh.boundary_edges)
    if (be.tag == BoundaryTag::outflow_free)
      outflow_len +=
          std::hypot(mesh.vertices[be.b][0] - mesh.vertices[be.a][0],
                     mesh.vertices[be.b][1] - mesh.vertices[be.a][1]);
  CHECK(outflow_len == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(functional_value(doubled, mesh, density, config.gas) ==
        doctest::Approx(0.5 * outflow_len).epsilon(1e-12));

  // A functional over a tag the mesh does not carry is a caller error.
  const Mesh2D no_ground = channel(0.0, 0.2);  // both walls slip
  Functional missing;
  missing.kind = FunctionalKind::ground_pressure_target;
  missing.boundary = BoundaryTag::ground;
  CHECK_THROWS_AS(functional_value(flat, no_ground, missing, config.gas),
                  std::runtime_error);
}

TEST_CASE("boundary quadrature of the functional converges at second order") {
  SolverConfig config;
  Functional density;
  const auto rho_of_y = [](double y) { return 1.0 + 0.3 * std::sin(3.0 * y + 0.4); };

  // Dense Simpson value of 0.5 * (rho(y) - 1)^2 over the unit outflow.
  const int m = 20000;
  double exact = 0.0;
  for (int k = 0; k < m; ++k) {
    const double y0 = k / double(m), y1 = (k + 1) / double(m), ym = 0.5 * (y0 + y1);
    const auto f = [&](double y) {
      const double d = rho_of_y(y) - 1.0;
      return 0.5 * d * d;
    };
    exact += (y1 - y0) / 6.0 * (f(y0) + 4.0 * f(ym) + f(y1));
  }

  std::vector<double> errors;
  for (double h : {0.12, 0.06, 0.03}) {
    const Mesh2D mesh = channel(0.0, h);
    FieldState field(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v)
      field[v] = ConservativeState::from_primitive(
          rho_of_y(mesh.vertices[v][1]), 2.0, 0.0, 1.0, config.gas);
    errors.push_back(
        std::fabs(functional_value(field, mesh, density, config.gas) - exact));
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double order = std::log2(errors[k] / errors[k + 1]);
    CHECK(order > 1.6);
    CHECK(order < 2.6);
  }
}

TEST_CASE("functional gradient differentiates the discrete value") {
  const Mesh2D mesh = channel(0.0, 0.15, BoundaryTag::ground);
  SolverConfig config;
  const ConservativeState winf =
      freestream_state(config.freestream, config.gas);

  // Smoothly perturbed field so that no misfit vanishes identically.
  FieldState field(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const double x = mesh.vertices[v][0], y = mesh.vertices[v][1];
    const Primitives base = primitives(winf, config.gas);
    field[v] = ConservativeState::from_primitive(
        base.rho * (1.0 + 0.04 * std::sin(2.0 * x + y)), base.u,
        0.05 * std::cos(x), base.p * (1.0 + 0.05 * std::sin(x - 2.0 * y)),
        config.gas);
  }

  for (const FunctionalKind kind : {FunctionalKind::outflow_density_target,
                                    FunctionalKind::ground_pressure_target}) {
    Functional func;
    func.kind = kind;
    func.boundary = kind == FunctionalKind::outflow_density_target
                        ? BoundaryTag::outflow_free
                        : BoundaryTag::ground;
    const BlockVector rhs = functional_gradient_rhs(field, mesh, func, config.gas);

    // Entries live only on the functional's boundary.
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (!vertex_has_tag(mesh, v, func.boundary))
        CHECK(norm_inf(rhs[v]) == 0.0);

    // Central finite differences of the value, component by component, on a
    // few boundary vertices.
    std::mt19937 rng(7);
    std::vector<int> on_boundary;
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (vertex_has_tag(mesh, v, func.boundary)) on_boundary.push_back(v);
    for (int trial = 0; trial < 6; ++trial) {
      const int v = on_boundary[rng() % on_boundary.size()];
      for (int c = 0; c < 4; ++c) {
        const double eps = 1e-6 * std::max(1.0, std::fabs(field[v].as_vec()[c]));
        FieldState plus = field, minus = field;
        Vec4 wp = field[v].as_vec(), wm = wp;
        wp[c] += eps;
        wm[c] -= eps;
        plus[v] = ConservativeState::from_vec(wp);
        minus[v] = ConservativeState::from_vec(wm);
        const double fd = (functional_value(plus, mesh, func, config.gas) -
                           functional_value(minus, mesh, func, config.gas)) /
                          (2.0 * eps);
        CHECK(rhs[v][c] == doctest::Approx(fd).epsilon(1e-6).scale(1e-8));
      }
    }
  }

  // The pressure-target entries point along the pressure derivative
  // (gamma-1)*(q^2/2, -u, -v, 1), scaled by the weighted misfit.
  Functional ground;
  ground.kind = FunctionalKind::ground_pressure_target;
  ground.boundary = BoundaryTag::ground;
  const BlockVector rhs = functional_gradient_rhs(field, mesh, ground, config.gas);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!vertex_has_tag(mesh, v, BoundaryTag::ground)) continue;
    const double misfit = pressure(field[v], config.gas) - ground.p0;
    const Vec4 expected = (boundary_weight(mesh, BoundaryTag::ground, v) *
                           misfit) * pressure_jacobian(field[v], config.gas);
    CHECK(norm_inf(rhs[v] - expected) < 1e-12 * (1.0 + norm_inf(expected)));
  }
}

TEST_CASE("tabulated target pressure interpolates and clamps") {
  Functional func;
  func.p0 = 0.7;
  CHECK(target_p0(func, 1.3) == 0.7);

  func.p0_profile = {{0.0, 2.0}, {1.0, 4.0}, {3.0, 4.0}};
  CHECK(target_p0(func, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(target_p0(func, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(target_p0(func, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(target_p0(func, -5.0) == 2.0);  // clamped to the table ends
  CHECK(target_p0(func, 9.0) == 4.0);
}

TEST_CASE("matching the target exactly gives a zero adjoint") {
  const Mesh2D mesh = channel(0.0, 0.15, BoundaryTag::ground);
  SolverConfig config;
  const FieldState flat =
      uniform_field(mesh, freestream_state(config.freestream, config.gas));

  Functional density;  // rho = rho_inf everywhere: zero right-hand side
  const AdjointResult adj = solve_adjoint(flat, mesh, density, config);
  CHECK(adj.converged);
  CHECK(norm_inf(adj.wstar) == 0.0);

  // Same for the pressure target, up to the roundoff the derived pressure
  // reinjects into the right-hand side; the ground trace report sits at the
  // same noise floor on both sides.
  Functional ground;
  ground.kind = FunctionalKind::ground_pressure_target;
  ground.boundary = BoundaryTag::ground;
  ground.p0 = config.freestream.p;
  const AdjointResult gadj = solve_adjoint(flat, mesh, ground, config);
  CHECK(norm_inf(gadj.wstar) < 1e-12);
  for (const ScalarCheckRow& row :
       ground_adjoint_check(gadj.wstar, flat, mesh, ground, config)) {
    CHECK(std::fabs(row.numeric) < 1e-12);
    CHECK(std::fabs(row.analytic) < 1e-12);
    CHECK(row.abs_err < 1e-12);
  }
}

TEST_CASE("analytic outflow adjoint solves the transposed flux system") {
  const GasModel gas;
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> rho(0.3, 3.0), uvel(0.3, 2.5),
      vvel(-1.0, 1.0), prs(0.2, 3.0), rinf(0.5, 2.0);

  for (int trial = 0; trial < 100; ++trial) {
    const ConservativeState w = ConservativeState::from_primitive(
        rho(rng), uvel(rng), vvel(rng), prs(rng), gas);
    const double rho_inf = rinf(rng);
    const Vec4 wstar = analytic_outflow_adjoint(w, rho_inf, gas);

    // Defining system: wstar^T A(w, n=(1,0)) = (rho/rho_inf - 1)/rho_inf e1.
    const Mat4 at = flux_jacobian_normal(w, 1.0, 0.0, gas).transpose();
    Vec4 rhs{};
    rhs[0] = (w.rho / rho_inf - 1.0) / rho_inf;
    const Vec4 res = at * wstar - rhs;
    double scale = norm_inf(rhs);
    for (int c = 0; c < 4; ++c)
      scale = std::max(scale, norm_inf(at * wstar));
    CHECK(norm_inf(res) < 1e-10 * std::max(1e-30, scale));

    // Printed component ratios are exact.
    const Primitives prim = primitives(w, gas);
    CHECK(wstar[2] == -prim.v * wstar[3]);
    CHECK(wstar[1] ==
          -gas.gamma / (gas.gamma - 1.0) * prim.u * wstar[3]);
  }

  // A trace already on target has nothing to adjoin.
  const ConservativeState on_target =
      ConservativeState::from_primitive(1.25, 1.7, 0.2, 1.0, gas);
  CHECK(norm_inf(analytic_outflow_adjoint(on_target, 1.25, gas)) == 0.0);

  // Zero axial velocity degenerates the closed form.
  const ConservativeState stalled =
      ConservativeState::from_primitive(1.0, 0.0, 0.5, 1.0, gas);
  CHECK_THROWS_AS(analytic_outflow_adjoint(stalled, 2.0, gas),
                  std::domain_error);
}

TEST_CASE("outflow verification clears manufactured traces and flags jumps") {
  const Mesh2D mesh = channel(0.0, 0.1);
  SolverConfig config;
  Functional func;
  func.rho_inf = 0.8;  // off target so the analytic trace is nonzero

  const FieldState flat =
      uniform_field(mesh, freestream_state(config.freestream, config.gas));
  BlockVector wstar(mesh.n_vertices(), Vec4{});
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (vertex_has_tag(mesh, v, BoundaryTag::outflow_free))
      wstar[v] = analytic_outflow_adjoint(flat[v], func.rho_inf, config.gas);

  const auto rows = verify_outflow_bc(wstar, flat, mesh, func, config);
  CHECK(rows.size() >= 5);
  for (const OutflowCheckRow& row : rows) {
    CHECK(!row.shock_flag);
    CHECK(row.abs_err < 1e-14);
    CHECK(row.rel_err < 1e-12);
  }

  // A density jump crossing the outflow gets its vertices flagged; rows far
  // from it still agree, rows astride it are excluded by the flag instead
  // of failing the comparison.
  const double y_jump = 0.55;
  FieldState stepped = flat;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (mesh.vertices[v][1] > y_jump) {
      const Primitives prim = primitives(flat[v], config.gas);
      stepped[v] = ConservativeState::from_primitive(1.6 * prim.rho, prim.u,
                                                     prim.v, prim.p, config.gas);
    }
  BlockVector wstep(mesh.n_vertices(), Vec4{});
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (vertex_has_tag(mesh, v, BoundaryTag::outflow_free))
      wstep[v] = analytic_outflow_adjoint(stepped[v], func.rho_inf, config.gas);

  int flagged = 0;
  for (const OutflowCheckRow& row :
       verify_outflow_bc(wstep, stepped, mesh, func, config)) {
    if (row.shock_flag) {
      ++flagged;
      CHECK(std::fabs(row.y - y_jump) < 0.35);
    } else if (std::fabs(row.y - y_jump) > 0.35) {
      CHECK(row.abs_err < 1e-14);
    }
  }
  CHECK(flagged >= 1);
}

TEST_CASE("wall-normal adjoint momentum: exact symmetry and random sanity") {
  const Mesh2D mesh = channel(0.0, 0.12);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // W3* proportional to y(1-y) vanishes on both straight walls, as the
  // antisymmetric adjoint of a mirror-symmetric flow would; the wall-normal
  // component is exactly zero away from the corner vertices, whose averaged
  // normals blend in the inflow/outflow direction.
  BlockVector sym(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const double y = mesh.vertices[v][1];
    sym[v] = Vec4{{unit(rng), unit(rng), y * (1.0 - y) * unit(rng), unit(rng)}};
  }
  for (const ScalarCheckRow& row :
       wall_adjoint_normal_residual(sym, mesh, BoundaryTag::slip_wall))
    if (vertex_tag_is_pure(mesh, row.vertex, BoundaryTag::slip_wall))
      CHECK(std::fabs(row.numeric) < 1e-15);

  // A generic non-adjoint field leaves an order-one residual.
  BlockVector noise(mesh.n_vertices());
  double wmax = 0.0;
  for (auto& w : noise) {
    w = Vec4{{unit(rng), unit(rng), unit(rng), unit(rng)}};
    wmax = std::max(wmax, norm_inf(w));
  }
  double rmax = 0.0;
  for (const ScalarCheckRow& row :
       wall_adjoint_normal_residual(noise, mesh, BoundaryTag::slip_wall))
    rmax = std::max(rmax, row.abs_err);
  CHECK(rmax / wmax > 0.2);
}

TEST_CASE("mach 2 wedge: duality, outflow traces, wall residual, jump sets") {
  WedgeChannelParams params;
  params.target_h = 0.05;
  const Mesh2D mesh = generate_wedge_channel(params);
  const SolverConfig config = shock_config();
  const FieldState field = solved(mesh, config);

  Functional func;  // density misfit over the outflow
  const double j0 = functional_value(field, mesh, func, config.gas);
  CHECK(j0 > 0.03);
  CHECK(j0 < 0.15);

  const AdjointResult adj = solve_adjoint(field, mesh, func, config);
  REQUIRE(adj.converged);
  CHECK(adj.linear_residual < 1e-8);
  for (const Vec4& w : adj.wstar) CHECK(std::isfinite(norm_inf(w)));

  // Gradient of J with respect to the inflow density (velocity and pressure
  // held fixed) against a central difference of two full nonlinear solves.
  const double grad = gradient_rho_inf(field, adj.wstar, mesh, config);
  const auto solve_j = [&](double rho) {
    SolverConfig c = config;
    c.freestream.rho = rho;
    c.freestream.mach = config.freestream.mach * std::sqrt(rho);
    SteadyResult out = solve_steady(
        uniform_field(mesh, freestream_state(c.freestream, c.gas)), mesh, c);
    REQUIRE(out.converged);
    return functional_value(out.field, mesh, func, c.gas);
  };
  const double eps = 1e-2;
  const double fd = (solve_j(1.0 + eps) - solve_j(1.0 - eps)) / (2.0 * eps);
  CHECK(grad == doctest::Approx(fd).epsilon(2e-3));

  // Numerical outflow trace against the closed form: within 5% where the
  // flow is smooth, shock-adjacent rows flagged and excluded.
  const auto rows = verify_outflow_bc(adj.wstar, field, mesh, func, config);
  CHECK(rows.size() >= 15);
  std::vector<double> smooth;
  for (const OutflowCheckRow& row : rows)
    if (!row.shock_flag) smooth.push_back(row.rel_err);
  REQUIRE(smooth.size() >= 10);
  std::sort(smooth.begin(), smooth.end());
  CHECK(smooth.back() < 0.05);
  CHECK(smooth[smooth.size() / 2] < 0.03);

  // Wall condition W* . n = 0 emerges discretely away from the corner
  // vertices, which carry a mixed balance with the inflow/outflow rows.
  double wmax = 0.0;
  for (const Vec4& w : adj.wstar) wmax = std::max(wmax, norm_inf(w));
  double pure_max = 0.0, corner_max = 0.0;
  for (const ScalarCheckRow& row :
       wall_adjoint_normal_residual(adj.wstar, mesh, BoundaryTag::slip_wall)) {
    if (vertex_tag_is_pure(mesh, row.vertex, BoundaryTag::slip_wall))
      pure_max = std::max(pure_max, row.abs_err);
    else
      corner_max = std::max(corner_max, row.abs_err);
  }
  CHECK(pure_max / wmax < 0.05);
  CHECK(corner_max / wmax < 1.0);  // reported, not small: mixed balance

  // The functional sits on the outflow itself, so the far-boundary
  // zero-trace check does not apply here.
  const OutflowZeroReport zero =
      outflow_right_boundary_zero_check(adj.wstar, mesh, func);
  CHECK(!zero.applicable);
  CHECK(!zero.note.empty());

  // Jump geography: the density jump set hugs the oblique shock, the
  // adjoint-density jump set stays off it away from the outflow.
  std::vector<double> rho_field(mesh.n_vertices()), w1(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    rho_field[v] = field[v].rho;
    w1[v] = adj.wstar[v][0];
  }
  const std::vector<int> rho_jumps = jump_detector(rho_field, mesh);
  const std::vector<int> w1_jumps = jump_detector(w1, mesh);
  std::vector<char> in_w1(mesh.edges.size(), 0);
  for (int e : w1_jumps) in_w1[e] = 1;
  const double tb = std::tan(39.314 * M_PI / 180.0);
  int shock_edges = 0, overlap = 0;
  for (int e : rho_jumps) {
    const double x = 0.5 * (mesh.vertices[mesh.edges[e].a][0] +
                            mesh.vertices[mesh.edges[e].b][0]);
    const double y = 0.5 * (mesh.vertices[mesh.edges[e].a][1] +
                            mesh.vertices[mesh.edges[e].b][1]);
    const double dist =
        std::fabs(y - (x - params.wedge_start) * tb) / std::sqrt(1.0 + tb * tb);
    if (dist < 3.0 * params.target_h && x > 2.0 && x < 2.9) {
      ++shock_edges;
      if (in_w1[e]) ++overlap;
    }
  }
  CHECK(shock_edges >= 30);
  CHECK(overlap < 0.15 * shock_edges);
}

TEST_CASE("wedge over ground: pressure signature, far outflow, descent step") {
  const Mesh2D mesh = ground_channel(0.05);
  const SolverConfig config = shock_config();
  const FieldState field = solved(mesh, config);

  Functional func;
  func.kind = FunctionalKind::ground_pressure_target;
  func.boundary = BoundaryTag::ground;
  func.p0 = config.freestream.p;
  const double j0 = functional_value(field, mesh, func, config.gas);
  CHECK(j0 > 0.6);
  CHECK(j0 < 1.0);

  const AdjointResult adj = solve_adjoint(field, mesh, func, config);
  REQUIRE(adj.converged);
  CHECK(adj.linear_residual < 1e-8);

  // Ground trace of the wall-normal momentum adjoint against the pressure
  // misfit: strong correlation along the whole signature, pointwise
  // agreement where neither the flow nor the adjoint trace jumps.
  const auto rows = ground_adjoint_check(adj.wstar, field, mesh, func, config,
                                         0.05);
  REQUIRE(rows.size() >= 30);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    CHECK(rows[k].x <= rows[k + 1].x);
  std::vector<double> numeric, analytic;
  int flagged = 0;
  double smooth_max = 0.0;
  for (const ScalarCheckRow& row : rows) {
    numeric.push_back(row.numeric);
    analytic.push_back(row.analytic);
    if (row.shock_flag)
      ++flagged;
    else
      smooth_max = std::max(smooth_max, row.rel_err);
  }
  CHECK(pearson(numeric, analytic) > 0.98);
  CHECK(flagged >= 2);  // shock foot and the outflow-corner fan
  CHECK(static_cast<int>(rows.size()) - flagged >= 25);
  CHECK(smooth_max < 0.13);  // tightens to 5% under refinement

  // The far outflow does not carry the functional, and its adjoint trace
  // decays toward zero under refinement (slowly: the corner fan leaks).
  const OutflowZeroReport zero =
      outflow_right_boundary_zero_check(adj.wstar, mesh, func);
  CHECK(zero.applicable);
  CHECK(zero.ratio < 0.2);
  const BlockVector silent(mesh.n_vertices(), Vec4{});
  CHECK(outflow_right_boundary_zero_check(silent, mesh, func).ratio == 0.0);

  // One descent step: project the raw gradient onto a smooth wall mode that
  // vanishes at the corner and the shock foot, displace, re-solve, and
  // compare the actual decrease with the first-order prediction.
  double predicted_raw = 0.0;
  const auto entries = shape_gradient(adj.wstar, field, mesh,
                                      BoundaryTag::slip_wall, 1e-4, config.gas,
                                      &predicted_raw);
  CHECK(predicted_raw <= 0.0);
  const auto mode = [](double x) {
    return x > 0.25 && x < 1.05
               ? std::pow(std::sin(M_PI * (x - 0.25) / 0.8), 2)
               : 0.0;
  };
  double g1 = 0.0;
  for (const ShapeGradientEntry& e : entries)
    g1 += boundary_weight(mesh, BoundaryTag::slip_wall, e.vertex) *
          e.gradient * mode(e.x);
  REQUIRE(std::fabs(g1) > 1e-6);
  const double lambda = 5e-4 / std::fabs(g1);
  const double predicted = -lambda * g1 * g1;

  Mesh2D moved;
  moved.vertices = mesh.vertices;
  moved.triangles = mesh.triangles;
  moved.boundary_edges = mesh.boundary_edges;
  for (const ShapeGradientEntry& e : entries) {
    const double alpha = -lambda * g1 * mode(e.x);
    moved.vertices[e.vertex][0] += alpha * mesh.boundary_vertex_normals[e.vertex][0];
    moved.vertices[e.vertex][1] += alpha * mesh.boundary_vertex_normals[e.vertex][1];
  }
  build_dual(moved);
  const FieldState refield = solved(moved, config);
  const double actual = functional_value(refield, moved, func, config.gas) - j0;
  CHECK(predicted < 0.0);
  CHECK(actual < 0.0);
  CHECK(actual / predicted > 0.8);
  CHECK(actual / predicted < 1.45);
}

TEST_CASE("shape gradient: zero adjoint, sign structure, discrete curvature") {
  WedgeChannelParams params;
  params.target_h = 0.1;
  const Mesh2D mesh = generate_wedge_channel(params);
  SolverConfig config;
  const FieldState field = solved(mesh, shock_config());

  // Without an adjoint there is nothing to descend along, but the geometry
  // report still carries the polyline curvature.
  double predicted = 1.0;
  const auto entries =
      shape_gradient(BlockVector(mesh.n_vertices(), Vec4{}), field, mesh,
                     BoundaryTag::slip_wall, 0.3, config.gas, &predicted);
  CHECK(predicted == 0.0);
  CHECK(entries.size() >= 25);
  bool saw_corner = false;
  for (const ShapeGradientEntry& e : entries) {
    CHECK(e.gradient == 0.0);
    CHECK(e.alpha == 0.0);
    if (std::fabs(e.x - params.wedge_start) < 1e-9 && e.y < 1e-9) {
      // At the ramp base the fluid-side angle narrows below 180 degrees: a
      // shallow valley, concave toward the fluid, so the signed curvature
      // is negative.
      saw_corner = true;
      CHECK(e.curvature < -0.5);
    } else {
      // Straight stretches of wall, including the ramp face, are flat.
      CHECK(std::fabs(e.curvature) < 1e-9);
    }
  }
  CHECK(saw_corner);

  // Channel-end vertices stay fixed: they share inflow/outflow tags.
  for (const ShapeGradientEntry& e : entries)
    if (e.x < 1e-9 || e.x > params.length - 1e-9) CHECK(e.alpha == 0.0);

  // The convex branch, on a hand-built strip whose floor rises to a crest
  // at (1, 0.15): the circle through the three floor vertices has its
  // center at (1, -3.2583), radius 3.4083, and the crest bulges into the
  // fluid, so its signed curvature is +1/radius.
  Mesh2D crest;
  crest.vertices = {{0.0, 0.0}, {1.0, 0.15}, {2.0, 0.0},
                    {0.0, 1.0}, {1.0, 1.0},  {2.0, 1.0}};
  crest.triangles = {{0, 1, 4}, {0, 4, 3}, {1, 2, 5}, {1, 5, 4}};
  crest.boundary_edges = {{0, 1, BoundaryTag::slip_wall},
                          {1, 2, BoundaryTag::slip_wall},
                          {2, 5, BoundaryTag::outflow_free},
                          {5, 4, BoundaryTag::slip_wall},
                          {4, 3, BoundaryTag::slip_wall},
                          {3, 0, BoundaryTag::inflow_freestream}};
  build_dual(crest);
  const FieldState crest_field =
      uniform_field(crest, freestream_state(config.freestream, config.gas));
  const double radius = std::hypot(1.0, 3.2583333333333333);
  for (const ShapeGradientEntry& e :
       shape_gradient(BlockVector(crest.n_vertices(), Vec4{}), crest_field,
                      crest, BoundaryTag::slip_wall, 0.1, config.gas, nullptr))
    if (e.vertex == 1)
      CHECK(e.curvature == doctest::Approx(1.0 / radius).epsilon(1e-9));

  // For any adjoint the predicted first-order change is a negative-definite
  // quadratic in the gradient, linear in the step length.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  BlockVector noise(mesh.n_vertices());
  for (auto& w : noise)
    w = Vec4{{unit(rng), unit(rng), unit(rng), unit(rng)}};
  double p1 = 0.0, p2 = 0.0;
  const auto e1 = shape_gradient(noise, field, mesh, BoundaryTag::slip_wall,
                                 0.2, config.gas, &p1);
  const auto e2 = shape_gradient(noise, field, mesh, BoundaryTag::slip_wall,
                                 0.4, config.gas, &p2);
  CHECK(p1 < 0.0);
  CHECK(p2 == doctest::Approx(2.0 * p1).epsilon(1e-12));
  for (std::size_t k = 0; k < e1.size(); ++k) {
    CHECK(e1[k].gradient == e2[k].gradient);
    CHECK(e2[k].alpha == doctest::Approx(2.0 * e1[k].alpha).epsilon(1e-12));
  }
}

TEST_CASE("jump detector: smooth fields stay empty, steps flag crossings") {
  const Mesh2D mesh = channel(0.0, 0.1);

  std::vector<double> constant(mesh.n_vertices(), 0.8);
  CHECK(jump_detector(constant, mesh).empty());

  std::vector<double> linear(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    linear[v] = mesh.vertices[v][0];
  CHECK(jump_detector(linear, mesh).empty());

  // A step between two mesh columns flags exactly the crossing edges.
  const double x0 = 1.52;
  std::vector<double> step(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    step[v] = mesh.vertices[v][0] < x0 ? 0.0 : 1.0;
  std::vector<int> expected;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const double xa = mesh.vertices[mesh.edges[e].a][0];
    const double xb = mesh.vertices[mesh.edges[e].b][0];
    if ((xa - x0) * (xb - x0) < 0.0) expected.push_back(static_cast<int>(e));
  }
  REQUIRE(!expected.empty());
  CHECK(jump_detector(step, mesh) == expected);
}
