#include "adjflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace adjflow {

namespace {

// Runs f(begin, end) over [0, n) on the configured worker threads. Chunks are
// contiguous and results must be written to disjoint slots, which keeps the
// output independent of the thread count.
template <class F>
void parallel_for(int n, F&& f) {
  const int nt = solver_thread_count();
  if (nt <= 1 || n < 4 * nt) {
    f(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(nt);
  std::vector<std::thread> pool;
  const int chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, t, lo, hi] {
      try {
        f(lo, hi);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double limited_slope(double centered, double upwind, double nodal,
                     LimiterKind kind) {
  if (centered > 0.0 && upwind > 0.0 && nodal > 0.0) {
    const double lo = std::min({centered, upwind, nodal});
    if (kind == LimiterKind::minmod) return lo;
    return std::min(2.0 * lo, std::max({centered, upwind, nodal}));
  }
  if (centered < 0.0 && upwind < 0.0 && nodal < 0.0)
    return -limited_slope(-centered, -upwind, -nodal, kind);
  return 0.0;
}

}  // namespace

ConservativeState freestream_state(const FreeStream& fs, const GasModel& gas) {
  const double c = std::sqrt(gas.gamma * fs.p / fs.rho);
  const double angle = fs.angle_deg * M_PI / 180.0;
  return ConservativeState::from_primitive(fs.rho, fs.mach * c * std::cos(angle),
                                           fs.mach * c * std::sin(angle), fs.p,
                                           gas);
}

FieldState uniform_field(const Mesh2D& mesh, const ConservativeState& w) {
  return FieldState(mesh.n_vertices(), w);
}

void check_field(const FieldState& field, const GasModel& gas) {
  for (std::size_t i = 0; i < field.size(); ++i)
    if (!is_valid_state(field[i], gas))
      throw std::runtime_error("invalid state at vertex " + std::to_string(i) +
                               ": rho=" + std::to_string(field[i].rho));
}

int solver_thread_count() {
  static const int cached = [] {
    const char* env = std::getenv("ADJ_EULER_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
  }();
  return cached;
}

Vec4 roe_flux(const ConservativeState& wi, const ConservativeState& wj,
              double nx, double ny, const SolverConfig& config) {
  // Canonical orientation: evaluate every interface in one direction only so
  // the reversed call is the exact negation.
  if (nx < 0.0 || (nx == 0.0 && ny < 0.0))
    return -roe_flux(wj, wi, -nx, -ny, config);
  const Mat4 dissipation = abs_jacobian(roe_average(wi, wj, config.gas), nx, ny,
                                        config.gas, config.entropy_eps);
  Vec4 flux = 0.5 * (flux_normal(wi, nx, ny, config.gas) +
                     flux_normal(wj, nx, ny, config.gas));
  flux += 0.5 * (dissipation * (wi.as_vec() - wj.as_vec()));
  return flux;
}

Vec4 boundary_flux(const ConservativeState& wi, double nx, double ny,
                   BoundaryTag tag, const SolverConfig& config) {
  switch (tag) {
    case BoundaryTag::slip_wall:
    case BoundaryTag::ground: {
      const double p = pressure(wi, config.gas);
      return Vec4{{0.0, p * nx, p * ny, 0.0}};
    }
    case BoundaryTag::inflow_freestream: {
      const auto [a_plus, a_minus] = split_jacobians(
          wi, nx, ny, config.gas, config.steger, config.entropy_eps);
      const ConservativeState winf =
          freestream_state(config.freestream, config.gas);
      return a_plus * wi.as_vec() + a_minus * winf.as_vec();
    }
    case BoundaryTag::outflow_free:
      return flux_normal(wi, nx, ny, config.gas);
  }
  return Vec4{};
}

MusclGradients compute_gradients(const FieldState& field, const Mesh2D& mesh) {
  MusclGradients g;
  g.triangle.resize(mesh.n_triangles());
  g.nodal.resize(mesh.n_vertices());

  parallel_for(mesh.n_triangles(), [&](int lo, int hi) {
    for (int t = lo; t < hi; ++t) {
      const auto& T = mesh.triangles[t];
      const auto& p0 = mesh.vertices[T[0]];
      const auto& p1 = mesh.vertices[T[1]];
      const auto& p2 = mesh.vertices[T[2]];
      const double area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                           (p1[1] - p0[1]) * (p2[0] - p0[0]);
      Vec4 ddx, ddy;
      for (int k = 0; k < 3; ++k) {
        const auto& pa = mesh.vertices[T[(k + 1) % 3]];
        const auto& pb = mesh.vertices[T[(k + 2) % 3]];
        // gradient of the P1 basis function of vertex T[k]
        const double bx = (pa[1] - pb[1]) / area2;
        const double by = (pb[0] - pa[0]) / area2;
        const Vec4 w = field[T[k]].as_vec();
        ddx += bx * w;
        ddy += by * w;
      }
      g.triangle[t] = {ddx, ddy};
    }
  });

  parallel_for(mesh.n_vertices(), [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      Vec4 bx, by;
      for (int j : mesh.neighbors[i]) {
        const double dx = mesh.vertices[j][0] - mesh.vertices[i][0];
        const double dy = mesh.vertices[j][1] - mesh.vertices[i][1];
        const Vec4 dw = field[j].as_vec() - field[i].as_vec();
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        bx += dx * dw;
        by += dy * dw;
      }
      const double det = sxx * syy - sxy * sxy;
      if (std::fabs(det) < 1e-300) {
        g.nodal[i] = {Vec4{}, Vec4{}};
        continue;
      }
      g.nodal[i] = {(syy * bx - sxy * by) * (1.0 / det),
                    (sxx * by - sxy * bx) * (1.0 / det)};
    }
  });
  return g;
}

std::pair<ConservativeState, ConservativeState> muscl_extrapolate(
    int edge, const FieldState& field, const MusclGradients& grads,
    const Mesh2D& mesh, const SolverConfig& config, int* fallbacks) {
  const DualEdge& e = mesh.edges[edge];
  const double dx = mesh.vertices[e.b][0] - mesh.vertices[e.a][0];
  const double dy = mesh.vertices[e.b][1] - mesh.vertices[e.a][1];
  const Vec4 wa = field[e.a].as_vec(), wb = field[e.b].as_vec();

  auto extrapolate = [&](const Vec4& w, const Vec4& centered, int upwind_tri,
                         int vertex, double ex, double ey) {
    Vec4 out = w;
    for (int c = 0; c < 4; ++c) {
      const double along_up = grads.triangle[upwind_tri][0][c] * ex +
                              grads.triangle[upwind_tri][1][c] * ey;
      const double upwind = 2.0 * along_up - centered[c];
      const double nodal = grads.nodal[vertex][0][c] * ex +
                           grads.nodal[vertex][1][c] * ey;
      out[c] += 0.5 * limited_slope(centered[c], upwind, nodal, config.limiter);
    }
    return out;
  };
  const Vec4 va = extrapolate(wa, wb - wa, e.upwind_a, e.a, dx, dy);
  const Vec4 vb = extrapolate(wb, wa - wb, e.upwind_b, e.b, -dx, -dy);
  ConservativeState sa = ConservativeState::from_vec(va);
  ConservativeState sb = ConservativeState::from_vec(vb);
  if (!is_valid_state(sa, config.gas) || !is_valid_state(sb, config.gas)) {
    if (fallbacks) ++*fallbacks;
    return {field[e.a], field[e.b]};
  }
  return {sa, sb};
}

BlockVector residual(const FieldState& field, const Mesh2D& mesh,
                     const SolverConfig& config, int* muscl_fallbacks) {
  if (static_cast<int>(field.size()) != mesh.n_vertices())
    throw std::invalid_argument("residual: field size does not match mesh");
  const int ne = static_cast<int>(mesh.edges.size());

  MusclGradients grads;
  if (config.muscl_enabled) grads = compute_gradients(field, mesh);

  const int nt = solver_thread_count();
  std::vector<int> fallback_count(nt, 0);
  std::vector<Vec4> edge_flux(ne);
  parallel_for(ne, [&](int lo, int hi) {
    const int slot = nt <= 1 ? 0 : std::min(nt - 1, lo / std::max(1, (ne + nt - 1) / nt));
    for (int e = lo; e < hi; ++e) {
      try {
        if (config.muscl_enabled) {
          auto [wij, wji] = muscl_extrapolate(e, field, grads, mesh, config,
                                              &fallback_count[slot]);
          edge_flux[e] =
              roe_flux(wij, wji, mesh.edges[e].nx, mesh.edges[e].ny, config);
        } else {
          edge_flux[e] =
              roe_flux(field[mesh.edges[e].a], field[mesh.edges[e].b],
                       mesh.edges[e].nx, mesh.edges[e].ny, config);
        }
      } catch (const std::exception& err) {
        throw std::runtime_error(
            "residual: invalid state at edge (" +
            std::to_string(mesh.edges[e].a) + "," +
            std::to_string(mesh.edges[e].b) + "): " + err.what());
      }
    }
  });
  if (muscl_fallbacks)
    for (int c : fallback_count) *muscl_fallbacks += c;

  BlockVector res(mesh.n_vertices());
  parallel_for(mesh.n_vertices(), [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      Vec4 acc;
      for (int signed_e : mesh.incident_edges[i]) {
        if (signed_e > 0)
          acc += edge_flux[signed_e - 1];
        else
          acc -= edge_flux[-signed_e - 1];
      }
      for (const BoundaryPiece& p : mesh.boundary_pieces[i])
        acc += boundary_flux(field[i], p.nx, p.ny, p.tag, config);
      res[i] = acc;
    }
  });
  return res;
}

std::vector<double> local_time_steps(const FieldState& field, const Mesh2D& mesh,
                                     const SolverConfig& config) {
  std::vector<double> dt(mesh.n_vertices());
  parallel_for(mesh.n_vertices(), [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const Primitives prim = primitives(field[i], config.gas);
      double wave_sum = 0.0;
      auto add = [&](double nx, double ny) {
        const double len = std::hypot(nx, ny);
        if (len == 0.0) return;
        wave_sum +=
            std::fabs(prim.u * nx + prim.v * ny) + prim.c * len;
      };
      for (int signed_e : mesh.incident_edges[i]) {
        const DualEdge& e = mesh.edges[std::abs(signed_e) - 1];
        add(e.nx, e.ny);
      }
      for (const BoundaryPiece& p : mesh.boundary_pieces[i]) add(p.nx, p.ny);
      dt[i] = config.cfl * mesh.cell_volumes[i] / std::max(wave_sum, 1e-300);
    }
  });
  return dt;
}

FieldState ssp_rk2_step(const FieldState& field, const Mesh2D& mesh,
                        const SolverConfig& config, std::vector<double> dt) {
  auto valid = [&](const FieldState& f) {
    for (const ConservativeState& w : f)
      if (!is_valid_state(w, config.gas)) return false;
    return true;
  };
  for (int attempt = 0; attempt <= 5; ++attempt) {
    try {
      const BlockVector r0 = residual(field, mesh, config);
      FieldState stage(field.size());
      for (std::size_t i = 0; i < field.size(); ++i)
        stage[i] = ConservativeState::from_vec(
            field[i].as_vec() - (dt[i] / mesh.cell_volumes[i]) * r0[i]);
      if (valid(stage)) {
        const BlockVector r1 = residual(stage, mesh, config);
        FieldState next(field.size());
        for (std::size_t i = 0; i < field.size(); ++i)
          next[i] = ConservativeState::from_vec(
              0.5 * field[i].as_vec() + 0.5 * stage[i].as_vec() -
              0.5 * (dt[i] / mesh.cell_volumes[i]) * r1[i]);
        if (valid(next)) return next;
      }
    } catch (const std::runtime_error&) {
      // invalid intermediate state inside a flux evaluation: treat as a
      // rejected stage and retry with smaller steps
    }
    for (double& d : dt) d *= 0.5;
  }
  throw std::runtime_error(
      "ssp_rk2_step: no valid state after 5 time-step reductions");
}

void assemble_first_order_jacobian(const FieldState& field, const Mesh2D& mesh,
                                   const SolverConfig& config,
                                   BlockSparseMatrix& out) {
  out.set_zero();
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    const DualEdge& de = mesh.edges[e];
    const ConservativeState& wa = field[de.a];
    const ConservativeState& wb = field[de.b];
    const Mat4 dissipation = abs_jacobian(roe_average(wa, wb, config.gas),
                                          de.nx, de.ny, config.gas,
                                          config.entropy_eps);
    const Mat4 d_wa =
        0.5 * (flux_jacobian_normal(wa, de.nx, de.ny, config.gas) + dissipation);
    const Mat4 d_wb =
        0.5 * (flux_jacobian_normal(wb, de.nx, de.ny, config.gas) - dissipation);
    out.diag(de.a) += d_wa;
    out.off(e, de.a) += d_wb;
    out.diag(de.b) -= d_wb;
    out.off(e, de.b) -= d_wa;
  }
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    for (const BoundaryPiece& p : mesh.boundary_pieces[i]) {
      switch (p.tag) {
        case BoundaryTag::slip_wall:
        case BoundaryTag::ground: {
          const Vec4 dp = pressure_jacobian(field[i], config.gas);
          Mat4 m;
          for (int c = 0; c < 4; ++c) {
            m(1, c) = p.nx * dp[c];
            m(2, c) = p.ny * dp[c];
          }
          out.diag(i) += m;
          break;
        }
        case BoundaryTag::inflow_freestream:
          out.diag(i) += split_jacobians(field[i], p.nx, p.ny, config.gas,
                                         config.steger, config.entropy_eps)
                             .first;
          break;
        case BoundaryTag::outflow_free:
          out.diag(i) +=
              flux_jacobian_normal(field[i], p.nx, p.ny, config.gas);
          break;
      }
    }
  }
}

FieldState implicit_step(const FieldState& field, const Mesh2D& mesh,
                         const SolverConfig& config, double& io_cfl) {
  const BlockVector res = residual(field, mesh, config);
  BlockVector rhs(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) rhs[i] = -res[i];

  BlockSparseMatrix jac(mesh);
  assemble_first_order_jacobian(field, mesh, config, jac);

  SolverConfig dt_config = config;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    dt_config.cfl = io_cfl;
    const std::vector<double> dt = local_time_steps(field, mesh, dt_config);
    BlockSparseMatrix system = jac;
    for (int i = 0; i < mesh.n_vertices(); ++i) {
      const double lumped = mesh.cell_volumes[i] / dt[i];
      for (int c = 0; c < 4; ++c) system.diag(i)(c, c) += lumped;
    }
    BlockVector delta(rhs.size(), Vec4{});
    const GmresResult lin = gmres_solve(system, rhs, delta);
    if (lin.converged) {
      FieldState next(field.size());
      bool ok = true;
      for (std::size_t i = 0; i < field.size(); ++i) {
        next[i] = ConservativeState::from_vec(field[i].as_vec() + delta[i]);
        ok = ok && is_valid_state(next[i], config.gas);
      }
      if (ok) return next;
    }
    io_cfl *= 0.25;
  }
  throw std::runtime_error(
      "implicit_step: stalled after 5 CFL reductions (cfl=" +
      std::to_string(io_cfl) + ")");
}

namespace {

ConvergenceEntry residual_entry(const BlockVector& res, const Mesh2D& mesh,
                                int step, double cfl) {
  ConvergenceEntry entry;
  entry.step = step;
  entry.cfl = cfl;
  for (int i = 0; i < mesh.n_vertices(); ++i)
    for (int c = 0; c < 4; ++c) {
      const double r = std::fabs(res[i][c]) / mesh.cell_volumes[i];
      entry.by_equation[c] = std::max(entry.by_equation[c], r);
      entry.residual_inf = std::max(entry.residual_inf, r);
    }
  return entry;
}

}  // namespace

SteadyResult solve_steady(FieldState initial, const Mesh2D& mesh,
                          const SolverConfig& config) {
  SteadyResult result;
  result.field = std::move(initial);
  check_field(result.field, config.gas);

  double cfl = config.cfl;
  BlockVector res = residual(result.field, mesh, config);
  result.log.push_back(residual_entry(res, mesh, 0, cfl));
  const double reference = std::max(result.log.front().residual_inf, 1e-300);
  if (result.log.front().residual_inf < 1e-13) {
    result.converged = true;
    return result;
  }

  for (int step = 1; step <= config.max_steps; ++step) {
    const double before = result.log.back().residual_inf;
    if (config.scheme == TimeScheme::explicit_rk2) {
      result.field = ssp_rk2_step(result.field, mesh, config,
                                  local_time_steps(result.field, mesh, config));
    } else {
      result.field = implicit_step(result.field, mesh, config, cfl);
    }
    res = residual(result.field, mesh, config);
    result.log.push_back(residual_entry(res, mesh, step, cfl));
    const double now = result.log.back().residual_inf;
    if (config.scheme == TimeScheme::implicit_euler) {
      // Switched evolution relaxation: trust the linearization only while
      // the nonlinear residual keeps shrinking.
      cfl = now <= before ? std::min(cfl * config.cfl_growth, config.cfl_max)
                          : std::max(0.5 * cfl, config.cfl);
    }
    if (now < config.convergence_tol * reference || now < 1e-13) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace adjflow
