#include "adjflow/burgers.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace adjflow {

Grid1D Grid1D::make(double x_min, double x_max, int n, double T, double cfl,
                    double u_max) {
  if (n < 4) throw std::invalid_argument("Grid1D: need at least 4 cells");
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw std::invalid_argument("Grid1D: cfl must lie in (0, 1]");
  Grid1D g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n = n;
  const double dt_target = cfl * g.dx() / std::max(u_max, 1e-12);
  g.n_steps = static_cast<int>(std::ceil(T / dt_target));
  g.dt = T / g.n_steps;
  return g;
}

void burgers_step(const std::vector<double>& u_prev, const Grid1D& grid,
                  std::vector<double>& u_next, std::vector<std::uint8_t>& s) {
  const int n = grid.n;
  const double r = grid.dt / grid.dx();
  u_next.resize(n + 1);
  s.assign(n + 1, 0);

  for (int i = 0; i <= n; ++i)
    if (std::abs(u_prev[i]) * grid.dt > grid.dx())
      throw std::runtime_error("burgers_step: CFL violated at node " +
                               std::to_string(i));

  for (int i = 1; i <= n; ++i)
    s[i] = (u_prev[i] + u_prev[i - 1] > 0.0) ? 1 : 0;

  u_next[0] = u_prev[0];
  u_next[n] = u_prev[n];
  for (int i = 1; i < n; ++i) {
    const double up = 0.5 * (u_prev[i] * u_prev[i] - u_prev[i - 1] * u_prev[i - 1]);
    const double dn = 0.5 * (u_prev[i + 1] * u_prev[i + 1] - u_prev[i] * u_prev[i]);
    u_next[i] = u_prev[i] - r * (s[i] * up + (1 - s[i + 1]) * dn);
  }
}

BurgersTrajectory run_forward(const std::function<double(double)>& u0,
                              const Grid1D& grid) {
  BurgersTrajectory traj;
  traj.grid = grid;
  traj.u.resize(grid.n_steps + 1);
  traj.s.resize(grid.n_steps);
  traj.u[0].resize(grid.n + 1);
  for (int i = 0; i <= grid.n; ++i) traj.u[0][i] = u0(grid.x(i));
  for (int m = 0; m < grid.n_steps; ++m)
    burgers_step(traj.u[m], grid, traj.u[m + 1], traj.s[m]);
  return traj;
}

double functional_J(const BurgersTrajectory& traj, const Region1D& region) {
  const Grid1D& g = traj.grid;
  const std::vector<double>& uM = traj.u.back();
  double sum = 0.0;
  for (int i = 0; i <= g.n; ++i)
    if (region.contains(g.x(i))) sum += uM[i] * uM[i];
  return 0.5 * sum * g.dx();
}

double functional_J_time_average(const BurgersTrajectory& traj) {
  const Grid1D& g = traj.grid;
  double sum = 0.0;
  for (int m = 0; m < g.n_steps; ++m)
    for (int i = 0; i <= g.n; ++i) sum += traj.u[m][i] * traj.u[m][i];
  return 0.5 * sum * g.dx() * g.dt / g.horizon();
}

BurgersAdjoint burgers_adjoint(const BurgersTrajectory& traj,
                               const Region1D& region, BurgersFunctional kind) {
  const Grid1D& g = traj.grid;
  const int n = g.n;
  const int M = g.n_steps;
  const double r = g.dt / g.dx();

  BurgersAdjoint adj;
  adj.levels.assign(M + 1, std::vector<double>(n + 1, 0.0));

  if (kind == BurgersFunctional::terminal_region) {
    for (int i = 0; i <= n; ++i)
      if (region.contains(g.x(i))) adj.levels[M][i] = traj.u[M][i];
  }
  // time_average: u*^M = 0 by the left-endpoint quadrature.

  for (int m = M - 1; m >= 0; --m) {
    const std::vector<double>& u = traj.u[m];
    const std::vector<std::uint8_t>& s = traj.s[m];
    const std::vector<double>& next = adj.levels[m + 1];
    std::vector<double>& cur = adj.levels[m];

    // Exact transpose column-by-column: interior rows are the scheme stencil,
    // boundary rows are the identity.
    for (int j = 0; j <= n; ++j) {
      double acc;
      if (j >= 1 && j <= n - 1)
        acc = next[j] * (1.0 - r * u[j] * (s[j] - 1.0 + s[j + 1]));
      else
        acc = next[j];
      if (j + 1 <= n - 1) acc += r * s[j + 1] * u[j] * next[j + 1];
      if (j - 1 >= 1) acc -= r * (1.0 - s[j]) * u[j] * next[j - 1];
      cur[j] = acc;
    }

    if (kind == BurgersFunctional::time_average) {
      // Source convention of the transport form d_t u* + mean(u) d_x u* =
      // mean(u)/T with u*(T)=0: integrating backward subtracts the source, so
      // u* <= 0 for rightward flow and the time-average sensitivity is
      // -sum u*^0 du0 dx.
      const double w = g.dt / g.horizon();
      for (int j = 0; j <= n; ++j) cur[j] -= w * u[j];
    }
  }
  return adj;
}

std::vector<std::vector<double>> run_tangent(const BurgersTrajectory& traj,
                                             const std::vector<double>& du0) {
  const Grid1D& g = traj.grid;
  const int n = g.n;
  if (static_cast<int>(du0.size()) != n + 1)
    throw std::invalid_argument("run_tangent: perturbation size mismatch");
  const double r = g.dt / g.dx();

  std::vector<std::vector<double>> du(g.n_steps + 1);
  du[0] = du0;
  for (int m = 0; m < g.n_steps; ++m) {
    const std::vector<double>& u = traj.u[m];
    const std::vector<std::uint8_t>& s = traj.s[m];
    const std::vector<double>& prev = du[m];
    std::vector<double>& next = du[m + 1];
    next.resize(n + 1);
    next[0] = prev[0];
    next[n] = prev[n];
    for (int i = 1; i < n; ++i) {
      const double up = u[i] * prev[i] - u[i - 1] * prev[i - 1];
      const double dn = u[i + 1] * prev[i + 1] - u[i] * prev[i];
      next[i] = prev[i] - r * (s[i] * up + (1 - s[i + 1]) * dn);
    }
  }
  return du;
}

double gradient_J(const BurgersTrajectory& traj, const BurgersAdjoint& adj,
                  const std::vector<double>& du0_da) {
  const Grid1D& g = traj.grid;
  if (du0_da.size() != adj.levels[0].size())
    throw std::invalid_argument("gradient_J: sensitivity size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < du0_da.size(); ++i)
    sum += adj.levels[0][i] * du0_da[i];
  return sum * g.dx();
}

double analytic_adjoint_oracle(BurgersCase case_id, double x, double t,
                               double T, double a) {
  const double c = 1.0 + a;        // left state / characteristic slope
  const double sigma = 0.5 * c;    // shock speed
  const double xs = sigma * t;     // shock position at time t

  (void)xs;
  if (case_id == BurgersCase::riemann_decay) {
    // Terminal data u*|_T = u(.,T): value c left of the shock, 0 right of it,
    // the mean c/2 exactly on it. Backward transport at speed mean(u) gives
    // three bands separated by the slope-c characteristic through the
    // terminal shock point and the vertical one through the same point; the
    // shock line carries c/2 into the shadow region between them.
    if (x < c * (t - 0.5 * T)) return c;
    if (x <= sigma * T) return 0.5 * c;
    return 0.0;
  }

  // stationary_average: zero terminal data, source mean(u)/T accumulated
  // backward along the path, which rides the shock line once it meets it.
  if (x >= sigma * T) return 0.0;
  if (x > c * (t - 0.5 * T)) return -(c * T - 2.0 * x) / (2.0 * T);
  return -c * (T - t) / T;
}

void write_burgers_csv(const std::string& path, const BurgersTrajectory& traj,
                       const BurgersAdjoint& adj,
                       const std::vector<std::vector<double>>& tangent) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_burgers_csv: cannot open " + path);
  std::fprintf(f, "x,u_T,u_star_0,u_star_T,du_da\n");
  const Grid1D& g = traj.grid;
  for (int i = 0; i <= g.n; ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.x(i),
                 traj.u.back()[i], adj.levels[0][i], adj.levels.back()[i],
                 tangent.back()[i]);
  std::fclose(f);
}

}  // namespace adjflow
