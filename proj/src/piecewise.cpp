#include "adjflow/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adjflow {

// ---------------------------------------------------------------------------
// Poly

double Poly::eval(double x) const {
  double y = 0.0;
  for (std::size_t k = coef.size(); k-- > 0;) y = y * x + coef[k];
  return y;
}

Poly Poly::derivative() const {
  Poly d;
  if (coef.size() <= 1) return d;
  d.coef.resize(coef.size() - 1);
  for (std::size_t k = 1; k < coef.size(); ++k)
    d.coef[k - 1] = static_cast<double>(k) * coef[k];
  return d;
}

Poly Poly::antiderivative() const {
  Poly a;
  if (coef.empty()) return a;
  a.coef.resize(coef.size() + 1, 0.0);
  for (std::size_t k = 0; k < coef.size(); ++k)
    a.coef[k + 1] = coef[k] / static_cast<double>(k + 1);
  return a;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly c;
  c.coef.resize(std::max(a.coef.size(), b.coef.size()), 0.0);
  for (std::size_t k = 0; k < a.coef.size(); ++k) c.coef[k] += a.coef[k];
  for (std::size_t k = 0; k < b.coef.size(); ++k) c.coef[k] += b.coef[k];
  return c;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.coef.empty() || b.coef.empty()) return Poly{};
  const std::size_t deg = a.coef.size() + b.coef.size() - 2;
  if (deg > Poly::max_degree)
    throw std::invalid_argument("Poly: product degree exceeds cap of 8");
  Poly c;
  c.coef.resize(deg + 1, 0.0);
  for (std::size_t i = 0; i < a.coef.size(); ++i)
    for (std::size_t j = 0; j < b.coef.size(); ++j)
      c.coef[i + j] += a.coef[i] * b.coef[j];
  return c;
}

Poly operator*(double s, const Poly& a) {
  Poly c = a;
  for (double& v : c.coef) v *= s;
  return c;
}

// ---------------------------------------------------------------------------
// Table

double Table::eval(double x) const {
  if (xs.empty()) return 0.0;
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

namespace {

double eval_piece(const Piece& p, double x) {
  if (const Poly* poly = std::get_if<Poly>(&p)) return poly->eval(x);
  return std::get<Table>(p).eval(x);
}

/// Exact integral for polynomials, trapezoid (consistent with the linear
/// interpolant) for tables, over [a, b] with a <= b.
double integrate_piece(const Piece& p, double a, double b) {
  if (const Poly* poly = std::get_if<Poly>(&p)) {
    const Poly anti = poly->antiderivative();
    return anti.eval(b) - anti.eval(a);
  }
  const Table& t = std::get<Table>(p);
  if (t.xs.empty() || a >= b) return 0.0;
  // Integrate the piecewise-linear interpolant by splitting at its nodes.
  double sum = 0.0;
  double prev_x = a, prev_y = t.eval(a);
  for (std::size_t k = 0; k < t.xs.size(); ++k) {
    if (t.xs[k] <= a || t.xs[k] >= b) continue;
    sum += 0.5 * (prev_y + t.ys[k]) * (t.xs[k] - prev_x);
    prev_x = t.xs[k];
    prev_y = t.ys[k];
  }
  sum += 0.5 * (prev_y + t.eval(b)) * (b - prev_x);
  return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseFunction1D

PiecewiseFunction1D::PiecewiseFunction1D()
    : pieces_{Poly{}},
      domain_lo_(-std::numeric_limits<double>::infinity()),
      domain_hi_(std::numeric_limits<double>::infinity()) {}

PiecewiseFunction1D::PiecewiseFunction1D(std::vector<double> breakpoints,
                                         std::vector<Piece> pieces)
    : breakpoints_(std::move(breakpoints)),
      pieces_(std::move(pieces)),
      dirac_(breakpoints_.size(), 0.0),
      domain_lo_(-std::numeric_limits<double>::infinity()),
      domain_hi_(std::numeric_limits<double>::infinity()) {
  if (pieces_.size() != breakpoints_.size() + 1)
    throw std::invalid_argument("PiecewiseFunction1D: pieces must be breakpoints + 1");
  for (std::size_t k = 1; k < breakpoints_.size(); ++k)
    if (!(breakpoints_[k - 1] < breakpoints_[k]))
      throw std::invalid_argument("PiecewiseFunction1D: breakpoints must increase strictly");
}

PiecewiseFunction1D PiecewiseFunction1D::constant(double c) {
  Poly p;
  p.coef = {c};
  return PiecewiseFunction1D({}, {Piece{p}});
}

PiecewiseFunction1D PiecewiseFunction1D::step(double x0, double c_left, double c_right) {
  Poly l, r;
  l.coef = {c_left};
  r.coef = {c_right};
  return PiecewiseFunction1D({x0}, {Piece{l}, Piece{r}});
}

PiecewiseFunction1D PiecewiseFunction1D::polynomial(Poly p) {
  return PiecewiseFunction1D({}, {Piece{std::move(p)}});
}

void PiecewiseFunction1D::set_domain(double lo, double hi) {
  if (!(lo < hi))
    throw std::invalid_argument("PiecewiseFunction1D: empty domain");
  domain_lo_ = lo;
  domain_hi_ = hi;
}

bool PiecewiseFunction1D::is_breakpoint(double x) const {
  return std::binary_search(breakpoints_.begin(), breakpoints_.end(), x);
}

void PiecewiseFunction1D::set_dirac_weight(double x, double weight) {
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.end() || *it != x)
    throw std::invalid_argument("set_dirac_weight: x is not a breakpoint");
  dirac_[static_cast<std::size_t>(it - breakpoints_.begin())] = weight;
}

double PiecewiseFunction1D::dirac_weight_at(double x) const {
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.end() || *it != x) return 0.0;
  return dirac_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

int PiecewiseFunction1D::piece_index(double x) const {
  // Piece k lives on (b_{k-1}, b_k); x exactly at a breakpoint belongs to the
  // right piece here (eval returns the right limit by convention).
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return static_cast<int>(it - breakpoints_.begin());
}

double PiecewiseFunction1D::eval(double x) const {
  return eval_piece(pieces_[static_cast<std::size_t>(piece_index(x))], x);
}

double PiecewiseFunction1D::right_limit(double x) const { return eval(x); }

double PiecewiseFunction1D::left_limit(double x) const {
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it != breakpoints_.end() && *it == x) {
    const std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
    return eval_piece(pieces_[k], x);
  }
  return eval(x);
}

double PiecewiseFunction1D::integrate(double a, double b) const {
  if (a > b) return -integrate(b, a);
  double sum = 0.0;
  double left = a;
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    const double bp = breakpoints_[k];
    if (bp <= a) continue;
    if (bp >= b) break;
    sum += integrate_piece(pieces_[k], left, bp);
    sum += dirac_[k];  // Dirac mass strictly inside (a, b)
    left = bp;
  }
  sum += integrate_piece(pieces_[static_cast<std::size_t>(piece_index(left))],
                         left, b);
  return sum;
}

// ---------------------------------------------------------------------------
// Merged binary operations

PiecewiseFunction1D merge_binary(
    const PiecewiseFunction1D& a, const PiecewiseFunction1D& b,
    const std::function<Piece(const Piece&, const Piece&, double, double)>& op) {
  std::vector<double> bps;
  std::merge(a.breakpoints_.begin(), a.breakpoints_.end(),
             b.breakpoints_.begin(), b.breakpoints_.end(),
             std::back_inserter(bps));
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  std::vector<Piece> pieces;
  pieces.reserve(bps.size() + 1);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= bps.size(); ++k) {
    const double lo = (k == 0) ? -inf : bps[k - 1];
    const double hi = (k == bps.size()) ? inf : bps[k];
    // Sample point inside the piece selects the correct sub-piece of each input.
    const double mid = std::isinf(lo) ? (std::isinf(hi) ? 0.0 : hi - 1.0)
                                      : (std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi));
    const Piece& pa = a.pieces_[static_cast<std::size_t>(a.piece_index(mid))];
    const Piece& pb = b.pieces_[static_cast<std::size_t>(b.piece_index(mid))];
    pieces.push_back(op(pa, pb, lo, hi));
  }
  return PiecewiseFunction1D(std::move(bps), std::move(pieces));
}

namespace {

/// Union of table nodes restricted to (lo, hi), with finite endpoints added.
std::vector<double> union_nodes(const Piece& a, const Piece& b, double lo, double hi) {
  std::vector<double> xs;
  auto push = [&](const Piece& p) {
    if (const Table* t = std::get_if<Table>(&p))
      for (double x : t->xs)
        if (x > lo && x < hi) xs.push_back(x);
  };
  push(a);
  push(b);
  if (std::isfinite(lo)) xs.push_back(lo);
  if (std::isfinite(hi)) xs.push_back(hi);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() < 2) {
    // Degenerate sampling window; fall back to two probe points.
    const double base = xs.empty() ? 0.0 : xs.front();
    xs = {base, base + 1.0};
  }
  return xs;
}

Piece add_pieces(const Piece& a, const Piece& b, double lo, double hi) {
  const Poly* pa = std::get_if<Poly>(&a);
  const Poly* pb = std::get_if<Poly>(&b);
  if (pa && pb) return Piece{*pa + *pb};
  Table t;
  t.xs = union_nodes(a, b, lo, hi);
  for (double x : t.xs) t.ys.push_back(eval_piece(a, x) + eval_piece(b, x));
  return Piece{t};
}

Piece mul_pieces(const Piece& a, const Piece& b, double lo, double hi) {
  const Poly* pa = std::get_if<Poly>(&a);
  const Poly* pb = std::get_if<Poly>(&b);
  if (pa && pb) {
    const std::size_t da = pa->coef.empty() ? 0 : pa->coef.size() - 1;
    const std::size_t db = pb->coef.empty() ? 0 : pb->coef.size() - 1;
    if (da + db <= Poly::max_degree) return Piece{*pa * *pb};
  }
  Table t;
  t.xs = union_nodes(a, b, lo, hi);
  for (double x : t.xs) t.ys.push_back(eval_piece(a, x) * eval_piece(b, x));
  return Piece{t};
}

}  // namespace

PiecewiseFunction1D add(const PiecewiseFunction1D& a, const PiecewiseFunction1D& b) {
  PiecewiseFunction1D c = merge_binary(a, b, add_pieces);
  for (double bp : c.breakpoints()) {
    const double w = a.dirac_weight_at(bp) + b.dirac_weight_at(bp);
    if (w != 0.0) c.set_dirac_weight(bp, w);
  }
  return c;
}

PiecewiseFunction1D multiply(const PiecewiseFunction1D& a, const PiecewiseFunction1D& b) {
  return merge_binary(a, b, mul_pieces);
}

PiecewiseFunction1D scale(double s, const PiecewiseFunction1D& a) {
  std::vector<Piece> pieces;
  pieces.reserve(a.pieces().size());
  for (const Piece& p : a.pieces()) {
    if (const Poly* poly = std::get_if<Poly>(&p)) {
      pieces.push_back(Piece{s * *poly});
    } else {
      Table t = std::get<Table>(p);
      for (double& y : t.ys) y *= s;
      pieces.push_back(Piece{t});
    }
  }
  PiecewiseFunction1D c(a.breakpoints(), std::move(pieces));
  for (double bp : a.breakpoints()) {
    const double w = a.dirac_weight_at(bp);
    if (w != 0.0) c.set_dirac_weight(bp, s * w);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Extended calculus

double mean_value(const PiecewiseFunction1D& f, double x) {
  if (x < f.domain_lo() || x > f.domain_hi())
    throw std::out_of_range("mean_value: x outside domain");
  return 0.5 * (f.left_limit(x) + f.right_limit(x));
}

double jump(const PiecewiseFunction1D& f, double x) {
  return f.right_limit(x) - f.left_limit(x);
}

double volpert_ratio(const SmoothMap& f, double rho_minus, double rho_plus) {
  if (rho_plus != rho_minus)
    return (f.f(rho_plus) - f.f(rho_minus)) / (rho_plus - rho_minus);
  return f.df(rho_minus);
}

PiecewiseFunction1D extended_product_variation(const PiecewiseFunction1D& rho,
                                               const PiecewiseFunction1D& u,
                                               const PiecewiseFunction1D& drho,
                                               const PiecewiseFunction1D& du) {
  const auto& bps = rho.breakpoints();
  if (u.breakpoints() != bps || drho.breakpoints() != bps || du.breakpoints() != bps)
    throw std::invalid_argument(
        "extended_product_variation: all functions must share one breakpoint set");

  // Function part away from breakpoints: drho * u + rho * du.
  PiecewiseFunction1D smooth = add(multiply(drho, u), multiply(rho, du));

  // Dirac weights at each shared breakpoint use mean values of the factors.
  for (double bp : bps) {
    const double w = drho.dirac_weight_at(bp) * mean_value(u, bp) +
                     mean_value(rho, bp) * du.dirac_weight_at(bp);
    if (w != 0.0) smooth.set_dirac_weight(bp, w);
  }
  return smooth;
}

PiecewiseFunction1D extended_chain_variation(const SmoothMap& f,
                                             const PiecewiseFunction1D& rho,
                                             const PiecewiseFunction1D& drho) {
  if (rho.breakpoints() != drho.breakpoints())
    throw std::invalid_argument(
        "extended_chain_variation: rho and drho must share breakpoints");

  // Smooth part f'(rho(x)) * drho(x), tabulated per piece (the composition
  // f' o rho is generally not polynomial).
  std::vector<Piece> pieces;
  const auto& bps = rho.breakpoints();
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= bps.size(); ++k) {
    const double lo = (k == 0) ? -inf : bps[k - 1];
    const double hi = (k == bps.size()) ? inf : bps[k];
    const double a = std::isinf(lo) ? (std::isinf(hi) ? -1.0 : hi - 1.0) : lo;
    const double b = std::isinf(hi) ? a + 1.0 : hi;
    Table t;
    const int samples = 33;
    for (int s = 0; s < samples; ++s) {
      const double x = a + (b - a) * s / (samples - 1);
      t.xs.push_back(x);
      t.ys.push_back(f.df(rho.right_limit(x)) * drho.right_limit(x));
    }
    pieces.push_back(Piece{t});
  }
  PiecewiseFunction1D out(bps, std::move(pieces));

  for (double bp : bps) {
    const double w = drho.dirac_weight_at(bp);
    if (w != 0.0) {
      const double ratio = volpert_ratio(f, rho.left_limit(bp), rho.right_limit(bp));
      out.set_dirac_weight(bp, ratio * w);
    }
  }
  return out;
}

PiecewiseFunction1D shift_variation_apply(const PiecewiseFunction1D& rho,
                                          const std::vector<ShiftPoint>& shifts) {
  // Collect the box intervals, checking validity.
  struct Box {
    double lo, hi, height;
  };
  std::vector<Box> boxes;
  for (const ShiftPoint& s : shifts) {
    if (!rho.is_breakpoint(s.position))
      throw std::invalid_argument("shift_variation_apply: position is not a breakpoint");
    if (s.delta_a == 0.0) continue;
    const double j = jump(rho, s.position);
    if (s.delta_a > 0.0)
      boxes.push_back({s.position, s.position + s.delta_a, -j});
    else
      boxes.push_back({s.position + s.delta_a, s.position, +j});
  }
  std::sort(boxes.begin(), boxes.end(),
            [](const Box& a, const Box& b) { return a.lo < b.lo; });
  for (std::size_t k = 1; k < boxes.size(); ++k)
    if (boxes[k].lo < boxes[k - 1].hi)
      throw std::invalid_argument("shift_variation_apply: shifted intervals overlap");

  if (boxes.empty()) return PiecewiseFunction1D();  // zero function

  std::vector<double> bps;
  std::vector<Piece> pieces;
  Poly zero;
  pieces.push_back(Piece{zero});
  for (const Box& box : boxes) {
    bps.push_back(box.lo);
    Poly h;
    h.coef = {box.height};
    pieces.push_back(Piece{h});
    bps.push_back(box.hi);
    pieces.push_back(Piece{zero});
  }
  return PiecewiseFunction1D(std::move(bps), std::move(pieces));
}

}  // namespace adjflow
