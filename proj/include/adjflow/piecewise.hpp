// Algebra of piecewise-smooth 1D functions with jump discontinuities and
// symbolic Dirac weights: mean values, jumps, Volpert ratios, product and
// chain rules that stay valid across shocks, and box-approximated
// shift-variations.
#ifndef ADJFLOW_PIECEWISE_HPP_
#define ADJFLOW_PIECEWISE_HPP_

#include <functional>
#include <variant>
#include <vector>

namespace adjflow {

/// Polynomial piece, coefficients in ascending order; degree capped at 8 so
/// the closed algebra stays exact to rounding.
struct Poly {
  static constexpr int max_degree = 8;
  std::vector<double> coef;  // coef[k] multiplies x^k; empty means zero

  double eval(double x) const;
  Poly derivative() const;
  /// Antiderivative with zero constant term.
  Poly antiderivative() const;
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);  // throws if degree would exceed cap
Poly operator*(double s, const Poly& a);

/// Tabulated fallback piece: sorted sample nodes with linear interpolation.
struct Table {
  std::vector<double> xs;
  std::vector<double> ys;

  double eval(double x) const;  // clamped linear interpolation
};

using Piece = std::variant<Poly, Table>;

/// Piecewise-smooth function on (domain_lo, domain_hi): pieces.size() equals
/// breakpoints.size() + 1, piece k living on (b_{k-1}, b_k); dirac[k] is the
/// symbolic weight of the Dirac mass sitting at breakpoints[k].
class PiecewiseFunction1D {
 public:
  PiecewiseFunction1D();  // identically zero on all of R
  PiecewiseFunction1D(std::vector<double> breakpoints, std::vector<Piece> pieces);

  static PiecewiseFunction1D constant(double c);
  /// c_left + (c_right - c_left) * H(x - x0), i.e. a single jump at x0.
  static PiecewiseFunction1D step(double x0, double c_left, double c_right);
  static PiecewiseFunction1D polynomial(Poly p);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<double>& dirac_weights() const { return dirac_; }

  void set_domain(double lo, double hi);
  void set_dirac_weight(double x, double weight);  // x must be a breakpoint
  double dirac_weight_at(double x) const;          // 0 when x is not a breakpoint

  bool is_breakpoint(double x) const;

  /// Value at a non-breakpoint x; at a breakpoint returns the right limit.
  double eval(double x) const;
  double left_limit(double x) const;
  double right_limit(double x) const;

  /// Integral of the function part over [a, b] plus the weights of all Dirac
  /// masses inside (a, b); exact for polynomial pieces.
  double integrate(double a, double b) const;

  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }

 private:
  friend PiecewiseFunction1D merge_binary(
      const PiecewiseFunction1D& a, const PiecewiseFunction1D& b,
      const std::function<Piece(const Piece&, const Piece&, double, double)>& op);

  std::vector<double> breakpoints_;
  std::vector<Piece> pieces_;
  std::vector<double> dirac_;  // one weight per breakpoint
  double domain_lo_, domain_hi_;

  int piece_index(double x) const;  // index of the piece left of the first breakpoint > x
};

/// Pointwise sum / product on the merged breakpoint partition. Dirac weights
/// add for sums; products of functions carrying Dirac masses are not defined
/// here (use extended_product_variation), so both add and multiply combine
/// only the function parts and `add` alone merges Dirac weights.
PiecewiseFunction1D add(const PiecewiseFunction1D& a, const PiecewiseFunction1D& b);
PiecewiseFunction1D multiply(const PiecewiseFunction1D& a, const PiecewiseFunction1D& b);
PiecewiseFunction1D scale(double s, const PiecewiseFunction1D& a);

/// Mean value 0.5 * (f(x+) + f(x-)); equals f(x) at smooth points.
/// Throws std::out_of_range when x lies outside the declared domain.
double mean_value(const PiecewiseFunction1D& f, double x);

/// Jump f(x+) - f(x-); zero at smooth points.
double jump(const PiecewiseFunction1D& f, double x);

/// Smooth scalar map with its derivative, for Volpert ratios and chain rules.
struct SmoothMap {
  std::function<double(double)> f;
  std::function<double(double)> df;
};

/// [f(rho)] / [rho] across a jump, f'(rho) when the two values coincide.
double volpert_ratio(const SmoothMap& f, double rho_minus, double rho_plus);

/// Variation of the product rho*u under variations (drho, du) that may carry
/// Dirac masses at shared breakpoints: delta(rho u) = (drho) mean(u) +
/// mean(rho) du, pointwise away from breakpoints and weight-wise at them.
/// All four functions must share one breakpoint set.
PiecewiseFunction1D extended_product_variation(const PiecewiseFunction1D& rho,
                                               const PiecewiseFunction1D& u,
                                               const PiecewiseFunction1D& drho,
                                               const PiecewiseFunction1D& du);

/// Variation of f(rho) under drho: smooth part f'(rho) drho, Dirac weights
/// scaled by the Volpert ratio of f across each jump of rho. Polynomial
/// pieces compose exactly while the degree cap allows, else fall back to
/// tabulated pieces.
PiecewiseFunction1D extended_chain_variation(const SmoothMap& f,
                                             const PiecewiseFunction1D& rho,
                                             const PiecewiseFunction1D& drho);

/// One shifted discontinuity: position must be a breakpoint of the base
/// function; `jump` caches [rho] there; delta_a is the displacement.
struct ShiftPoint {
  double position;
  double jump;
  double delta_a;
};

/// Base function plus the discontinuity shifts applied to it.
struct ShiftVariation {
  PiecewiseFunction1D smooth_part;  // no Dirac weights
  std::vector<ShiftPoint> shift_points;
};

/// Box approximation of the Dirac part of a variation that moves each
/// discontinuity x_s by delta_a: height -[rho] on (x_s, x_s + delta_a) for
/// positive delta_a, +[rho] on (x_s + delta_a, x_s) for negative delta_a.
/// The integral is -[rho] * delta_a either way. Throws on overlapping
/// shifted intervals or on a position that is not a breakpoint.
PiecewiseFunction1D shift_variation_apply(const PiecewiseFunction1D& rho,
                                          const std::vector<ShiftPoint>& shifts);

}  // namespace adjflow

#endif  // ADJFLOW_PIECEWISE_HPP_
