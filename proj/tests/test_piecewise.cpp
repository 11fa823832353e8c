// Extended-calculus property tests: mean values, jumps, Volpert ratios,
// product/chain variations across shocks, shift-variation boxes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "adjflow/piecewise.hpp"

using namespace adjflow;

namespace {

std::mt19937 rng(914207u);

SmoothMap half_square() {
  return {[](double r) { return 0.5 * r * r; }, [](double r) { return r; }};
}

SmoothMap reciprocal() {
  return {[](double r) { return 1.0 / r; }, [](double r) { return -1.0 / (r * r); }};
}

}  // namespace

TEST_CASE("mean_value: heaviside, smooth point, jump, domain check") {
  const PiecewiseFunction1D h = PiecewiseFunction1D::step(0.0, 0.0, 1.0);
  CHECK(mean_value(h, 0.0) == 0.5);

  Poly sq;
  sq.coef = {0.0, 0.0, 1.0};  // x^2
  const PiecewiseFunction1D f = PiecewiseFunction1D::polynomial(sq);
  CHECK(mean_value(f, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

  const PiecewiseFunction1D g = PiecewiseFunction1D::step(2.5, 2.0, 4.0);
  CHECK(mean_value(g, 2.5) == 3.0);

  PiecewiseFunction1D bounded = PiecewiseFunction1D::constant(1.0);
  bounded.set_domain(-1.0, 1.0);
  CHECK_THROWS_AS(mean_value(bounded, 2.0), std::out_of_range);
}

TEST_CASE("jump: heaviside, smooth point, general step") {
  CHECK(jump(PiecewiseFunction1D::step(0.0, 0.0, 1.0), 0.0) == 1.0);
  Poly lin;
  lin.coef = {1.0, 2.0};
  CHECK(jump(PiecewiseFunction1D::polynomial(lin), 0.3) == 0.0);
  CHECK(jump(PiecewiseFunction1D::step(1.0, 2.0, 4.0), 1.0) == 2.0);
}

TEST_CASE("volpert_ratio: burgers flux, reciprocal, regular branch") {
  CHECK(volpert_ratio(half_square(), 1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(volpert_ratio(reciprocal(), 2.0, 4.0) == doctest::Approx(-0.125).epsilon(1e-15));
  SmoothMap sine{[](double r) { return std::sin(r); },
                 [](double r) { return std::cos(r); }};
  CHECK(volpert_ratio(sine, 2.0, 2.0) == std::cos(2.0));

  // Continuity of the two branches: volpert(f, a, a+h) - f'(a) = O(h).
  for (double h : {1e-2, 1e-3, 1e-4})
    CHECK(std::abs(volpert_ratio(half_square(), 1.5, 1.5 + h) - 1.5) <= h);
}

TEST_CASE("reciprocal mean identity holds across arbitrary jumps") {
  std::uniform_real_distribution<double> d(0.1, 10.0);
  for (int t = 0; t < 200; ++t) {
    const double rm = d(rng), rp = d(rng);
    const double lhs = volpert_ratio(reciprocal(), rm, rp);
    const double mean_inv = 0.5 * (1.0 / rm + 1.0 / rp);
    const double mean_rho = 0.5 * (rm + rp);
    CHECK(std::abs(lhs + mean_inv / mean_rho) <= 1e-12 * std::abs(lhs));
  }
}

TEST_CASE("volpert ratio of the burgers flux equals the arithmetic mean") {
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const double rm = d(rng), rp = d(rng);
    const double want = 0.5 * (rm + rp);
    const double got = (rm == rp) ? volpert_ratio(half_square(), rm, rp)
                                  : volpert_ratio(half_square(), rm, rp);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("extended product variation cancels the dirac mass when [rho u] = 0") {
  // rho: 1 -> 2, u: 2 -> 1 at x_s = 0, so rho*u is continuous.
  const PiecewiseFunction1D rho = PiecewiseFunction1D::step(0.0, 1.0, 2.0);
  const PiecewiseFunction1D u = PiecewiseFunction1D::step(0.0, 2.0, 1.0);
  PiecewiseFunction1D drho = PiecewiseFunction1D::step(0.0, 0.0, 0.0);
  PiecewiseFunction1D du = PiecewiseFunction1D::step(0.0, 0.0, 0.0);
  const double xs_da = 1.0;  // x_s' * delta_a
  drho.set_dirac_weight(0.0, -xs_da * jump(rho, 0.0));
  du.set_dirac_weight(0.0, -xs_da * jump(u, 0.0));

  const PiecewiseFunction1D dprod = extended_product_variation(rho, u, drho, du);
  CHECK(dprod.dirac_weight_at(0.0) == 0.0);
}

TEST_CASE("extended product variation: smooth case is the ordinary rule") {
  Poly x2, xp2, one_x, three;
  x2.coef = {0.0, 0.0, 1.0};   // rho = x^2
  xp2.coef = {2.0, 1.0};       // u = 2 + x
  one_x.coef = {1.0, 1.0};     // drho = 1 + x
  three.coef = {3.0};          // du = 3
  const auto rho = PiecewiseFunction1D::polynomial(x2);
  const auto u = PiecewiseFunction1D::polynomial(xp2);
  const auto drho = PiecewiseFunction1D::polynomial(one_x);
  const auto du = PiecewiseFunction1D::polynomial(three);

  const PiecewiseFunction1D d = extended_product_variation(rho, u, drho, du);
  for (double x : {-2.0, -0.5, 0.0, 0.7, 3.1}) {
    const double want = (1.0 + x) * (2.0 + x) + x * x * 3.0;
    CHECK(d.eval(x) == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK(d.breakpoints().empty());
}

TEST_CASE("extended product variation with continuous u reduces to (drho) u") {
  const PiecewiseFunction1D rho = PiecewiseFunction1D::step(0.0, 1.0, 3.0);
  const PiecewiseFunction1D u = PiecewiseFunction1D::step(0.0, 1.0, 1.0);
  PiecewiseFunction1D drho = PiecewiseFunction1D::step(0.0, 0.0, 0.0);
  PiecewiseFunction1D du = PiecewiseFunction1D::step(0.0, 0.0, 0.0);
  drho.set_dirac_weight(0.0, -jump(rho, 0.0));  // x_s' delta_a = 1

  const PiecewiseFunction1D d = extended_product_variation(rho, u, drho, du);
  CHECK(d.dirac_weight_at(0.0) == doctest::Approx(-2.0).epsilon(1e-15));
  // [rho u] = 3 - 1 = 2, so the weight equals -[rho u].
  CHECK(d.dirac_weight_at(0.0) ==
        doctest::Approx(-jump(multiply(rho, u), 0.0)).epsilon(1e-15));
}

TEST_CASE("extended product variation is symmetric in its factors") {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    const double xs = d(rng);
    const PiecewiseFunction1D rho = PiecewiseFunction1D::step(xs, 1.0 + std::abs(d(rng)),
                                                              1.0 + std::abs(d(rng)));
    const PiecewiseFunction1D u = PiecewiseFunction1D::step(xs, d(rng), d(rng));
    PiecewiseFunction1D drho = PiecewiseFunction1D::step(xs, d(rng), d(rng));
    PiecewiseFunction1D du = PiecewiseFunction1D::step(xs, d(rng), d(rng));
    drho.set_dirac_weight(xs, d(rng));
    du.set_dirac_weight(xs, d(rng));

    const PiecewiseFunction1D ab = extended_product_variation(rho, u, drho, du);
    const PiecewiseFunction1D ba = extended_product_variation(u, rho, du, drho);
    CHECK(std::abs(ab.dirac_weight_at(xs) - ba.dirac_weight_at(xs)) <=
          1e-13 * std::max(1.0, std::abs(ab.dirac_weight_at(xs))));
    for (double x : {xs - 0.5, xs + 0.5})
      CHECK(ab.eval(x) == doctest::Approx(ba.eval(x)).epsilon(1e-13));
  }
}

TEST_CASE("chain variation carries -[f] * xs' da as its dirac weight") {
  std::uniform_real_distribution<double> d(0.2, 4.0);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  const SmoothMap f = half_square();
  for (int t = 0; t < 100; ++t) {
    const double rm = d(rng), rp = d(rng);
    const double xs_da = shift(rng);
    const PiecewiseFunction1D rho = PiecewiseFunction1D::step(0.0, rm, rp);
    PiecewiseFunction1D drho = PiecewiseFunction1D::step(0.0, 0.0, 0.0);
    drho.set_dirac_weight(0.0, -xs_da * (rp - rm));

    const PiecewiseFunction1D df = extended_chain_variation(f, rho, drho);
    const double jump_f = f.f(rp) - f.f(rm);
    CHECK(std::abs(df.dirac_weight_at(0.0) + jump_f * xs_da) <=
          1e-12 * std::max(1.0, std::abs(jump_f)));
  }
}

TEST_CASE("shift variation: box construction and zero shift") {
  const PiecewiseFunction1D h = PiecewiseFunction1D::step(0.0, 0.0, 1.0);
  const PiecewiseFunction1D box =
      shift_variation_apply(h, {{0.0, jump(h, 0.0), 0.1}});
  CHECK(box.eval(0.05) == -1.0);
  CHECK(box.eval(-0.01) == 0.0);
  CHECK(box.eval(0.15) == 0.0);

  const PiecewiseFunction1D none = shift_variation_apply(h, {{0.0, 1.0, 0.0}});
  CHECK(none.breakpoints().empty());
  CHECK(none.eval(0.0) == 0.0);
}

TEST_CASE("shift variation integral equals -[rho] * delta_a exactly") {
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_real_distribution<double> da(-0.5, 0.5);
  for (int t = 0; t < 100; ++t) {
    const double xs = val(rng);
    const double lo = val(rng), hi = val(rng);
    const PiecewiseFunction1D rho = PiecewiseFunction1D::step(xs, lo, hi);
    const double delta = da(rng);
    const PiecewiseFunction1D v =
        shift_variation_apply(rho, {{xs, hi - lo, delta}});
    const double want = -(hi - lo) * delta;
    CHECK(v.integrate(xs - 2.0, xs + 2.0) ==
          doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("shift variation rejects overlapping intervals and foreign points") {
  std::vector<double> bps = {0.0, 0.05};
  Poly a, b, c;
  a.coef = {0.0};
  b.coef = {1.0};
  c.coef = {2.0};
  const PiecewiseFunction1D rho(bps, {Piece{a}, Piece{b}, Piece{c}});
  CHECK_THROWS_AS(
      shift_variation_apply(rho, {{0.0, 1.0, 0.2}, {0.05, 1.0, 0.1}}),
      std::invalid_argument);
  CHECK_THROWS_AS(shift_variation_apply(rho, {{0.3, 1.0, 0.1}}),
                  std::invalid_argument);
}

TEST_CASE("integration is exact on polynomial pieces and counts dirac masses") {
  Poly cubic;
  cubic.coef = {1.0, 0.0, 0.0, 2.0};  // 1 + 2 x^3
  PiecewiseFunction1D f = PiecewiseFunction1D::step(0.0, 1.0, 2.0);
  CHECK(PiecewiseFunction1D::polynomial(cubic).integrate(-1.0, 2.0) ==
        doctest::Approx(3.0 + 0.5 * (16.0 - 1.0)).epsilon(1e-14));
  f.set_dirac_weight(0.0, 5.0);
  // integral of step part: 1*1 + 2*1 = 3, plus the dirac weight 5.
  CHECK(f.integrate(-1.0, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
}
