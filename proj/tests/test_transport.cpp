#include "ergoflow/transport.hpp"

#include "ergoflow/norms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace ergoflow;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

CircularMeasure random_measure(RandomStream& r, int max_atoms) {
  int n = 2 + static_cast<int>(r.next_uniform() * (max_atoms - 2));
  std::vector<double> pos, w;
  for (int i = 0; i < n; ++i) {
    pos.push_back(r.next_uniform());
    w.push_back(0.1 + r.next_uniform());
  }
  return make_circular_measure(pos, w);
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("circular measure construction: wrap, sort, merge, normalize") {
  auto m = make_circular_measure({1.25, -0.1, 0.25, 0.6}, {1.0, 2.0, 3.0, 2.0});
  REQUIRE(m.size() == 3);  // 1.25 and 0.25 coincide after wrapping
  CHECK(m.position[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(m.position[1] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(m.position[2] == doctest::Approx(0.9).epsilon(1e-15));
  double total = 0.0;
  for (double w : m.weight) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.weight[0] == doctest::Approx(0.5).epsilon(1e-14));  // merged 1 + 3 of 8

  auto u = make_circular_measure({0.7, 0.2});
  CHECK(u.weight[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS((void)make_circular_measure({}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_circular_measure({0.1}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_circular_measure({0.1, 0.2}, {1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("equal mass quantiles: flat midpoints, weighted concentration") {
  auto flat = make_flat_torus(1, 900.0);
  auto q = equal_mass_quantiles(*flat, 8);
  REQUIRE(q.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(q.position[i] == doctest::Approx((i + 0.5) / 8.0).epsilon(1e-12));
    CHECK(q.weight[i] == doctest::Approx(0.125).epsilon(1e-14));
  }
  auto wc = make_weighted_circle(
      [](double x) { return 0.8 * std::cos(2.0 * kPi * x); }, 512, 2e4);
  auto qw = equal_mass_quantiles(*wc, 64);
  // atoms crowd where the stationary density is largest (near x = 0)
  double gap_peak = qw.position[1] - qw.position[0];
  double gap_trough = 0.0;
  for (std::size_t i = 1; i < qw.size(); ++i) {
    if (qw.position[i - 1] < 0.5 && qw.position[i] >= 0.5)
      gap_trough = qw.position[i] - qw.position[i - 1];
  }
  CHECK(gap_peak < gap_trough);
}

TEST_CASE("squared distance: frozen two point and four point values") {
  auto d0 = make_circular_measure({0.1});
  CHECK(w2sq_circle(d0, d0) == doctest::Approx(0.0).epsilon(1e-15));

  auto a = make_circular_measure({0.0});
  auto b = make_circular_measure({0.5});
  CHECK(w2sq_circle(a, b) == doctest::Approx(0.25).epsilon(1e-12));

  // wrap around shortcut: 0.95 -> 0.05 travels 0.1
  auto c = make_circular_measure({0.95});
  auto d = make_circular_measure({0.05});
  CHECK(w2sq_circle(c, d) == doctest::Approx(0.01).epsilon(1e-12));

  for (double delta : {0.1, 0.3, 0.47, 0.62, 0.9}) {
    auto e = make_circular_measure({0.2});
    auto f = make_circular_measure({0.2 + delta});
    double wanted = std::min(delta, 1.0 - delta);
    CHECK(w2sq_circle(e, f) == doctest::Approx(wanted * wanted).epsilon(1e-12));
  }

  auto four = make_circular_measure({0.0, 0.25, 0.5, 0.75});
  auto four_shift = make_circular_measure({0.125, 0.375, 0.625, 0.875});
  CHECK(w2sq_circle(four, four_shift) == doctest::Approx(0.015625).epsilon(1e-12));
}

TEST_CASE("squared distance: symmetry, rotation invariance, triangle inequality") {
  RandomStream r(41, 0);
  for (int it = 0; it < 25; ++it) {
    auto a = random_measure(r, 30);
    auto b = random_measure(r, 30);
    auto c = random_measure(r, 30);
    double ab = w2sq_circle(a, b);
    CHECK(rel(ab + 1e-30, w2sq_circle(b, a) + 1e-30) < 1e-11);

    double shift = r.next_uniform();
    auto rot = [&](const CircularMeasure& m) {
      std::vector<double> pos;
      for (double p : m.position) pos.push_back(p + shift);
      return make_circular_measure(pos, m.weight);
    };
    CHECK(std::abs(w2sq_circle(rot(a), rot(b)) - ab) < 1e-11);

    double dab = std::sqrt(ab);
    double dbc = std::sqrt(w2sq_circle(b, c));
    double dac = std::sqrt(w2sq_circle(a, c));
    CHECK(dac <= dab + dbc + 1e-9);
  }
}

TEST_CASE("squared distance: optimal shift reported and three solvers agree") {
  RandomStream r(43, 1);
  for (int it = 0; it < 30; ++it) {
    auto a = random_measure(r, 22);
    auto b = random_measure(r, 22);
    double theta = 0.0;
    double fast = w2sq_circle(a, b, &theta);
    CHECK(std::abs(fast - w2sq_circle_scan(a, b)) < 1e-11);
    CHECK(std::abs(fast - w2sq_circle_lp(a, b)) < 1e-9);
    CHECK(theta >= -1.0);
    CHECK(theta <= 1.0);
  }
  auto big = equal_mass_quantiles(*make_flat_torus(1, 900.0), 200);
  CHECK_THROWS_AS((void)w2sq_circle_lp(big, big), std::invalid_argument);
}

TEST_CASE("atom binning: conservation and cloud in cell splitting") {
  EmpiricalAtoms atoms;
  atoms.weight = 0.25;
  atoms.position = {Point{0.5, 0, 0, 0}, Point{0.5, 0, 0, 0}, Point{0.0, 0, 0, 0},
                    Point{0.25, 0, 0, 0}};
  auto g = bin_atoms(atoms, 1, 4);
  REQUIRE(g.size() == 4);
  double total = 0.0;
  for (double w : g.weight) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // cell mids are at {1/8, 3/8, 5/8, 7/8}: an atom at 0.5 splits evenly
  // between cells 1 and 2, one at 0 splits between cells 3 and 0
  CHECK(g.weight[1] == doctest::Approx(0.25 + 0.125).epsilon(1e-13));
  CHECK(g.weight[2] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(g.weight[0] == doctest::Approx(0.125 + 0.125).epsilon(1e-13));
  CHECK(g.weight[3] == doctest::Approx(0.125).epsilon(1e-13));

  EmpiricalAtoms one;
  one.weight = 1.0;
  one.position = {Point{0.375, 0.625, 0, 0}};
  auto g2 = bin_atoms(one, 2, 4);
  REQUIRE(g2.size() == 16);
  // (0.375, 0.625) is the midpoint of cells (1,2): all mass lands there
  CHECK(g2.weight[1 * 4 + 2] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("grid measures: stationary cells and density sampling") {
  auto flat = make_flat_torus(2, 200.0);
  auto g = grid_measure_of_stationary(*flat, 8);
  for (double w : g.weight) CHECK(w == doctest::Approx(1.0 / 64.0).epsilon(1e-13));

  auto gd = grid_measure_from_density(1, 64, [](const Point& x) {
    return 1.0 + 0.5 * std::cos(2.0 * kPi * x[0]);
  });
  double total = 0.0;
  for (double w : gd.weight) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(gd.weight[0] > gd.weight[31]);

  // negative excursions clamp to zero instead of going negative
  auto clamped = grid_measure_from_density(1, 32, [](const Point& x) {
    return std::cos(2.0 * kPi * x[0]);
  });
  for (double w : clamped.weight) CHECK(w >= 0.0);
  CHECK_THROWS_AS((void)grid_measure_from_density(1, 32, [](const Point&) { return -1.0; }),
                  std::invalid_argument);
}

TEST_CASE("entropic divergence: identity, symmetry, and monotone raw cost") {
  auto flat = make_flat_torus(1, 900.0);
  auto self = grid_measure_from_density(1, 64, [](const Point& x) {
    return 1.0 + 0.7 * std::sin(2.0 * kPi * x[0]);
  });
  SinkhornOptions opt;
  opt.epsilon = 1e-3;
  auto sd = sinkhorn_divergence(self, self, opt);
  CHECK(sd.converged);
  CHECK(std::abs(sd.value) < 1e-8);

  auto other = grid_measure_of_stationary(*flat, 64);
  auto ab = sinkhorn_divergence(self, other, opt);
  auto ba = sinkhorn_divergence(other, self, opt);
  CHECK(ab.converged);
  CHECK(std::abs(ab.value - ba.value) < 1e-9 + 1e-6 * std::abs(ab.value));
  CHECK(ab.value > 0.0);
  CHECK(ab.marginal_error <= opt.tolerance * 1.01);

  // raw entropic cost decreases with the regularization strength
  double prev = 1e100;
  for (double eps : {1e-2, 3e-3, 1e-3}) {
    SinkhornOptions o;
    o.epsilon = eps;
    auto res = sinkhorn_divergence(self, other, o);
    CHECK(res.ot_value < prev);
    prev = res.ot_value;
  }
  CHECK_THROWS_AS((void)sinkhorn_divergence(self, grid_measure_of_stationary(*flat, 32), opt),
                  std::invalid_argument);
  SinkhornOptions bad;
  bad.epsilon = 1e-5;
  CHECK_THROWS_AS((void)sinkhorn_divergence(self, other, bad), std::invalid_argument);
}

TEST_CASE("entropic divergence tracks the exact one dimensional value") {
  // product structure along one axis reduces the planar problem to the circle
  const int n = 64;
  auto a2 = grid_measure_from_density(2, n, [](const Point& x) {
    return 1.0 + 0.8 * std::cos(2.0 * kPi * x[0]);
  });
  auto b2 = grid_measure_from_density(2, n, [](const Point&) { return 1.0; });
  SinkhornOptions opt;
  opt.epsilon = 1e-3;
  auto sd = sinkhorn_divergence(a2, b2, opt);
  REQUIRE(sd.converged);

  std::vector<double> mids, wa, wb;
  for (int i = 0; i < n; ++i) {
    double x = (i + 0.5) / n;
    mids.push_back(x);
    wa.push_back(1.0 + 0.8 * std::cos(2.0 * kPi * x));
    wb.push_back(1.0);
  }
  double exact = w2sq_circle(make_circular_measure(mids, wa), make_circular_measure(mids, wb));
  CHECK(rel(sd.value, exact) < 0.05);
}

TEST_CASE("transport upper surrogate: ordering and domination of the exact cost") {
  auto model = make_flat_torus(1, 2e4);
  PathConfig cfg;
  cfg.weight_exponent = 1.0;
  cfg.horizon = 150.0;
  cfg.samples = 50000;
  const double r = 0.05;
  auto reference = equal_mass_quantiles(*model, 4096);

  for (int k = 0; k < 5; ++k) {
    RandomStream rng(61, static_cast<std::uint64_t>(k));
    auto em = simulate_weighted_modes(*model, cfg, rng);
    auto sur = w2_upper_surrogate(*model, em, r, 2048);
    REQUIRE(sur.applicable);
    CHECK(sur.min_density > 0.0);
    CHECK(sur.log_mean <= sur.basic * (1.0 + 1e-12));

    // exact transport cost of the damped density against equilibrium
    const int gn = 2048;
    std::vector<double> pos, w;
    for (int i = 0; i < gn; ++i) {
      double x = (i + 0.5) / gn;
      double f = 1.0;
      for (std::size_t mo = 0; mo < model->mode_count(); ++mo) {
        f += std::exp(-model->modes()[mo].lambda * r) * em.coeff[mo] *
             model->eigenfunction(mo, {x, 0, 0, 0});
      }
      pos.push_back(x);
      w.push_back(std::max(f, 0.0));
    }
    double exact = w2sq_circle(make_circular_measure(pos, w), reference);
    // the bound covers the continuum cost; the atomized proxy pays up to
    // h/sqrt(12) per measure in W2 distance for in-cell transport
    const double allowance = (1.0 / gn + 1.0 / 4096.0) / std::sqrt(12.0);
    CHECK(std::sqrt(exact) <= std::sqrt(sur.log_mean) + allowance);
    CHECK(exact <= sur.log_mean * 2.0);
  }

  // a wild coefficient drives the density negative: bounds become inapplicable
  EmpiricalModes bad;
  bad.coeff.assign(model->mode_count(), 0.0);
  bad.coeff[0] = 50.0;
  bad.weight_exponent = 1.0;
  bad.horizon = 10.0;
  bad.samples = 1;
  auto sur = w2_upper_surrogate(*model, bad, 1e-4, 2048);
  CHECK_FALSE(sur.applicable);
}

TEST_CASE("heat flow: smoothing keeps mass and contracts pairs") {
  auto model = make_flat_torus(1, 2e4);
  auto nu0 = make_circular_measure({0.0});
  auto nu1 = make_circular_measure({0.3, 0.7}, {0.5, 0.5});

  auto flowed = heat_flow_measure(*model, nu0, 0.01, 1024);
  double total = 0.0;
  for (double w : flowed.weight) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> times{0.002, 0.004, 0.008, 0.016};
  auto rep = heat_flow_contraction(*model, nu0, nu1, times, 1024);
  REQUIRE(rep.time.size() == times.size());
  CHECK(rep.pair_ok);
  CHECK(rep.curvature == 0.0);
  // a dirac spreads with variance 2t
  CHECK(rep.fitted_c > 1.8);
  CHECK(rep.fitted_c < 2.2);
  for (std::size_t i = 1; i < rep.self_cost.size(); ++i)
    CHECK(rep.self_cost[i] > rep.self_cost[i - 1]);
  for (std::size_t i = 0; i < rep.time.size(); ++i) {
    CHECK(rep.pair_after[i] <=
          std::exp(-rep.curvature * rep.time[i]) * rep.pair_before[i] + 2.0 / 1024.0 + 1e-12);
  }
  CHECK_THROWS_AS((void)heat_flow_measure(*model, nu0, -1.0, 1024), std::invalid_argument);
}

}  // TEST_SUITE
