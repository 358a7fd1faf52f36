#include "ergoflow/special.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace ergoflow;

namespace {
double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }
}  // namespace

TEST_SUITE("special") {

TEST_CASE("decay rate branches and inverse") {
  CHECK(decay_rate(0.3, 50.0) == doctest::Approx(std::pow(50.0, -0.6)).epsilon(1e-14));
  CHECK(decay_rate(0.5, 50.0) == doctest::Approx(std::log(50.0) / 50.0).epsilon(1e-14));
  CHECK(decay_rate(1.0, 50.0) == doctest::Approx(1.0 / 50.0).epsilon(1e-14));
  CHECK(decay_rate(2.0, 50.0) == doctest::Approx(1.0 / 50.0).epsilon(1e-14));

  // a > 1/2 inverse is literally t, no 1/(1/t) round trip
  CHECK(decay_rate_inverse(1.0, 400.0) == 400.0);
  CHECK(decay_rate_inverse(0.75, 12345.0) == 12345.0);

  for (double a : {0.25, 0.5, 0.8, 1.0}) {
    for (double t : {3.0, 40.0, 1e4}) {
      CHECK(decay_rate(a, t) * decay_rate_inverse(a, t) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  // the a = 1/2 branch triggers on exact equality only
  CHECK(decay_rate(std::nextafter(0.5, 1.0), 100.0) == doctest::Approx(1.0 / 100.0).epsilon(1e-10));

  RateFunction rf{0.5};
  CHECK(rf(100.0) == decay_rate(0.5, 100.0));

  CHECK_THROWS(decay_rate(0.0, 100.0));
  CHECK_THROWS(decay_rate(1.0, 1.5));
}

TEST_CASE("decay rate is decreasing in t") {
  for (double a : {0.3, 0.5, 1.0}) {
    double prev = decay_rate(a, 3.0);
    for (double t : {10.0, 100.0, 1e3, 1e5}) {
      double cur = decay_rate(a, t);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("scaled upper incomplete gamma: endpoints and recurrence") {
  // ghat(a, 0) = Gamma(a)
  for (double a : {0.25, 0.5, 1.0, 1.5, 3.0, 6.5}) {
    CHECK(rel(upper_gamma_scaled(a, 0.0), std::tgamma(a)) < 1e-12);
  }
  // ghat(1, u) = 1 for all u
  for (double u : {0.0, 0.7, 5.0, 300.0, 1e5}) {
    CHECK(rel(upper_gamma_scaled(1.0, u), 1.0) < 1e-12);
  }
  // ghat(a+1, u) = a ghat(a, u) + u^a  (integrate by parts)
  for (double a : {0.3, 0.5, 0.9, 1.7, 4.2}) {
    for (double u : {0.0, 0.1, 1.0, 9.0, 80.0, 2e3, 1e6}) {
      double lhs = upper_gamma_scaled(a + 1.0, u);
      double rhs = a * upper_gamma_scaled(a, u) + std::pow(u, a);
      CHECK(rel(lhs, rhs) < 1e-9);
    }
  }
  // u^{1-a} ghat(a, u) -> 1 as u -> inf
  for (double a : {0.3, 0.5, 2.5}) {
    CHECK(rel(std::pow(1e6, 1.0 - a) * upper_gamma_scaled(a, 1e6), 1.0) < 1e-3);
  }
}

TEST_CASE("pair correlation kernel: closed form at unit exponent") {
  // j(1, y) = y - 1 + e^{-y}
  for (double y : {0.1, 1.0, 10.0, 200.0}) {
    CHECK(rel(j_weight(1.0, y), y - 1.0 + std::exp(-y)) < 1e-12);
  }
  CHECK(std::abs(j_weight(1.0, 10.0) - 9.0000454) < 1e-6);
}

TEST_CASE("pair correlation kernel agrees with nested quadrature") {
  for (double a : {0.3, 0.5, 0.75, 1.0, 2.0}) {
    for (double y : {2.0, 5.0, 10.0, 30.0}) {
      CHECK(rel(j_weight(a, y), j_weight_bruteforce(a, y)) < 1e-6);
    }
  }
}

TEST_CASE("pair correlation kernel: monotone in y, log growth at a = 1/2") {
  for (double a : {0.3, 0.5, 1.0}) {
    double prev = j_weight(a, 0.5);
    for (double y : {1.0, 4.0, 20.0, 150.0, 3e3}) {
      double cur = j_weight(a, y);
      CHECK(cur > prev);
      prev = cur;
    }
  }
  // successive decades differ by ln 10 up to O(1/y) corrections
  double l10 = std::numbers::ln10;
  double j1 = j_weight(0.5, 1e2), j2 = j_weight(0.5, 1e3), j3 = j_weight(0.5, 1e4);
  CHECK(rel(j2 - j1, l10) < 0.05);
  CHECK(rel(j3 - j2, l10) < 0.05);
}

TEST_CASE("pair correlation kernel: finite limit below a = 1/2") {
  for (double a : {0.2, 1.0 / 3.0, 0.45}) {
    double lim = j_weight_limit(a);
    double gamma_form = std::tgamma(2.0 * a) * std::tgamma(a) * std::tgamma(1.0 - 2.0 * a) /
                        std::tgamma(1.0 - a);
    CHECK(rel(lim, gamma_form) < 1e-12);
    CHECK(j_weight(a, 5e3) < lim);
    CHECK(rel(j_weight(a, 5e4), lim) < rel(j_weight(a, 5e3), lim));
  }
  // the approach rate is y^{2a-1}, so a closeness bracket only makes sense
  // away from the boundary exponent
  CHECK(rel(j_weight(0.2, 5e3), j_weight_limit(0.2)) < 2e-3);
  CHECK(rel(j_weight(1.0 / 3.0, 5e3), j_weight_limit(1.0 / 3.0)) < 0.05);
}

TEST_CASE("logarithmic mean") {
  CHECK(log_mean(3.0, 3.0) == 3.0);
  CHECK(log_mean(5.0, 0.0) == 0.0);
  CHECK(log_mean(0.0, 5.0) == 0.0);
  CHECK(rel(log_mean(1.0, std::numbers::e), std::numbers::e - 1.0) < 1e-14);
  // symmetric, between geometric and arithmetic mean
  for (double a : {0.01, 0.5, 2.0}) {
    for (double b : {0.03, 1.0, 7.0}) {
      double m = log_mean(a, b);
      CHECK(rel(m, log_mean(b, a)) < 1e-14);
      CHECK(m >= std::sqrt(a * b) - 1e-15);
      CHECK(m <= 0.5 * (a + b) + 1e-15);
    }
  }
  // series branch joins the ratio branch smoothly
  double a = 2.0;
  double b = a * (1.0 + 3e-8);
  double outside = (a - b) / std::log(a / b);
  CHECK(rel(log_mean(a, b), outside) < 1e-10);
}

TEST_CASE("gauss laguerre rule integrates polynomials exactly") {
  const auto& gl = quadrature::GaussLaguerre::instance();
  const double* x = gl.nodes();
  const double* w = gl.weights();
  // moments of e^{-w}: integral w^k = k!; relative error grows roughly 15x
  // per order past k ~ 13 from the conditioning of high powers
  double fact = 1.0;
  for (int k = 0; k <= 20; ++k) {
    if (k > 0) fact *= k;
    double s = 0.0;
    for (std::size_t i = 0; i < quadrature::GaussLaguerre::n; ++i) s += w[i] * std::pow(x[i], k);
    CHECK(rel(s, fact) < (k <= 13 ? 1e-10 : 1e-3));
  }
  // integral e^{-w} cos w dw = 1/2
  double s = 0.0;
  for (std::size_t i = 0; i < quadrature::GaussLaguerre::n; ++i) s += w[i] * std::cos(x[i]);
  CHECK(rel(s, 0.5) < 1e-10);
}

}  // TEST_SUITE
