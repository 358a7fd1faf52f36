#include "ergoflow/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace ergoflow {

namespace {

void check_rate_args(double a, double t, double t_min) {
  if (!(a > 0.0)) throw std::invalid_argument("decay_rate: exponent must be > 0");
  if (!(t_min > 1.0)) throw std::invalid_argument("decay_rate: t_min must be > 1");
  if (!(t >= t_min)) throw std::invalid_argument("decay_rate: t below mixing horizon");
}

}  // namespace

double decay_rate(double a, double t, double t_min) {
  check_rate_args(a, t, t_min);
  if (a < 0.5) return std::pow(t, -2.0 * a);
  if (a == 0.5) return std::log(t) / t;
  return 1.0 / t;
}

double decay_rate_inverse(double a, double t, double t_min) {
  check_rate_args(a, t, t_min);
  if (a < 0.5) return std::pow(t, 2.0 * a);
  if (a == 0.5) return t / std::log(t);
  return t;
}

namespace quadrature {

namespace {

struct GLTable {
  double x[GaussLaguerre::n];
  double w[GaussLaguerre::n];
};

// Golub-Welsch: eigen-decompose the symmetric Jacobi matrix of the Laguerre
// recurrence (diag 2i+1, off-diag i+1); weights are the squared first
// components (total mass 1).
const GLTable& gl_table() {
  static GLTable table;
  static std::once_flag once;
  std::call_once(once, [] {
    constexpr int n = static_cast<int>(GaussLaguerre::n);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      J(i, i) = 2.0 * i + 1.0;
      if (i + 1 < n) {
        J(i, i + 1) = i + 1.0;
        J(i + 1, i) = i + 1.0;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    for (int i = 0; i < n; ++i) {
      table.x[i] = es.eigenvalues()(i);
      const double v0 = es.eigenvectors()(0, i);
      table.w[i] = v0 * v0;
    }
  });
  return table;
}

}  // namespace

const double* GaussLaguerre::nodes() const { return gl_table().x; }
const double* GaussLaguerre::weights() const { return gl_table().w; }
const GaussLaguerre& GaussLaguerre::instance() {
  static GaussLaguerre gl;
  return gl;
}

}  // namespace quadrature

namespace {

double ghat_laguerre(double a, double u) {
  const auto& gl = quadrature::GaussLaguerre::instance();
  const double* x = gl.nodes();
  const double* w = gl.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < quadrature::GaussLaguerre::n; ++i)
    acc += w[i] * std::pow(u + x[i], a - 1.0);
  return acc;
}

}  // namespace

double upper_gamma_scaled(double a, double u) {
  if (!(a > 0.0)) throw std::invalid_argument("upper_gamma_scaled: a must be > 0");
  if (!(u >= 0.0)) throw std::invalid_argument("upper_gamma_scaled: u must be >= 0");
  if (u == 0.0) return std::tgamma(a);
  if (u >= 1.0) return ghat_laguerre(a, u);
  // Small u: the integrand (u+w)^{a-1} has a near-singularity at w = -u, so
  // split at w = 1. [0,1] by tanh-sinh (handles the u -> 0 endpoint blowup),
  // [1,inf) by the shifted Laguerre rule.
  boost::math::quadrature::tanh_sinh<double> ts;
  const double head =
      ts.integrate([a, u](double w) { return std::exp(-w) * std::pow(u + w, a - 1.0); }, 0.0, 1.0,
                   1e-13);
  const double tail = std::exp(-1.0) * ghat_laguerre(a, u + 1.0);
  return head + tail;
}

double j_weight(double a, double y) {
  if (!(a > 0.0)) throw std::invalid_argument("j_weight: a must be > 0");
  if (!(y >= 0.0)) throw std::invalid_argument("j_weight: y must be >= 0");
  if (y == 0.0) return 0.0;
  // Inner integral in closed form:
  //   j(a,y) = Integral_0^y u^{a-1} [ghat(a,u) - e^{u-y} ghat(a,y)] du.
  const double gy = upper_gamma_scaled(a, y);
  const auto f = [a, y, gy](double u) {
    return upper_gamma_scaled(a, u) - std::exp(u - y) * gy;
  };
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  const double split = std::min(1.0, y);
  {
    // u = w^{1/a} absorbs the u^{a-1} endpoint singularity for a < 1.
    const double inv_a = 1.0 / a;
    const double wmax = std::pow(split, a);
    total += gauss_kronrod<double, 31>::integrate(
                 [&](double w) { return f(std::pow(w, inv_a)); }, 0.0, wmax, 12, 1e-12) *
             inv_a;
  }
  if (y > split) {
    total += gauss_kronrod<double, 61>::integrate(
        [&](double u) { return std::pow(u, a - 1.0) * f(u); }, split, y, 12, 1e-12);
  }
  return total;
}

double j_weight_bruteforce(double a, double y) {
  if (!(a > 0.0)) throw std::invalid_argument("j_weight_bruteforce: a must be > 0");
  if (!(y >= 0.0 && y <= 50.0))
    throw std::invalid_argument("j_weight_bruteforce: y must be in [0, 50]");
  if (y == 0.0) return 0.0;
  // Nested quadrature of e^{-(v-u)} (uv)^{a-1} over 0 < u < v < y, inner
  // variable substituted u = w^{1/a}; independent of upper_gamma_scaled.
  boost::math::quadrature::tanh_sinh<double> outer(12);
  const double inv_a = 1.0 / a;
  const auto inner = [a, inv_a](double v) {
    boost::math::quadrature::tanh_sinh<double> in(12);
    const double wmax = std::pow(v, a);
    return in.integrate(
               [&](double w) {
                 const double u = std::pow(w, inv_a);
                 return std::exp(u - v);
               },
               0.0, wmax, 1e-12) *
           inv_a;
  };
  return outer.integrate([&](double v) { return std::pow(v, a - 1.0) * inner(v); }, 0.0, y,
                         1e-11);
}

double j_weight_limit(double a) {
  if (!(a > 0.0 && a < 0.5))
    throw std::invalid_argument("j_weight_limit: needs a in (0, 1/2)");
  return std::tgamma(2.0 * a) * std::tgamma(a) * std::tgamma(1.0 - 2.0 * a) /
         std::tgamma(1.0 - a);
}

double log_mean(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("log_mean: needs a, b >= 0");
  if (a == 0.0 || b == 0.0) return 0.0;
  if (a == b) return a;
  const double hi = std::max(a, b);
  if (std::abs(a - b) <= 1e-8 * hi) {
    const double d = (b - a) / a;
    return a * (1.0 + d / 2.0 - d * d / 12.0);
  }
  return (a - b) / std::log(a / b);
}

}  // namespace ergoflow
