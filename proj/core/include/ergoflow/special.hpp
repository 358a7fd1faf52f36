#pragma once

#include <cstddef>

// Scalar kernels shared by the spectral oracles: the Wasserstein decay-rate
// scale, the exponentially scaled upper incomplete gamma function, the ordered
// two-time correlation integral that gives per-mode second moments under
// power-law path weighting, and the logarithmic mean.

namespace ergoflow {

// Decay scale for the renormalized transport distance of the weighted
// occupation measure: t^{-2a} for a < 1/2, log(t)/t at a = 1/2, 1/t for
// a > 1/2. The a = 1/2 branch is taken on exact equality of the double.
// Requires a > 0 and t >= t_min; t_min must be > 1 so that log(t) > 0.
double decay_rate(double a, double t, double t_min = 2.0);

// 1/decay_rate with the a > 1/2 branch returning exactly t (no division),
// so renormalizing by the rate multiplies by literally t there.
double decay_rate_inverse(double a, double t, double t_min = 2.0);

struct RateFunction {
  double a;
  double t_min = 2.0;
  double operator()(double t) const { return decay_rate(a, t, t_min); }
};

// ghat(a, u) = e^u * Integral_u^inf e^{-y} y^{a-1} dy, finite for all u >= 0
// even where the unscaled integral underflows. ghat(a, 0) = Gamma(a) and
// u^{1-a} * ghat(a, u) -> 1 as u -> inf. Absolute accuracy ~1e-12 relative
// for a in (0, 8], u in [0, 1e6]. The unscaled e^u-free value is never
// formed internally, so there is no overflow for large u.
double upper_gamma_scaled(double a, double u);

// j_weight(a, y) = Integral_{0<u<v<y} e^{-(v-u)} (u v)^{a-1} du dv, the
// kernel behind E[(mode coefficient)^2] for weight exponent a and horizon
// y = lambda * t. Monotone increasing in y; j_weight(1, y) = y - 1 + e^{-y};
// for a = 1/2 it grows like log y + (log 4 + Euler gamma); for a < 1/2 it
// converges to the finite limit returned by j_weight_limit.
double j_weight(double a, double y);

// Same integral by direct nested adaptive quadrature, no reuse of
// upper_gamma_scaled. Slow; restricted to y <= 50. Cross-validation oracle.
double j_weight_bruteforce(double a, double y);

// lim_{y->inf} j_weight(a, y) for a in (0, 1/2):
// Gamma(2a) Gamma(a) Gamma(1-2a) / Gamma(1-a).
double j_weight_limit(double a);

// Logarithmic mean M(a,b) = (a-b)/log(a/b) with M(a,a) = a, M(a,0) = 0.
// Requires a, b >= 0. Switches to the series a(1 + d/2 - d^2/12),
// d = (b-a)/a, when |a-b| <= 1e-8 max(a,b). min(a,b) <= M <= max(a,b).
double log_mean(double a, double b);

namespace quadrature {
// Nodes/weights for Integral_0^inf e^{-w} f(w) dw ~ sum w_i f(x_i),
// computed once per process by Jacobi-matrix diagonalization.
struct GaussLaguerre {
  static constexpr std::size_t n = 64;
  const double* nodes() const;
  const double* weights() const;
  static const GaussLaguerre& instance();
};
}  // namespace quadrature

}  // namespace ergoflow
