#pragma once

#include "ergoflow/diffusion.hpp"
#include "ergoflow/spectral.hpp"

#include <vector>

// Norms of the centered regularized empirical density
//   f_{t,r} - 1 = sum_i e^{-lambda_i r} a_i phi_i,
// their exact stationary-start expectations, and the limiting constants of
// the renormalized transport distance.

namespace ergoflow {

// sum_i e^{-2 lambda_i r} a_i^2. Requires r > 0: the undamped L2 norm of the
// raw occupation density has no finite continuum meaning.
double damped_l2_sq(const SpectralModel& model, const EmpiricalModes& em, double r);

// sum_i lambda_i^{-1} e^{-2 lambda_i r} a_i^2 (squared dual Sobolev norm);
// r = 0 is allowed, the lambda^{-1} weight keeps the tail summable for d <= 3.
double damped_sobolev_sq(const SpectralModel& model, const EmpiricalModes& em, double r);

// max over a uniform grid of |f_{t,r}(x) - 1| (d = 1 models). Requires
// grid_n >= 2 * (largest wave number present), so the grid resolves every
// oscillation; the result is a lower bound of the true sup with error
// ||f'||_inf / grid_n.
double sup_deviation(const SpectralModel& model, const EmpiricalModes& em, double r,
                     int grid_n = 4096);

// Exact stationary-start expectations of the two squared norms for the
// continuous-time weighted occupation measure:
//   E||f_{t,r} - 1||_2^2 = (2 a^2 / t^{2a}) sum_i e^{-2 lambda_i r}
//                           lambda_i^{-2a} j_weight(a, lambda_i t),
// with an extra lambda^{-1} inside the sum for the Sobolev case. The value
// is certified against the spectral truncation. Requires r > 0 and a horizon
// no smaller than the model's mixing scale 2 max(1, 1/lambda_1).
double stationary_l2_expectation(const SpectralModel& model, double a, double t, double r);
double stationary_sobolev_expectation(const SpectralModel& model, double a, double t, double r);

// Q(t, r) = Integral_0^r E||f_{t,s} - 1||_2^2 ds, the accumulated smoothing
// loss; closed form (2a^2/t^{2a}) sum_i lambda^{-2a} j_weight(a, lambda t)
// (1 - e^{-2 lambda r}) / (2 lambda). Certified like the expectations. The
// sobolev variant integrates the dual Sobolev expectation instead (one more
// lambda^{-1}).
double stationary_l2_time_integral(const SpectralModel& model, double a, double t, double r);
double stationary_sobolev_time_integral(const SpectralModel& model, double a, double t, double r);

// Same expectations for the m-point discrete sampling rule (exact, via the
// geometric accumulation oracle). These are what the simulator estimates.
double stationary_l2_expectation_discrete(const SpectralModel& model, double a, double t,
                                          double r, std::size_t m);
double stationary_sobolev_expectation_discrete(const SpectralModel& model, double a, double t,
                                               double r, std::size_t m);

// Unit-weight (a = 1) closed form, an independent route:
//   E||f_{t,r} - 1||_2^2 = (2 / t^2) sum_i e^{-2 lambda_i r}
//                           (t / lambda_i - (1 - e^{-lambda_i t}) / lambda_i^2).
double stationary_l2_expectation_unit_weight(const SpectralModel& model, double t, double r);

// Limit constant of the renormalized squared transport distance started from
// nu: (2 a^2 / (2a - 1)) sum lambda^{-2} for a > 1/2, (1/2) sum lambda^{-2}
// at a = 1/2, and the nu-average of the kernel functional below for a < 1/2.
double limit_constant(const SpectralModel& model, double a, const InitialLaw& nu);

// Kernel functional governing the a < 1/2 limit. On flat tori it is constant
// in x; in general it adds eigenfunction-triple corrections resolved through
// the scaled incomplete gamma kernel.
TailBound limit_kernel_at(const SpectralModel& model, double a, const Point& x);
TailBound limit_kernel_mean(const SpectralModel& model, double a, const InitialLaw& nu);

// Finite-window damped version of the same functional: T caps the clock
// integral (j_weight(a, lambda T) in place of its limit), r damps the modes.
TailBound limit_kernel_windowed(const SpectralModel& model, double a, double T, double r);

// Pointwise evaluation of the windowed kernel functional at x:
//   2 a^2 Integral_{0<=u<=v<=T} (P_u k_{v-u+r_floor})(x) u^{a-1} v^{a-1} du dv,
// k_s = sum_i lambda_i^{-1} e^{-lambda_i s} phi_i^2. window_error bounds the
// distance to the infinite-window value (decays like T^{-(1-2a)});
// smoothing_error is 2 Q(T, r_floor), the cost of the r_floor damping.
struct WindowedKernelValue {
  double value = 0.0;
  double window_error = 0.0;
  double smoothing_error = 0.0;
};
WindowedKernelValue h_alpha_eval(const SpectralModel& model, double a, const Point& x, double T,
                                 double r_floor = 1e-4);

// Least-squares fit of log ||a||_p = log E[|a|^p]^{1/p} against log p.
struct MomentFit {
  std::vector<double> orders;
  std::vector<double> norms;
  double exponent = 0.0;   // slope
  double prefactor = 0.0;  // exp(intercept)
  double r2 = 0.0;
};
MomentFit fit_moment_growth(const std::vector<double>& samples, const std::vector<double>& orders);

// Empirical exceedance probabilities at thresholds eta_l = l * sqrt(scale)
// with a linear fit of log P against eta^2 / scale, plus the smallest c with
// P(|X| > eta) <= c e^{-eta^2 / (c * scale)} at every threshold.
struct TailFit {
  std::vector<double> eta;
  std::vector<double> prob;
  double slope = 0.0;      // d log P / d (eta^2 / scale)
  double r2 = 0.0;
  double envelope_c = 0.0;
};
TailFit fit_tail_decay(const std::vector<double>& samples, double scale, int levels = 3);

}  // namespace ergoflow
