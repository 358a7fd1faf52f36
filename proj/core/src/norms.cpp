#include "ergoflow/norms.hpp"

#include "ergoflow/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ergoflow {

namespace {

void check_modes(const SpectralModel& model, const EmpiricalModes& em) {
  if (em.coeff.size() != model.mode_count())
    throw std::invalid_argument("mode coefficients do not match the model");
}

// Rigorous growth envelope: j_weight(a, y) <= j_bound_const(a) + the
// y-dependent part split off by the tail helpers below.
double j_bound_const(double a) {
  if (a < 0.5) return j_weight_limit(a);
  return 1.0 / (2.0 * a * a) + std::pow(2.0, a) * std::tgamma(2.0 * a) / a;
}

// Truncation-tail bound for the stationary expectation sums: power is the
// lambda exponent of the summand at fixed y-envelope (2a, +1 for Sobolev).
double expectation_tail(const SpectralModel& model, double a, double t, double r, double power) {
  const double T0 = model.truncation_tail_bound(power, 2.0 * r);
  double tail = j_bound_const(a) * T0;
  if (a == 0.5) {
    // j grows like log(lambda t) <= (4/e) lambda^{1/4} + max(0, log t).
    tail += std::numbers::sqrt2 *
            ((4.0 / std::numbers::e) * model.truncation_tail_bound(power - 0.25, 2.0 * r) +
             std::max(0.0, std::log(t)) * T0);
  } else if (a > 0.5) {
    const double coef = a <= 1.0 ? std::pow(2.0, 1.0 - a) / (2.0 * a - 1.0)
                                 : 1.0 / (2.0 * a - 1.0);
    tail += coef * std::pow(t, 2.0 * a - 1.0) *
            model.truncation_tail_bound(power - (2.0 * a - 1.0), 2.0 * r);
  }
  return 2.0 * a * a * std::pow(t, -2.0 * a) * tail;
}

double stationary_expectation_impl(const SpectralModel& model, double a, double t, double r,
                                   bool sobolev) {
  if (!(a > 0.0) || !(r > 0.0))
    throw std::invalid_argument("stationary expectation: bad arguments");
  if (!(t >= model.mixing_horizon()))
    throw std::invalid_argument("stationary expectation: horizon below the mixing scale");
  double acc = 0.0;
  for (const auto& m : model.modes()) {
    double term = std::exp(-2.0 * m.lambda * r) * std::pow(m.lambda, -2.0 * a) *
                  j_weight(a, m.lambda * t);
    if (sobolev) term /= m.lambda;
    acc += term;
  }
  const double value = 2.0 * a * a * std::pow(t, -2.0 * a) * acc;
  const double tail = expectation_tail(model, a, t, r, 2.0 * a + (sobolev ? 1.0 : 0.0));
  if (!(tail <= 1e-9 * (1.0 + std::abs(value))))
    throw std::runtime_error("stationary expectation: spectral cutoff too low to certify");
  return value;
}

double discrete_expectation_impl(const SpectralModel& model, double a, double t, double r,
                                 std::size_t m, bool sobolev) {
  // The simulated statistic sums the enumerated modes only, so this oracle
  // is exact for it; no truncation certificate enters.
  double acc = 0.0;
  for (const auto& mode : model.modes()) {
    double term = std::exp(-2.0 * mode.lambda * r) *
                  discrete_mode_second_moment(mode.lambda, a, t, m);
    if (sobolev) term /= mode.lambda;
    acc += term;
  }
  return acc;
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("least_squares: need two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double dn = static_cast<double>(n);
  const double vx = sxx - sx * sx / dn;
  const double vy = syy - sy * sy / dn;
  const double cxy = sxy - sx * sy / dn;
  LinearFit f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / dn;
  f.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

}  // namespace

double damped_l2_sq(const SpectralModel& model, const EmpiricalModes& em, double r) {
  check_modes(model, em);
  if (!(r > 0.0)) throw std::invalid_argument("L2 norm needs damping r > 0");
  double acc = 0.0;
  const auto& modes = model.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double d = std::exp(-modes[i].lambda * r) * em.coeff[i];
    acc += d * d;
  }
  return acc;
}

double damped_sobolev_sq(const SpectralModel& model, const EmpiricalModes& em, double r) {
  check_modes(model, em);
  if (!(r >= 0.0)) throw std::invalid_argument("damping must be >= 0");
  double acc = 0.0;
  const auto& modes = model.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double d = std::exp(-modes[i].lambda * r) * em.coeff[i];
    acc += d * d / modes[i].lambda;
  }
  return acc;
}

double sup_deviation(const SpectralModel& model, const EmpiricalModes& em, double r,
                     int grid_n) {
  check_modes(model, em);
  if (model.dim() != 1) throw std::invalid_argument("sup_deviation supports d = 1 models");
  const auto& modes = model.modes();
  int max_wave = 1;
  for (const auto& m : modes) {
    const int w = model.flat() ? std::abs(m.wave.k[0]) : (m.index + 2) / 2;
    max_wave = std::max(max_wave, w);
  }
  if (grid_n < 2 * max_wave)
    throw std::invalid_argument("grid below the oscillation resolution safeguard");
  double sup = 0.0;
  for (int g = 0; g < grid_n; ++g) {
    Point x{static_cast<double>(g) / grid_n, 0.0, 0.0, 0.0};
    double f = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
      f += std::exp(-modes[i].lambda * r) * em.coeff[i] * model.eigenfunction(i, x);
    sup = std::max(sup, std::abs(f));
  }
  return sup;
}

double stationary_l2_expectation(const SpectralModel& model, double a, double t, double r) {
  return stationary_expectation_impl(model, a, t, r, false);
}

double stationary_sobolev_expectation(const SpectralModel& model, double a, double t, double r) {
  return stationary_expectation_impl(model, a, t, r, true);
}

double stationary_l2_expectation_discrete(const SpectralModel& model, double a, double t,
                                          double r, std::size_t m) {
  return discrete_expectation_impl(model, a, t, r, m, false);
}

double stationary_sobolev_expectation_discrete(const SpectralModel& model, double a, double t,
                                               double r, std::size_t m) {
  return discrete_expectation_impl(model, a, t, r, m, true);
}

double stationary_l2_expectation_unit_weight(const SpectralModel& model, double t, double r) {
  if (!(t > 0.0) || !(r >= 0.0)) throw std::invalid_argument("bad arguments");
  double acc = 0.0;
  for (const auto& m : model.modes()) {
    const double lam = m.lambda;
    acc += std::exp(-2.0 * lam * r) * (t / lam - (1.0 - std::exp(-lam * t)) / (lam * lam));
  }
  return 2.0 / (t * t) * acc;
}

namespace {

double time_integral_impl(const SpectralModel& model, double a, double t, double r,
                          bool sobolev) {
  if (!(a > 0.0) || !(r >= 0.0)) throw std::invalid_argument("time integral: bad arguments");
  if (!(t >= model.mixing_horizon()))
    throw std::invalid_argument("time integral: horizon below the mixing scale");
  double acc = 0.0;
  for (const auto& m : model.modes()) {
    const double lam = m.lambda;
    double term = std::pow(lam, -2.0 * a) * j_weight(a, lam * t) *
                  (-std::expm1(-2.0 * lam * r)) / (2.0 * lam);
    if (sobolev) term /= lam;
    acc += term;
  }
  const double value = 2.0 * a * a * std::pow(t, -2.0 * a) * acc;
  // (1 - e^{-2 lam r}) / (2 lam) <= 1/(2 lam) folds into one extra power.
  const double tail =
      0.5 * expectation_tail(model, a, t, 0.0, 2.0 * a + 1.0 + (sobolev ? 1.0 : 0.0));
  if (!(tail <= 1e-9 * (1.0 + std::abs(value))))
    throw std::runtime_error("time integral: spectral cutoff too low to certify");
  return value;
}

}  // namespace

double stationary_l2_time_integral(const SpectralModel& model, double a, double t, double r) {
  return time_integral_impl(model, a, t, r, false);
}

double stationary_sobolev_time_integral(const SpectralModel& model, double a, double t,
                                        double r) {
  return time_integral_impl(model, a, t, r, true);
}

namespace {

// Cross-mode kernel of the below-threshold limit functional:
//   K(a; li, lj) = li^{-a} Integral_0^inf u^{a-1} e^{-lj u} ghat_a(li u) du
//               = (li lj)^{-a} Integral_0^inf y^{a-1} e^{-y} ghat_a(li y / lj) dy,
// the double clock integral of e^{-lj u} e^{-li (v-u)} against (uv)^{a-1}.
double cross_mode_kernel(double a, double li, double lj) {
  const double beta = li / lj;
  const double inv_a = 1.0 / a;
  const auto f = [a, beta](double y) { return std::exp(-y) * upper_gamma_scaled(a, beta * y); };
  using boost::math::quadrature::gauss_kronrod;
  const double head = gauss_kronrod<double, 31>::integrate(
                          [&](double w) { return f(std::pow(w, inv_a)); }, 0.0, 1.0, 10, 1e-11) *
                      inv_a;
  const auto& gl = quadrature::GaussLaguerre::instance();
  double tail = 0.0;
  for (std::size_t i = 0; i < quadrature::GaussLaguerre::n; ++i) {
    const double y = 1.0 + gl.nodes()[i];
    tail += gl.weights()[i] * std::pow(y, a - 1.0) * upper_gamma_scaled(a, beta * y);
  }
  tail *= std::exp(-1.0);
  return std::pow(li * lj, -a) * (head + tail);
}

// Finite-window variant Integral_{0<=u<=v<=T} e^{-lj u} e^{-li (v-u)} (uv)^{a-1};
// the closed inner integral leaves li^{-a} Integral_0^T u^{a-1} e^{-lj u}
// [ghat_a(li u) - e^{li (u - T)} ghat_a(li T)] du.
double cross_mode_kernel_windowed(double a, double li, double lj, double T) {
  const double inv_a = 1.0 / a;
  const double gT = upper_gamma_scaled(a, li * T);
  const auto inner = [&](double u) {
    return std::exp(-lj * u) * upper_gamma_scaled(a, li * u) -
           gT * std::exp(li * (u - T) - lj * u);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double u0 = std::min(1.0, T);
  double acc = gauss_kronrod<double, 31>::integrate(
                   [&](double w) { return inner(u0 * std::pow(w, inv_a)); }, 0.0, 1.0, 12,
                   1e-11) *
               inv_a * std::pow(u0, a);
  const double ucap = std::min(T, u0 + 60.0 / lj);
  if (ucap > u0)
    acc += gauss_kronrod<double, 61>::integrate(
        [&](double u) { return std::pow(u, a - 1.0) * inner(u); }, u0, ucap, 12, 1e-11);
  return std::pow(li, -a) * acc;
}

double triple_overlap(const SpectralModel& model, std::size_t i, std::size_t j, int grid_n) {
  double acc = 0.0;
  for (int g = 0; g < grid_n; ++g) {
    Point x{(g + 0.5) / grid_n, 0.0, 0.0, 0.0};
    const double pi = model.eigenfunction(i, x);
    acc += pi * pi * model.eigenfunction(j, x) * model.stationary_density(x[0]);
  }
  return acc / grid_n;
}

void check_below_threshold(const SpectralModel& model, double a) {
  if (!(a > 0.0 && a < 0.5))
    throw std::invalid_argument("limit kernel needs weight exponent in (0, 1/2)");
  const double lower = std::max(0, model.dim() - 2) / 4.0;
  if (!(a > lower))
    throw std::invalid_argument("weight exponent below the dimension threshold");
}

}  // namespace

TailBound limit_kernel_at(const SpectralModel& model, double a, const Point& x) {
  check_below_threshold(model, a);
  const double jlim = j_weight_limit(a);
  const double theta = 1.0 + 2.0 * a;
  if (model.flat()) {
    // Cross-mode corrections cancel within each cos/sin pair, so the
    // functional is the constant stationary value.
    (void)x;
    return {2.0 * a * a * jlim * flat_power_sum(model.dim(), theta), 0.0};
  }
  const auto& modes = model.modes();
  double main = 0.0;
  for (const auto& m : modes) main += std::pow(m.lambda, -theta);
  double corr = 0.0;
  const int grid = 4096;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const double c = triple_overlap(model, i, j, grid);
      if (std::abs(c) < 1e-12) continue;
      corr += c * model.eigenfunction(j, x) *
              cross_mode_kernel(a, modes[i].lambda, modes[j].lambda) / modes[i].lambda;
    }
  }
  const double value = 2.0 * a * a * (jlim * main + corr);
  // Estimated envelope for the unresolved spectrum (exact only on flat models).
  const double tail =
      2.0 * a * a * (jlim + 2.0 * std::tgamma(a)) * model.truncation_tail_bound(theta, 0.0) * 2.0;
  return {value, tail};
}

TailBound limit_kernel_mean(const SpectralModel& model, double a, const InitialLaw& nu) {
  check_below_threshold(model, a);
  if (model.flat() || nu.kind == InitialLaw::Kind::Stationary) {
    // Stationary averaging kills the eigenfunction corrections; on flat
    // models the functional is constant anyway.
    const double theta = 1.0 + 2.0 * a;
    if (model.flat())
      return {2.0 * a * a * j_weight_limit(a) * flat_power_sum(model.dim(), theta), 0.0};
    double main = 0.0;
    for (const auto& m : model.modes()) main += std::pow(m.lambda, -theta);
    const double tail = 2.0 * a * a * (j_weight_limit(a) + 2.0 * std::tgamma(a)) *
                        model.truncation_tail_bound(theta, 0.0) * 2.0;
    return {2.0 * a * a * j_weight_limit(a) * main, tail};
  }
  if (nu.kind == InitialLaw::Kind::Dirac) return limit_kernel_at(model, a, nu.point);
  if (!nu.density) throw std::invalid_argument("initial law lacks a density callable");
  const int grid = 512;
  double acc = 0.0;
  double mass = 0.0;
  double tail = 0.0;
  for (int g = 0; g < grid; ++g) {
    Point x{(g + 0.5) / grid, 0.0, 0.0, 0.0};
    const double w = nu.density(x) * model.stationary_density(x[0]) / grid;
    const TailBound h = limit_kernel_at(model, a, x);
    acc += w * h.value;
    tail = std::max(tail, h.tail);
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-6)
    throw std::invalid_argument("initial density does not integrate to 1");
  return {acc / mass, tail};
}

TailBound limit_kernel_windowed(const SpectralModel& model, double a, double T, double r) {
  check_below_threshold(model, a);
  if (!(T > 0.0) || !(r >= 0.0)) throw std::invalid_argument("bad window arguments");
  const double theta = 1.0 + 2.0 * a;
  double acc = 0.0;
  for (const auto& m : model.modes())
    acc += std::pow(m.lambda, -theta) * std::exp(-m.lambda * r) * j_weight(a, m.lambda * T);
  const double tail =
      j_weight_limit(a) * model.truncation_tail_bound(theta, r);
  return {2.0 * a * a * acc, 2.0 * a * a * tail};
}

WindowedKernelValue h_alpha_eval(const SpectralModel& model, double a, const Point& x, double T,
                                 double r_floor) {
  check_below_threshold(model, a);
  if (!(T >= model.mixing_horizon()) || !(r_floor > 0.0))
    throw std::invalid_argument("h_alpha_eval: bad window arguments");
  const auto& modes = model.modes();
  const double theta = 1.0 + 2.0 * a;
  const double jlim = j_weight_limit(a);
  double main = 0.0;
  double deficit = 0.0;
  for (const auto& m : modes) {
    const double w = std::pow(m.lambda, -theta) * std::exp(-m.lambda * r_floor);
    const double j = j_weight(a, m.lambda * T);
    main += w * j;
    deficit += w * std::max(0.0, jlim - j);
  }
  double corr = 0.0;
  if (!model.flat()) {
    const int grid = 4096;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      for (std::size_t j = 0; j < modes.size(); ++j) {
        const double c = triple_overlap(model, i, j, grid);
        if (std::abs(c) < 1e-12) continue;
        corr += c * model.eigenfunction(j, x) * std::exp(-modes[i].lambda * r_floor) *
                cross_mode_kernel_windowed(a, modes[i].lambda, modes[j].lambda, T) /
                modes[i].lambda;
      }
    }
  }
  WindowedKernelValue out;
  out.value = 2.0 * a * a * (main + corr);
  // Window defect of the enumerated modes (doubled off flat models to cover
  // the cross channel) plus the unresolved spectrum.
  const double mode_tail = jlim * model.truncation_tail_bound(theta, r_floor);
  out.window_error = 2.0 * a * a * ((model.flat() ? 1.0 : 2.0) * deficit + mode_tail);
  out.smoothing_error = 2.0 * stationary_l2_time_integral(model, a, T, r_floor);
  return out;
}

double limit_constant(const SpectralModel& model, double a, const InitialLaw& nu) {
  if (!(a > 0.0)) throw std::invalid_argument("weight exponent must be > 0");
  if (a < 0.5) return limit_kernel_mean(model, a, nu).value;
  double inv_sq;
  if (model.flat()) {
    inv_sq = flat_power_sum(model.dim(), 2.0);
  } else {
    const TailBound s = model.spectral_sum(2.0, 0.0);
    if (!(s.tail <= 2e-3 * s.value))
      throw std::runtime_error("limit_constant: raise the spectral cutoff");
    inv_sq = s.value;
  }
  if (a == 0.5) return 0.5 * inv_sq;
  return 2.0 * a * a / (2.0 * a - 1.0) * inv_sq;
}

MomentFit fit_moment_growth(const std::vector<double>& samples,
                            const std::vector<double>& orders) {
  if (samples.empty() || orders.size() < 2)
    throw std::invalid_argument("fit_moment_growth: need samples and >= 2 orders");
  MomentFit out;
  out.orders = orders;
  std::vector<double> lx, ly;
  for (double p : orders) {
    if (!(p > 0.0)) throw std::invalid_argument("moment orders must be > 0");
    double acc = 0.0;
    for (double s : samples) acc += std::pow(std::abs(s), p);
    const double norm = std::pow(acc / samples.size(), 1.0 / p);
    out.norms.push_back(norm);
    lx.push_back(std::log(p));
    ly.push_back(std::log(norm));
  }
  const LinearFit f = least_squares(lx, ly);
  out.exponent = f.slope;
  out.prefactor = std::exp(f.intercept);
  out.r2 = f.r2;
  return out;
}

TailFit fit_tail_decay(const std::vector<double>& samples, double scale, int levels) {
  if (samples.empty() || levels < 2 || !(scale > 0.0))
    throw std::invalid_argument("fit_tail_decay: bad arguments");
  TailFit out;
  const double n = static_cast<double>(samples.size());
  std::vector<double> lx, ly;
  for (int l = 1; l <= levels; ++l) {
    const double eta = l * std::sqrt(scale);
    std::size_t count = 0;
    for (double s : samples)
      if (std::abs(s) > eta) ++count;
    const double p = static_cast<double>(count) / n;
    out.eta.push_back(eta);
    out.prob.push_back(p);
    lx.push_back(eta * eta / scale);
    ly.push_back(std::log(std::max(p, 0.5 / n)));
  }
  const LinearFit f = least_squares(lx, ly);
  out.slope = f.slope;
  out.r2 = f.r2;
  // Smallest c with P <= c exp(-eta^2 / (c * scale)) at every level; the
  // right side is increasing in c, so bisect the largest per-level root.
  double c = 1e-9;
  for (std::size_t l = 0; l < out.eta.size(); ++l) {
    if (out.prob[l] <= 0.0) continue;
    const double u = out.eta[l] * out.eta[l] / scale;
    double lo = 1e-9, hi = 1e9;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (mid * std::exp(-u / mid) >= out.prob[l])
        hi = mid;
      else
        lo = mid;
    }
    c = std::max(c, hi);
  }
  out.envelope_c = c;
  return out;
}

}  // namespace ergoflow
