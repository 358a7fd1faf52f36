#include "ergoflow/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ergoflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPiSq = 4.0 * kPi * kPi;
constexpr std::size_t kModeCap = 5'000'000;

double ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    case 4: return kPi * kPi / 2.0;
    default: throw std::invalid_argument("dimension must be 1..4");
  }
}

// Upper bound on I(q) = Integral_L^inf s^q e^{-r s} ds, r > 0, by repeatedly
// peeling s^q <= L^{q-j} s^j factors.
double tail_integral_bound(double q, double r, double L) {
  if (q <= 0.0) return std::pow(L, q) * std::exp(-r * L) / r;
  return std::pow(L, q) * std::exp(-r * L) / r + (q / r) * tail_integral_bound(q - 1.0, r, L);
}

// Bound on sum over eigenvalues above L of lambda^{-theta} e^{-lambda r},
// given the counting bound N(s) <= A s^p + B. Derived from
// sum = Integral f dN <= Integral (-f') N_bar with f(s) = s^{-theta} e^{-rs},
// which needs -f' >= 0 on [L, inf), i.e. theta + r s >= 0 there.
double counting_tail_bound(double A, double p, double B, double theta, double r, double L) {
  if (L <= 0.0) return std::numeric_limits<double>::infinity();
  if (theta < 0.0 && theta + r * L < 0.0) return std::numeric_limits<double>::infinity();
  if (r <= 0.0) {
    if (theta <= p) return std::numeric_limits<double>::infinity();
    return A * theta / (theta - p) * std::pow(L, p - theta) + B * std::pow(L, -theta);
  }
  const double t1 = A * (theta * tail_integral_bound(p - theta - 1.0, r, L) +
                         r * tail_integral_bound(p - theta, r, L));
  const double t2 = B * (theta * tail_integral_bound(-theta - 1.0, r, L) +
                         r * tail_integral_bound(-theta, r, L));
  return t1 + t2;
}

}  // namespace

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;
  return r;
}

double TailBound::certified(double tol) const {
  if (!(tail <= tol)) throw std::runtime_error("spectral sum truncation tail exceeds tolerance");
  return value;
}

double theta_sum(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("theta_sum: s must be > 0");
  if (s >= 1.0 / (4.0 * kPi)) {
    double acc = 1.0;
    for (int k = 1;; ++k) {
      const double term = std::exp(-kTwoPiSq * static_cast<double>(k) * k * s);
      acc += 2.0 * term;
      if (term < 1e-17 * acc) break;
    }
    return acc;
  }
  // Modular dual: Theta(s) = (4 pi s)^{-1/2} sum_m e^{-m^2 / (4 s)}.
  double acc = 1.0;
  for (int m = 1;; ++m) {
    const double term = std::exp(-static_cast<double>(m) * m / (4.0 * s));
    acc += 2.0 * term;
    if (term < 1e-17 * acc) break;
  }
  return acc / std::sqrt(4.0 * kPi * s);
}

double flat_power_sum(int dim, double theta) {
  if (dim < 1 || dim > 4) throw std::invalid_argument("flat_power_sum: dimension must be 1..4");
  const double half_d = 0.5 * dim;
  if (!(theta > half_d)) throw std::invalid_argument("flat_power_sum: needs theta > dim/2");
  const auto integrand = [dim, theta](double s) {
    return std::pow(s, theta - 1.0) * (std::pow(theta_sum(s), dim) - 1.0);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double head = ts.integrate(integrand, 0.0, 0.25, 1e-12);
  const double mid = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.25, 6.0, 12, 1e-12);
  // Beyond s = 6 the integrand is below s^{theta-1} e^{-4 pi^2 s} * 2 dim
  // with 4 pi^2 * 6 = 237; negligible at double precision.
  return (head + mid) / std::tgamma(theta);
}

double flat_damped_inverse_square_sum(int dim, double r) {
  if (dim < 1 || dim > 4)
    throw std::invalid_argument("flat_damped_inverse_square_sum: dimension must be 1..4");
  if (!(r >= 0.0)) throw std::invalid_argument("flat_damped_inverse_square_sum: r must be >= 0");
  if (r == 0.0 && dim >= 4)
    throw std::invalid_argument("flat_damped_inverse_square_sum: diverges at r = 0 in dim 4");
  const double a = 2.0 * r;
  const auto f = [dim, a](double s) {
    return (std::pow(theta_sum(s), dim) - 1.0) * (s - a);
  };
  const double s_hi = 6.0;
  if (r == 0.0) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double head = ts.integrate(f, 0.0, 0.25, 1e-12);
    const double mid = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.25, s_hi, 12, 1e-12);
    return head + mid;
  }
  // Integrate on the log scale so the many decades between 2r and O(1)
  // resolve adaptively.
  const auto g = [&f](double u) {
    const double s = std::exp(u);
    return f(s) * s;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g, std::log(a), std::log(s_hi), 15, 1e-11);
}

double lambda_cutoff_for(double r_min, double theta) {
  if (!(r_min > 0.0)) throw std::invalid_argument("lambda_cutoff_for: r_min must be > 0");
  double L = 10.0 / r_min;
  for (int i = 0; i < 200; ++i) {
    const double next = (1.0 / r_min) * std::log(1e12 * std::max(1.0, std::pow(L, theta)));
    if (std::abs(next - L) <= 1e-9 * std::max(1.0, L)) return next;
    L = next;
  }
  return L;
}

double SpectralModel::lambda1() const {
  if (modes_.empty()) throw std::runtime_error("spectral model has no modes below the cutoff");
  return modes_.front().lambda;
}

double SpectralModel::mixing_horizon() const { return 2.0 * std::max(1.0, 1.0 / lambda1()); }

TailBound SpectralModel::spectral_sum(double theta, double r) const {
  if (!(r >= 0.0)) throw std::invalid_argument("spectral_sum: r must be >= 0");
  if (flat_ && theta == 0.0) {
    if (!(r > 0.0)) throw std::invalid_argument("spectral_sum: theta = 0 needs r > 0");
    return {std::pow(theta_sum(r), dim_) - 1.0, 0.0};
  }
  double acc = 0.0;
  for (const auto& m : modes_) acc += std::pow(m.lambda, -theta) * std::exp(-m.lambda * r);
  return {acc, truncation_tail_bound(theta, r)};
}

TailBound SpectralModel::spectral_sum_at(double theta, double r, const Point& x) const {
  if (!(r >= 0.0)) throw std::invalid_argument("spectral_sum_at: r must be >= 0");
  double acc = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& m = modes_[i];
    const double phi = eigenfunction(i, x);
    acc += std::pow(m.lambda, -theta) * std::exp(-m.lambda * r) * phi * phi;
  }
  return {acc, truncation_tail_bound(theta, r) * pointwise_tail_factor()};
}

TailBound SpectralModel::spectral_sum_log(double theta, double r) const {
  if (!(r >= 0.0)) throw std::invalid_argument("spectral_sum_log: r must be >= 0");
  double acc = 0.0;
  for (const auto& m : modes_)
    acc += std::log(m.lambda) * std::pow(m.lambda, -theta) * std::exp(-m.lambda * r);
  // log(s) <= (4/e) s^{1/4} for s > 0 folds the log factor into a power.
  const double tail = (4.0 / std::numbers::e) * truncation_tail_bound(theta - 0.25, r) +
                      truncation_tail_bound(theta + 1.0, r);
  return {acc, tail};
}

namespace {

bool canonical_representative(const std::array<int, 4>& k, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (k[i] > 0) return true;
    if (k[i] < 0) return false;
  }
  return false;  // zero vector
}

bool wave_less(const WaveVector& a, const WaveVector& b) {
  return std::lexicographical_compare(a.k.begin(), a.k.end(), b.k.begin(), b.k.end());
}

struct ModeOrder {
  bool operator()(const SpectralMode& a, const SpectralMode& b) const {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (wave_less(a.wave, b.wave)) return true;
    if (wave_less(b.wave, a.wave)) return false;
    return a.parity < b.parity;
  }
};

class FlatTorusModel final : public SpectralModel {
 public:
  FlatTorusModel(int dim, double cutoff) {
    if (dim < 1 || dim > 4) throw std::invalid_argument("flat torus dimension must be 1..4");
    if (!(cutoff >= kTwoPiSq)) throw std::invalid_argument("cutoff below the first eigenvalue");
    dim_ = dim;
    flat_ = true;
    lambda_cutoff_ = cutoff;
    const int K = static_cast<int>(std::floor(std::sqrt(cutoff) / (2.0 * kPi)));
    const double points = std::pow(2.0 * K + 1.0, dim);
    if (points > 2.2e7) throw std::length_error("mode enumeration exceeds the cap");
    std::array<int, 4> k{0, 0, 0, 0};
    for (int i = 0; i < dim; ++i) k[i] = -K;
    while (true) {
      if (canonical_representative(k, dim)) {
        long ksq = 0;
        for (int i = 0; i < dim; ++i) ksq += static_cast<long>(k[i]) * k[i];
        const double lambda = kTwoPiSq * static_cast<double>(ksq);
        if (lambda <= cutoff) {
          SpectralMode m;
          m.lambda = lambda;
          m.wave.k = k;
          m.parity = Parity::Cos;
          modes_.push_back(m);
          m.parity = Parity::Sin;
          modes_.push_back(m);
        }
      }
      int axis = 0;
      for (; axis < dim; ++axis) {
        if (k[axis] < K) {
          ++k[axis];
          break;
        }
        k[axis] = -K;
      }
      if (axis == dim) break;
    }
    if (modes_.size() > kModeCap) throw std::length_error("mode count exceeds the cap");
    std::sort(modes_.begin(), modes_.end(), ModeOrder{});
  }

  double eigenfunction(std::size_t mode, const Point& x) const override {
    const auto& m = modes_.at(mode);
    double a = 0.0;
    for (int i = 0; i < dim_; ++i) a += m.wave.k[i] * x[i];
    a *= 2.0 * kPi;
    return std::numbers::sqrt2 * (m.parity == Parity::Cos ? std::cos(a) : std::sin(a));
  }

  double eigenfunction_derivative(std::size_t mode, const Point& x, int axis) const override {
    const auto& m = modes_.at(mode);
    if (axis < 0 || axis >= dim_) throw std::invalid_argument("axis out of range");
    double a = 0.0;
    for (int i = 0; i < dim_; ++i) a += m.wave.k[i] * x[i];
    a *= 2.0 * kPi;
    const double scale = std::numbers::sqrt2 * 2.0 * kPi * m.wave.k[axis];
    return m.parity == Parity::Cos ? -scale * std::sin(a) : scale * std::cos(a);
  }

  double stationary_density(double) const override { return 1.0; }
  double drift(double) const override { return 0.0; }
  double curvature_lower_bound() const override { return 0.0; }

  double heat_kernel(double t, const Point& x, const Point& y,
                     HeatKernelMethod method) const override {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be > 0");
    if (method == HeatKernelMethod::Spectral) {
      double acc = 1.0;
      for (std::size_t i = 0; i < modes_.size(); ++i)
        acc += std::exp(-modes_[i].lambda * t) * eigenfunction(i, x) * eigenfunction(i, y);
      return acc;
    }
    double prod = 1.0;
    for (int i = 0; i < dim_; ++i) prod *= wrapped_axis(x[i] - y[i], t);
    return prod;
  }

  double trace_ratio(double s) const override {
    return std::pow(4.0 * kPi * s, 0.5 * dim_) * std::pow(theta_sum(s), dim_);
  }

  Diagnostics diagnostics() const override { return {}; }

  double truncation_tail_bound(double theta, double r) const override {
    // Modes below s are lattice points in the ball of radius sqrt(s)/(2 pi);
    // (a+b)^d <= 2^{d-1}(a^d + b^d) splits the +sqrt(d)/2 lattice inflation.
    const double half_d = 0.5 * dim_;
    const double vol = ball_volume(dim_);
    const double A = vol * std::pow(2.0, dim_ - 1.0) * std::pow(2.0 * kPi, -dim_);
    const double B = vol * std::pow(2.0, dim_ - 1.0) * std::pow(0.25 * dim_, half_d);
    return counting_tail_bound(A, half_d, B, theta, r, lambda_cutoff_);
  }

 protected:
  double pointwise_tail_factor() const override { return 2.0; }

 private:
  double wrapped_axis(double delta, double t) const {
    const double d = delta - std::nearbyint(delta);
    double acc = 0.0;
    for (int m = 0;; ++m) {
      const double up = std::exp(-(d + m) * (d + m) / (4.0 * t));
      const double down = m == 0 ? 0.0 : std::exp(-(d - m) * (d - m) / (4.0 * t));
      acc += up + down;
      if (up + down < 1e-18 * acc && m >= 1) break;
    }
    return acc / std::sqrt(4.0 * kPi * t);
  }
};

// Periodic Catmull-Rom interpolation on a uniform unit-circle grid.
double interp_periodic(const std::vector<double>& g, double x) {
  const int n = static_cast<int>(g.size());
  const double u = wrap_unit(x) * n;
  int j = static_cast<int>(u);
  if (j >= n) j = n - 1;
  const double f = u - j;
  const double p0 = g[(j - 1 + n) % n];
  const double p1 = g[j];
  const double p2 = g[(j + 1) % n];
  const double p3 = g[(j + 2) % n];
  return p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                        f * (3.0 * (p1 - p2) + p3 - p0)));
}

double interp_periodic_derivative(const std::vector<double>& g, double x) {
  const int n = static_cast<int>(g.size());
  const double u = wrap_unit(x) * n;
  int j = static_cast<int>(u);
  if (j >= n) j = n - 1;
  const double f = u - j;
  const double p0 = g[(j - 1 + n) % n];
  const double p1 = g[j];
  const double p2 = g[(j + 1) % n];
  const double p3 = g[(j + 2) % n];
  const double d = 0.5 * (p2 - p0) + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                   1.5 * f * f * (3.0 * (p1 - p2) + p3 - p0);
  return d * n;
}

// Ground-state similarity transform: the generator is unitarily equivalent
// to -d^2/dx^2 + W with W = V'^2/4 + V''/2, discretized by the standard
// three-point stencil on a uniform periodic grid.
struct CircleDiscretization {
  Eigen::MatrixXd H;
  std::vector<double> V;
  std::vector<double> vprime;
  std::vector<double> vpp;
  double h = 0.0;
  double potential_floor = 0.0;
};

CircleDiscretization discretize_circle(const std::function<double(double)>& potential, int n) {
  if (n < 256) throw std::invalid_argument("weighted circle grid must have >= 256 points");
  CircleDiscretization d;
  d.h = 1.0 / n;
  d.V.resize(n);
  for (int j = 0; j < n; ++j) d.V[j] = potential(j * d.h);
  d.vprime.resize(n);
  d.vpp.resize(n);
  for (int j = 0; j < n; ++j) {
    const double vm = d.V[(j - 1 + n) % n];
    const double vp = d.V[(j + 1) % n];
    d.vprime[j] = (vp - vm) / (2.0 * d.h);
    d.vpp[j] = (vp - 2.0 * d.V[j] + vm) / (d.h * d.h);
  }
  d.H = Eigen::MatrixXd::Zero(n, n);
  const double inv_h2 = 1.0 / (d.h * d.h);
  for (int j = 0; j < n; ++j) {
    const double w = 0.25 * d.vprime[j] * d.vprime[j] + 0.5 * d.vpp[j];
    d.H(j, j) = 2.0 * inv_h2 + w;
    d.H(j, (j + 1) % n) += -inv_h2;
    d.H(j, (j - 1 + n) % n) += -inv_h2;
    d.potential_floor = std::min(d.potential_floor, w);
  }
  return d;
}

class WeightedCircleModel final : public SpectralModel {
 public:
  WeightedCircleModel(std::function<double(double)> potential, int grid_n, double cutoff)
      : potential_(std::move(potential)) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be > 0");
    dim_ = 1;
    flat_ = false;
    lambda_cutoff_ = cutoff;
    const int n = grid_n;
    CircleDiscretization disc = discretize_circle(potential_, n);
    const double h = disc.h;
    const std::vector<double>& V = disc.V;
    vprime_ = disc.vprime;
    potential_floor_ = disc.potential_floor;
    curvature_ = -*std::max_element(disc.vpp.begin(), disc.vpp.end());
    double zsum = 0.0;
    for (int j = 0; j < n; ++j) zsum += std::exp(V[j]);
    z_ = h * zsum;
    quad_weight_.resize(n);
    for (int j = 0; j < n; ++j) quad_weight_[j] = h * std::exp(V[j]) / z_;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(disc.H);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    ground_eigenvalue_ = ev(0);
    if (!(std::abs(ev(0)) < 0.5 * ev(1)))
      throw std::runtime_error("ground eigenvalue does not separate from the spectral gap");
    full_spectrum_.assign(ev.data() + 1, ev.data() + n);

    const double scale = std::sqrt(z_ / h);
    for (int i = 1; i < n && ev(i) <= cutoff; ++i) {
      SpectralMode m;
      m.lambda = ev(i);
      m.index = i;
      modes_.push_back(m);
      std::vector<double> phi(n);
      // Pick the sign from the first robustly nonzero component.
      double flip = 0.0;
      const double amax = es.eigenvectors().col(i).cwiseAbs().maxCoeff();
      for (int j = 0; j < n; ++j) {
        if (std::abs(es.eigenvectors()(j, i)) > 0.1 * amax) {
          flip = es.eigenvectors()(j, i) > 0 ? 1.0 : -1.0;
          break;
        }
      }
      for (int j = 0; j < n; ++j)
        phi[j] = flip * scale * std::exp(-0.5 * V[j]) * es.eigenvectors()(j, i);
      grids_.push_back(std::move(phi));
    }
    sup_sq_ = 2.0;
    for (const auto& g : grids_) {
      double s = 0.0;
      for (double v : g) s = std::max(s, v * v);
      sup_sq_ = std::max(sup_sq_, s);
    }
  }

  double eigenfunction(std::size_t mode, const Point& x) const override {
    return interp_periodic(grids_.at(mode), x[0]);
  }

  double eigenfunction_derivative(std::size_t mode, const Point& x, int axis) const override {
    if (axis != 0) throw std::invalid_argument("axis out of range");
    return interp_periodic_derivative(grids_.at(mode), x[0]);
  }

  double stationary_density(double x) const override { return std::exp(potential_(wrap_unit(x))) / z_; }
  double drift(double x) const override { return interp_periodic(vprime_, x); }
  double curvature_lower_bound() const override { return curvature_; }

  double heat_kernel(double t, const Point& x, const Point& y,
                     HeatKernelMethod method) const override {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be > 0");
    if (method != HeatKernelMethod::Spectral)
      throw std::invalid_argument("weighted circle supports the spectral heat kernel only");
    double acc = 1.0;
    for (std::size_t i = 0; i < modes_.size(); ++i)
      acc += std::exp(-modes_[i].lambda * t) * eigenfunction(i, x) * eigenfunction(i, y);
    return acc;
  }

  double trace_ratio(double s) const override {
    double acc = 1.0;
    for (double lam : full_spectrum_) acc += std::exp(-lam * s);
    return std::sqrt(4.0 * kPi * s) * acc;
  }

  double truncation_tail_bound(double theta, double r) const override {
    // Eigenvalues dominate the flat ones shifted by min W, so the flat d=1
    // counting bound with that shift applies.
    const double shift = std::max(0.0, -potential_floor_);
    const double A = 1.0 / kPi;
    const double B = 2.0 + std::sqrt(shift) / kPi;
    return counting_tail_bound(A, 0.5, B, theta, r, lambda_cutoff_);
  }

  Diagnostics diagnostics() const override {
    Diagnostics d;
    d.ground_eigenvalue = ground_eigenvalue_;
    for (std::size_t i = 0; i < grids_.size(); ++i) {
      for (std::size_t l = 0; l <= i; ++l) {
        double g = 0.0;
        for (std::size_t j = 0; j < quad_weight_.size(); ++j)
          g += quad_weight_[j] * grids_[i][j] * grids_[l][j];
        const double want = i == l ? 1.0 : 0.0;
        d.orthonormality_defect = std::max(d.orthonormality_defect, std::abs(g - want));
      }
    }
    return d;
  }

 protected:
  double pointwise_tail_factor() const override { return 1.5 * sup_sq_; }

 private:
  std::function<double(double)> potential_;
  std::vector<double> vprime_;
  std::vector<double> quad_weight_;
  std::vector<std::vector<double>> grids_;
  std::vector<double> full_spectrum_;
  double z_ = 1.0;
  double curvature_ = 0.0;
  double potential_floor_ = 0.0;
  double ground_eigenvalue_ = 0.0;
  double sup_sq_ = 2.0;
};

}  // namespace

std::shared_ptr<const SpectralModel> make_flat_torus(int dim, double lambda_cutoff) {
  return std::make_shared<FlatTorusModel>(dim, lambda_cutoff);
}

std::shared_ptr<const SpectralModel> make_weighted_circle(std::function<double(double)> potential,
                                                          int grid_n, double lambda_cutoff) {
  return std::make_shared<WeightedCircleModel>(std::move(potential), grid_n, lambda_cutoff);
}

double weighted_circle_symmetry_defect(const std::function<double(double)>& potential,
                                       int grid_n) {
  const CircleDiscretization d = discretize_circle(potential, grid_n);
  return (d.H - d.H.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace ergoflow
