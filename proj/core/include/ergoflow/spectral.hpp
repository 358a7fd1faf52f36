#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

// Spectral models of the underlying state space: flat unit tori in dimension
// 1..4 and a circle carrying a smooth log-density ("weighted circle"). A model
// owns an enumerated window of Laplacian (resp. weighted generator)
// eigenmodes up to a cutoff, evaluates eigenfunctions and heat kernels, and
// computes damped spectral sums with certified truncation-tail bounds.

namespace ergoflow {

using Point = std::array<double, 4>;  // first dim() coordinates used, values in [0,1)

enum class Parity : std::uint8_t { Cos = 0, Sin = 1 };

enum class HeatKernelMethod : std::uint8_t { Spectral, Wrapped };

struct WaveVector {
  std::array<int, 4> k{0, 0, 0, 0};
};

// One real eigenmode, unit-normalized in L^2 of the stationary measure.
// Flat models carry the wave vector (one representative per {k,-k} pair,
// first nonzero component positive) and the cos/sin parity; the weighted
// circle carries the eigensolver index instead (wave/parity unused).
struct SpectralMode {
  double lambda = 0.0;
  WaveVector wave;
  Parity parity = Parity::Cos;
  int index = -1;
};

// A truncated sum plus a certified upper bound on what the truncation lost.
struct TailBound {
  double value = 0.0;
  double tail = 0.0;
  // Returns value after checking tail <= tol; throws std::runtime_error otherwise.
  double certified(double tol = 1e-12) const;
};

class SpectralModel {
 public:
  virtual ~SpectralModel() = default;

  int dim() const { return dim_; }
  bool flat() const { return flat_; }
  double lambda_cutoff() const { return lambda_cutoff_; }
  const std::vector<SpectralMode>& modes() const { return modes_; }
  std::size_t mode_count() const { return modes_.size(); }
  double lambda1() const;          // smallest nonzero eigenvalue
  double mixing_horizon() const;   // 2 * max(1, 1/lambda1)

  virtual double eigenfunction(std::size_t mode, const Point& x) const = 0;
  virtual double eigenfunction_derivative(std::size_t mode, const Point& x, int axis) const = 0;

  // Stationary density w.r.t. Lebesgue on [0,1) (1 on flat models; d=1 only
  // for the weighted circle), the drift of the associated diffusion, and the
  // Bakry-Emery curvature lower bound (0 flat, min of -V'' weighted).
  virtual double stationary_density(double x) const = 0;
  virtual double drift(double x) const = 0;
  virtual double curvature_lower_bound() const = 0;

  // Transition density w.r.t. the stationary measure. The spectral method
  // sums the enumerated window (accurate once e^{-cutoff * t} is negligible);
  // the wrapped-Gaussian method (flat models only) is accurate at all t > 0.
  virtual double heat_kernel(double t, const Point& x, const Point& y,
                             HeatKernelMethod method = HeatKernelMethod::Spectral) const = 0;

  // sum over nonzero modes of lambda^{-theta} e^{-lambda r}, the same sum
  // weighted by eigenfunction(x)^2, and the variant with an extra log(lambda)
  // factor. Computed over the enumerated window; .tail bounds the rest of the
  // spectrum through an eigenvalue-counting estimate. On flat models the
  // theta = 0 sum is evaluated exactly through the theta function (tail 0).
  TailBound spectral_sum(double theta, double r) const;
  TailBound spectral_sum_at(double theta, double r, const Point& x) const;
  TailBound spectral_sum_log(double theta, double r) const;

  // (4 pi s)^{d/2} * trace of the heat semigroup (equilibrium mode included);
  // tends to 1 as s -> 0. Flat models evaluate it exactly via theta functions;
  // the weighted circle uses its full discrete spectrum, trustworthy for
  // s down to ~10 / (largest discrete eigenvalue).
  virtual double trace_ratio(double s) const = 0;

  // Certified upper bound on sum_{lambda > cutoff} lambda^{-theta} e^{-lambda r}.
  virtual double truncation_tail_bound(double theta, double r) const = 0;

  struct Diagnostics {
    // Largest deviation of the mode Gram matrix from the identity, measured
    // in the model's own quadrature (identically 0 on flat models, where the
    // Gram integrals are closed-form Kronecker deltas).
    double orthonormality_defect = 0.0;
    // Discrete eigenvalue of the equilibrium state (0 exactly on flat models).
    double ground_eigenvalue = 0.0;
  };
  virtual Diagnostics diagnostics() const = 0;

 protected:
  int dim_ = 1;
  bool flat_ = true;
  double lambda_cutoff_ = 0.0;
  std::vector<SpectralMode> modes_;

  virtual double pointwise_tail_factor() const = 0;  // sup phi^2 envelope for _at sums
};

// Enumerates all modes with 0 < lambda <= lambda_cutoff. Throws
// std::length_error beyond 5e6 modes.
std::shared_ptr<const SpectralModel> make_flat_torus(int dim, double lambda_cutoff);

// Circle with stationary density proportional to e^{potential}. The
// symmetrized generator is discretized by second-order central differences on
// a uniform grid of size grid_n (>= 256) and diagonalized densely; discrete
// eigenvalues track the continuum to ~1e-4 relative for lambda <= 200 at
// grid_n = 512.
std::shared_ptr<const SpectralModel> make_weighted_circle(std::function<double(double)> potential,
                                                          int grid_n, double lambda_cutoff);

// sum_{k in Z} e^{-4 pi^2 k^2 s}; switches to the modular-dual form below
// s = 1/(4 pi), accurate to ~1e-15 relative for all s > 0.
double theta_sum(double s);

// sum over nonzero flat-torus modes of lambda^{-theta}, theta > dim/2,
// via the Mellin transform of the heat trace (independent of the mode
// enumeration; accuracy ~1e-10 relative).
double flat_power_sum(int dim, double theta);

// sum over nonzero flat-torus modes of lambda^{-2} e^{-2 r lambda}, computed
// through the heat-trace integral of (theta_sum(s)^dim - 1) against (s - 2r)
// on [2r, inf). Valid for r > 0 in dim 4 (where the r = 0 sum diverges) and
// r >= 0 below.
double flat_damped_inverse_square_sum(int dim, double r);

// Fixpoint of L = (1/r_min) * log(1e12 * max(1, L^theta)): cutoff making the
// damped tail beyond L negligible at damping r_min.
double lambda_cutoff_for(double r_min, double theta);

// Assembles the weighted-circle discretization and reports the asymmetry of
// the operator matrix, max |H - H^T| (the stencil is symmetric, so anything
// nonzero flags an assembly defect).
double weighted_circle_symmetry_defect(const std::function<double(double)>& potential, int grid_n);

double wrap_unit(double x);  // reduce to [0, 1)

}  // namespace ergoflow
