#pragma once

#include "ergoflow/diffusion.hpp"
#include "ergoflow/spectral.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace ergoflow {

// Probability measure on the unit circle given by weighted atoms.
// Positions live in [0, 1), are sorted increasingly with coincident atoms
// merged, and weights are positive and sum to one.
struct CircularMeasure {
  std::vector<double> position;
  std::vector<double> weight;

  std::size_t size() const { return position.size(); }
};

// Builds a sorted, normalized, deduplicated atomic measure. Positions are
// wrapped to [0, 1); weights may be any positive numbers (a uniform weight
// is used when the vector is empty); weights of coinciding atoms are added.
CircularMeasure make_circular_measure(std::vector<double> positions,
                                      std::vector<double> weights = {});

// Atoms of a simulated weighted occupation measure (dimension 1 only).
CircularMeasure atoms_of(const EmpiricalAtoms& atoms);

// K equal-mass atoms at the quantile midpoints of the stationary measure.
CircularMeasure equal_mass_quantiles(const SpectralModel& model, std::size_t k);

// Squared 2-Wasserstein distance on the circle via the shifted quantile
// coupling: the cost as a function of the mass shift is convex and piecewise
// linear, minimized by golden-section search on the shift; below 512 total
// atoms the exact minimizing breakpoint is located instead (the minimum of a
// convex piecewise-linear function sits on a breakpoint). When theta_out is
// set it receives the optimal shift.
double w2sq_circle(const CircularMeasure& a, const CircularMeasure& b,
                   double* theta_out = nullptr);

// Same value, obtained by evaluating the shifted-quantile cost at every one
// of its breakpoints. Quadratic in the atom count; intended for validation.
double w2sq_circle_scan(const CircularMeasure& a, const CircularMeasure& b);

// Same value, obtained by solving the discrete transport problem with the
// squared geodesic cost using the transportation simplex. Limited to
// |a| * |b| <= 10^4 arcs; intended for validation.
double w2sq_circle_lp(const CircularMeasure& a, const CircularMeasure& b);

// Probability measure on the d-dimensional unit torus grid with n bins per
// axis, stored row major (axis 0 slowest).
struct GridMeasure {
  int dim = 1;
  int bins = 0;
  std::vector<double> weight;

  std::size_t size() const { return weight.size(); }
};

// Bins atoms onto the torus grid, splitting each atom linearly over the
// 2^d neighbouring cells (periodic cloud-in-cell).
GridMeasure bin_atoms(const EmpiricalAtoms& atoms, int dim, int bins);

// Cell masses of the stationary measure of the model on the same grid.
GridMeasure grid_measure_of_stationary(const SpectralModel& model, int bins);

// Cell masses proportional to a nonnegative density on the torus, sampled at
// cell midpoints (tiny negative excursions are clamped to zero).
GridMeasure grid_measure_from_density(int dim, int bins,
                                      const std::function<double(const Point&)>& density);

struct SinkhornOptions {
  double epsilon = 1e-3;  // >= 1e-4, the floor of the supported range
  double epsilon_start = 0.1;
  int max_iterations = 4000;
  double tolerance = 1e-9;  // L1 marginal violation target
};

struct SinkhornResult {
  double value = 0.0;     // debiased divergence
  double ot_value = 0.0;  // raw entropic cost of the cross problem, nonincreasing in epsilon
  double epsilon = 0.0;
  int iterations = 0;
  double marginal_error = 0.0;  // final L1 marginal violation (worst of the three runs)
  bool converged = false;
};

// Debiased entropic transport cost between two grid measures with the
// squared geodesic cost, computed in the log domain with axis-separable
// softmin sweeps and a halving schedule on the regularization. Iterations
// stop when the L1 marginal violation drops below tolerance; running out of
// max_iterations is reported through converged/marginal_error, not thrown.
SinkhornResult sinkhorn_divergence(const GridMeasure& a, const GridMeasure& b,
                                   const SinkhornOptions& opts = {});

// Spectral upper bounds for the squared 2-Wasserstein distance between the
// damped empirical density f = 1 + sum_i e^{-lambda_i r} a_i phi_i and the
// stationary measure, with U the Poisson potential of f - 1. basic bounds
// 4 integral |grad U|^2 / f through 1/f <= 1/min f, giving
// 4 sum_i lambda_i^{-1} e^{-2 lambda_i r} a_i^2 / min f; log_mean is the
// sharper grid quadrature of |grad U|^2 / M(f, 1) with the logarithmic mean
// M. Both require f > 0 on the grid; otherwise applicable is false and the
// bounds are +infinity.
struct SurrogateReport {
  double basic = 0.0;
  double log_mean = 0.0;
  double min_density = 0.0;
  bool applicable = false;
};
SurrogateReport w2_upper_surrogate(const SpectralModel& model, const EmpiricalModes& em,
                                   double r, int grid_n = 0);

// The heat semigroup applied to an atomic measure: the smoothed density is
// tabulated at grid-cell midpoints and returned as the corresponding atomic
// measure (d = 1 models; flat models use the wrapped-Gaussian kernel).
CircularMeasure heat_flow_measure(const SpectralModel& model, const CircularMeasure& nu,
                                  double t, int grid_n = 1024);

// Transport contraction along the heat flow, by exact circular OT on the
// smoothed measures: self_cost is W2^2 between the flowed and the original
// nu0 (bounded by fitted_c * t); pair_after is W2 between the flowed pair
// against the envelope e^{-K t} * pair_before + 2/grid_n, K the model's
// curvature lower bound.
struct ContractionReport {
  std::vector<double> time;
  std::vector<double> self_cost;
  std::vector<double> pair_before;
  std::vector<double> pair_after;
  double fitted_c = 0.0;
  double curvature = 0.0;
  bool pair_ok = true;
};
ContractionReport heat_flow_contraction(const SpectralModel& model, const CircularMeasure& nu0,
                                        const CircularMeasure& nu1,
                                        const std::vector<double>& times, int grid_n = 1024);

}  // namespace ergoflow
