#pragma once

#include "ergoflow/rng.hpp"
#include "ergoflow/spectral.hpp"

#include <functional>
#include <vector>

// Simulation of the stationary-measure-reversible diffusion on a spectral
// model (Brownian motion on flat tori, Langevin dynamics on the weighted
// circle) and of the power-weighted occupation measure
//   mu_t = (a / t^a) Integral_0^t delta_{X_s} s^{a-1} ds.
// The clock change u = s^a turns the weight into the uniform measure on
// [0, t^a]; sampling at the m midpoints of that interval gives m atoms of
// weight exactly 1/m each.

namespace ergoflow {

struct InitialLaw {
  enum class Kind { Stationary, Dirac, Density };
  Kind kind = Kind::Stationary;
  Point point{0.0, 0.0, 0.0, 0.0};
  std::function<double(const Point&)> density;  // w.r.t. the stationary measure

  static InitialLaw stationary() { return {}; }
  static InitialLaw dirac(const Point& x) { return {Kind::Dirac, x, nullptr}; }
  static InitialLaw from_density(std::function<double(const Point&)> f) {
    return {Kind::Density, {}, std::move(f)};
  }
};

struct PathConfig {
  double weight_exponent = 1.0;  // exponent a of the s^{a-1} weighting
  double horizon = 100.0;        // t
  std::size_t samples = 20000;   // m
  double em_substep = 1e-3;      // Euler step bound, weighted circle only
  InitialLaw start;
};

// Coefficients of the weighted occupation measure against every model mode,
// i.e. a_i = mu_t(phi_i). mass is the coefficient against the constant
// function, accumulated the same way (count / m, hence exactly 1).
struct EmpiricalModes {
  std::vector<double> coeff;
  double mass = 1.0;
  double weight_exponent = 1.0;
  double horizon = 0.0;
  std::size_t samples = 0;
};

// Atom positions of the weighted occupation measure; every atom carries the
// same weight 1/m.
struct EmpiricalAtoms {
  std::vector<Point> position;
  double weight = 0.0;
  double weight_exponent = 1.0;
  double horizon = 0.0;
};

struct PathOutput {
  EmpiricalModes modes;
  EmpiricalAtoms atoms;
};

// One path, one pass; requests control which outputs are filled.
PathOutput simulate_weighted_path(const SpectralModel& model, const PathConfig& cfg,
                                  RandomStream& rng, bool want_modes, bool want_atoms);

EmpiricalModes simulate_weighted_modes(const SpectralModel& model, const PathConfig& cfg,
                                       RandomStream& rng);
EmpiricalAtoms simulate_weighted_atoms(const SpectralModel& model, const PathConfig& cfg,
                                       RandomStream& rng);

// Sampling times s_j = ((j - 1/2) t^a / m)^{1/a}, j = 1..m.
std::vector<double> sample_times(double weight_exponent, double horizon, std::size_t samples);

// Exact E[a_i^2] for a mode of eigenvalue lambda under the stationary start
// and the m-point sampling rule above (O(m) geometric accumulation). This is
// the discrete counterpart of the continuous-time second-moment formula and
// the bias-free oracle for the simulator.
double discrete_mode_second_moment(double lambda, double weight_exponent, double horizon,
                                   std::size_t samples);

// Draws one point from the initial law (used by tests; simulate_* call it).
Point draw_initial(const SpectralModel& model, const InitialLaw& law, RandomStream& rng);

}  // namespace ergoflow
