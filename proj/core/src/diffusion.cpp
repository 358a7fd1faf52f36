#include "ergoflow/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <numbers>
#include <stdexcept>

namespace ergoflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_config(const PathConfig& cfg) {
  if (!(cfg.weight_exponent > 0.0)) throw std::invalid_argument("weight exponent must be > 0");
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (cfg.samples < 1) throw std::invalid_argument("need at least one sample");
  if (!(cfg.em_substep > 0.0)) throw std::invalid_argument("em_substep must be > 0");
}

// Rejection sampler against a constant envelope: 1.05 * sup over a grid of
// 4096 points total (per-axis resolution 4096^(1/d)).
int envelope_axis_points(int dim) {
  switch (dim) {
    case 1: return 4096;
    case 2: return 64;
    case 3: return 16;
    default: return 8;
  }
}

double density_envelope(const SpectralModel& model,
                        const std::function<double(const Point&)>& f) {
  const int per_axis = envelope_axis_points(model.dim());
  double sup = 0.0;
  Point x{0.0, 0.0, 0.0, 0.0};
  std::array<int, 4> idx{0, 0, 0, 0};
  while (true) {
    for (int a = 0; a < model.dim(); ++a) x[a] = (idx[a] + 0.5) / per_axis;
    sup = std::max(sup, f(x));
    int axis = 0;
    for (; axis < model.dim(); ++axis) {
      if (++idx[axis] < per_axis) break;
      idx[axis] = 0;
    }
    if (axis == model.dim()) break;
  }
  if (!(sup > 0.0)) throw std::invalid_argument("initial density has non-positive envelope");
  return 1.05 * sup;
}

Point draw_stationary(const SpectralModel& model, RandomStream& rng) {
  Point x{0.0, 0.0, 0.0, 0.0};
  if (model.flat()) {
    for (int a = 0; a < model.dim(); ++a) x[a] = wrap_unit(rng.next_uniform());
    return x;
  }
  // d = 1 with density e^V / Z: rejection against its grid envelope.
  const double cap = density_envelope(model, [&](const Point& p) {
    return model.stationary_density(p[0]);
  });
  for (int tries = 0; tries < 1 << 20; ++tries) {
    const double cand = wrap_unit(rng.next_uniform());
    if (rng.next_uniform() * cap <= model.stationary_density(cand)) {
      x[0] = cand;
      return x;
    }
  }
  throw std::runtime_error("stationary rejection sampling failed to accept");
}

}  // namespace

Point draw_initial(const SpectralModel& model, const InitialLaw& law, RandomStream& rng) {
  switch (law.kind) {
    case InitialLaw::Kind::Stationary:
      return draw_stationary(model, rng);
    case InitialLaw::Kind::Dirac: {
      Point x = law.point;
      for (int a = 0; a < model.dim(); ++a) x[a] = wrap_unit(x[a]);
      return x;
    }
    case InitialLaw::Kind::Density: {
      if (!law.density) throw std::invalid_argument("initial law lacks a density callable");
      const double cap = density_envelope(model, law.density);
      for (int tries = 0; tries < 1 << 20; ++tries) {
        const Point cand = draw_stationary(model, rng);
        if (rng.next_uniform() * cap <= law.density(cand)) return cand;
      }
      throw std::runtime_error("density rejection sampling failed to accept");
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<double> sample_times(double weight_exponent, double horizon, std::size_t samples) {
  if (!(weight_exponent > 0.0) || !(horizon > 0.0) || samples < 1)
    throw std::invalid_argument("sample_times: bad arguments");
  const double ta = std::pow(horizon, weight_exponent);
  const double du = ta / static_cast<double>(samples);
  std::vector<double> s(samples);
  const double inv_a = 1.0 / weight_exponent;
  for (std::size_t j = 0; j < samples; ++j) {
    const double u = (static_cast<double>(j) + 0.5) * du;
    s[j] = weight_exponent == 1.0 ? u : std::pow(u, inv_a);
  }
  return s;
}

double discrete_mode_second_moment(double lambda, double weight_exponent, double horizon,
                                   std::size_t samples) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const std::vector<double> s = sample_times(weight_exponent, horizon, samples);
  // E[(sum_j phi(X_{s_j}))^2] = m + 2 sum_j sum_{i<j} e^{-lambda (s_j - s_i)}
  // under stationarity; the inner sums obey S_j = e^{-lambda ds}(S_{j-1} + 1).
  double acc = 0.0;
  double run = 0.0;
  for (std::size_t j = 1; j < samples; ++j) {
    run = std::exp(-lambda * (s[j] - s[j - 1])) * (run + 1.0);
    acc += run;
  }
  const double m = static_cast<double>(samples);
  return (m + 2.0 * acc) / (m * m);
}

namespace {

// Accumulates mode coefficients against flat-torus eigenfunctions through
// per-axis power tables of e^{2 pi i x}, avoiding a sincos per mode.
class FlatAccumulator {
 public:
  explicit FlatAccumulator(const SpectralModel& model) : dim_(model.dim()) {
    const auto& modes = model.modes();
    kmax_.fill(0);
    entries_.reserve(modes.size());
    for (const auto& m : modes) {
      Entry e;
      for (int a = 0; a < dim_; ++a) {
        e.k[a] = m.wave.k[a];
        kmax_[a] = std::max(kmax_[a], std::abs(m.wave.k[a]));
      }
      e.sin_parity = m.parity == Parity::Sin;
      entries_.push_back(e);
    }
    for (int a = 0; a < dim_; ++a) {
      cosw_[a].resize(kmax_[a] + 1);
      sinw_[a].resize(kmax_[a] + 1);
    }
    sums_.assign(entries_.size(), 0.0);
  }

  void add(const Point& x) {
    for (int a = 0; a < dim_; ++a) {
      const double c1 = std::cos(kTwoPi * x[a]);
      const double s1 = std::sin(kTwoPi * x[a]);
      auto& c = cosw_[a];
      auto& s = sinw_[a];
      c[0] = 1.0;
      s[0] = 0.0;
      for (int j = 1; j <= kmax_[a]; ++j) {
        c[j] = c[j - 1] * c1 - s[j - 1] * s1;
        s[j] = s[j - 1] * c1 + c[j - 1] * s1;
      }
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const Entry& e = entries_[i];
      double re = 1.0, im = 0.0;
      for (int a = 0; a < dim_; ++a) {
        const int k = e.k[a];
        if (k == 0) continue;
        const int j = std::abs(k);
        const double ca = cosw_[a][j];
        const double sa = k > 0 ? sinw_[a][j] : -sinw_[a][j];
        const double nre = re * ca - im * sa;
        im = re * sa + im * ca;
        re = nre;
      }
      sums_[i] += e.sin_parity ? im : re;
    }
  }

  void finish(std::size_t m, std::vector<double>& out) const {
    out.resize(sums_.size());
    const double scale = std::numbers::sqrt2 / static_cast<double>(m);
    for (std::size_t i = 0; i < sums_.size(); ++i) out[i] = sums_[i] * scale;
  }

 private:
  struct Entry {
    std::array<int, 4> k{0, 0, 0, 0};
    bool sin_parity = false;
  };
  int dim_;
  std::array<int, 4> kmax_;
  std::array<std::vector<double>, 4> cosw_, sinw_;
  std::vector<Entry> entries_;
  std::vector<double> sums_;
};

}  // namespace

PathOutput simulate_weighted_path(const SpectralModel& model, const PathConfig& cfg,
                                  RandomStream& rng, bool want_modes, bool want_atoms) {
  check_config(cfg);
  const std::vector<double> times = sample_times(cfg.weight_exponent, cfg.horizon, cfg.samples);
  PathOutput out;
  out.modes.weight_exponent = out.atoms.weight_exponent = cfg.weight_exponent;
  out.modes.horizon = out.atoms.horizon = cfg.horizon;
  out.modes.samples = cfg.samples;
  out.atoms.weight = 1.0 / static_cast<double>(cfg.samples);
  if (want_atoms) out.atoms.position.reserve(cfg.samples);

  std::optional<FlatAccumulator> flat_acc;
  std::vector<double> mode_sums;
  if (want_modes) {
    if (model.flat()) {
      flat_acc.emplace(model);
    } else {
      mode_sums.assign(model.mode_count(), 0.0);
    }
  }
  std::size_t mass_count = 0;

  Point x = draw_initial(model, cfg.start, rng);
  double prev = 0.0;
  const bool flat = model.flat();
  for (std::size_t j = 0; j < cfg.samples; ++j) {
    const double ds = times[j] - prev;
    prev = times[j];
    if (flat) {
      const double sd = std::sqrt(2.0 * ds);
      for (int a = 0; a < model.dim(); ++a)
        x[a] = wrap_unit(x[a] + sd * rng.next_normal());
    } else {
      // Langevin step dX = V'(X) ds + sqrt(2) dB, split into Euler substeps.
      const int nsub = std::max<int>(1, static_cast<int>(std::ceil(ds / cfg.em_substep)));
      const double dt = ds / nsub;
      const double sd = std::sqrt(2.0 * dt);
      for (int k = 0; k < nsub; ++k)
        x[0] = wrap_unit(x[0] + dt * model.drift(x[0]) + sd * rng.next_normal());
    }
    if (want_modes) {
      ++mass_count;
      if (flat_acc) {
        flat_acc->add(x);
      } else {
        for (std::size_t i = 0; i < mode_sums.size(); ++i)
          mode_sums[i] += model.eigenfunction(i, x);
      }
    }
    if (want_atoms) out.atoms.position.push_back(x);
  }

  if (want_modes) {
    if (flat_acc) {
      flat_acc->finish(cfg.samples, out.modes.coeff);
    } else {
      out.modes.coeff.resize(mode_sums.size());
      for (std::size_t i = 0; i < mode_sums.size(); ++i)
        out.modes.coeff[i] = mode_sums[i] / static_cast<double>(cfg.samples);
    }
    out.modes.mass =
        static_cast<double>(mass_count) / static_cast<double>(cfg.samples);
  }
  return out;
}

EmpiricalModes simulate_weighted_modes(const SpectralModel& model, const PathConfig& cfg,
                                       RandomStream& rng) {
  return simulate_weighted_path(model, cfg, rng, true, false).modes;
}

EmpiricalAtoms simulate_weighted_atoms(const SpectralModel& model, const PathConfig& cfg,
                                       RandomStream& rng) {
  return simulate_weighted_path(model, cfg, rng, false, true).atoms;
}

}  // namespace ergoflow
