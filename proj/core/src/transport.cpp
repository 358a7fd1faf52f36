#include "ergoflow/transport.hpp"

#include "ergoflow/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ergoflow {

namespace {

constexpr double kShiftRange = 1.25;  // optimal mass shift lies in [-1, 1]

struct QuantileProfile {
  std::vector<double> pos;  // atom positions, lifted copies for the target side
  std::vector<double> cum;  // mass boundaries, size pos.size() + 1
};

QuantileProfile profile_of(const CircularMeasure& m, int window_lo, int window_hi) {
  QuantileProfile p;
  const std::size_t n = m.size();
  p.pos.reserve(n * (window_hi - window_lo + 1));
  p.cum.reserve(n * (window_hi - window_lo + 1) + 1);
  p.cum.push_back(window_lo);
  for (int w = window_lo; w <= window_hi; ++w) {
    for (std::size_t j = 0; j < n; ++j) {
      p.pos.push_back(m.position[j] + w);
      p.cum.push_back(p.cum.back() + m.weight[j]);
    }
  }
  return p;
}

// Integral over q in [0,1) of (Fa^{-1}(q) - Fb^{-1}(q - theta))^2, walking the
// merged quantile breakpoints. b must carry lifted windows covering
// [-kShiftRange - 1, kShiftRange + 2).
double shifted_quantile_cost(const QuantileProfile& a, const QuantileProfile& b, double theta) {
  std::size_t mb =
      std::upper_bound(b.cum.begin(), b.cum.end(), -theta) - b.cum.begin();
  mb = mb > 0 ? mb - 1 : 0;
  mb = std::min(mb, b.pos.size() - 1);
  std::size_t ia = 0;
  double q = 0.0, cost = 0.0;
  while (q < 1.0) {
    const double qa = a.cum[ia + 1];
    const double qb = b.cum[mb + 1] + theta;
    const double qn = std::min(std::min(qa, qb), 1.0);
    const double d = a.pos[ia] - b.pos[mb];
    cost += (qn - q) * d * d;
    q = qn;
    if (q >= 1.0) break;
    if (qa <= qb) {
      if (++ia >= a.pos.size()) break;
    } else {
      if (++mb >= b.pos.size()) break;
    }
  }
  return cost;
}

void check_measure(const CircularMeasure& m) {
  if (m.size() == 0) throw std::invalid_argument("empty circular measure");
  if (m.weight.size() != m.position.size())
    throw std::invalid_argument("mismatched atom arrays");
}

double wrapped_sq_dist(double x, double y) {
  double d = std::abs(x - y);
  d = std::min(d, 1.0 - d);
  return d * d;
}

}  // namespace

CircularMeasure make_circular_measure(std::vector<double> positions,
                                      std::vector<double> weights) {
  const std::size_t n = positions.size();
  if (n == 0) throw std::invalid_argument("no atoms");
  if (weights.empty()) weights.assign(n, 1.0 / n);
  if (weights.size() != n) throw std::invalid_argument("mismatched atom arrays");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (auto& x : positions) x = wrap_unit(x);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return positions[i] < positions[j]; });
  CircularMeasure out;
  out.position.reserve(n);
  out.weight.reserve(n);
  double total = 0.0;
  for (std::size_t i : order) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("weights must be positive");
    if (!out.position.empty() && positions[i] == out.position.back())
      out.weight.back() += weights[i];
    else {
      out.position.push_back(positions[i]);
      out.weight.push_back(weights[i]);
    }
    total += weights[i];
  }
  for (auto& w : out.weight) w /= total;
  return out;
}

CircularMeasure atoms_of(const EmpiricalAtoms& atoms) {
  std::vector<double> pos;
  pos.reserve(atoms.position.size());
  for (const auto& p : atoms.position) pos.push_back(p[0]);
  return make_circular_measure(std::move(pos));
}

CircularMeasure equal_mass_quantiles(const SpectralModel& model, std::size_t k) {
  if (model.dim() != 1) throw std::invalid_argument("quantiles need a circle model");
  if (k == 0) throw std::invalid_argument("need at least one atom");
  const int grid = 1 << 16;
  std::vector<double> mass(grid);
  double total = 0.0;
  for (int g = 0; g < grid; ++g) {
    mass[g] = model.stationary_density((g + 0.5) / grid);
    total += mass[g];
  }
  std::vector<double> pos(k);
  double cum = 0.0;
  int g = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double target = (j + 0.5) / k * total;
    while (g < grid - 1 && cum + mass[g] < target) cum += mass[g++];
    pos[j] = (g + (target - cum) / mass[g]) / grid;
  }
  return make_circular_measure(std::move(pos));
}

namespace {

// The cost is piecewise linear in the shift, kinked exactly where mass
// boundaries of the two sides align, so its minimum sits on one of the
// pairwise boundary differences. It is not convex for general atomic
// measures (mass can cluster so that distant shifts open separate local
// valleys), so every kink is evaluated.
double w2sq_kink_scan(const QuantileProfile& pa, const QuantileProfile& pb, double* theta_out) {
  double best = shifted_quantile_cost(pa, pb, -kShiftRange);
  double best_theta = -kShiftRange;
  const auto consider = [&](double theta) {
    const double c = shifted_quantile_cost(pa, pb, theta);
    if (c < best) {
      best = c;
      best_theta = theta;
    }
  };
  consider(kShiftRange);
  for (double ca : pa.cum)
    for (double cb : pb.cum) {
      const double theta = ca - cb;
      if (theta > -kShiftRange && theta < kShiftRange) consider(theta);
    }
  if (theta_out) *theta_out = best_theta;
  return best;
}

}  // namespace

double w2sq_circle(const CircularMeasure& a, const CircularMeasure& b, double* theta_out) {
  check_measure(a);
  check_measure(b);
  const QuantileProfile pa = profile_of(a, 0, 0);
  const QuantileProfile pb = profile_of(b, -3, 2);
  if (a.size() + b.size() < 512) return w2sq_kink_scan(pa, pb, theta_out);
  // Large instances here are dense near-uniform profiles (binned paths,
  // quantile references), where the shift cost has a single valley; golden
  // section is then exact to the bracket width at O(log) cost evaluations.
  const auto cost = [&](double theta) { return shifted_quantile_cost(pa, pb, theta); };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -kShiftRange, hi = kShiftRange;
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  while (hi - lo > 1e-12) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = cost(x2);
    }
  }
  if (theta_out) *theta_out = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

double w2sq_circle_scan(const CircularMeasure& a, const CircularMeasure& b) {
  check_measure(a);
  check_measure(b);
  const QuantileProfile pa = profile_of(a, 0, 0);
  const QuantileProfile pb = profile_of(b, -3, 2);
  // The cost is piecewise linear in the shift with kinks where mass
  // boundaries of the two sides align, so the minimum sits on a kink.
  double best = shifted_quantile_cost(pa, pb, -kShiftRange);
  best = std::min(best, shifted_quantile_cost(pa, pb, kShiftRange));
  for (double ca : pa.cum)
    for (double cb : pb.cum) {
      const double theta = ca - cb;
      if (theta < -kShiftRange || theta > kShiftRange) continue;
      best = std::min(best, shifted_quantile_cost(pa, pb, theta));
    }
  return best;
}

namespace {

struct BasisArc {
  int i = 0, j = 0;
  double flow = 0.0;
};

// Spanning-tree potentials on the bipartite transportation graph. A nodes are
// 0..m-1, B nodes are m..m+n-1; pot holds u on A and v on B with u_0 = 0.
void tree_potentials(const std::vector<BasisArc>& arcs,
                     const std::vector<std::vector<int>>& adj,
                     const std::vector<std::vector<double>>& c, int m,
                     std::vector<double>& pot) {
  std::fill(pot.begin(), pot.end(), 0.0);
  std::vector<char> seen(pot.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    for (int e : adj[node]) {
      const int other = node < m ? m + arcs[e].j : arcs[e].i;
      if (seen[other]) continue;
      pot[other] = c[arcs[e].i][arcs[e].j] - pot[node];
      seen[other] = 1;
      stack.push_back(other);
    }
  }
}

}  // namespace

double w2sq_circle_lp(const CircularMeasure& a, const CircularMeasure& b) {
  check_measure(a);
  check_measure(b);
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  if (static_cast<long long>(m) * n > 10000)
    throw std::invalid_argument("transportation simplex limited to 10^4 arcs");
  std::vector<std::vector<double>> c(m, std::vector<double>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c[i][j] = wrapped_sq_dist(a.position[i], b.position[j]);

  // Perturb supplies to keep the basis nondegenerate, solve, then recompute
  // the exact flows of the final basis under the unperturbed masses.
  const double delta = 1e-11 / m;
  std::vector<double> sa(a.weight), sb(b.weight);
  for (auto& s : sa) s += delta;
  sb[n - 1] += m * delta;

  std::vector<BasisArc> arcs;
  arcs.reserve(m + n - 1);
  {
    int i = 0, j = 0;
    double ra = sa[0], rb = sb[0];
    while (true) {
      const double f = std::min(ra, rb);
      arcs.push_back({i, j, f});
      ra -= f;
      rb -= f;
      if (i == m - 1 && j == n - 1) break;
      if (ra == 0.0 && i < m - 1)
        ra = sa[++i];
      else if (j < n - 1)
        rb = sb[++j];
      else
        ra = sa[++i];
    }
  }
  if (arcs.size() != static_cast<std::size_t>(m + n - 1))
    throw std::runtime_error("degenerate initial transportation basis");

  std::vector<std::vector<int>> adj(m + n);
  const auto rebuild_adj = [&] {
    for (auto& l : adj) l.clear();
    for (int e = 0; e < m + n - 1; ++e) {
      adj[arcs[e].i].push_back(e);
      adj[m + arcs[e].j].push_back(e);
    }
  };
  rebuild_adj();
  std::vector<double> pot(m + n);
  std::vector<int> parent_arc(m + n), parent_node(m + n);

  const int max_pivots = 200 * (m + n);
  for (int pivot = 0;; ++pivot) {
    if (pivot >= max_pivots) throw std::runtime_error("transportation simplex stalled");
    tree_potentials(arcs, adj, c, m, pot);
    int ei = -1, ej = -1;
    double best = -1e-12;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double rc = c[i][j] - pot[i] - pot[m + j];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
        }
      }
    if (ei < 0) break;

    // Unique tree path from the entering arc's A node to its B node.
    std::fill(parent_arc.begin(), parent_arc.end(), -1);
    std::vector<int> stack{ei};
    parent_arc[ei] = -2;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == m + ej) break;
      for (int e : adj[node]) {
        const int other = node < m ? m + arcs[e].j : arcs[e].i;
        if (parent_arc[other] != -1) continue;
        parent_arc[other] = e;
        parent_node[other] = node;
        stack.push_back(other);
      }
    }
    std::vector<int> path;  // arcs from B node back to A node
    for (int node = m + ej; node != ei; node = parent_node[node])
      path.push_back(parent_arc[node]);
    // Pushing flow on the entering arc alternates -,+,-,... along the path
    // read from the A-node end.
    std::reverse(path.begin(), path.end());
    double step = 1e300;
    int leaving = -1;
    for (std::size_t s = 0; s < path.size(); s += 2)
      if (arcs[path[s]].flow <= step) {
        step = arcs[path[s]].flow;
        leaving = path[s];
      }
    for (std::size_t s = 0; s < path.size(); ++s)
      arcs[path[s]].flow += (s % 2 == 0) ? -step : step;
    arcs[leaving] = {ei, ej, step};
    rebuild_adj();
  }

  // Exact flows by leaf elimination.
  std::vector<double> rem(m + n);
  for (int i = 0; i < m; ++i) rem[i] = a.weight[i];
  for (int j = 0; j < n; ++j) rem[m + j] = b.weight[j];
  std::vector<int> degree(m + n);
  std::vector<char> done(m + n - 1, 0);
  for (int node = 0; node < m + n; ++node) degree[node] = static_cast<int>(adj[node].size());
  std::vector<int> leaves;
  for (int node = 0; node < m + n; ++node)
    if (degree[node] == 1) leaves.push_back(node);
  double total = 0.0;
  while (!leaves.empty()) {
    const int node = leaves.back();
    leaves.pop_back();
    int e = -1;
    for (int cand : adj[node])
      if (!done[cand]) e = cand;
    if (e < 0) continue;
    double f = rem[node];
    if (f < -1e-6) throw std::runtime_error("inconsistent transportation basis");
    f = std::max(f, 0.0);
    done[e] = 1;
    total += f * c[arcs[e].i][arcs[e].j];
    const int other = node < m ? m + arcs[e].j : arcs[e].i;
    rem[node] = 0.0;
    rem[other] -= f;
    if (--degree[other] == 1) leaves.push_back(other);
    --degree[node];
  }
  return total;
}

GridMeasure bin_atoms(const EmpiricalAtoms& atoms, int dim, int bins) {
  if (dim < 1 || dim > 4) throw std::invalid_argument("dimension must be 1..4");
  if (bins < 2) throw std::invalid_argument("need at least two bins");
  if (atoms.position.empty()) throw std::invalid_argument("no atoms");
  GridMeasure g;
  g.dim = dim;
  g.bins = bins;
  std::size_t cells = 1;
  for (int d = 0; d < dim; ++d) cells *= bins;
  g.weight.assign(cells, 0.0);
  std::array<int, 4> lo{};
  std::array<double, 4> frac{};
  for (const auto& p : atoms.position) {
    for (int d = 0; d < dim; ++d) {
      const double u = wrap_unit(p[d]) * bins - 0.5;
      const double fl = std::floor(u);
      lo[d] = static_cast<int>(fl);
      frac[d] = u - fl;
    }
    for (int corner = 0; corner < (1 << dim); ++corner) {
      std::size_t idx = 0;
      double w = 1.0;
      for (int d = 0; d < dim; ++d) {
        const int up = (corner >> d) & 1;
        int cell = lo[d] + up;
        cell = ((cell % bins) + bins) % bins;
        idx = idx * bins + cell;
        w *= up ? frac[d] : 1.0 - frac[d];
      }
      g.weight[idx] += w;
    }
  }
  const double total = std::accumulate(g.weight.begin(), g.weight.end(), 0.0);
  for (auto& w : g.weight) w /= total;
  return g;
}

GridMeasure grid_measure_from_density(int dim, int bins,
                                      const std::function<double(const Point&)>& density) {
  if (dim < 1 || dim > 4) throw std::invalid_argument("dimension must be 1..4");
  if (bins < 2) throw std::invalid_argument("need at least two bins");
  GridMeasure g;
  g.dim = dim;
  g.bins = bins;
  std::size_t cells = 1;
  for (int d = 0; d < dim; ++d) cells *= bins;
  g.weight.resize(cells);
  double total = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    Point x{0.0, 0.0, 0.0, 0.0};
    std::size_t rest = cell;
    for (int d = dim - 1; d >= 0; --d) {
      x[d] = (rest % bins + 0.5) / bins;
      rest /= bins;
    }
    g.weight[cell] = std::max(density(x), 0.0);
    total += g.weight[cell];
  }
  if (!(total > 0.0)) throw std::invalid_argument("density vanishes on the whole grid");
  for (auto& w : g.weight) w /= total;
  return g;
}

GridMeasure grid_measure_of_stationary(const SpectralModel& model, int bins) {
  if (bins < 2) throw std::invalid_argument("need at least two bins");
  GridMeasure g;
  g.dim = model.dim();
  g.bins = bins;
  std::size_t cells = 1;
  for (int d = 0; d < g.dim; ++d) cells *= bins;
  if (model.flat()) {
    g.weight.assign(cells, 1.0 / cells);
    return g;
  }
  g.weight.resize(cells);
  double total = 0.0;
  for (int i = 0; i < bins; ++i) {
    g.weight[i] = model.stationary_density((i + 0.5) / bins);
    total += g.weight[i];
  }
  for (auto& w : g.weight) w /= total;
  return g;
}

namespace {

struct SoftminWorkspace {
  int dim = 1, bins = 0;
  std::vector<double> kernel;  // squared geodesic distance per axis offset
  std::vector<double> line, out;

  SoftminWorkspace(int d, int n) : dim(d), bins(n), kernel(n), line(n), out(n) {
    for (int k = 0; k < n; ++k) {
      const double dd = static_cast<double>(std::min(k, n - k)) / n;
      kernel[k] = dd * dd;
    }
  }

  // h_i <- log sum_j exp(h_j - C_ij / eps), C the squared geodesic cost on
  // the grid torus, swept axis by axis.
  void apply(std::vector<double>& h, double eps) {
    std::size_t cells = 1;
    for (int d = 0; d < dim; ++d) cells *= bins;
    for (int axis = 0; axis < dim; ++axis) {
      std::size_t inner = 1;
      for (int d = axis + 1; d < dim; ++d) inner *= bins;
      const std::size_t outer = cells / (inner * bins);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t r = 0; r < inner; ++r) {
          const std::size_t base = o * bins * inner + r;
          for (int j = 0; j < bins; ++j) line[j] = h[base + j * inner];
          for (int i = 0; i < bins; ++i) {
            double mx = -1e300;
            for (int j = 0; j < bins; ++j) {
              const double v = line[j] - kernel[std::abs(i - j)] / eps;
              if (v > mx) mx = v;
            }
            if (mx <= -1e290) {
              out[i] = -1e300;
              continue;
            }
            double s = 0.0;
            for (int j = 0; j < bins; ++j)
              s += std::exp(line[j] - kernel[std::abs(i - j)] / eps - mx);
            out[i] = mx + std::log(s);
          }
          for (int i = 0; i < bins; ++i) h[base + i * inner] = out[i];
        }
    }
  }
};

std::vector<double> log_weights(const std::vector<double>& w) {
  std::vector<double> lw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) lw[i] = w[i] > 0.0 ? std::log(w[i]) : -1e300;
  return lw;
}

std::vector<double> epsilon_schedule(const SinkhornOptions& opts) {
  std::vector<double> sched;
  for (double e = opts.epsilon_start; e > opts.epsilon * 1.0001; e /= 2) sched.push_back(e);
  sched.push_back(opts.epsilon);
  return sched;
}

struct DualRun {
  double value = 0.0;
  int iterations = 0;
  double marginal_error = 0.0;
};

// L1 mass defect of the row marginals of the plan a_i b_j e^{(f_i+g_j-C)/eps}
// given h = softmin applied to (lb + g/eps); the exponent is clamped so a
// transiently infeasible iterate cannot overflow.
double row_marginal_defect(const std::vector<double>& a, const std::vector<double>& f,
                           const std::vector<double>& h, double eps) {
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = std::min((f[i] + eps * h[i]) / eps, 700.0);
    err += a[i] * std::abs(std::exp(e) - 1.0);
  }
  return err;
}

DualRun sinkhorn_pair(const std::vector<double>& a, const std::vector<double>& b,
                      SoftminWorkspace& ws, const SinkhornOptions& opts) {
  const std::size_t cells = a.size();
  const std::vector<double> la = log_weights(a), lb = log_weights(b);
  std::vector<double> f(cells, 0.0), g(cells, 0.0), h(cells);
  DualRun run;
  for (double eps : epsilon_schedule(opts)) {
    const bool last = eps == opts.epsilon;
    const double tol = last ? opts.tolerance : std::max(opts.tolerance, 1e-3);
    for (std::size_t i = 0; i < cells; ++i) h[i] = lb[i] + g[i] / eps;
    ws.apply(h, eps);
    for (int it = 0; it < opts.max_iterations; ++it) {
      run.marginal_error = row_marginal_defect(a, f, h, eps);
      if (run.marginal_error < tol) break;
      for (std::size_t i = 0; i < cells; ++i) f[i] = -eps * h[i];
      for (std::size_t i = 0; i < cells; ++i) h[i] = la[i] + f[i] / eps;
      ws.apply(h, eps);
      for (std::size_t i = 0; i < cells; ++i) g[i] = -eps * h[i];
      for (std::size_t i = 0; i < cells; ++i) h[i] = lb[i] + g[i] / eps;
      ws.apply(h, eps);
      ++run.iterations;
    }
  }
  for (std::size_t i = 0; i < cells; ++i) run.value += f[i] * a[i] + g[i] * b[i];
  return run;
}

DualRun sinkhorn_self(const std::vector<double>& a, SoftminWorkspace& ws,
                      const SinkhornOptions& opts) {
  const std::size_t cells = a.size();
  const std::vector<double> la = log_weights(a);
  std::vector<double> p(cells, 0.0), h(cells);
  DualRun run;
  for (double eps : epsilon_schedule(opts)) {
    const bool last = eps == opts.epsilon;
    const double tol = last ? opts.tolerance : std::max(opts.tolerance, 1e-3);
    for (int it = 0; it < opts.max_iterations; ++it) {
      for (std::size_t i = 0; i < cells; ++i) h[i] = la[i] + p[i] / eps;
      ws.apply(h, eps);
      run.marginal_error = row_marginal_defect(a, p, h, eps);
      if (run.marginal_error < tol) break;
      // Averaged update keeps the symmetric fixed-point iteration stable.
      for (std::size_t i = 0; i < cells; ++i) p[i] = 0.5 * (p[i] - eps * h[i]);
      ++run.iterations;
    }
  }
  for (std::size_t i = 0; i < cells; ++i) run.value += 2.0 * p[i] * a[i];
  return run;
}

}  // namespace

SinkhornResult sinkhorn_divergence(const GridMeasure& a, const GridMeasure& b,
                                   const SinkhornOptions& opts) {
  if (a.dim != b.dim || a.bins != b.bins || a.size() != b.size())
    throw std::invalid_argument("grid measures must share a grid");
  if (!(opts.epsilon >= 1e-4))
    throw std::invalid_argument("regularization below the supported floor 1e-4");
  if (!(opts.epsilon_start >= opts.epsilon))
    throw std::invalid_argument("schedule must start at or above the target regularization");
  SoftminWorkspace ws(a.dim, a.bins);
  const DualRun ab = sinkhorn_pair(a.weight, b.weight, ws, opts);
  const DualRun aa = sinkhorn_self(a.weight, ws, opts);
  const DualRun bb = sinkhorn_self(b.weight, ws, opts);
  SinkhornResult out;
  out.value = ab.value - 0.5 * (aa.value + bb.value);
  out.ot_value = ab.value;
  out.epsilon = opts.epsilon;
  out.iterations = ab.iterations + aa.iterations + bb.iterations;
  out.marginal_error = std::max(ab.marginal_error, std::max(aa.marginal_error, bb.marginal_error));
  out.converged = out.marginal_error < opts.tolerance;
  return out;
}

SurrogateReport w2_upper_surrogate(const SpectralModel& model, const EmpiricalModes& em,
                                   double r, int grid_n) {
  if (em.coeff.size() != model.mode_count())
    throw std::invalid_argument("mode coefficients do not match the model");
  if (!(r >= 0.0)) throw std::invalid_argument("damping must be >= 0");
  const int dim = model.dim();
  if (grid_n == 0) {
    constexpr int defaults[4] = {4096, 128, 32, 16};
    grid_n = defaults[dim - 1];
  }
  std::size_t cells = 1;
  for (int d = 0; d < dim; ++d) cells *= grid_n;
  const auto& modes = model.modes();
  std::vector<double> damped(modes.size());
  double sobolev_sq = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    damped[i] = std::exp(-modes[i].lambda * r) * em.coeff[i];
    sobolev_sq += damped[i] * damped[i] / modes[i].lambda;
  }
  SurrogateReport rep;
  rep.min_density = 1e300;
  double acc = 0.0, wsum = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    Point x{0.0, 0.0, 0.0, 0.0};
    std::size_t rest = cell;
    for (int d = dim - 1; d >= 0; --d) {
      x[d] = (rest % grid_n + 0.5) / grid_n;
      rest /= grid_n;
    }
    double f = 1.0;
    double grad_sq = 0.0;
    std::array<double, 4> grad{};
    for (std::size_t i = 0; i < modes.size(); ++i) {
      f += damped[i] * model.eigenfunction(i, x);
      for (int d = 0; d < dim; ++d)
        grad[d] += damped[i] / modes[i].lambda * model.eigenfunction_derivative(i, x, d);
    }
    for (int d = 0; d < dim; ++d) grad_sq += grad[d] * grad[d];
    rep.min_density = std::min(rep.min_density, f);
    if (f > 0.0) {
      const double w = model.flat() ? 1.0 : model.stationary_density(x[0]);
      wsum += w;
      acc += w * grad_sq / log_mean(f, 1.0);
    }
  }
  rep.applicable = rep.min_density > 0.0;
  if (!rep.applicable) {
    rep.basic = rep.log_mean = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.basic = 4.0 * sobolev_sq / rep.min_density;
  rep.log_mean = acc / wsum;
  return rep;
}

CircularMeasure heat_flow_measure(const SpectralModel& model, const CircularMeasure& nu,
                                  double t, int grid_n) {
  check_measure(nu);
  if (model.dim() != 1) throw std::invalid_argument("heat flow smoothing needs a circle model");
  if (!(t > 0.0)) throw std::invalid_argument("flow time must be > 0");
  if (grid_n < 16) throw std::invalid_argument("grid too coarse");
  const HeatKernelMethod method =
      model.flat() ? HeatKernelMethod::Wrapped : HeatKernelMethod::Spectral;
  std::vector<double> pos(grid_n), mass(grid_n);
  for (int g = 0; g < grid_n; ++g) {
    const double y = (g + 0.5) / grid_n;
    pos[g] = y;
    double density = 0.0;
    Point py{y, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < nu.size(); ++k) {
      Point px{nu.position[k], 0.0, 0.0, 0.0};
      density += nu.weight[k] * model.heat_kernel(t, px, py, method);
    }
    mass[g] = std::max(density, 0.0) * model.stationary_density(y);
  }
  return make_circular_measure(std::move(pos), std::move(mass));
}

ContractionReport heat_flow_contraction(const SpectralModel& model, const CircularMeasure& nu0,
                                        const CircularMeasure& nu1,
                                        const std::vector<double>& times, int grid_n) {
  ContractionReport rep;
  rep.curvature = model.curvature_lower_bound();
  const double before = std::sqrt(w2sq_circle(nu0, nu1));
  const double slack = 2.0 / grid_n;
  for (double t : times) {
    const CircularMeasure flow0 = heat_flow_measure(model, nu0, t, grid_n);
    const CircularMeasure flow1 = heat_flow_measure(model, nu1, t, grid_n);
    rep.time.push_back(t);
    rep.self_cost.push_back(w2sq_circle(nu0, flow0));
    rep.pair_before.push_back(before);
    rep.pair_after.push_back(std::sqrt(w2sq_circle(flow0, flow1)));
    rep.fitted_c = std::max(rep.fitted_c, rep.self_cost.back() / t);
    if (rep.pair_after.back() > std::exp(-rep.curvature * t) * before + slack)
      rep.pair_ok = false;
  }
  return rep;
}

}  // namespace ergoflow
