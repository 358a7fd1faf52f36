#pragma once

#include "ergoflow/diffusion.hpp"
#include "ergoflow/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

// Experiment drivers tying simulation, oracles, and transport together.
// Every experiment is deterministic given its configuration: replica k of
// parameter combination c always draws from the random stream c * 2^20 + k,
// and reductions run in replica order regardless of the worker count.

namespace ergoflow {

struct ExperimentConfig {
  std::string experiment = "limits";
  std::string model = "torus1";  // torus1..torus4 | weighted-circle
  double alpha = 1.0;
  std::string nu = "stationary";  // stationary | dirac:<x> | cosine:<amp>
  std::vector<double> horizons = {100.0};
  std::vector<double> dampings = {0.01};
  double beta = 0.0;  // when > 0, per-horizon damping r = t^{-beta} replaces dampings
  std::size_t replicas = 64;
  std::size_t samples = 0;  // atoms per path; 0 picks the smallest unbiased-to-1% rule
  std::uint64_t seed = 1;
  double lambda_cutoff = 0.0;  // 0: from the smallest positive damping
  int grid_bins = 0;           // transport grids; 0: dimension default
  int quantile_atoms = 4096;   // reference quantile atoms for exact circle transport
  double em_substep = 1e-3;
  double weighted_amplitude = 0.8;  // potential cos(2 pi x) amplitude, weighted-circle
  int weighted_grid = 512;
  std::string out_csv;
  std::string out_json;
  int workers = 0;  // 0: hardware concurrency; env ERGOFLOW_WORKERS caps it
};

// Flat "key = value" lines, '#' comments. Unknown keys throw.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

InitialLaw parse_initial_law(const std::string& spec);
std::shared_ptr<const SpectralModel> make_model(const ExperimentConfig& cfg);

// Smallest sampling resolution from {1000 * 2^k} whose exact discrete second
// moment is within 1% of the continuous formula, capped at 4e6. Models with
// more than 500 modes skip the scan and use max(10^4, 20 t).
std::size_t auto_samples(const SpectralModel& model, double alpha, double t, double r,
                         std::size_t requested);

struct ResultRow {
  std::string experiment, model, nu;
  int dim = 1;
  double alpha = 1.0, t = 0.0, r = 0.0;
  std::size_t replicas = 0;
  double estimate = 0.0;
  double std_error = 0.0;    // 0 on deterministic rows
  double renormalized = 0.0;
  double limit_constant = 0.0;
  double z_score = 0.0;      // relative deviation on deterministic rows
};

struct OracleRow {
  double t = 0.0, r = 0.0, alpha = 1.0;
  double mc_mean = 0.0, mc_stderr = 0.0, oracle = 0.0, z_score = 0.0;
};

struct RunReport {
  std::vector<ResultRow> rows;
  std::vector<OracleRow> oracle_rows;
  std::string details_json;  // experiment-specific payload, pretty-printed
  std::vector<std::string> assertion_failures;

  bool ok() const { return assertion_failures.empty(); }
};

RunReport run_experiment(const ExperimentConfig& cfg);

void write_rows_csv(const std::vector<ResultRow>& rows, std::ostream& os);
void write_oracle_csv(const std::vector<OracleRow>& rows, std::ostream& os);

// Runs the experiment, writes the configured outputs and a stdout summary.
// Returns 0 on success, 2 when result assertions failed, 1 on errors.
int run_cli_experiment(const ExperimentConfig& cfg);

// Claims replica indices atomically across workers, stores each result by
// index, and lets the caller reduce in order afterwards.
std::vector<std::vector<double>> run_replicas(
    std::size_t replicas, int workers,
    const std::function<std::vector<double>(std::size_t)>& body);

int resolve_workers(int requested);

}  // namespace ergoflow
