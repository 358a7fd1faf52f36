#include "ergoflow/harness.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace ergoflow;

namespace {

ExperimentConfig mini_limits() {
  ExperimentConfig cfg;
  cfg.experiment = "limits";
  cfg.model = "torus1";
  cfg.alpha = 1.0;
  cfg.horizons = {50.0};
  cfg.replicas = 100;
  cfg.samples = 2000;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config entries: every key applies, unknown keys throw") {
  ExperimentConfig cfg;
  apply_config_entry(cfg, "experiment", "scaling");
  apply_config_entry(cfg, "model", "torus2");
  apply_config_entry(cfg, "alpha", "0.75");
  apply_config_entry(cfg, "nu", "dirac:0.25");
  apply_config_entry(cfg, "horizons", "10,20,40");
  apply_config_entry(cfg, "dampings", "0.1,0.01");
  apply_config_entry(cfg, "beta", "0.5");
  apply_config_entry(cfg, "replicas", "321");
  apply_config_entry(cfg, "samples", "12345");
  apply_config_entry(cfg, "seed", "99");
  apply_config_entry(cfg, "lambda_cutoff", "500");
  apply_config_entry(cfg, "grid_bins", "128");
  apply_config_entry(cfg, "quantile_atoms", "512");
  apply_config_entry(cfg, "em_substep", "0.002");
  apply_config_entry(cfg, "weighted_amplitude", "0.4");
  apply_config_entry(cfg, "weighted_grid", "768");
  apply_config_entry(cfg, "out_csv", "/tmp/x.csv");
  apply_config_entry(cfg, "out_json", "/tmp/x.json");
  apply_config_entry(cfg, "workers", "3");

  CHECK(cfg.experiment == "scaling");
  CHECK(cfg.model == "torus2");
  CHECK(cfg.alpha == 0.75);
  CHECK(cfg.nu == "dirac:0.25");
  CHECK(cfg.horizons == std::vector<double>{10.0, 20.0, 40.0});
  CHECK(cfg.dampings == std::vector<double>{0.1, 0.01});
  CHECK(cfg.beta == 0.5);
  CHECK(cfg.replicas == 321);
  CHECK(cfg.samples == 12345);
  CHECK(cfg.seed == 99);
  CHECK(cfg.lambda_cutoff == 500.0);
  CHECK(cfg.grid_bins == 128);
  CHECK(cfg.quantile_atoms == 512);
  CHECK(cfg.em_substep == 0.002);
  CHECK(cfg.weighted_amplitude == 0.4);
  CHECK(cfg.weighted_grid == 768);
  CHECK(cfg.workers == 3);

  CHECK_THROWS_AS(apply_config_entry(cfg, "no_such_key", "1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_entry(cfg, "alpha", "not_a_number"), std::invalid_argument);
}

TEST_CASE("config files: comments and blanks parse, unknown keys throw") {
  const std::string path = "/tmp/ergoflow_test_config.txt";
  {
    std::ofstream os(path);
    os << "# comment line\n\n"
       << "experiment = oracle-check\n"
       << "model = torus1\n"
       << "alpha = 0.5   # trailing comment\n"
       << "horizons = 25,100\n"
       << "replicas = 64\n";
  }
  auto cfg = parse_config_file(path);
  CHECK(cfg.experiment == "oracle-check");
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.horizons.size() == 2);
  CHECK(cfg.replicas == 64);

  {
    std::ofstream os(path);
    os << "bogus = 1\n";
  }
  CHECK_THROWS(parse_config_file(path));
  CHECK_THROWS(parse_config_file("/tmp/ergoflow_does_not_exist.txt"));
}

TEST_CASE("initial law strings") {
  auto s = parse_initial_law("stationary");
  CHECK(s.kind == InitialLaw::Kind::Stationary);
  auto d = parse_initial_law("dirac:0.3");
  CHECK(d.kind == InitialLaw::Kind::Dirac);
  CHECK(d.point[0] == 0.3);
  auto c = parse_initial_law("cosine:0.5");
  CHECK(c.kind == InitialLaw::Kind::Density);
  REQUIRE(c.density);
  CHECK(c.density({0.0, 0, 0, 0}) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS(parse_initial_law("banana"));
  CHECK_THROWS(parse_initial_law("cosine:1.5"));
}

TEST_CASE("model factory: cutoffs and rejection of bad names") {
  auto cfg = mini_limits();
  auto m = make_model(cfg);
  CHECK(m->dim() == 1);
  CHECK(m->flat());

  cfg.lambda_cutoff = 700.0;
  CHECK(make_model(cfg)->lambda_cutoff() == 700.0);

  cfg = mini_limits();
  cfg.model = "weighted-circle";
  auto wc = make_model(cfg);
  CHECK_FALSE(wc->flat());
  CHECK(wc->lambda_cutoff() >= 2e4);

  cfg.model = "torus9";
  CHECK_THROWS(make_model(cfg));
}

TEST_CASE("sampling resolution rule") {
  auto cfg = mini_limits();
  auto m = make_model(cfg);
  CHECK(auto_samples(*m, 1.0, 100.0, 0.01, 777) == 777);  // explicit request wins
  std::size_t picked = auto_samples(*m, 1.0, 100.0, 0.01, 0);
  CHECK(picked >= 1000);
  CHECK(picked <= 4000000);
  // dense spectra skip the scan: max(1e4, 20 t)
  auto t3 = make_flat_torus(3, 2500.0);
  REQUIRE(t3->mode_count() > 500);
  CHECK(auto_samples(*t3, 1.0, 1000.0, 0.01, 0) == 20000);
  CHECK(auto_samples(*t3, 1.0, 10.0, 0.01, 0) == 10000);
}

TEST_CASE("replica scheduler: order independent of worker count") {
  auto body = [](std::size_t k) {
    return std::vector<double>{static_cast<double>(k * k), static_cast<double>(k)};
  };
  auto one = run_replicas(37, 1, body);
  auto many = run_replicas(37, 4, body);
  REQUIRE(one.size() == 37);
  CHECK(one == many);
  for (std::size_t k = 0; k < one.size(); ++k)
    CHECK(one[k][0] == static_cast<double>(k * k));
}

TEST_CASE("worker resolution respects the environment cap") {
  CHECK(resolve_workers(0) >= 1);
  ::setenv("ERGOFLOW_WORKERS", "2", 1);
  CHECK(resolve_workers(8) == 2);
  ::unsetenv("ERGOFLOW_WORKERS");
  CHECK(resolve_workers(3) == 3);
}

TEST_CASE("csv writer: pinned column layout and full precision") {
  ResultRow row;
  row.experiment = "limits";
  row.model = "torus1";
  row.nu = "stationary";
  row.dim = 1;
  row.alpha = 0.5;
  row.t = 100.0;
  row.r = 0.0;
  row.replicas = 3;
  row.estimate = 1.0 / 3.0;
  row.std_error = 0.5;
  row.renormalized = 2.0;
  row.limit_constant = 0.25;
  row.z_score = -1.5;
  std::ostringstream os;
  write_rows_csv({row}, os);
  CHECK(os.str() ==
        "experiment,model,d,alpha,nu,t,r,replicas,estimate,stderr,renormalized,"
        "limit_constant,z_score\n"
        "limits,torus1,1,0.5,stationary,100,0,3,0.33333333333333331,0.5,2,0.25,-1.5\n");

  OracleRow orow;
  orow.t = 25.0;
  orow.r = 0.01;
  orow.alpha = 1.0;
  orow.mc_mean = 0.125;
  orow.mc_stderr = 0.5;
  orow.oracle = 0.125;
  orow.z_score = 0.0;
  std::ostringstream os2;
  write_oracle_csv({orow}, os2);
  CHECK(os2.str() ==
        "t,r,alpha,mc_mean,mc_stderr,oracle,z_score\n"
        "25,0.01,1,0.125,0.5,0.125,0\n");
}

TEST_CASE("small equilibration run lands near its limit") {
  auto report = run_experiment(mini_limits());
  REQUIRE(report.rows.size() == 1);
  const auto& row = report.rows[0];
  CHECK(row.dim == 1);
  CHECK(row.replicas == 100);
  CHECK(row.std_error > 0.0);
  CHECK(row.limit_constant == doctest::Approx(1.0 / 360.0).epsilon(2e-3));
  CHECK(row.renormalized > 0.5 * row.limit_constant);
  CHECK(row.renormalized < 2.0 * row.limit_constant);
  CHECK(report.ok());
  CHECK(report.details_json.find("config_hash") != std::string::npos);
}

TEST_CASE("identical seeds give byte identical output across worker counts") {
  auto cfg = mini_limits();
  cfg.workers = 1;
  auto a = run_experiment(cfg);
  cfg.workers = 8;
  auto b = run_experiment(cfg);
  std::ostringstream osa, osb;
  write_rows_csv(a.rows, osa);
  write_rows_csv(b.rows, osb);
  CHECK(osa.str() == osb.str());

  cfg.seed = 8;
  auto c = run_experiment(cfg);
  std::ostringstream osc;
  write_rows_csv(c.rows, osc);
  CHECK(osa.str() != osc.str());
}

TEST_CASE("config hash ignores output paths but tracks the seed") {
  auto cfg = mini_limits();
  auto a = run_experiment(cfg);
  cfg.out_csv = "/tmp/ergoflow_other.csv";
  auto b = run_experiment(cfg);
  cfg.out_csv.clear();
  cfg.seed = 1234;
  auto c = run_experiment(cfg);
  auto hash_of = [](const RunReport& r) {
    return nlohmann::json::parse(r.details_json).at("config_hash").get<std::uint64_t>();
  };
  CHECK(hash_of(a) == hash_of(b));
  CHECK(hash_of(a) != hash_of(c));
}

TEST_CASE("oracle comparison harness stays within sampling error") {
  ExperimentConfig cfg;
  cfg.experiment = "oracle-check";
  cfg.model = "torus1";
  cfg.alpha = 1.0;
  cfg.horizons = {25.0, 50.0};
  cfg.dampings = {0.1, 0.01};
  cfg.replicas = 100;
  cfg.samples = 4000;
  cfg.seed = 11;
  auto report = run_experiment(cfg);
  REQUIRE(report.oracle_rows.size() == 4);
  for (const auto& row : report.oracle_rows) {
    CHECK(row.mc_stderr > 0.0);
    CHECK(std::abs(row.z_score) <= 4.0);
  }
  CHECK(report.ok());
}

TEST_CASE("command line driver: exit codes reflect assertions and errors") {
  auto cfg = mini_limits();
  cfg.out_csv = "/tmp/ergoflow_cli_test.csv";
  cfg.out_json = "/tmp/ergoflow_cli_test.json";
  CHECK(run_cli_experiment(cfg) == 0);
  std::ifstream check_csv(cfg.out_csv);
  CHECK(check_csv.good());

  ExperimentConfig bad = mini_limits();
  bad.model = "torus9";
  CHECK(run_cli_experiment(bad) == 1);

  // the short damping clause of the planar log constant is an expected red
  ExperimentConfig d4;
  d4.experiment = "d4-constant";
  d4.model = "torus4";
  d4.alpha = 1.0;
  d4.horizons = {100.0};
  d4.lambda_cutoff = 300.0;
  d4.replicas = 1;
  CHECK(run_cli_experiment(d4) == 2);
}

TEST_CASE("misconfigured experiments throw before any simulation") {
  ExperimentConfig cfg = mini_limits();
  cfg.replicas = 10;  // below the floor
  CHECK_THROWS(run_experiment(cfg));
  cfg = mini_limits();
  cfg.horizons = {50.0, 25.0};  // not ascending
  CHECK_THROWS(run_experiment(cfg));
  cfg = mini_limits();
  cfg.horizons = {0.5};  // below the mixing scale
  CHECK_THROWS(run_experiment(cfg));
  cfg = mini_limits();
  cfg.experiment = "nonsense";
  CHECK_THROWS(run_experiment(cfg));
  cfg = mini_limits();
  cfg.model = "weighted-circle";
  cfg.nu = "cosine:0.5";  // density against the wrong reference measure
  CHECK_THROWS(run_experiment(cfg));
}

}  // TEST_SUITE
