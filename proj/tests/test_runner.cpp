#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtrap/runner.hpp"

using namespace qtrap;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("qtrap_test_" + tag);
  fs::remove_all(p);
  return p;
}

// cheap config for end-to-end checks: short horizon (substep count does not
// matter for cost -- segments are applied as precomputed matrix powers)
RunConfig quick_config() {
  RunConfig cfg;
  cfg.t_end_plot = 4.0;
  return cfg;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("fmt_double round-trips") {
  for (double x : {0.0, 1.0, 0.2, 85.8, 1e-6, 3.141592653589793, -42.5,
                   0.30000000000000004}) {
    CHECK(std::stod(fmt_double(x)) == x);
  }
}

TEST_CASE("plot_time_grid") {
  auto g = plot_time_grid(500.0, 0.2);
  REQUIRE(g.size() == 2501);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == Catch::Approx(500.0).margin(1e-9));
  CHECK(g[1] - g[0] == Catch::Approx(0.2));
}

TEST_CASE("RunConfig JSON round-trip") {
  RunConfig c;
  c.params.omega_bar = 40.0;
  c.params.delta_bar = -40.0;
  c.params.epsilon = 0.03;
  c.params.beta = complex(3.0, 0.5);
  c.params.phi = 0.7;
  c.params.d = DeformationParam(0.0047);
  c.params.n_max = 24;
  c.t_end_plot = 123.0;
  c.sample_spacing_plot = 0.1;
  c.dt = 2e-6;
  c.outputs = {"timeseries", "qfunc"};
  c.qfunc_times = {0.0, 61.5};
  c.qfunc_lo = -5.0;
  c.qfunc_hi = 5.0;
  c.qfunc_step = 0.2;
  c.peak_params.prominence = 0.013;
  c.peak_params.revival_threshold = 0.07;

  const auto rt = run_config_from_json(to_json(c));
  CHECK(rt.params.omega_bar == c.params.omega_bar);
  CHECK(rt.params.delta_bar == c.params.delta_bar);
  CHECK(rt.params.epsilon == c.params.epsilon);
  CHECK(rt.params.beta == c.params.beta);
  CHECK(rt.params.phi == c.params.phi);
  CHECK(rt.params.d.tau == c.params.d.tau);
  CHECK(rt.params.n_max == c.params.n_max);
  CHECK(rt.t_end_plot == c.t_end_plot);
  CHECK(rt.sample_spacing_plot == c.sample_spacing_plot);
  CHECK(rt.dt == c.dt);
  CHECK(rt.outputs == c.outputs);
  CHECK(rt.qfunc_times == c.qfunc_times);
  CHECK(rt.qfunc_lo == c.qfunc_lo);
  CHECK(rt.qfunc_hi == c.qfunc_hi);
  CHECK(rt.qfunc_step == c.qfunc_step);
  CHECK(rt.peak_params.prominence == c.peak_params.prominence);
  CHECK(rt.peak_params.revival_threshold == c.peak_params.revival_threshold);

  // partial document: unspecified fields keep their defaults
  const auto partial = run_config_from_json(nlohmann::json{{"tau", 0.004}});
  CHECK(partial.params.d.tau == 0.004);
  CHECK(partial.params.omega_bar == 50.0);
  CHECK(partial.t_end_plot == 500.0);
}

TEST_CASE("RunConfig validation") {
  RunConfig c;
  c.dt = 0.01;  // omega_bar * dt = 0.5 > 0.05
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.outputs = {"bogus"};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.qfunc_hi = c.qfunc_lo;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.t_end_plot = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(RunConfig{}.validate());
}

TEST_CASE("simulate on a short horizon") {
  const auto cfg = quick_config();
  const auto tr = simulate(cfg);
  REQUIRE(tr.samples.size() == 21);
  REQUIRE(tr.cat_states.size() == 21);

  // t = 0 sample: equal populations, S(P) = ln 2
  const auto& s0 = tr.samples.front();
  CHECK(s0.p_g == Catch::Approx(0.5).margin(1e-10));
  CHECK(s0.s_p == Catch::Approx(std::numbers::ln2).margin(1e-10));

  for (const auto& o : tr.samples) {
    CHECK(o.p_g + o.p_e == Catch::Approx(1.0).margin(1e-8));
    CHECK(o.p_g1 + o.p_e1 == Catch::Approx(1.0).margin(1e-8));
    CHECK(o.s_p >= -1e-12);
  }
  CHECK(tr.max_norm_drift < 1e-8);
  CHECK(tr.max_energy_drift_rel < 1e-8);
  // beta = 4 puts ~1e-3 in the top three levels before any evolution; the
  // run must not leak far beyond that
  CHECK(tr.initial_tail_occupancy > 1e-4);
  CHECK(tr.max_tail_occupancy < 10.0 * tr.initial_tail_occupancy);
}

TEST_CASE("run writes the expected files") {
  auto cfg = quick_config();
  cfg.outputs = {"timeseries", "peaks", "qfunc"};
  cfg.qfunc_times = {0.0};
  cfg.qfunc_lo = -5.0;
  cfg.qfunc_hi = 5.0;
  cfg.qfunc_step = 0.5;
  const auto dir = fresh_dir("run");
  run(cfg, dir);

  CHECK(fs::exists(dir / "timeseries.csv"));
  CHECK(fs::exists(dir / "peaks.csv"));
  CHECK(fs::exists(dir / "peaks.txt"));
  CHECK(fs::exists(dir / "qfunc_t0.csv"));
  REQUIRE(fs::exists(dir / "run_meta.json"));

  const auto rows = read_csv_rows(dir / "timeseries.csv");
  REQUIRE(rows.size() == 21);
  for (const auto& r : rows) REQUIRE(r.size() == 11);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][10] == Catch::Approx(std::numbers::ln2).margin(1e-10));
  CHECK(rows[20][0] == Catch::Approx(4.0));

  const auto qrows = read_csv_rows(dir / "qfunc_t0.csv");
  REQUIRE(qrows.size() == 21 * 21);
  // cat at t=0: lobes at +/- beta -> Q(4,0) ~ Q(-4,0)... window is +/-5 here
  double at_origin = 0.0, at_lobe = 0.0;
  for (const auto& r : qrows) {
    if (r[0] == 4.0 && r[1] == 0.0) at_lobe = r[2];
    if (r[0] == 0.0 && r[1] == 0.0) at_origin = r[2];
  }
  CHECK(at_lobe > 10.0 * at_origin);

  auto meta = nlohmann::json::parse(std::ifstream(dir / "run_meta.json"));
  CHECK(meta.at("config").at("n_max") == 32);
  CHECK(meta.at("diagnostics").at("max_norm_drift").get<double>() < 1e-8);
  CHECK(meta.contains("contrast"));

  // determinism: a second run produces byte-identical timeseries
  const auto dir2 = fresh_dir("run_again");
  run(cfg, dir2);
  std::ifstream a(dir / "timeseries.csv"), b(dir2 / "timeseries.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());

  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("run rejects qfunc times outside the horizon") {
  auto cfg = quick_config();
  cfg.outputs = {"qfunc"};
  cfg.qfunc_times = {400.0};
  const auto dir = fresh_dir("bad_qfunc");
  CHECK_THROWS_AS(run(cfg, dir), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("contrast_summary") {
  std::vector<PeakRecord> recs{
      {0.0, 0.69, PeakKind::initial, 0.02},
      {85.8, 0.333, PeakKind::revival, 0.45},
      {171.4, 0.143, PeakKind::collapse, 0.03},
      {266.8, 0.106, PeakKind::revival, 0.30},
  };
  const auto cs = contrast_summary(recs);
  CHECK(cs.n_revivals == 2);
  CHECK(cs.n_collapses == 2);  // initial counts toward the collapse side
  CHECK(cs.max_revival_env == Catch::Approx(0.45));
  CHECK(cs.min_collapse_env == Catch::Approx(0.02));
  CHECK(cs.contrast == Catch::Approx(0.45 / 0.02));
}

TEST_CASE("sweep covers the grid and isolates failures") {
  auto cfg = quick_config();
  cfg.outputs = {"timeseries", "peaks"};
  const auto dir = fresh_dir("sweep");
  const auto cells = sweep(cfg, {0.0, 0.004}, {complex(4.0)}, dir);
  REQUIRE(cells.size() == 2);
  for (const auto& c : cells) CHECK(c.status == "ok");
  CHECK(fs::exists(dir / "tau0_beta4" / "timeseries.csv"));
  CHECK(fs::exists(dir / "tau0.004_beta4" / "timeseries.csv"));
  REQUIRE(fs::exists(dir / "sweep_summary.csv"));
  {
    std::ifstream is(dir / "sweep_summary.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header.find("tau,beta_re") == 0);
    int n = 0;
    std::string line;
    while (std::getline(is, line)) ++n;
    CHECK(n == 2);
  }
  fs::remove_all(dir);
}
