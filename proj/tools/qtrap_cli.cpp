// Command-line driver: run / sweep / qfunc / peaks subcommands.
// All numeric output goes to CSV files; errors are reported as JSON on
// stderr with a nonzero exit code.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qtrap/runner.hpp"

namespace {

qtrap::RunConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  return qtrap::run_config_from_json(nlohmann::json::parse(is));
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

// reads the columns written by write_timeseries_csv
void read_timeseries(const std::string& path, std::vector<double>& t,
                     std::vector<double>& sp, std::vector<double>& inv) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open timeseries file: " + path);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() < 11) throw std::runtime_error("malformed timeseries row");
    t.push_back(row[0]);
    inv.push_back(row[3]);
    sp.push_back(row[10]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-level trapped ion in a (q-deformed) oscillator trap"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", timeseries_path;
  std::string tau_list_s, beta_list_s, times_s;
  double tau = 0.0, beta = 0.0, t_end = 0.0, dt = 0.0;
  double prominence = 0.0, threshold = 0.0;
  bool with_qfunc = false;
  std::vector<CLI::Option*> opt_tau, opt_beta, opt_t_end, opt_dt, opt_prom,
      opt_thr;

  auto passed = [](const std::vector<CLI::Option*>& opts) {
    for (const auto* o : opts)
      if (o && o->count() > 0) return true;
    return false;
  };

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out-dir", out_dir, "output directory");
    opt_tau.push_back(cmd->add_option("--tau", tau, "deformation parameter"));
    opt_beta.push_back(cmd->add_option("--beta", beta, "coherent amplitude (real)"));
    opt_t_end.push_back(cmd->add_option("--t-end", t_end, "end time (plot units)"));
    opt_dt.push_back(cmd->add_option("--dt", dt, "integrator substep (physical units)"));
    opt_prom.push_back(cmd->add_option("--prominence", prominence, "peak prominence"));
    opt_thr.push_back(
        cmd->add_option("--threshold", threshold, "revival envelope threshold"));
  };

  auto* cmd_run = app.add_subcommand("run", "single simulation");
  add_common(cmd_run);
  cmd_run->add_option("--qfunc-times", times_s, "comma-separated t_plot values");
  cmd_run->add_flag("--qfunc", with_qfunc, "also write Q-function grids");

  auto* cmd_sweep = app.add_subcommand("sweep", "tau x beta parameter sweep");
  add_common(cmd_sweep);
  cmd_sweep->add_option("--tau-list", tau_list_s, "comma-separated tau values")
      ->required();
  cmd_sweep->add_option("--beta-list", beta_list_s, "comma-separated beta values")
      ->required();

  auto* cmd_qfunc = app.add_subcommand("qfunc", "Q-function grids only");
  add_common(cmd_qfunc);
  cmd_qfunc->add_option("--times", times_s, "comma-separated t_plot values")
      ->required();

  auto* cmd_peaks = app.add_subcommand("peaks", "peak table from a timeseries.csv");
  cmd_peaks->add_option("--timeseries", timeseries_path, "timeseries.csv path")
      ->required();
  cmd_peaks->add_option("--out-dir", out_dir, "output directory");
  opt_prom.push_back(cmd_peaks->add_option("--prominence", prominence, "peak prominence"));
  opt_thr.push_back(
      cmd_peaks->add_option("--threshold", threshold, "revival envelope threshold"));

  CLI11_PARSE(app, argc, argv);

  try {
    qtrap::RunConfig cfg = load_config(config_path);
    if (passed(opt_tau)) cfg.params.d = qtrap::DeformationParam(tau);
    if (passed(opt_beta)) cfg.params.beta = beta;
    if (passed(opt_t_end)) cfg.t_end_plot = t_end;
    if (passed(opt_dt)) cfg.dt = dt;
    if (passed(opt_prom)) cfg.peak_params.prominence = prominence;
    if (passed(opt_thr)) cfg.peak_params.revival_threshold = threshold;
    if (!times_s.empty()) cfg.qfunc_times = parse_list(times_s);

    if (*cmd_run) {
      if (with_qfunc || !cfg.qfunc_times.empty()) cfg.outputs.insert("qfunc");
      qtrap::run(cfg, out_dir);
    } else if (*cmd_sweep) {
      std::vector<qtrap::complex> betas;
      for (double b : parse_list(beta_list_s)) betas.push_back(b);
      qtrap::sweep(cfg, parse_list(tau_list_s), betas, out_dir);
    } else if (*cmd_qfunc) {
      cfg.outputs = {"qfunc"};
      qtrap::run(cfg, out_dir);
    } else if (*cmd_peaks) {
      std::vector<double> t, sp, inv;
      read_timeseries(timeseries_path, t, sp, inv);
      auto peaks = qtrap::classify_peaks(qtrap::detect_peaks(t, sp, cfg.peak_params),
                                         t, inv, cfg.peak_params);
      std::filesystem::create_directories(out_dir);
      std::ofstream(std::filesystem::path(out_dir) / "peaks.csv")
          << qtrap::peak_table_csv(peaks);
      std::ofstream(std::filesystem::path(out_dir) / "peaks.txt")
          << qtrap::peak_table_text(peaks);
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
