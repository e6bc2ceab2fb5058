#pragma once

// Run configuration: a single JSON document is the canonical source of
// truth; CLI flags override individual fields.  Defaults are the reference
// parameter set (omega_bar = 50, delta_bar = -50, epsilon = 0.05, n_max = 32).

#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtrap/analysis.hpp"
#include "qtrap/dynamics.hpp"

namespace qtrap {

struct RunConfig {
  SystemParams params;
  double t_end_plot = 500.0;
  double sample_spacing_plot = 0.2;
  double dt = 1e-6;  // physical-time substep
  std::set<std::string> outputs = {"timeseries", "peaks"};
  std::vector<double> qfunc_times;  // t_plot values
  double qfunc_lo = -6.0, qfunc_hi = 6.0, qfunc_step = 0.1;
  PeakParams peak_params;

  void validate() const {
    params.validate();
    if (t_end_plot <= 0.0) throw std::invalid_argument("config: t_end_plot <= 0");
    if (sample_spacing_plot <= 0.0)
      throw std::invalid_argument("config: sample_spacing_plot <= 0");
    if (dt <= 0.0 || params.omega_bar * dt > 0.05)
      throw std::invalid_argument("config: dt must satisfy omega_bar*dt <= 0.05");
    if (qfunc_step <= 0.0 || qfunc_hi <= qfunc_lo)
      throw std::invalid_argument("config: bad qfunc window");
    for (const auto& o : outputs)
      if (o != "timeseries" && o != "qfunc" && o != "peaks")
        throw std::invalid_argument("config: unknown output kind '" + o + "'");
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{
      {"omega_bar", c.params.omega_bar},
      {"delta_bar", c.params.delta_bar},
      {"epsilon", c.params.epsilon},
      {"beta_re", c.params.beta.real()},
      {"beta_im", c.params.beta.imag()},
      {"phi", c.params.phi},
      {"tau", c.params.d.tau},
      {"n_max", c.params.n_max},
      {"t_end_plot", c.t_end_plot},
      {"sample_spacing_plot", c.sample_spacing_plot},
      {"dt", c.dt},
      {"outputs", c.outputs},
      {"qfunc_times", c.qfunc_times},
      {"qfunc_window", {c.qfunc_lo, c.qfunc_hi}},
      {"qfunc_step", c.qfunc_step},
      {"smooth_window", c.peak_params.smooth_window},
      {"prominence", c.peak_params.prominence},
      {"refine_window", c.peak_params.refine_window},
      {"envelope_window", c.peak_params.envelope_window},
      {"revival_threshold", c.peak_params.revival_threshold},
  };
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).template get<std::decay_t<decltype(slot)>>();
  };
  get("omega_bar", c.params.omega_bar);
  get("delta_bar", c.params.delta_bar);
  get("epsilon", c.params.epsilon);
  double bre = c.params.beta.real(), bim = c.params.beta.imag();
  get("beta_re", bre);
  get("beta_im", bim);
  c.params.beta = complex(bre, bim);
  get("phi", c.params.phi);
  double tau = c.params.d.tau;
  get("tau", tau);
  c.params.d = DeformationParam(tau);
  get("n_max", c.params.n_max);
  get("t_end_plot", c.t_end_plot);
  get("sample_spacing_plot", c.sample_spacing_plot);
  get("dt", c.dt);
  get("outputs", c.outputs);
  get("qfunc_times", c.qfunc_times);
  if (j.contains("qfunc_window")) {
    c.qfunc_lo = j.at("qfunc_window").at(0).get<double>();
    c.qfunc_hi = j.at("qfunc_window").at(1).get<double>();
  }
  get("qfunc_step", c.qfunc_step);
  get("smooth_window", c.peak_params.smooth_window);
  get("prominence", c.peak_params.prominence);
  get("refine_window", c.peak_params.refine_window);
  get("envelope_window", c.peak_params.envelope_window);
  get("revival_threshold", c.peak_params.revival_threshold);
  return c;
}

}  // namespace qtrap
