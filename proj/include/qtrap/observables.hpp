#pragma once

// Populations, coherence, inversion, partial mutual entropy S(P), the
// optional coherence entropy term, and the Husimi Q-function.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qtrap/dynamics.hpp"
#include "qtrap/qalgebra.hpp"

namespace qtrap {

struct ObservableSample {
  double t_plot = 0.0;
  double p_g = 0.0, p_e = 0.0;
  complex c_ge;
  double inversion = 0.0;
  double p_g1 = 0.0, p_e1 = 0.0;
  double p_g2 = 0.0, p_e2 = 0.0;
  complex c_ge1, c_ge2;
  double s_p = 0.0;
  std::optional<double> s_c;  // diagnostic only
};

inline std::pair<double, double> populations(const AmplitudeState& s) {
  return {s.g.squaredNorm(), s.e.squaredNorm()};
}

inline double inversion(const AmplitudeState& s) {
  return s.g.squaredNorm() - s.e.squaredNorm();
}

// C_ge = sum_n g_n^* e_n
inline complex coherence(const AmplitudeState& s) {
  return s.g.dot(s.e);  // Eigen dot conjugates the left argument
}

namespace detail {
// p*ln(p/q) with 0 ln 0 := 0 and the full-state probability floored.
inline double kl_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  return p * std::log(p / std::max(q, 1e-300));
}
}  // namespace detail

// S(P) = sum_{i=1,2} 1/2 [ P_g^(i) ln(P_g^(i)/P_g) + P_e^(i) ln(P_e^(i)/P_e) ]
// Natural log; equal cat weights lambda_1 = lambda_2 = 1/2.
inline double partial_mutual_entropy(double p_g, double p_e,
                                     double p_g1, double p_e1,
                                     double p_g2, double p_e2) {
  return 0.5 * (detail::kl_term(p_g1, p_g) + detail::kl_term(p_e1, p_e)) +
         0.5 * (detail::kl_term(p_g2, p_g) + detail::kl_term(p_e2, p_e));
}

// Coherence part S(C) = sum_i lambda_i 2 Re[ C^(i) (log(C^(i)/C))^* ],
// principal branch of the complex log.  Returns nullopt when the full-state
// coherence is too small for the branch to be meaningful.
inline std::optional<double> coherence_entropy_term(complex c, complex c1,
                                                    complex c2) {
  if (std::abs(c) < 1e-30) return std::nullopt;
  double s = 0.0;
  for (const complex& ci : {c1, c2}) {
    if (std::abs(ci) == 0.0) continue;  // 0 log 0 convention
    s += 0.5 * 2.0 * (ci * std::conj(std::log(ci / c))).real();
  }
  return s;
}

inline ObservableSample make_sample(const AmplitudeState& cat,
                                    const AmplitudeState& b1,
                                    const AmplitudeState& b2) {
  ObservableSample o;
  o.t_plot = cat.t / two_pi;
  std::tie(o.p_g, o.p_e) = populations(cat);
  o.inversion = o.p_g - o.p_e;
  o.c_ge = coherence(cat);
  std::tie(o.p_g1, o.p_e1) = populations(b1);
  std::tie(o.p_g2, o.p_e2) = populations(b2);
  o.c_ge1 = coherence(b1);
  o.c_ge2 = coherence(b2);
  o.s_p = partial_mutual_entropy(o.p_g, o.p_e, o.p_g1, o.p_e1, o.p_g2, o.p_e2);
  o.s_c = coherence_entropy_term(o.c_ge, o.c_ge1, o.c_ge2);
  return o;
}

// Husimi grid over a rectangular (alpha_r, alpha_i) window.
struct QGrid {
  std::vector<double> alpha_re_axis;
  std::vector<double> alpha_im_axis;
  Eigen::MatrixXd values;  // values(i,j) = Q(alpha_re[i] + i alpha_im[j])
};

inline std::vector<double> linspace_step(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 0.5 * step; x += step) v.push_back(x);
  return v;
}

// Q(alpha) = (1/pi) (|<alpha|g>|^2 + |<alpha|e>|^2), tracing out the ion.
// The kernel state uses the convergent q-exponential normalization so the
// phase-space integral is basis-independent.
inline QGrid q_function(const AmplitudeState& s,
                        std::vector<double> alpha_re_axis,
                        std::vector<double> alpha_im_axis,
                        const DeformationParam& d) {
  const int n_max = static_cast<int>(s.g.size()) - 1;
  QGrid grid{std::move(alpha_re_axis), std::move(alpha_im_axis), {}};
  const int nr = static_cast<int>(grid.alpha_re_axis.size());
  const int ni = static_cast<int>(grid.alpha_im_axis.size());
  grid.values.resize(nr, ni);
  Eigen::VectorXcd c(n_max + 1);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ni; ++j) {
      const complex alpha(grid.alpha_re_axis[i], grid.alpha_im_axis[j]);
      auto cv = coherent_amplitudes(alpha == 0.0 ? complex(0.0) : alpha, d,
                                    n_max, CoherentNorm::full_series);
      for (int n = 0; n <= n_max; ++n) c(n) = cv[n];
      const double q = (std::norm(c.dot(s.g)) + std::norm(c.dot(s.e))) /
                       std::numbers::pi;
      grid.values(i, j) = q;
    }
  return grid;
}

}  // namespace qtrap
