#pragma once

// Matrix elements of the laser-ion coupling operator F_q in the truncated
// Fock basis, plus two independent oracles used by the test suite.

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "qtrap/qalgebra.hpp"

namespace qtrap {

namespace detail {
// integer power; std::pow(complex) misbehaves for zero base
inline complex ipow(complex z, int k) {
  complex r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}
}  // namespace detail

// <m|F_q|n> over the truncated basis.  Complex-symmetric (elements[m][n] =
// elements[n][m], no conjugation); diagonal real; identity at epsilon = 0.
struct CouplingMatrix {
  int n_max = 0;
  double epsilon = 0.0;
  DeformationParam d;
  Eigen::MatrixXcd elements;
};

// Closed form for m <= n:
//   e^{-eps^2/2} (i eps)^{n-m} sqrt([m]_q!/[n]_q!)
//     * sum_{k=0}^{m} eps^{2k} (-1)^k [n]_q! / (k! (n-m+k)! [m-k]_q!)
// extended to m > n by transpose symmetry.  All factorial ratios go through
// log differences.
inline complex fq_element(int m, int n, double epsilon,
                          const DeformationParam& d) {
  if (m < 0 || n < 0) throw std::invalid_argument("fq_element: negative index");
  if (m > n) return fq_element(n, m, epsilon, d);
  const double lqm = q_log_factorial(m, d);
  const double lqn = q_log_factorial(n, d);
  double sum = 0.0;
  double sign = 1.0;
  const double leps2 = (epsilon != 0.0) ? 2.0 * std::log(std::abs(epsilon)) : 0.0;
  for (int k = 0; k <= m; ++k) {
    double lterm = lqn - std::lgamma(k + 1.0) - std::lgamma(n - m + k + 1.0) -
                   q_log_factorial(m - k, d);
    if (k > 0) {
      if (epsilon == 0.0) { sign = -sign; continue; }
      lterm += k * leps2;
    }
    sum += sign * std::exp(lterm);
    sign = -sign;
  }
  const complex ieps_pow = detail::ipow(complex(0.0, epsilon), n - m);
  return std::exp(-0.5 * epsilon * epsilon + 0.5 * (lqm - lqn)) * ieps_pow * sum;
}

inline CouplingMatrix fq_matrix(int n_max, double epsilon,
                                const DeformationParam& d) {
  if (n_max < 1) throw std::invalid_argument("fq_matrix: n_max < 1");
  CouplingMatrix F{n_max, epsilon, d,
                   Eigen::MatrixXcd(n_max + 1, n_max + 1)};
  for (int m = 0; m <= n_max; ++m)
    for (int n = m; n <= n_max; ++n) {
      const complex v = fq_element(m, n, epsilon, d);
      F.elements(m, n) = v;
      F.elements(n, m) = v;
    }
  return F;
}

// Independent oracle: explicit ladder application of
// e^{-eps^2/2} sum_a (i eps)^a Adag^a/a! sum_b (i eps)^b A^b/b!
// with Adag^a A^b matched so the state lands on <m|.  Test-only path.
inline complex fq_series_oracle(int m, int n, double epsilon,
                                const DeformationParam& d, int K) {
  if (m < 0 || n < 0 || K < 1)
    throw std::invalid_argument("fq_series_oracle: bad arguments");
  complex total = 0.0;
  double last = 0.0;
  bool truncated = false;
  for (int b = std::max(0, n - m); b <= n; ++b) {
    const int a = b + m - n;
    if (a > K || b > K) { truncated = true; break; }
    // A^b |n> = sqrt([n][n-1]...[n-b+1]) |n-b>, then Adag^a up to |m>
    double lamp = 0.0;
    for (int j = 0; j < b; ++j) lamp += std::log(q_number(n - j, d));
    for (int j = 1; j <= a; ++j) lamp += std::log(q_number(n - b + j, d));
    const double mag = std::exp(0.5 * lamp - std::lgamma(a + 1.0) -
                                std::lgamma(b + 1.0)) *
                       std::pow(epsilon, a + b);
    last = mag;
    total += detail::ipow(complex(0.0, 1.0), a + b) * mag;
  }
  if (truncated && std::abs(last) > 1e-14)
    throw std::runtime_error("fq_series_oracle: series not converged at K");
  return std::exp(-0.5 * epsilon * epsilon) * total;
}

// Harmonic-trap closed form via associated Laguerre polynomials,
// e^{-eps^2/2} (i eps)^{n-m} sqrt(m!/n!) L_m^{(n-m)}(eps^2); tau = 0 oracle.
inline complex f_harmonic_closed_form(int m, int n, double epsilon) {
  if (m < 0 || n < 0)
    throw std::invalid_argument("f_harmonic_closed_form: negative index");
  if (m > n) return f_harmonic_closed_form(n, m, epsilon);
  const double x = epsilon * epsilon;
  const double alpha = n - m;
  // stable three-term recurrence in the degree
  double Lkm1 = 1.0;                 // L_0
  double Lk = 1.0 + alpha - x;       // L_1
  if (m == 0) Lk = Lkm1;
  for (int k = 1; k < m; ++k) {
    const double Lkp1 =
        ((2 * k + 1 + alpha - x) * Lk - (k + alpha) * Lkm1) / (k + 1);
    Lkm1 = Lk;
    Lk = Lkp1;
  }
  const complex ieps_pow = detail::ipow(complex(0.0, epsilon), n - m);
  return std::exp(-0.5 * x + 0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0))) *
         ieps_pow * Lk;
}

// Debug dump: one line per entry, "row,col,re,im".
inline void dump_csv(const CouplingMatrix& F, std::ostream& os) {
  os << "row,col,re,im\n";
  for (int m = 0; m <= F.n_max; ++m)
    for (int n = 0; n <= F.n_max; ++n)
      os << m << ',' << n << ',' << F.elements(m, n).real() << ','
         << F.elements(m, n).imag() << '\n';
}

}  // namespace qtrap
