#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "qtrap/interaction.hpp"

using namespace qtrap;

namespace {
constexpr double eps = 0.05;
}

TEST_CASE("fq_element identity at zero coupling") {
  DeformationParam d(0.004);
  for (int m = 0; m <= 8; ++m)
    for (int n = 0; n <= 8; ++n) {
      const complex v = fq_element(m, n, 0.0, d);
      if (m == n)
        CHECK(v == complex(1.0));
      else
        CHECK(std::abs(v) == 0.0);
    }
}

TEST_CASE("fq_element transpose symmetry without conjugation") {
  DeformationParam d(0.0047);
  for (int m = 0; m <= 12; ++m)
    for (int n = m + 1; n <= 12; ++n) {
      const complex a = fq_element(m, n, eps, d);
      const complex b = fq_element(n, m, eps, d);
      CHECK(a.real() == Catch::Approx(b.real()).margin(1e-16));
      CHECK(a.imag() == Catch::Approx(b.imag()).margin(1e-16));
    }
}

TEST_CASE("fq_element phase and reality pattern") {
  DeformationParam d(0.004);
  for (int m = 0; m <= 10; ++m)
    for (int n = m; n <= 10; ++n) {
      const complex v = fq_element(m, n, eps, d);
      // (i eps)^{n-m} prefactor: purely real when n-m is even, purely
      // imaginary when odd
      if ((n - m) % 2 == 0)
        CHECK(std::abs(v.imag()) < 1e-18);
      else
        CHECK(std::abs(v.real()) < 1e-18);
    }
  // diagonal near 1 for small eps
  for (int n = 0; n <= 10; ++n) {
    const complex v = fq_element(n, n, eps, d);
    CHECK(v.real() == Catch::Approx(1.0).margin(0.2));
  }
}

TEST_CASE("closed form vs ladder-series oracle") {
  // triangle leg 1: independent summation of the operator series
  for (double tau : {0.0, 0.004, 0.0047}) {
    DeformationParam d(tau);
    for (int m = 0; m <= 16; ++m)
      for (int n = 0; n <= 16; ++n) {
        const complex a = fq_element(m, n, eps, d);
        const complex b = fq_series_oracle(m, n, eps, d, 40);
        CHECK(std::abs(a - b) < 1e-14);
      }
  }
}

TEST_CASE("closed form vs Laguerre oracle at tau = 0") {
  // triangle leg 2: harmonic-limit associated-Laguerre expression
  DeformationParam h(0.0);
  for (int m = 0; m <= 32; ++m)
    for (int n = 0; n <= 32; ++n) {
      const complex a = fq_element(m, n, eps, h);
      const complex b = f_harmonic_closed_form(m, n, eps);
      CHECK(std::abs(a - b) < 1e-13);
    }
}

TEST_CASE("fq_matrix structure") {
  DeformationParam h(0.0);
  DeformationParam d(0.004);
  const auto F = fq_matrix(32, eps, d);
  REQUIRE(F.elements.rows() == 33);
  REQUIRE(F.elements.cols() == 33);
  CHECK(F.n_max == 32);
  CHECK(F.epsilon == eps);

  // complex symmetric, real diagonal
  for (int m = 0; m <= 32; ++m) {
    CHECK(F.elements(m, m).imag() == 0.0);
    for (int n = 0; n <= 32; ++n)
      CHECK(F.elements(m, n) == F.elements(n, m));
  }

  // at tau = 0, F is unitary in the infinite basis; the truncated block is
  // close to unitary away from the edge.  (The deformed normal-ordered form
  // is only approximately unitary -- the disentangling identity behind it
  // holds exactly only for the canonical commutator -- so that case gets a
  // looser bound.)
  {
    const auto Fh = fq_matrix(32, eps, h);
    Eigen::MatrixXcd Gh = Fh.elements.adjoint() * Fh.elements;
    for (int m = 0; m <= 24; ++m)
      CHECK(std::abs(Gh(m, m) - 1.0) < 1e-6);
  }
  Eigen::MatrixXcd G = F.elements.adjoint() * F.elements;
  for (int m = 0; m <= 24; ++m)
    CHECK(std::abs(G(m, m) - 1.0) < 1e-4);

  // off-diagonal magnitude decays with |m-n|
  for (int m = 0; m <= 20; ++m) {
    double prev = std::abs(F.elements(m, m));
    for (int n = m + 1; n <= m + 6; ++n) {
      const double cur = std::abs(F.elements(m, n));
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("fq input validation") {
  DeformationParam d(0.004);
  CHECK_THROWS_AS(fq_element(-1, 0, eps, d), std::invalid_argument);
  CHECK_THROWS_AS(fq_element(0, -2, eps, d), std::invalid_argument);
  CHECK_THROWS_AS(fq_matrix(0, eps, d), std::invalid_argument);
  CHECK_THROWS_AS(fq_series_oracle(0, 0, eps, d, 0), std::invalid_argument);
  // oracle refuses to return an unconverged sum
  CHECK_THROWS_AS(fq_series_oracle(30, 30, 5.0, d, 2), std::runtime_error);
}

TEST_CASE("dump_csv emits one row per entry") {
  const auto F = fq_matrix(2, eps, DeformationParam(0.0));
  std::ostringstream os;
  dump_csv(F, os);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 1 + 9);  // header + 3x3
}
