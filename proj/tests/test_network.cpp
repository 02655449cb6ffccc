#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fringelab/network.hpp"
#include "oracles.hpp"

using namespace fringelab;

namespace {
constexpr double kPi = 3.14159265358979323846;

NetworkParams random_params(std::mt19937& rng, bool lossy) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> eta(0.05, 1.0);
  NetworkParams p;
  p.phi = phase(rng);
  if (lossy) {
    p.eta_c = eta(rng);
    p.eta_d = eta(rng);
    p.eta_e = eta(rng);
    p.eta_f = eta(rng);
  }
  return p;
}
}  // namespace

TEST_CASE("beamsplitter is unitary") {
  const Mat2c b = beamsplitter_matrix();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      complexd s = 0.0;
      for (int l = 0; l < 2; ++l) s += b[i][l] * std::conj(b[j][l]);
      CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-15);
    }
  }
}

TEST_CASE("phase matrix acts on the second mode only") {
  const Mat2c p = phase_matrix(0.7);
  CHECK(p[0][0] == complexd(1.0, 0.0));
  CHECK(p[0][1] == complexd(0.0, 0.0));
  CHECK(p[1][0] == complexd(0.0, 0.0));
  CHECK(std::abs(p[1][1] - std::exp(complexd(0.0, 0.7))) < 1e-15);
}

TEST_CASE("loss matrix mixes linearly") {
  const Mat2c l = loss_matrix(0.3);
  CHECK(l[0][0] == complexd(0.3, 0.0));
  CHECK(l[0][1] == complexd(0.7, 0.0));
  CHECK(l[1][0] == complexd(0.7, 0.0));
  CHECK(l[1][1] == complexd(0.3, 0.0));
}

TEST_CASE("parameter validation") {
  NetworkParams p;
  p.eta_c = 1.2;
  CHECK_THROWS(p.validate());
  p.eta_c = -0.1;
  CHECK_THROWS(p.validate());
  p.eta_c = 1.0;
  p.phi = std::nan("");
  CHECK_THROWS(p.validate());
}

TEST_CASE("lossless coefficients close over the detected modes") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkParams p = random_params(rng, false);
    const TransferCoefficients k = transfer_coefficients(p);
    const double pref2 = k.per_photon_prefactor * k.per_photon_prefactor;
    CHECK(std::abs(pref2 * (std::norm(k.A) + std::norm(k.B)) - 1.0) < 1e-12);
    CHECK(std::abs(pref2 * (std::norm(k.D) + std::norm(k.E)) - 1.0) < 1e-12);
    CHECK(std::abs(k.C) < 1e-12);
    CHECK(std::abs(k.F) < 1e-12);
  }
}

TEST_CASE("ideal coefficients take the interferometer closed form") {
  const double phi = 1.234;
  const TransferCoefficients k = transfer_coefficients(NetworkParams{phi});
  const double r2 = 1.0 / std::sqrt(2.0);
  const complexd ep = std::exp(complexd(0.0, phi));
  const complexd i1(0.0, 1.0);
  CHECK(std::abs(k.A - r2 * (1.0 - ep)) < 1e-14);
  CHECK(std::abs(k.B - i1 * r2 * (1.0 + ep)) < 1e-14);
  CHECK(std::abs(k.D - i1 * r2 * (1.0 + ep)) < 1e-14);
  CHECK(std::abs(k.E + r2 * (1.0 - ep)) < 1e-14);
}

TEST_CASE("coefficients match the explicit matrix chain") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkParams p = random_params(rng, true);
    const TransferCoefficients k = transfer_coefficients(p);
    const oracles::Mat3 m = oracles::matrix_chain(p);
    const double pref = k.per_photon_prefactor;
    CHECK(std::abs(pref * k.A - m[0][0]) < 1e-12);
    CHECK(std::abs(pref * k.B - m[1][0]) < 1e-12);
    CHECK(std::abs(pref * k.C - m[2][0]) < 1e-12);
    CHECK(std::abs(pref * k.D - m[0][1]) < 1e-12);
    CHECK(std::abs(pref * k.E - m[1][1]) < 1e-12);
    CHECK(std::abs(pref * k.F - m[2][1]) < 1e-12);
  }
}

TEST_CASE("amplitude convention substitutes square roots") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    NetworkParams p = random_params(rng, true);
    const TransferCoefficients amp =
        transfer_coefficients(p, LossConvention::Amplitude);
    NetworkParams q = p;
    q.eta_c = std::sqrt(p.eta_c);
    q.eta_d = std::sqrt(p.eta_d);
    q.eta_e = std::sqrt(p.eta_e);
    q.eta_f = std::sqrt(p.eta_f);
    // the linear convention evaluated at sqrt(eta) matches everywhere the
    // (1 - eta) loss legs do not enter
    const TransferCoefficients lin = transfer_coefficients(q);
    CHECK(std::abs(amp.A - lin.A) < 1e-13);
    CHECK(std::abs(amp.B - lin.B) < 1e-13);
    CHECK(std::abs(amp.D - lin.D) < 1e-13);
    CHECK(std::abs(amp.E - lin.E) < 1e-13);
  }
}

TEST_CASE("amplitude convention conserves single photon probability") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkParams p = random_params(rng, true);
    const TransferCoefficients k =
        transfer_coefficients(p, LossConvention::Amplitude);
    const double pref2 = k.per_photon_prefactor * k.per_photon_prefactor;
    const double from_a =
        pref2 * (std::norm(k.A) + std::norm(k.B) + std::norm(k.C));
    const double from_b =
        pref2 * (std::norm(k.D) + std::norm(k.E) + std::norm(k.F));
    // sqrt substitution keeps the direct legs normalized; the shared sink
    // accumulates coherently so exact unitarity needs distinct sinks, but
    // detected-mode probabilities never exceed 1
    CHECK(pref2 * (std::norm(k.A) + std::norm(k.B)) <= 1.0 + 1e-12);
    CHECK(pref2 * (std::norm(k.D) + std::norm(k.E)) <= 1.0 + 1e-12);
    CHECK(from_a > 0.0);
    CHECK(from_b > 0.0);
  }
}

TEST_CASE("linear convention damps probability under loss") {
  NetworkParams p;
  p.phi = 0.9;
  p.eta_c = 0.6;
  p.eta_d = 0.8;
  const TransferCoefficients k = transfer_coefficients(p);
  const double pref2 = k.per_photon_prefactor * k.per_photon_prefactor;
  CHECK(pref2 * (std::norm(k.A) + std::norm(k.B)) < 1.0);
}
