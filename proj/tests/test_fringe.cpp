#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include "fringelab/fringe.hpp"

using namespace fringelab;

namespace {

double factorial_d(int n) {
  double r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// closed forms for the ideal fringes, written out from scratch so the
// library's propagator route and analytic route are checked independently
double p10_ref(double phi) { return (1 - std::cos(phi)) / 2; }
double p11_ref(double phi) { return (1 + std::cos(2 * phi)) / 2; }
double p20_ref(double phi) { return (1 - std::cos(2 * phi)) / 4; }
double p22_ref(double phi) { return 3.0 / 16 * (1 - std::cos(4 * phi)); }
double dist11_ref(double phi) { return (3 + std::cos(2 * phi)) / 4; }
double hb_ref(int n, double phi) {
  const double h = n / 2;
  return std::pow(2.0, -n) * factorial_d(n) / (factorial_d(int(h)) * factorial_d(int(h))) *
         (1 - std::cos(n * phi)) / 2;
}

}  // namespace

TEST_CASE("uniform grid covers both endpoints") {
  const auto g = uniform_grid();
  REQUIRE(g.size() == kDefaultGridPoints);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(kTwoPi).epsilon(1e-15));
  const auto h = uniform_grid(5, -1.0, 1.0);
  REQUIRE(h.size() == 5);
  CHECK(h[0] == -1.0);
  CHECK(h[2] == doctest::Approx(0.0));
  CHECK(h[4] == 1.0);
  CHECK_THROWS(uniform_grid(1));
  CHECK_THROWS(uniform_grid(10, 2.0, 2.0));
}

TEST_CASE("analytic fringes match their closed forms") {
  std::mt19937 rng(411);
  std::uniform_real_distribution<double> phase(-2 * kTwoPi, 2 * kTwoPi);
  for (int t = 0; t < 25; ++t) {
    const double phi = phase(rng);
    CHECK(analytic_fringe(AnalyticKind::P10, phi) ==
          doctest::Approx(p10_ref(phi)).epsilon(1e-13));
    CHECK(analytic_fringe(AnalyticKind::P11, phi) ==
          doctest::Approx(p11_ref(phi)).epsilon(1e-13));
    CHECK(analytic_fringe(AnalyticKind::P20, phi) ==
          doctest::Approx(p20_ref(phi)).epsilon(1e-13));
    CHECK(analytic_fringe(AnalyticKind::P22, phi) ==
          doctest::Approx(p22_ref(phi)).epsilon(1e-13));
    CHECK(analytic_fringe(AnalyticKind::Distinguishable11, phi) ==
          doctest::Approx(dist11_ref(phi)).epsilon(1e-13));
    for (int n : {2, 4, 6, 8}) {
      CHECK(analytic_fringe(AnalyticKind::HollandBurnett, phi, n) ==
            doctest::Approx(hb_ref(n, phi)).epsilon(1e-13));
    }
  }
  CHECK_THROWS(analytic_fringe(AnalyticKind::HollandBurnett, 0.5, 3));
  CHECK_THROWS(analytic_fringe(AnalyticKind::HollandBurnett, 0.5, 0));
}

TEST_CASE("four photon Holland-Burnett curve coincides with the dedicated form") {
  for (double phi : uniform_grid(181)) {
    CHECK(analytic_fringe(AnalyticKind::HollandBurnett, phi, 4) ==
          doctest::Approx(analytic_fringe(AnalyticKind::P22, phi)).epsilon(1e-14));
  }
}

TEST_CASE("photon number product expectation") {
  for (int n : {2, 4, 6, 8}) {
    CHECK(photon_number_product_expectation(n, 0.0) == (n / 2.0) * (n / 2.0));
    for (double phi : {0.3, 1.1, kPi / 2, 2.9}) {
      const double s = std::sin(phi);
      const double ref = n / 8.0 * (2 * n - (2 + n) * s * s);
      CHECK(photon_number_product_expectation(n, phi) ==
            doctest::Approx(ref).epsilon(1e-12));
    }
  }
  CHECK_THROWS(photon_number_product_expectation(3, 0.0));
}

TEST_CASE("propagated scans reproduce the analytic fringes for pure inputs") {
  const auto grid = uniform_grid(41);
  const SourceParams ideal;
  struct Row {
    InputConfig config;
    DetectionScheme scheme;
    AnalyticKind kind;
  };
  const Row rows[] = {
      {InputConfig::Ket10, DetectionScheme::at_least(1, 0), AnalyticKind::P10},
      {InputConfig::Ket11, DetectionScheme::at_least(1, 1), AnalyticKind::P11},
      {InputConfig::Ket20, DetectionScheme::at_least(1, 1), AnalyticKind::P20},
      {InputConfig::Ket22, DetectionScheme::at_least(3, 1), AnalyticKind::P22},
  };
  for (const auto& row : rows) {
    const auto sc = scan(row.config, ideal, row.scheme, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(sc.probs[i] ==
            doctest::Approx(analytic_fringe(row.kind, grid[i])).epsilon(1e-12));
    }
  }
  SourceParams dist;
  dist.indist = 0.0;
  const auto sc = scan(InputConfig::Ket11, dist, DetectionScheme::at_least(1, 1), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(sc.probs[i] == doctest::Approx(dist11_ref(grid[i])).epsilon(1e-12));
  }
}

TEST_CASE("analytic scan mirrors pointwise evaluation") {
  const auto grid = uniform_grid(17, 0.0, kPi);
  const auto sc = analytic_scan(AnalyticKind::P22, grid);
  REQUIRE(sc.probs.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(sc.probs[i] == analytic_fringe(AnalyticKind::P22, grid[i]));
  }
  CHECK(sc.scheme_label == analytic_kind_name(AnalyticKind::P22));
}

TEST_CASE("scheme labels and exact versus threshold detection") {
  CHECK(DetectionScheme::at_least(3, 1).label() == "atleast-3,1");
  CHECK(DetectionScheme::exact(2, 0).label() == "exact-2,0");
  CHECK(DetectionScheme::combined31().label() == "combined-31+13");

  // two lossless photons cannot exceed one per arm at a coincidence, so the
  // threshold and exact schemes agree
  const SourceParams ideal;
  const auto grid = uniform_grid(21);
  const auto thr = scan(InputConfig::Ket11, ideal, DetectionScheme::at_least(1, 1), grid);
  const auto ex = scan(InputConfig::Ket11, ideal, DetectionScheme::exact(1, 1), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(thr.probs[i] == doctest::Approx(ex.probs[i]).epsilon(1e-14));
  }

  const auto comb = scan(InputConfig::Ket22, ideal, DetectionScheme::combined31(), grid);
  const auto p31 = scan(InputConfig::Ket22, ideal, DetectionScheme::at_least(3, 1), grid);
  const auto p13 = scan(InputConfig::Ket22, ideal, DetectionScheme::at_least(1, 3), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(comb.probs[i] ==
          doctest::Approx(p31.probs[i] + p13.probs[i]).epsilon(1e-13));
  }
}

TEST_CASE("contrast of the ideal pair fringe") {
  const SourceParams ideal;
  const auto rep =
      contrast(scan(InputConfig::Ket11, ideal, DetectionScheme::at_least(1, 1), uniform_grid()));
  CHECK(rep.pairs.size() == 4);
  CHECK(rep.mean_contrast == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(rep.deep_contrast.has_value());
  CHECK_FALSE(rep.shallow_contrast.has_value());
  CHECK_FALSE(rep.uncertainty.has_value());
}

TEST_CASE("distinguishable pair fringe sits on the one third floor") {
  SourceParams dist;
  dist.indist = 0.0;
  const auto rep =
      contrast(scan(InputConfig::Ket11, dist, DetectionScheme::at_least(1, 1), uniform_grid()));
  CHECK(rep.pairs.size() == 4);
  CHECK(rep.mean_contrast == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("four photon fringe splits its minima into deep and shallow") {
  const SourceParams ideal;
  const auto ideal_rep =
      contrast(scan(InputConfig::Ket22, ideal, DetectionScheme::at_least(3, 1), uniform_grid()));
  CHECK(ideal_rep.pairs.size() == 8);
  CHECK(ideal_rep.mean_contrast == doctest::Approx(1.0).epsilon(1e-10));

  SourceParams fitted;
  fitted.g2 = 0.018;
  fitted.indist = 0.974;
  fitted.eta_c = 0.803;
  fitted.eta_d = 0.761;
  fitted.eta_e = 0.178;
  fitted.eta_f = 0.322;
  const auto rep =
      contrast(scan(InputConfig::Ket22, fitted, DetectionScheme::at_least(3, 1), uniform_grid()));
  CHECK(rep.pairs.size() == 8);
  REQUIRE(rep.deep_contrast.has_value());
  REQUIRE(rep.shallow_contrast.has_value());
  // frozen values for this parameter set
  CHECK(rep.mean_contrast == doctest::Approx(0.788543390574716).epsilon(1e-9));
  CHECK(*rep.deep_contrast == doctest::Approx(0.825651512551886).epsilon(1e-9));
  CHECK(*rep.shallow_contrast == doctest::Approx(0.751435268597546).epsilon(1e-9));
  CHECK(*rep.deep_contrast > *rep.shallow_contrast);
  CHECK(rep.mean_contrast > *rep.shallow_contrast);
  CHECK(rep.mean_contrast < *rep.deep_contrast);
}

TEST_CASE("deep minima stay pinned as overlap degrades") {
  SourceParams p;
  p.indist = 0.5;
  const auto rep =
      contrast(scan(InputConfig::Ket22, p, DetectionScheme::at_least(3, 1), uniform_grid()));
  REQUIRE(rep.deep_contrast.has_value());
  CHECK(*rep.deep_contrast == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*rep.shallow_contrast < 0.5);
}

TEST_CASE("contrast is invariant under a whole number of grid steps of phase") {
  SourceParams fitted;
  fitted.g2 = 0.018;
  fitted.indist = 0.974;
  fitted.eta_d = 0.761;
  const auto grid = uniform_grid();
  const double step = grid[1] - grid[0];
  std::vector<double> shifted(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) shifted[i] = grid[i] + 37 * step;
  const auto a =
      contrast(scan(InputConfig::Ket22, fitted, DetectionScheme::at_least(3, 1), grid));
  const auto b =
      contrast(scan(InputConfig::Ket22, fitted, DetectionScheme::at_least(3, 1), shifted));
  CHECK(a.mean_contrast == doctest::Approx(b.mean_contrast).epsilon(1e-10));
  CHECK(*a.deep_contrast == doctest::Approx(*b.deep_contrast).epsilon(1e-10));
}

TEST_CASE("uncertainty appears only when the scan carries sigmas") {
  SourceParams fitted;
  fitted.g2 = 0.018;
  fitted.indist = 0.974;
  fitted.eta_d = 0.761;
  auto sc = scan(InputConfig::Ket22, fitted, DetectionScheme::at_least(3, 1), uniform_grid());
  CHECK_FALSE(contrast(sc).uncertainty.has_value());
  sc.sigmas.assign(sc.probs.size(), 1e-3);
  const auto rep = contrast(sc);
  REQUIRE(rep.uncertainty.has_value());
  CHECK(*rep.uncertainty > 0.0);
}

TEST_CASE("contrast rejects malformed scans") {
  FringeScan sc;
  sc.phis = {0.0, 1.0};
  sc.probs = {0.1, 0.2};
  CHECK_THROWS(contrast(sc));
  sc.phis = {0.0, 1.0, 0.5};
  sc.probs = {0.1, 0.2, 0.3};
  CHECK_THROWS(contrast(sc));
  sc.phis = {0.0, 1.0, 2.0, 3.0};
  sc.probs = {0.4, 0.4, 0.4, 0.4};
  CHECK_THROWS(contrast(sc));
}

TEST_CASE("pair contrast sweep over multiphoton emission") {
  SourceParams base;
  base.indist = 0.974;
  base.eta_c = 0.8034;
  base.eta_d = 0.761;
  base.eta_e = 0.320;
  base.eta_f = 0.322;
  const std::vector<double> g2s = {0.0, 0.018, 0.05, 0.09};
  const auto reps = parameter_sweep(InputConfig::Ket11, DetectionScheme::at_least(1, 1),
                                    SweepVar::G2, g2s, base);
  REQUIRE(reps.size() == g2s.size());
  for (std::size_t i = 1; i < reps.size(); ++i) {
    CHECK(reps[i].mean_contrast < reps[i - 1].mean_contrast);
  }
  // frozen values for this parameter set
  CHECK(reps[0].mean_contrast == doctest::Approx(0.968778502490).epsilon(1e-9));
  CHECK(reps[1].mean_contrast == doctest::Approx(0.933756511184).epsilon(1e-9));
}

TEST_CASE("sweep variables round trip by name") {
  for (auto var : {SweepVar::Indist, SweepVar::G2, SweepVar::EtaC}) {
    CHECK(sweep_var_from_name(sweep_var_name(var)) == var);
  }
  CHECK_THROWS(sweep_var_from_name("etaq"));
}

TEST_CASE("thread count does not change scan values") {
  SourceParams fitted;
  fitted.g2 = 0.018;
  fitted.indist = 0.974;
  fitted.eta_d = 0.761;
  setenv("FRINGELAB_THREADS", "1", 1);
  const auto one =
      scan(InputConfig::Ket22, fitted, DetectionScheme::at_least(3, 1), uniform_grid());
  setenv("FRINGELAB_THREADS", "4", 1);
  const auto four =
      scan(InputConfig::Ket22, fitted, DetectionScheme::at_least(3, 1), uniform_grid());
  unsetenv("FRINGELAB_THREADS");
  REQUIRE(one.probs.size() == four.probs.size());
  for (std::size_t i = 0; i < one.probs.size(); ++i) {
    CHECK(one.probs[i] == four.probs[i]);  // bitwise, not approximate
  }
}

TEST_CASE("scan serialization") {
  const SourceParams ideal;
  auto sc = scan(InputConfig::Ket11, ideal, DetectionScheme::at_least(1, 1), uniform_grid(5));
  const auto csv = sc.to_csv();
  CHECK(csv.rfind("phi,prob\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  sc.sigmas.assign(5, 0.01);
  CHECK(sc.to_csv().rfind("phi,prob,sigma\n", 0) == 0);
  const auto js = sc.to_json();
  CHECK(js.find("atleast-1,1") != std::string::npos);
  CHECK(js.find("Ket11") != std::string::npos);
}
