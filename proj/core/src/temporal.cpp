#include "fringelab/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "fringelab/fringe.hpp"

namespace fringelab {

void WavepacketParams::validate() const {
  if (!(T1 > 0.0) || !(w_p > 0.0)) {
    throw std::invalid_argument("wavepacket times must be positive");
  }
}

double emg_density(double x, double K) {
  if (!(K > 0.0)) throw std::invalid_argument("K must be positive");
  const double z = (1.0 / K - x) / std::sqrt(2.0);
  if (z < 26.0) {
    return (0.5 / K) * std::exp(0.5 / (K * K) - x / K) * std::erfc(z);
  }
  // deep left tail: erfc underflows and the exponential prefactor overflows,
  // so fold them together through erfcx(z) = exp(z^2) erfc(z) ~ asymptotics
  double s = 1.0;
  double t = 1.0;
  for (int m = 1; m <= 8; ++m) {
    t *= -(2.0 * m - 1.0) / (2.0 * z * z);
    s += t;
  }
  const double erfcx = s / (z * std::sqrt(kPi));
  return (0.5 / K) * erfcx * std::exp(-0.5 * x * x);
}

namespace {

struct Quadrature {
  const std::function<double(double)>& f;
  double tol;
  int max_depth = 48;

  double run(double a, double b) const {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return step(a, b, fa, fm, fb, whole, tol, max_depth);
  }

  double step(double a, double b, double fa, double fm, double fb, double whole,
              double eps, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * eps) {
      return left + right + err / 15.0;
    }
    if (depth <= 0) {
      throw std::runtime_error("quadrature non-convergence");
    }
    return step(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           step(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
  }
};

double integrate(const std::function<double(double)>& f,
                 std::vector<double> knots, double tol) {
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  const double per_segment = tol / static_cast<double>(knots.size() - 1);
  Quadrature q{f, per_segment};
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i] > knots[i - 1]) total += q.run(knots[i - 1], knots[i]);
  }
  return total;
}

}  // namespace

double temporal_overlap(double tau_ps, const WavepacketParams& params) {
  params.validate();
  const double K = params.K();
  const double s = std::abs(tau_ps) / params.w_p;
  const double span = 30.0 * std::max(K, 1.0);
  const double lo = -span;
  const double hi = span + s;
  auto integrand = [&](double x) {
    return std::sqrt(emg_density(x, K) * emg_density(x - s, K));
  };
  // knots bracket the two wavepacket onsets so the adaptive splitting finds
  // both rise regions
  std::vector<double> knots{lo, -2.0, 2.0, s - 2.0, s + 2.0, hi};
  for (double& k : knots) k = std::clamp(k, lo, hi);
  const double v = integrate(integrand, knots, 1e-10);
  return std::clamp(v, 0.0, 1.0);
}

double indistinguishability_from_separation(double tau_ps,
                                            const WavepacketParams& params) {
  const double v = temporal_overlap(tau_ps, params);
  return v * v;
}

std::vector<SeparationContrast> contrast_vs_separation(
    const std::vector<double>& tau_grid_ps, const WavepacketParams& params,
    const SourceParams& source) {
  params.validate();
  const auto phis = uniform_grid();
  std::vector<SeparationContrast> out;
  out.reserve(tau_grid_ps.size());
  for (double tau : tau_grid_ps) {
    SeparationContrast row;
    row.tau_ps = tau;
    row.overlap = temporal_overlap(tau, params);
    row.indist = source.indist * row.overlap * row.overlap;
    SourceParams p = source;
    p.indist = row.indist;
    const auto report =
        contrast(scan(InputConfig::Ket11, p, DetectionScheme::at_least(1, 1), phis));
    row.contrast = report.mean_contrast;
    out.push_back(row);
  }
  return out;
}

double exponential_decay_constant(const std::vector<double>& taus,
                                  const std::vector<double>& values,
                                  double floor) {
  if (taus.size() != values.size() || taus.size() < 2) {
    throw std::invalid_argument("decay fit needs >= 2 matched points");
  }
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  const auto n = static_cast<double>(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double excess = values[i] - floor;
    if (!(excess > 0.0)) {
      throw std::invalid_argument("decay fit values must stay above the floor");
    }
    const double y = std::log(excess);
    sx += taus[i];
    sy += y;
    sxx += taus[i] * taus[i];
    sxy += taus[i] * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("decay fit grid is degenerate");
  const double slope = (n * sxy - sx * sy) / denom;
  if (!(slope < 0.0)) {
    throw std::invalid_argument("values do not decay over the fit window");
  }
  return -1.0 / slope;
}

}  // namespace fringelab
