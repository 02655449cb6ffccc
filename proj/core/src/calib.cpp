#include "fringelab/calib.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fringelab/fringe.hpp"
#include "json.hpp"

namespace fringelab {

namespace {

struct Marks {
  int first_dir = 0;
  std::vector<std::size_t> at;
};

// State machine over normalized intensity. A reversal mark is recorded only
// once the signal has retreated from its running extremum by the hysteresis
// band, and only if that extremum reached |I| >= 0.5; retreats larger than
// 0.25 from a mid-slope extremum cannot be fringe turns and are rejected.
Marks detect_marks(const std::vector<double>& inorm, double h) {
  Marks out;
  double runmax = inorm[0];
  double runmin = inorm[0];
  std::size_t amax = 0;
  std::size_t amin = 0;
  int dir = 0;
  for (std::size_t j = 1; j < inorm.size(); ++j) {
    const double v = inorm[j];
    if (dir == 0) {
      if (v > runmax) {
        runmax = v;
        amax = j;
      }
      if (v < runmin) {
        runmin = v;
        amin = j;
      }
      if (runmax - v > 0.1) {
        dir = -1;
        out.first_dir = -1;
        runmin = v;
        amin = j;
      } else if (v - runmin > 0.1) {
        dir = 1;
        out.first_dir = 1;
        runmax = v;
        amax = j;
      }
    } else if (dir == -1) {
      if (v < runmin) {
        runmin = v;
        amin = j;
      } else if (v - runmin > h) {
        if (runmin <= -0.5) {
          out.at.push_back(amin);
          dir = 1;
          runmax = v;
          amax = j;
        } else if (v - runmin > 0.25) {
          throw std::runtime_error("non-monotone branch ambiguity");
        }
        // otherwise a noise blip; keep descending
      }
    } else {
      if (v > runmax) {
        runmax = v;
        amax = j;
      } else if (runmax - v > h) {
        if (runmax >= 0.5) {
          out.at.push_back(amax);
          dir = -1;
          runmin = v;
          amin = j;
        } else if (runmax - v > 0.25) {
          throw std::runtime_error("non-monotone branch ambiguity");
        }
      }
    }
  }
  return out;
}

std::pair<double, double> scan_extrema(const std::vector<double>& intensity,
                                       bool robust) {
  if (!robust) {
    const auto [lo, hi] = std::minmax_element(intensity.begin(), intensity.end());
    return {*lo, *hi};
  }
  std::vector<double> sorted = intensity;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const std::size_t k = std::max<std::size_t>(1, n / 50);
  auto median_of = [](const double* begin, std::size_t len) {
    return len % 2 ? begin[len / 2] : 0.5 * (begin[len / 2 - 1] + begin[len / 2]);
  };
  return {median_of(sorted.data(), k), median_of(sorted.data() + (n - k), k)};
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<PhasePoint> phase_from_intensity(const std::vector<double>& theta,
                                             const std::vector<double>& intensity,
                                             double hysteresis,
                                             bool robust_extrema) {
  if (theta.size() != intensity.size() || theta.size() < 3) {
    throw std::invalid_argument("calibration scan needs >= 3 matched points");
  }
  const auto [imin, imax] = scan_extrema(intensity, robust_extrema);
  if (imax - imin < 1e-12) {
    throw std::runtime_error("scan does not span extrema");
  }
  const double mid = 0.5 * (imax + imin);
  const double amp = 0.5 * (imax - imin);

  std::vector<double> inorm(intensity.size());
  std::vector<double> raw(intensity.size());
  for (std::size_t j = 0; j < intensity.size(); ++j) {
    inorm[j] = std::clamp((intensity[j] - mid) / amp, -1.0, 1.0);
    raw[j] = std::acos(inorm[j]);
  }

  const Marks marks = detect_marks(inorm, hysteresis);
  if (marks.first_dir == 0) {
    throw std::runtime_error("scan does not span extrema");
  }

  std::vector<double> phi(inorm.size());
  int m = marks.first_dir == -1 ? 0 : 1;
  std::size_t k = 0;
  for (std::size_t j = 0; j < inorm.size(); ++j) {
    while (k < marks.at.size() && j > marks.at[k]) {
      ++m;
      ++k;
    }
    phi[j] = m % 2 == 0 ? m * kPi + raw[j] : (m + 1) * kPi - raw[j];
  }

  // Points at folds can land on the wrong branch (a sample crossing the fold,
  // or a trailing reversal too shallow to clear the hysteresis); reflect
  // about the nearest multiple of pi when continuity prefers it.
  for (std::size_t j = 2; j < phi.size(); ++j) {
    const double fold = kPi * std::round(phi[j] / kPi);
    if (std::abs(phi[j] - fold) > 0.25) continue;
    const double trend = 2.0 * phi[j - 1] - phi[j - 2];
    const double alt = 2.0 * fold - phi[j];
    if (std::abs(alt - trend) < std::abs(phi[j] - trend)) phi[j] = alt;
  }

  std::vector<PhasePoint> out(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = {theta[j], phi[j]};
  return out;
}

QuadraticPlateFit fit_quadratic_plate_model(const std::vector<PhasePoint>& curve,
                                            bool with_offset) {
  if (curve.size() < 5) {
    throw std::invalid_argument("plate fit needs at least 5 points");
  }
  double s4 = 0.0;
  double s2 = 0.0;
  double s2p = 0.0;
  double sp = 0.0;
  const auto n = static_cast<double>(curve.size());
  for (const auto& pt : curve) {
    const double t2 = pt.theta * pt.theta;
    s4 += t2 * t2;
    s2 += t2;
    s2p += t2 * pt.phi;
    sp += pt.phi;
  }

  QuadraticPlateFit fit;
  fit.with_offset = with_offset;
  fit.flag_threshold = kTwoPi / 10.0;
  if (with_offset) {
    const double det = s4 * n - s2 * s2;
    if (!(std::abs(det) > 0.0)) {
      throw std::runtime_error("degenerate design matrix");
    }
    fit.coefficient = (n * s2p - s2 * sp) / det;
    fit.offset = (s4 * sp - s2 * s2p) / det;
  } else {
    if (!(s4 > 0.0)) throw std::runtime_error("degenerate design matrix");
    fit.coefficient = s2p / s4;
    fit.offset = 0.0;
  }

  fit.residuals.reserve(curve.size());
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const auto& pt = curve[j];
    const double r = pt.phi - (fit.coefficient * pt.theta * pt.theta + fit.offset);
    fit.residuals.push_back(r);
    if (std::abs(r) > fit.flag_threshold) fit.flagged.push_back(j);
  }
  return fit;
}

std::string CalibrationCurve::to_csv() const {
  std::string out = "theta,phi,residual\n";
  for (std::size_t j = 0; j < theta_points.size(); ++j) {
    out += fmt_g(theta_points[j]);
    out += ',';
    out += fmt_g(phi_points[j]);
    out += ',';
    out += fmt_g(fit.residuals[j]);
    out += '\n';
  }
  return out;
}

std::string CalibrationCurve::to_json() const {
  nlohmann::json j;
  j["coefficient"] = fit.coefficient;
  j["offset"] = fit.offset;
  j["with_offset"] = fit.with_offset;
  j["flag_threshold"] = fit.flag_threshold;
  j["flagged"] = fit.flagged;
  j["theta"] = theta_points;
  j["phi"] = phi_points;
  j["residuals"] = fit.residuals;
  return j.dump();
}

CalibrationCurve calibrate(const std::vector<double>& theta,
                           const std::vector<double>& intensity,
                           double hysteresis, bool robust_extrema,
                           bool with_offset) {
  const auto points = phase_from_intensity(theta, intensity, hysteresis,
                                           robust_extrema);
  CalibrationCurve curve;
  curve.theta_points.reserve(points.size());
  curve.phi_points.reserve(points.size());
  for (const auto& pt : points) {
    curve.theta_points.push_back(pt.theta);
    curve.phi_points.push_back(pt.phi);
  }
  curve.fit = fit_quadratic_plate_model(points, with_offset);
  return curve;
}

}  // namespace fringelab
