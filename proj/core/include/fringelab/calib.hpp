#pragma once

#include <string>
#include <vector>

namespace fringelab {

struct PhasePoint {
  double theta = 0.0;  // plate angle, radians
  double phi = 0.0;    // unwrapped interferometer phase, radians
};

// Invert a single-photon fringe scan I(theta) into phase: normalize into
// [-1,1], take acos, and unwrap by inserting a pi fold at every confirmed
// direction reversal of the intensity. Reversals are confirmed with a
// hysteresis band and only accepted near |I|=1 where cosine fringes can
// genuinely turn; mid-slope excursions larger than the band raise
// "non-monotone branch ambiguity" instead of guessing.
std::vector<PhasePoint> phase_from_intensity(const std::vector<double>& theta,
                                             const std::vector<double>& intensity,
                                             double hysteresis = 0.02,
                                             bool robust_extrema = false);

struct QuadraticPlateFit {
  double coefficient = 0.0;  // c in phi = c*theta^2 + offset
  double offset = 0.0;
  bool with_offset = true;
  double flag_threshold = 0.0;  // phase equivalent of the lambda/10 bound
  std::vector<double> residuals;
  std::vector<std::size_t> flagged;  // indices with |residual| > threshold
};

QuadraticPlateFit fit_quadratic_plate_model(const std::vector<PhasePoint>& curve,
                                            bool with_offset = true);

struct CalibrationCurve {
  std::vector<double> theta_points;
  std::vector<double> phi_points;
  QuadraticPlateFit fit;

  std::string to_csv() const;   // theta, phi, residual
  std::string to_json() const;  // fit report
};

CalibrationCurve calibrate(const std::vector<double>& theta,
                           const std::vector<double>& intensity,
                           double hysteresis = 0.02, bool robust_extrema = false,
                           bool with_offset = true);

}  // namespace fringelab
