#pragma once

#include <array>
#include <complex>

namespace fringelab {

using complexd = std::complex<double>;
using Mat2c = std::array<std::array<complexd, 2>, 2>;

struct NetworkParams {
  double phi{0.0};
  double eta_c{1.0};  // interferometer arm transmissions
  double eta_d{1.0};
  double eta_e{1.0};  // output/detector transmissions
  double eta_f{1.0};
  void validate() const;  // throws on eta outside [0,1] or non-finite phi
};

// Loss amplitudes enter the default convention linearly (eta, 1-eta), exactly
// as the model defines them; every fitted parameter is calibrated under that
// convention even though it is not norm-preserving. Amplitude uses
// sqrt(eta), sqrt(1-eta) instead (unitary dilation) for consistency studies.
enum class LossConvention { PaperLinear, Amplitude };

// Six amplitudes mapping input a -> (e, f, g) [A, B, C] and b -> (e, f, g)
// [D, E, F]. Each input photon carries one extra factor of 1/sqrt(2) by
// convention; it is kept out of A-F and applied by the propagator.
struct TransferCoefficients {
  complexd A, B, C, D, E, F;
  static constexpr double per_photon_prefactor = 0.70710678118654752440;
};

Mat2c beamsplitter_matrix();          // (1/sqrt(2)) [[1, i], [i, 1]]
Mat2c phase_matrix(double phi);       // diag(1, e^{i phi})
Mat2c loss_matrix(double eta);        // [[eta, 1-eta], [1-eta, eta]]

TransferCoefficients transfer_coefficients(
    const NetworkParams& params, LossConvention conv = LossConvention::PaperLinear);

}  // namespace fringelab
