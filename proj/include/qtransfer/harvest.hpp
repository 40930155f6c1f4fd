#pragma once

// Second-order state of two detectors A', B after coupling to the field, in
// the basis {gg, ge, eg, ee} (A' first), and its negativity.

#include <algorithm>
#include <cmath>
#include <complex>

#include "qtransfer/field.hpp"
#include "qtransfer/qstate.hpp"

namespace qtransfer {

struct HarvestCoefficients {
  double L_AA = 0;  ///< L_{A'A'}
  double L_BB = 0;
  cplx L_AB = 0;    ///< L_{A'B}
  cplx M = 0;

  double phi() const { return std::arg(M); }

  /// Mean local noise (L_AA + L_BB) / 2.
  double mean_noise() const { return 0.5 * (L_AA + L_BB); }

  void validate() const {
    if (!(L_AA >= 0) || !(L_BB >= 0)) throw InvariantError("local noise terms L_AA, L_BB must be >= 0");
    if (!std::isfinite(std::abs(L_AB)) || !std::isfinite(std::abs(M)))
      throw InvariantError("harvesting coefficients must be finite");
  }

  /// |L_AB|^2 <= L_AA L_BB, relative tolerance.
  bool satisfies_cauchy_schwarz(double rel_tol = 1e-8) const {
    return std::norm(L_AB) <= L_AA * L_BB * (1 + rel_tol) + 1e-300;
  }

  /// Largest magnitude exceeds 0.1: second order is no longer trustworthy.
  bool outside_perturbative_regime() const {
    return std::max({L_AA, L_BB, std::abs(L_AB), std::abs(M)}) > 0.1;
  }

  bool identical_detectors(double rel_tol = 1e-12) const {
    return std::abs(L_AA - L_BB) <= rel_tol * std::max(L_AA, L_BB);
  }
};

/// Coefficients with their quadrature error estimates.
struct HarvestResult {
  HarvestCoefficients coefficients;
  double err_L_AA = 0, err_L_BB = 0, err_L_AB = 0, err_M = 0;
};

inline HarvestResult harvest_coefficients(const FieldModel& model, const DetectorParams& det_a,
                                          const DetectorParams& det_b, const QuadratureConfig& cfg = {}) {
  const auto laa = compute_L(model, det_a, det_a, cfg);
  const auto lbb = compute_L(model, det_b, det_b, cfg);
  const auto lab = compute_L(model, det_a, det_b, cfg);
  const auto m = compute_M(model, det_a, det_b, cfg);
  HarvestResult out;
  out.coefficients = {laa.value.real(), lbb.value.real(), lab.value, m.value};
  out.err_L_AA = laa.error;
  out.err_L_BB = lbb.error;
  out.err_L_AB = lab.error;
  out.err_M = m.error;
  return out;
}

/// Second-order A'B state. Not positive semidefinite when M != 0: the ee
/// population is fourth order and truncated to zero.
inline MultipartiteOperator resource_state(const HarvestCoefficients& c) {
  c.validate();
  Matrix rho = Matrix::Zero(4, 4);
  rho(0, 0) = 1 - c.L_AA - c.L_BB;
  rho(0, 3) = std::conj(c.M);
  rho(1, 1) = c.L_BB;
  rho(1, 2) = c.L_AB;
  rho(2, 1) = std::conj(c.L_AB);
  rho(2, 2) = c.L_AA;
  rho(3, 0) = c.M;
  return {rho, Dims{2, 2}};
}

/// The one eigenvalue of the partial transpose that can turn negative:
/// E = (L_AA + L_BB)/2 - sqrt((L_AA - L_BB)^2 + 4|M|^2)/2.
inline double harvest_eigenvalue_2nd(const HarvestCoefficients& c) {
  const double d = c.L_AA - c.L_BB;
  return c.mean_noise() - 0.5 * std::sqrt(d * d + 4 * std::norm(c.M));
}

inline double harvested_negativity_2nd(const HarvestCoefficients& c) {
  c.validate();
  return std::max(0.0, -harvest_eigenvalue_2nd(c));
}

/// Nearest PSD state in Frobenius norm: clip negative eigenvalues, rescale to
/// unit trace. Rejects inputs whose smallest eigenvalue is below -max_negative.
inline DensityMatrix psd_repair(const MultipartiteOperator& rho, double max_negative = 0.01) {
  const double scale = std::max(1.0, max_abs(rho.matrix()));
  if (!rho.is_hermitian(1e-12 * scale)) throw InvariantError("psd_repair needs a Hermitian input");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw InvariantError("psd_repair needs a unit-trace input");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  RealVector ev = es.eigenvalues();
  if (ev.minCoeff() < -max_negative)
    throw InvariantError("state too far from positive: eigenvalue " + std::to_string(ev.minCoeff()));
  if (ev.minCoeff() >= 0) return DensityMatrix(rho);
  ev = ev.cwiseMax(0.0);
  ev /= ev.sum();
  const Matrix fixed = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix(MultipartiteOperator(0.5 * (fixed + fixed.adjoint()), rho.dims()));
}

}  // namespace qtransfer
