#pragma once

// Bell-measurement teleportation of one half (A) of an input state on
// ancilla (x) A through a two-qubit resource on A' (x) B, with Bob's
// correction u_mu applied on B. Party order throughout: ancilla, A, A', B.

#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "qtransfer/harvest.hpp"
#include "qtransfer/qstate.hpp"

namespace qtransfer {

/// Bob's correction unitaries u_0..u_3 on B.
class CorrectionStrategy {
 public:
  enum class Kind { standard, phase_corrected, custom };

  static CorrectionStrategy standard() { return CorrectionStrategy(Kind::standard, 0.0, {}); }

  /// u_mu = sigma_mu v_B with v_B = exp(-i phi)|e><e| + |g><g|.
  static CorrectionStrategy phase_corrected(double phi) {
    if (!std::isfinite(phi)) throw ConfigError("phase correction angle must be finite");
    return CorrectionStrategy(Kind::phase_corrected, phi, {});
  }

  static CorrectionStrategy custom(const std::array<Matrix, 4>& unitaries, double tol = 1e-12) {
    for (const auto& u : unitaries) {
      if (u.rows() != 2 || u.cols() != 2) throw DimensionError("custom corrections must be 2x2");
      if (max_abs(u * u.adjoint() - Matrix::Identity(2, 2)) > tol)
        throw InvariantError("custom correction is not unitary");
    }
    return CorrectionStrategy(Kind::custom, 0.0, unitaries);
  }

  Kind kind() const noexcept { return kind_; }
  double phi() const noexcept { return phi_; }

  std::string name() const {
    switch (kind_) {
      case Kind::standard: return "standard";
      case Kind::phase_corrected: return "phase_corrected";
      default: return "custom";
    }
  }

  static Matrix v_B(double phi) {
    Matrix v = Matrix::Zero(2, 2);
    v(0, 0) = 1.0;
    v(1, 1) = std::exp(-kI * phi);
    return v;
  }

  Matrix unitary(int mu) const {
    if (mu < 0 || mu > 3) throw DimensionError("Bell outcome index must be 0..3");
    switch (kind_) {
      case Kind::standard: return pauli(mu);
      case Kind::phase_corrected: return pauli(mu) * v_B(phi_);
      default: return custom_[static_cast<std::size_t>(mu)];
    }
  }

 private:
  CorrectionStrategy(Kind k, double phi, std::array<Matrix, 4> u) : kind_(k), phi_(phi), custom_(std::move(u)) {}

  Kind kind_;
  double phi_;
  std::array<Matrix, 4> custom_;
};

struct TeleportResult {
  DensityMatrix xi;                            ///< on ancilla (x) B
  std::array<double, 4> outcome_probabilities;
  std::vector<DensityMatrix> per_outcome_states;  ///< corrected, normalized
};

/// I_anc (x) |Phi_mu><Phi_mu|_{AA'} (x) I_B for an ancilla of dimension d_anc.
inline std::array<MultipartiteOperator, 4> bell_measurement_ops(const PureState& phi_g,
                                                                const PureState& phi_e,
                                                                std::size_t d_anc = 2) {
  const auto bell = bell_basis(phi_g, phi_e);
  std::array<MultipartiteOperator, 4> out;
  for (std::size_t mu = 0; mu < 4; ++mu)
    out[mu] = tensor(MultipartiteOperator::identity({d_anc}), bell[mu].projector(),
                     MultipartiteOperator::identity({2}));
  return out;
}

namespace detail {

inline void check_teleport_dims(const Dims& in, const Dims& res) {
  if (in.size() != 2 || in[1] != 2)
    throw DimensionError("teleport input must live on ancilla (x) qubit, got " + dims_string(in));
  if (res != Dims{2, 2}) throw DimensionError("teleport resource must be two qubits, got " + dims_string(res));
}

// Unnormalized, corrected ancilla-B operators for each outcome.
inline std::array<Matrix, 4> corrected_branches(const MultipartiteOperator& input,
                                                const MultipartiteOperator& resource,
                                                const PureState& phi_g, const PureState& phi_e,
                                                const CorrectionStrategy& strategy) {
  check_teleport_dims(input.dims(), resource.dims());
  const std::size_t d_anc = input.dims()[0];
  const auto total = tensor(input, resource);
  const auto ops = bell_measurement_ops(phi_g, phi_e, d_anc);
  std::array<Matrix, 4> out;
  for (int mu = 0; mu < 4; ++mu) {
    const auto& m = ops[static_cast<std::size_t>(mu)];
    const auto branch = partial_trace(m * total * m.adjoint(), {0, 3});
    const auto u = embed(strategy.unitary(mu), 1, branch.dims()).matrix();
    out[static_cast<std::size_t>(mu)] = u * branch.matrix() * u.adjoint();
  }
  return out;
}

}  // namespace detail

/// Linear teleportation map applied to arbitrary operators, without any
/// positivity checks. Used to feed truncated second-order resources.
inline MultipartiteOperator teleport_channel_operator(const MultipartiteOperator& input,
                                                      const MultipartiteOperator& resource,
                                                      const PureState& phi_g, const PureState& phi_e,
                                                      const CorrectionStrategy& strategy) {
  const auto branches = detail::corrected_branches(input, resource, phi_g, phi_e, strategy);
  Matrix xi = branches[0] + branches[1] + branches[2] + branches[3];
  return {xi, Dims{input.dims()[0], 2}};
}

/// Zero-probability outcomes are reported with the maximally mixed state.
inline TeleportResult teleport_channel(const PureState& input, const DensityMatrix& resource,
                                       const PureState& phi_g, const PureState& phi_e,
                                       const CorrectionStrategy& strategy) {
  const auto branches =
      detail::corrected_branches(input.projector(), resource.op(), phi_g, phi_e, strategy);
  const Dims out_dims{input.dims()[0], 2};
  const auto d = static_cast<Eigen::Index>(detail::product(out_dims));
  Matrix xi = Matrix::Zero(d, d);
  std::array<double, 4> probs{};
  std::vector<DensityMatrix> states;
  double total = 0;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    const double p = branches[mu].trace().real();
    probs[mu] = p < 0 && p > -1e-14 ? 0.0 : p;
    total += probs[mu];
    xi += branches[mu];
    Matrix s = probs[mu] > 1e-14 ? Matrix(branches[mu] / probs[mu])
                                 : Matrix(Matrix::Identity(d, d) / static_cast<double>(d));
    states.emplace_back(MultipartiteOperator(0.5 * (s + s.adjoint()), out_dims));
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvariantError("Bell outcome probabilities sum to " + std::to_string(total));
  xi = 0.5 * (xi + xi.adjoint());
  return {DensityMatrix(MultipartiteOperator(xi, out_dims)), probs, std::move(states)};
}

/// Bell basis aligned with the input: {phi_g, phi_e} are the Schmidt vectors
/// of the input on A, so <phi_i|phi'_k> = delta_ik.
struct AlignedInput {
  double p = 1;  ///< Schmidt weight of the first term
  PureState phi_g, phi_e;
  SchmidtDecomposition schmidt;
};

inline AlignedInput align_bell_basis(const PureState& input) {
  if (input.dims() != Dims{2, 2}) throw DimensionError("alignment expects a two-qubit input");
  AlignedInput out;
  out.schmidt = schmidt_decompose(input);
  out.p = out.schmidt.coefficients(0);
  out.phi_g = PureState::normalized(out.schmidt.right.col(0), Dims{2});
  out.phi_e = PureState::normalized(out.schmidt.right.col(1), Dims{2});
  return out;
}

/// sqrt(p)|g g> + sqrt(1-p)|e e> on ancilla (x) A.
inline PureState schmidt_input(double p) {
  if (!(p >= 0 && p <= 1)) throw ConfigError("Schmidt weight p must lie in [0, 1]");
  Vector v = Vector::Zero(4);
  v(0) = std::sqrt(p);
  v(3) = std::sqrt(1 - p);
  return {v, Dims{2, 2}};
}

/// (1/4) sum_mu (sigma_mu (x) u_mu) rho (sigma_mu (x) u_mu)^dagger.
inline MultipartiteOperator twirl(const MultipartiteOperator& rho, const CorrectionStrategy& strategy) {
  if (rho.dims() != Dims{2, 2}) throw DimensionError("twirl acts on two qubits");
  Matrix out = Matrix::Zero(4, 4);
  for (int mu = 0; mu < 4; ++mu) {
    const Matrix k = tensor(MultipartiteOperator(pauli(mu)), MultipartiteOperator(strategy.unitary(mu))).matrix();
    out += k * rho.matrix() * k.adjoint();
  }
  return {out / 4.0, Dims{2, 2}};
}

/// Effective A'B operator eta seen by the teleported state.
inline MultipartiteOperator eta_from_resource(const HarvestCoefficients& c, const CorrectionStrategy& strategy) {
  c.validate();
  if (strategy.kind() == CorrectionStrategy::Kind::custom) return twirl(resource_state(c), strategy);
  const double l = c.mean_noise();
  double corner, inner;
  if (strategy.kind() == CorrectionStrategy::Kind::phase_corrected) {
    // exactly |M| when phi = arg(M)
    corner = (c.M * std::exp(-kI * strategy.phi())).real();
    inner = (c.L_AB * std::exp(-kI * strategy.phi())).real();
  } else {
    corner = c.M.real();
    inner = c.L_AB.real();
  }
  Matrix eta = Matrix::Zero(4, 4);
  eta(0, 0) = eta(3, 3) = 0.5 - l;
  eta(1, 1) = eta(2, 2) = l;
  eta(0, 3) = eta(3, 0) = corner;
  eta(1, 2) = eta(2, 1) = inner;
  return {eta, Dims{2, 2}};
}

/// 2 sum_ij sqrt(p_i p_j) |i><j|_anc (x) <i|eta|j>_{A'}, with p_g = p.
inline MultipartiteOperator xi_closed_form(double p, const HarvestCoefficients& c,
                                           const CorrectionStrategy& strategy) {
  if (!(p >= 0 && p <= 1)) throw ConfigError("Schmidt weight p must lie in [0, 1]");
  const Matrix eta = eta_from_resource(c, strategy).matrix();
  const double w[2] = {p, 1 - p};
  Matrix xi(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) xi.block(2 * i, 2 * j, 2, 2) = 2 * std::sqrt(w[i] * w[j]) * eta.block(2 * i, 2 * j, 2, 2);
  return {xi, Dims{2, 2}};
}

/// E' (phase corrected, |M|) or E'' (standard, Re M):
/// L - sqrt(L^2 (1 - 4p(1-p)) + 4p(1-p) m^2).
inline double teleport_eigenvalue_2nd(double p, double mean_noise, double m) {
  if (!(p >= 0 && p <= 1)) throw ConfigError("Schmidt weight p must lie in [0, 1]");
  const double q = 4 * p * (1 - p);
  return mean_noise - std::sqrt(mean_noise * mean_noise * (1 - q) + q * m * m);
}

inline double teleported_negativity_2nd(double p, const HarvestCoefficients& c,
                                        const CorrectionStrategy& strategy) {
  c.validate();
  if (!(p >= 0 && p <= 1)) throw ConfigError("Schmidt weight p must lie in [0, 1]");
  switch (strategy.kind()) {
    case CorrectionStrategy::Kind::phase_corrected: {
      const double m = (c.M * std::exp(-kI * strategy.phi())).real();
      return std::max(0.0, -teleport_eigenvalue_2nd(p, c.mean_noise(), m));
    }
    case CorrectionStrategy::Kind::standard:
      return std::max(0.0, -teleport_eigenvalue_2nd(p, c.mean_noise(), c.M.real()));
    default: {
      const double e = min_pt_eigenvalue(xi_closed_form(p, c, strategy), 0);
      return e < -kNegativeEigenvalueCutoff ? -e : 0.0;
    }
  }
}

}  // namespace qtransfer
