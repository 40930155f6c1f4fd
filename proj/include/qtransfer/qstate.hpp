#pragma once

// Dense multipartite linear algebra.
//
// Subsystem ordering convention: factors are listed left to right and the
// leftmost factor is the slowest-varying index, i.e. for dims (d0, d1, ..., dn)
// the basis label (i0, i1, ..., in) maps to ((i0 * d1 + i1) * d2 + i2) ...
// Every module orders the parties as ancilla, A, A', B, field and drops the
// ones that are absent. Qubit basis index 0 is |g>, index 1 is |e>.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qtransfer/error.hpp"

namespace qtransfer {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline constexpr cplx kI{0.0, 1.0};

/// Eigenvalues below this count as negative in negativity computations.
inline constexpr double kNegativeEigenvalueCutoff = 1e-12;

namespace detail {

inline std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + ")";
}

inline std::vector<std::size_t> strides(const Dims& dims) {
  std::vector<std::size_t> st(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) st[k - 1] = st[k] * dims[k];
  return st;
}

// Offsets of every multi-index over `subset` (row-major in subset order)
// within the full index space.
inline std::vector<std::size_t> subsystem_offsets(const Dims& dims,
                                                  const std::vector<std::size_t>& subset) {
  const auto st = strides(dims);
  std::vector<std::size_t> offs{0};
  for (std::size_t k : subset) {
    std::vector<std::size_t> next;
    next.reserve(offs.size() * dims[k]);
    for (std::size_t o : offs)
      for (std::size_t i = 0; i < dims[k]; ++i) next.push_back(o + i * st[k]);
    offs = std::move(next);
  }
  return offs;
}

}  // namespace detail

/// Complex square matrix tagged with the dimensions of its tensor factors.
class MultipartiteOperator {
 public:
  MultipartiteOperator() = default;

  MultipartiteOperator(Matrix entries, Dims dims) : m_(std::move(entries)), dims_(std::move(dims)) {
    if (dims_.empty()) dims_ = {static_cast<std::size_t>(m_.rows())};
    const auto d = detail::product(dims_);
    if (m_.rows() != m_.cols() || static_cast<std::size_t>(m_.rows()) != d)
      throw DimensionError("operator of size " + std::to_string(m_.rows()) + "x" +
                           std::to_string(m_.cols()) + " does not match dims " +
                           detail::dims_string(dims_));
    if (!m_.allFinite()) throw InvariantError("operator has non-finite entries");
  }

  /// Single-factor operator.
  explicit MultipartiteOperator(Matrix entries)
      : MultipartiteOperator(std::move(entries), Dims{}) {}

  static MultipartiteOperator identity(const Dims& dims) {
    const auto d = static_cast<Eigen::Index>(detail::product(dims));
    return {Matrix::Identity(d, d), dims};
  }

  static MultipartiteOperator zero(const Dims& dims) {
    const auto d = static_cast<Eigen::Index>(detail::product(dims));
    return {Matrix::Zero(d, d), dims};
  }

  const Matrix& matrix() const noexcept { return m_; }
  const Dims& dims() const noexcept { return dims_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  std::size_t parties() const noexcept { return dims_.size(); }

  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  MultipartiteOperator adjoint() const { return {m_.adjoint(), dims_}; }
  cplx trace() const { return m_.trace(); }

  bool is_hermitian(double tol) const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol; }

  friend MultipartiteOperator operator+(const MultipartiteOperator& a,
                                        const MultipartiteOperator& b) {
    check_same(a, b);
    return {a.m_ + b.m_, a.dims_};
  }
  friend MultipartiteOperator operator-(const MultipartiteOperator& a,
                                        const MultipartiteOperator& b) {
    check_same(a, b);
    return {a.m_ - b.m_, a.dims_};
  }
  friend MultipartiteOperator operator*(const MultipartiteOperator& a,
                                        const MultipartiteOperator& b) {
    check_same(a, b);
    return {a.m_ * b.m_, a.dims_};
  }
  friend MultipartiteOperator operator*(cplx s, const MultipartiteOperator& a) {
    return {s * a.m_, a.dims_};
  }
  friend MultipartiteOperator operator*(double s, const MultipartiteOperator& a) {
    return {s * a.m_, a.dims_};
  }

 private:
  static void check_same(const MultipartiteOperator& a, const MultipartiteOperator& b) {
    if (a.dims_ != b.dims_)
      throw DimensionError("operator dims " + detail::dims_string(a.dims_) + " vs " +
                           detail::dims_string(b.dims_));
  }

  Matrix m_;
  Dims dims_;
};

/// Normalized state vector over tensor factors.
class PureState {
 public:
  PureState() = default;

  PureState(Vector amplitudes, Dims dims, double tol = 1e-10)
      : amps_(std::move(amplitudes)), dims_(std::move(dims)) {
    if (dims_.empty()) dims_ = {static_cast<std::size_t>(amps_.size())};
    if (static_cast<std::size_t>(amps_.size()) != detail::product(dims_))
      throw DimensionError("state of length " + std::to_string(amps_.size()) +
                           " does not match dims " + detail::dims_string(dims_));
    if (std::abs(amps_.norm() - 1.0) > tol)
      throw InvariantError("state is not normalized (norm " + std::to_string(amps_.norm()) + ")");
  }

  /// Normalizes `amplitudes` first.
  static PureState normalized(Vector amplitudes, Dims dims = {}) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw InvariantError("cannot normalize the zero vector");
    return {amplitudes / n, std::move(dims)};
  }

  static PureState basis(std::size_t dim, std::size_t index) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return {v, Dims{dim}};
  }

  const Vector& amplitudes() const noexcept { return amps_; }
  const Dims& dims() const noexcept { return dims_; }
  Eigen::Index dim() const noexcept { return amps_.size(); }

  MultipartiteOperator projector() const { return {amps_ * amps_.adjoint(), dims_}; }

 private:
  Vector amps_;
  Dims dims_;
};

/// Hermitian, unit-trace, positive semidefinite operator (all within `tolerance`).
class DensityMatrix {
 public:
  explicit DensityMatrix(MultipartiteOperator op, double tolerance = 1e-10)
      : op_(std::move(op)), tol_(tolerance) {
    if (tol_ < 0) throw InvariantError("negative density-matrix tolerance");
    const double scale = std::max(1.0, op_.matrix().cwiseAbs().maxCoeff());
    if (!op_.is_hermitian(tol_ * scale)) throw InvariantError("density matrix is not Hermitian");
    if (std::abs(op_.trace() - 1.0) > tol_)
      throw InvariantError("density matrix trace is " + std::to_string(op_.trace().real()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol_)
      throw InvariantError("density matrix has eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()));
  }

  static DensityMatrix from_pure(const PureState& psi) { return DensityMatrix(psi.projector()); }

  const MultipartiteOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  const Dims& dims() const noexcept { return op_.dims(); }
  double tolerance() const noexcept { return tol_; }

 private:
  MultipartiteOperator op_;
  double tol_;
};

// ---------------------------------------------------------------------------
// Tensor structure

inline MultipartiteOperator tensor(const MultipartiteOperator& a, const MultipartiteOperator& b) {
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {std::move(out), std::move(dims)};
}

inline PureState tensor(const PureState& a, const PureState& b) {
  Vector out(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {std::move(out), std::move(dims)};
}

template <class First, class... Rest>
auto tensor(const First& first, const First& second, const Rest&... rest) {
  if constexpr (sizeof...(rest) == 0)
    return tensor(first, second);
  else
    return tensor(tensor(first, second), rest...);
}

/// `op` acting on factor `position` of a system with `dims`, identity elsewhere.
inline MultipartiteOperator embed(const Matrix& op, std::size_t position, const Dims& dims) {
  if (position >= dims.size() || static_cast<std::size_t>(op.rows()) != dims[position])
    throw DimensionError("cannot embed a " + std::to_string(op.rows()) + "-dim operator at factor " +
                         std::to_string(position) + " of " + detail::dims_string(dims));
  Dims left(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(position));
  Dims right(dims.begin() + static_cast<std::ptrdiff_t>(position) + 1, dims.end());
  MultipartiteOperator out = MultipartiteOperator::identity(left.empty() ? Dims{1} : left);
  out = tensor(out, MultipartiteOperator(op, Dims{dims[position]}));
  if (!right.empty()) out = tensor(out, MultipartiteOperator::identity(right));
  // strip the placeholder factor used for an empty left side
  if (left.empty()) return {out.matrix(), dims};
  return out;
}

/// Keeps the factors listed in `keep` (any order in, ascending order out).
inline MultipartiteOperator partial_trace(const MultipartiteOperator& rho,
                                          std::vector<std::size_t> keep) {
  const auto& dims = rho.dims();
  if (keep.empty()) throw DimensionError("partial trace needs a nonempty keep set");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end() || keep.back() >= dims.size())
    throw DimensionError("invalid keep set for dims " + detail::dims_string(dims));

  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);

  const auto kept_offs = detail::subsystem_offsets(dims, keep);
  const auto traced_offs = detail::subsystem_offsets(dims, traced);
  const auto n = static_cast<Eigen::Index>(kept_offs.size());
  const auto& M = rho.matrix();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      cplx acc = 0;
      for (std::size_t t : traced_offs)
        acc += M(static_cast<Eigen::Index>(kept_offs[r] + t), static_cast<Eigen::Index>(kept_offs[c] + t));
      out(r, c) = acc;
    }
  Dims kept_dims;
  for (std::size_t k : keep) kept_dims.push_back(dims[k]);
  return {std::move(out), std::move(kept_dims)};
}

/// Transposes factor `subsystem` only.
inline MultipartiteOperator partial_transpose(const MultipartiteOperator& op, std::size_t subsystem) {
  const auto& dims = op.dims();
  if (subsystem >= dims.size())
    throw DimensionError("partial transpose on factor " + std::to_string(subsystem) + " of " +
                         detail::dims_string(dims));
  const auto st = static_cast<Eigen::Index>(detail::strides(dims)[subsystem]);
  const auto d = static_cast<Eigen::Index>(dims[subsystem]);
  const auto& M = op.matrix();
  Matrix out(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const Eigen::Index a = (i / st) % d;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const Eigen::Index b = (j / st) % d;
      out(i + (b - a) * st, j + (a - b) * st) = M(i, j);
    }
  }
  return {std::move(out), dims};
}

// ---------------------------------------------------------------------------
// Spectra

/// Ascending eigenvalues of a Hermitian operator.
inline RealVector hermitian_eigenvalues(const Matrix& m, double herm_tol = 1e-9) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > herm_tol * scale)
    throw InvariantError("eigenvalues requested for a non-Hermitian operator");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline RealVector hermitian_eigenvalues(const MultipartiteOperator& op, double herm_tol = 1e-9) {
  return hermitian_eigenvalues(op.matrix(), herm_tol);
}

/// Sum of |eigenvalues| below -1e-12 of the partial transpose on `subsystem`.
/// A Bell pair has negativity 1/2.
inline double negativity(const MultipartiteOperator& rho, std::size_t subsystem) {
  const RealVector ev = hermitian_eigenvalues(partial_transpose(rho, subsystem));
  double n = 0;
  for (double e : ev)
    if (e < -kNegativeEigenvalueCutoff) n -= e;
  return n;
}

inline double negativity(const DensityMatrix& rho, std::size_t subsystem) {
  return negativity(rho.op(), subsystem);
}

inline double min_pt_eigenvalue(const MultipartiteOperator& rho, std::size_t subsystem) {
  return hermitian_eigenvalues(partial_transpose(rho, subsystem)).minCoeff();
}

// ---------------------------------------------------------------------------
// Schmidt decomposition

struct SchmidtDecomposition {
  RealVector coefficients;  ///< p_i, descending, summing to one
  Matrix left;              ///< columns |psi_i> on the first factor
  Matrix right;             ///< columns |phi_i> on the second factor
};

/// psi = sum_i sqrt(p_i) |psi_i>|phi_i>. Each left vector's first nonzero
/// component is made real positive; the phase moves to the right vector.
inline SchmidtDecomposition schmidt_decompose(const PureState& psi) {
  if (psi.dims().size() != 2)
    throw DimensionError("Schmidt decomposition needs exactly two factors, got " +
                         detail::dims_string(psi.dims()));
  const auto da = static_cast<Eigen::Index>(psi.dims()[0]);
  const auto db = static_cast<Eigen::Index>(psi.dims()[1]);
  Matrix c(da, db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < db; ++j) c(i, j) = psi.amplitudes()(i * db + j);

  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto r = std::min(da, db);
  SchmidtDecomposition out;
  out.coefficients = svd.singularValues().head(r).array().square();
  out.left = svd.matrixU().leftCols(r);
  out.right = svd.matrixV().leftCols(r).conjugate();
  for (Eigen::Index k = 0; k < r; ++k) {
    for (Eigen::Index i = 0; i < da; ++i) {
      if (std::abs(out.left(i, k)) > 1e-12) {
        const cplx phase = out.left(i, k) / std::abs(out.left(i, k));
        out.left.col(k) *= std::conj(phase);
        out.right.col(k) *= phase;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Qubit constructors

/// Pauli operator sigma_mu written in the orthonormal basis {phi_g, phi_e}:
/// sigma_1 = |e><g| + |g><e|, sigma_2 = i(|g><e| - |e><g|), sigma_3 = |e><e| - |g><g|.
inline Matrix pauli(int mu, const Vector& phi_g, const Vector& phi_e) {
  const Matrix gg = phi_g * phi_g.adjoint();
  const Matrix ee = phi_e * phi_e.adjoint();
  const Matrix eg = phi_e * phi_g.adjoint();
  const Matrix ge = phi_g * phi_e.adjoint();
  switch (mu) {
    case 0: return gg + ee;
    case 1: return eg + ge;
    case 2: return kI * (ge - eg);
    case 3: return ee - gg;
    default: throw DimensionError("Pauli index must be 0..3");
  }
}

/// Pauli operator in the energy eigenbasis {|g>, |e>}.
inline Matrix pauli(int mu) {
  return pauli(mu, PureState::basis(2, 0).amplitudes(), PureState::basis(2, 1).amplitudes());
}

inline void require_orthonormal_qubit_basis(const PureState& phi_g, const PureState& phi_e,
                                            double tol = 1e-12) {
  if (phi_g.dim() != 2 || phi_e.dim() != 2) throw DimensionError("qubit basis vectors must be 2-dim");
  if (std::abs(phi_g.amplitudes().dot(phi_e.amplitudes())) > tol)
    throw InvariantError("qubit basis vectors are not orthogonal");
}

/// |Phi_mu> = (sigma_mu (x) I)(|phi_g>|g> + |phi_e>|e>)/sqrt(2), mu = 0..3.
inline std::array<PureState, 4> bell_basis(const PureState& phi_g, const PureState& phi_e) {
  require_orthonormal_qubit_basis(phi_g, phi_e);
  const PureState g = PureState::basis(2, 0);
  const PureState e = PureState::basis(2, 1);
  const Vector phi0 =
      (tensor(phi_g, g).amplitudes() + tensor(phi_e, e).amplitudes()) / std::sqrt(2.0);
  std::array<PureState, 4> out;
  for (int mu = 0; mu < 4; ++mu) {
    const Matrix s = tensor(MultipartiteOperator(pauli(mu, phi_g.amplitudes(), phi_e.amplitudes())),
                            MultipartiteOperator::identity({2}))
                         .matrix();
    out[static_cast<std::size_t>(mu)] = PureState(s * phi0, Dims{2, 2});
  }
  return out;
}

inline std::array<PureState, 4> bell_basis() {
  return bell_basis(PureState::basis(2, 0), PureState::basis(2, 1));
}

// ---------------------------------------------------------------------------
// Norms

inline double frobenius_distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace qtransfer
