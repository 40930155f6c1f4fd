#pragma once

// Degenerate eigenvalue perturbation theory for Hermitian pencils
//   S(t) = S0 + t S1 + t^2 S2.
// For an eigenvalue s0 of S0 with eigenspace projector P, the eigenvalues of
// S(t) emanating from s0 are s0 + t a_i + t^2 b_i + O(t^3) where a_i are the
// eigenvalues of P S1 P on range(P) and b_i come from
//   X = P (S2 - S1 R S1) P,   R = sum_{s' != s0} P_{s'} / (s' - s0).

#include <algorithm>
#include <vector>

#include "qtransfer/qstate.hpp"

namespace qtransfer {

inline constexpr double kEigenspaceTolerance = 1e-9;

struct HermitianSeries {
  MultipartiteOperator s0, s1, s2;

  void validate(double tol = 1e-12) const {
    if (s0.dims() != s1.dims() || s0.dims() != s2.dims())
      throw DimensionError("Hermitian series terms have different dims");
    const MultipartiteOperator* terms[] = {&s0, &s1, &s2};
    for (const auto* t : terms) {
      const double scale = std::max(1.0, max_abs(t->matrix()));
      if (!t->is_hermitian(tol * scale)) throw InvariantError("Hermitian series term is not Hermitian");
    }
  }
};

struct EigenCorrections {
  double s0 = 0;
  std::vector<double> first_order;   ///< ascending
  std::vector<double> second_order;  ///< paired with first_order entrywise
  MultipartiteOperator projector;
};

namespace detail {

struct Spectrum {
  RealVector values;
  Matrix vectors;
};

inline Spectrum hermitian_spectrum(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

// Orthonormal basis of range(P): eigenvectors of P with eigenvalue > 1/2.
inline Matrix projector_range(const Matrix& p) {
  const auto sp = hermitian_spectrum(p);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < sp.values.size(); ++i)
    if (sp.values(i) > 0.5) cols.push_back(i);
  Matrix q(p.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) q.col(static_cast<Eigen::Index>(k)) = sp.vectors.col(cols[k]);
  return q;
}

}  // namespace detail

/// Orthogonal projector onto the eigenvectors of S0 with |eigenvalue - s0| <= tol.
inline MultipartiteOperator eigenspace_projector(const MultipartiteOperator& s0_op, double s0,
                                                 double tol = kEigenspaceTolerance) {
  const auto sp = detail::hermitian_spectrum(s0_op.matrix());
  Matrix p = Matrix::Zero(s0_op.dim(), s0_op.dim());
  bool found = false;
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
    if (std::abs(sp.values(i) - s0) <= tol) {
      p += sp.vectors.col(i) * sp.vectors.col(i).adjoint();
      found = true;
    }
  }
  if (!found) throw InvariantError("no eigenvalue within tolerance of " + std::to_string(s0));
  return {p, s0_op.dims()};
}

/// sum over eigenvalues s' of S0 farther than tol from s0 of P_{s'} / (s' - s0).
inline MultipartiteOperator reduced_resolvent(const MultipartiteOperator& s0_op, double s0,
                                              double tol = kEigenspaceTolerance) {
  const auto sp = detail::hermitian_spectrum(s0_op.matrix());
  Matrix r = Matrix::Zero(s0_op.dim(), s0_op.dim());
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
    const double gap = sp.values(i) - s0;
    if (std::abs(gap) > tol) r += sp.vectors.col(i) * sp.vectors.col(i).adjoint() / gap;
  }
  return {r, s0_op.dims()};
}

/// P (S2 - S1 R S1) P on the full space.
inline MultipartiteOperator second_order_operator(const HermitianSeries& series, double s0,
                                                  double tol = kEigenspaceTolerance) {
  series.validate();
  const auto p = eigenspace_projector(series.s0, s0, tol);
  const auto r = reduced_resolvent(series.s0, s0, tol);
  return p * (series.s2 - series.s1 * r * series.s1) * p;
}

/// First- and second-order shifts of the eigenvalues of S(t) that tend to s0.
///
/// When the first-order shifts split the eigenspace, the second-order shift of
/// each branch is read in the basis that diagonalizes P S1 P; within a cluster
/// of equal first-order shifts the operator X is diagonalized. With all
/// first-order shifts equal this is the spectrum of X restricted to range(P).
inline EigenCorrections zero_eig_corrections(const HermitianSeries& series, double s0,
                                             double tol = kEigenspaceTolerance) {
  series.validate();
  EigenCorrections out;
  out.s0 = s0;
  out.projector = eigenspace_projector(series.s0, s0, tol);
  const Matrix q = detail::projector_range(out.projector.matrix());

  const Matrix first = q.adjoint() * series.s1.matrix() * q;
  const auto f = detail::hermitian_spectrum(first);
  const Matrix x = second_order_operator(series, s0, tol).matrix();
  const Matrix y = f.vectors.adjoint() * q.adjoint() * x * q * f.vectors;

  const double cluster_tol = tol * std::max(1.0, max_abs(series.s1.matrix()));
  const auto n = f.values.size();
  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && f.values(end) - f.values(end - 1) <= cluster_tol) ++end;
    const auto len = end - begin;
    const Matrix block = y.block(begin, begin, len, len);
    const RealVector second = detail::hermitian_spectrum(0.5 * (block + block.adjoint())).values;
    const double mean_first = f.values.segment(begin, len).mean();
    for (Eigen::Index k = 0; k < len; ++k) {
      out.first_order.push_back(len > 1 ? mean_first : f.values(begin + k));
      out.second_order.push_back(second(k));
    }
    begin = end;
  }
  return out;
}

/// s0 + t * first + t^2 * second, entrywise.
inline std::vector<double> predicted_spectrum(const EigenCorrections& corr, double t) {
  std::vector<double> out(corr.first_order.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = corr.s0 + t * corr.first_order[i] + t * t * corr.second_order[i];
  return out;
}

}  // namespace qtransfer
