#pragma once

// Transmission through a finite-dimensional intermediary f. Alice's qubit A
// (entangled with an ancilla) and Bob's qubit B couple to f through
//   H(t) = lambda_A sum_k chi_k(t) X_A^k (x) O^k + lambda_B sum_k chi_k(t) X_B^k (x) O^k
// in the interaction picture. Party order: ancilla, A, B, f.
//
// Second-order Dyson terms are built from the time integrals
//   J_a = int c_a,   I_ab = int dt c_a(t) int^t dt' c_b(t'),
// so that U1 = -i sum_a J_a K_a and U2 = -sum_ab I_ab K_a K_b.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qtransfer/perturb.hpp"
#include "qtransfer/qstate.hpp"

namespace qtransfer {

/// amplitude * exp(-(t - center)^2 / (2 width^2)) * cos(frequency * t + phase)
struct Switching {
  double center = 0;
  double width = 1;
  double frequency = 0;
  double phase = 0;
  double amplitude = 1;

  double operator()(double t) const {
    const double x = (t - center) / width;
    return amplitude * std::exp(-0.5 * x * x) * std::cos(frequency * t + phase);
  }

  void validate() const {
    if (!(width > 0) || !std::isfinite(width)) throw ConfigError("switching width must be positive");
    if (!std::isfinite(center) || !std::isfinite(frequency) || !std::isfinite(phase) || !std::isfinite(amplitude))
      throw ConfigError("switching parameters must be finite");
  }
};

struct CouplingTerm {
  Matrix system_op;  ///< on A or B
  Matrix field_op;   ///< on f
  Switching switching;
};

struct ToyTransmissionModel {
  std::size_t field_dim = 2;
  DensityMatrix rho_f{0.5 * MultipartiteOperator::identity({2})};
  DensityMatrix rho_B{PureState::basis(2, 0).projector()};
  PureState input = PureState::basis(4, 0);  ///< on ancilla (x) A
  std::vector<CouplingTerm> couplings_A, couplings_B;
  double lambda_A = 1, lambda_B = 1;

  std::size_t ancilla_dim() const { return input.dims().at(0); }
  std::size_t a_dim() const { return input.dims().at(1); }
  Dims dims() const { return {ancilla_dim(), a_dim(), 2, field_dim}; }

  void validate() const {
    if (field_dim == 0) throw ConfigError("field_dim must be positive");
    if (input.dims().size() != 2) throw DimensionError("input must live on ancilla (x) A");
    if (rho_f.dims() != Dims{field_dim}) throw DimensionError("rho_f does not match field_dim");
    if (rho_B.dims() != Dims{2}) throw DimensionError("rho_B must be a qubit state");
    if (!std::isfinite(lambda_A) || !std::isfinite(lambda_B)) throw ConfigError("couplings must be finite");
    auto check = [&](const std::vector<CouplingTerm>& terms, std::size_t dsys, const char* who) {
      for (const auto& c : terms) {
        if (static_cast<std::size_t>(c.system_op.rows()) != dsys || c.system_op.cols() != c.system_op.rows())
          throw DimensionError(std::string(who) + " system operator has the wrong size");
        if (static_cast<std::size_t>(c.field_op.rows()) != field_dim || c.field_op.cols() != c.field_op.rows())
          throw DimensionError(std::string(who) + " field operator has the wrong size");
        if (max_abs(c.system_op - c.system_op.adjoint()) > 1e-12 ||
            max_abs(c.field_op - c.field_op.adjoint()) > 1e-12)
          throw InvariantError(std::string(who) + " coupling operators must be Hermitian");
        c.switching.validate();
      }
    };
    check(couplings_A, a_dim(), "A");
    check(couplings_B, 2, "B");
  }
};

struct TimeGrid {
  double t_min = -8, t_max = 8;
  std::size_t steps = 256;

  void validate() const {
    if (!(t_min < t_max) || !std::isfinite(t_min) || !std::isfinite(t_max))
      throw ConfigError("time grid needs t_min < t_max");
    if (steps < 2) throw ConfigError("time grid needs at least 2 steps");
  }
};

/// Covers every switching window to +-8 widths with a step resolving the
/// fastest carrier and the narrowest envelope.
inline TimeGrid default_grid(const ToyTransmissionModel& model) {
  TimeGrid g{0, 0, 0};
  double fastest = 0;
  bool any = false;
  for (const auto* list : {&model.couplings_A, &model.couplings_B})
    for (const auto& c : *list) {
      const auto& s = c.switching;
      const double lo = s.center - 8 * s.width, hi = s.center + 8 * s.width;
      g.t_min = any ? std::min(g.t_min, lo) : lo;
      g.t_max = any ? std::max(g.t_max, hi) : hi;
      fastest = std::max(fastest, std::abs(s.frequency) + 1 / s.width);
      any = true;
    }
  if (!any) return {-1, 1, 4};
  const double h = 0.25 / fastest;
  const auto n = static_cast<std::size_t>(std::ceil((g.t_max - g.t_min) / h));
  g.steps = std::max<std::size_t>(64, (n + 3) / 4 * 4);
  return g;
}

namespace detail {

// A coupling term as a full-space operator K_a on A (x) B (x) f (no ancilla)
// plus its switching.
struct Generator {
  Matrix k;
  Switching chi;
};

inline std::vector<Generator> generators(const ToyTransmissionModel& model, bool include_A = true) {
  const std::size_t da = model.a_dim();
  std::vector<Generator> out;
  if (include_A)
    for (const auto& c : model.couplings_A) {
      const Matrix k = tensor(MultipartiteOperator(c.system_op), MultipartiteOperator::identity({2}),
                              MultipartiteOperator(c.field_op))
                           .matrix();
      out.push_back({model.lambda_A * k, c.switching});
    }
  for (const auto& c : model.couplings_B) {
    const Matrix k = tensor(MultipartiteOperator::identity({da}), MultipartiteOperator(c.system_op),
                            MultipartiteOperator(c.field_op))
                         .matrix();
    out.push_back({model.lambda_B * k, c.switching});
  }
  return out;
}

struct TimeIntegrals {
  std::vector<double> J;
  std::vector<std::vector<double>> I;  ///< I[a][b]
  double error = 0;
  std::size_t steps = 0;
};

// Trapezoid with a cumulative trapezoid for the inner integral; satisfies
// I_ab + I_ba = J_a J_b at any step count.
inline TimeIntegrals trapezoid_integrals(const std::vector<Generator>& gens, const TimeGrid& grid,
                                         std::size_t steps) {
  const std::size_t n = gens.size();
  const double h = (grid.t_max - grid.t_min) / static_cast<double>(steps);
  TimeIntegrals out;
  out.J.assign(n, 0.0);
  out.I.assign(n, std::vector<double>(n, 0.0));
  out.steps = steps;
  std::vector<double> cumulative(n, 0.0), prev(n, 0.0), cur(n, 0.0);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = grid.t_min + h * static_cast<double>(i);
    const double w = (i == 0 || i == steps) ? 0.5 * h : h;
    for (std::size_t a = 0; a < n; ++a) cur[a] = gens[a].chi(t);
    for (std::size_t b = 0; b < n; ++b) {
      // running integral up to t_i: everything before plus half of this node
      const double inner = cumulative[b] + 0.5 * w * cur[b];
      for (std::size_t a = 0; a < n; ++a) out.I[a][b] += w * cur[a] * inner;
    }
    for (std::size_t a = 0; a < n; ++a) {
      out.J[a] += w * cur[a];
      cumulative[a] += w * cur[a];
    }
  }
  return out;
}

// Romberg over steps/4, steps/2, steps; doubles steps until the estimated
// error is below tol.
inline TimeIntegrals time_integrals(const std::vector<Generator>& gens, const TimeGrid& grid,
                                    double tol = 1e-10, std::size_t max_steps = 1u << 18) {
  grid.validate();
  std::size_t steps = std::max<std::size_t>(8, (grid.steps + 3) / 4 * 4);
  const std::size_t n = gens.size();
  while (true) {
    const auto t1 = trapezoid_integrals(gens, grid, steps / 4);
    const auto t2 = trapezoid_integrals(gens, grid, steps / 2);
    const auto t4 = trapezoid_integrals(gens, grid, steps);
    TimeIntegrals out;
    out.steps = steps;
    out.J.assign(n, 0.0);
    out.I.assign(n, std::vector<double>(n, 0.0));
    auto romberg = [&](double a1, double a2, double a4, double& value) {
      const double r1a = (4 * a2 - a1) / 3, r1b = (4 * a4 - a2) / 3;
      value = (16 * r1b - r1a) / 15;
      return std::abs(value - r1b);
    };
    double err = 0;
    for (std::size_t a = 0; a < n; ++a) {
      err = std::max(err, romberg(t1.J[a], t2.J[a], t4.J[a], out.J[a]));
      for (std::size_t b = 0; b < n; ++b)
        err = std::max(err, romberg(t1.I[a][b], t2.I[a][b], t4.I[a][b], out.I[a][b]));
    }
    // restore I_ab + I_ba = J_a J_b, broken at the round-off level by the extrapolation
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) {
        const double excess = out.J[a] * out.J[b] - out.I[a][b] - out.I[b][a];
        if (a == b) {
          out.I[a][a] += 0.5 * excess;
        } else {
          out.I[a][b] += 0.5 * excess;
          out.I[b][a] += 0.5 * excess;
        }
      }
    out.error = err;
    if (err <= tol) return out;
    if (steps * 2 > max_steps)
      throw ConvergenceError("time integrals did not converge on the grid", err);
    steps *= 2;
  }
}

inline Matrix embed_ancilla(const Matrix& k, std::size_t d_anc) {
  return tensor(MultipartiteOperator::identity({d_anc}), MultipartiteOperator(k)).matrix();
}

inline MultipartiteOperator initial_state(const ToyTransmissionModel& model) {
  return tensor(model.input.projector(), model.rho_B.op(), model.rho_f.op());
}

// Projector onto the kernel of rho_B.
inline Matrix kernel_projector_B(const DensityMatrix& rho_B) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho_B.matrix());
  Matrix p = Matrix::Zero(2, 2);
  for (Eigen::Index i = 0; i < 2; ++i)
    if (std::abs(es.eigenvalues()(i)) <= kNegativeEigenvalueCutoff)
      p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return p;
}

}  // namespace detail

/// Reduced ancilla-B terms of rho = rho0 + rho1 + rho2 + O(H^3).
struct DysonTerms {
  MultipartiteOperator rho0, rho1, rho2;
  double quadrature_error = 0;
  std::size_t steps = 0;
};

inline DysonTerms dyson_reduced_terms(const ToyTransmissionModel& model, const TimeGrid& grid,
                                      bool include_HA = true) {
  model.validate();
  const auto gens = detail::generators(model, include_HA);
  const auto rho0 = detail::initial_state(model);
  const std::size_t d_anc = model.ancilla_dim();
  const auto full = static_cast<Eigen::Index>(rho0.dim());

  DysonTerms out;
  out.rho0 = partial_trace(rho0, {0, 2});
  if (gens.empty()) {
    out.rho1 = out.rho2 = MultipartiteOperator::zero(out.rho0.dims());
    return out;
  }
  const auto ints = detail::time_integrals(gens, grid);
  out.quadrature_error = ints.error;
  out.steps = ints.steps;

  std::vector<Matrix> k;
  for (const auto& g : gens) k.push_back(detail::embed_ancilla(g.k, d_anc));
  Matrix u1 = Matrix::Zero(full, full), u2 = Matrix::Zero(full, full);
  for (std::size_t a = 0; a < k.size(); ++a) {
    u1 += -kI * ints.J[a] * k[a];
    for (std::size_t b = 0; b < k.size(); ++b) u2 -= ints.I[a][b] * (k[a] * k[b]);
  }
  const Matrix& r0 = rho0.matrix();
  const Matrix r1 = u1 * r0 + r0 * u1.adjoint();
  const Matrix r2 = u2 * r0 + r0 * u2.adjoint() + u1 * r0 * u1.adjoint();
  out.rho1 = partial_trace(MultipartiteOperator(r1, rho0.dims()), {0, 2});
  out.rho2 = partial_trace(MultipartiteOperator(r2, rho0.dims()), {0, 2});
  return out;
}

struct FirstOrderCheck {
  double max_abs = 0;
  bool vacuous = false;  ///< rho_B has no kernel
};

/// max |Pi0 rho1^{T_anc} Pi0| with Pi0 = I (x) pi_B.
inline FirstOrderCheck check_first_order(const ToyTransmissionModel& model, const TimeGrid& grid) {
  model.validate();
  const Matrix pi_b = detail::kernel_projector_B(model.rho_B);
  if (max_abs(pi_b) == 0) return {0, true};
  const auto terms = dyson_reduced_terms(model, grid);
  const Matrix pi0 = embed(pi_b, 1, terms.rho1.dims()).matrix();
  return {max_abs(pi0 * partial_transpose(terms.rho1, 0).matrix() * pi0), false};
}

/// Second-order operator Pi0 (rho2^T - rho1^T R rho1^T) Pi0 whose spectrum
/// gives the lambda^2 shifts of the vanishing eigenvalues of rho^{T_anc}.
inline MultipartiteOperator second_order_operator(const ToyTransmissionModel& model, const TimeGrid& grid,
                                                  bool include_HA) {
  const auto terms = dyson_reduced_terms(model, grid, include_HA);
  HermitianSeries series{partial_transpose(terms.rho0, 0), partial_transpose(terms.rho1, 0),
                         partial_transpose(terms.rho2, 0)};
  return second_order_operator(series, 0.0);
}

namespace detail {

// exp(-i h A) V by Taylor series, sub-stepping when h|A| is large.
inline Matrix expm_apply(const Matrix& a, double h, Matrix v) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff() * std::abs(h);
  const int sub = std::max(1, static_cast<int>(std::ceil(norm)));
  const cplx step = -kI * (h / sub);
  for (int s = 0; s < sub; ++s) {
    Matrix term = v, sum = v;
    for (int k = 1; k < 60; ++k) {
      term = (step / static_cast<double>(k)) * (a * term);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    v = std::move(sum);
  }
  return v;
}

// Columns: |psi>|b>|f> with the ancilla index moved to columns, one block per
// (b, f) ensemble member. Returns the evolved block and the member weights.
struct Ensemble {
  Matrix columns;  ///< (dA*2*df) x (d_anc * members)
  std::vector<double> weights;
};

inline Ensemble initial_ensemble(const ToyTransmissionModel& model) {
  const std::size_t d_anc = model.ancilla_dim(), da = model.a_dim(), df = model.field_dim;
  Eigen::SelfAdjointEigenSolver<Matrix> eb(model.rho_B.matrix()), ef(model.rho_f.matrix());
  std::vector<std::pair<Vector, double>> bs, fs;
  for (Eigen::Index i = 0; i < eb.eigenvalues().size(); ++i)
    if (eb.eigenvalues()(i) > 1e-15) bs.emplace_back(eb.eigenvectors().col(i), eb.eigenvalues()(i));
  for (Eigen::Index i = 0; i < ef.eigenvalues().size(); ++i)
    if (ef.eigenvalues()(i) > 1e-15) fs.emplace_back(ef.eigenvectors().col(i), ef.eigenvalues()(i));

  const auto rows = static_cast<Eigen::Index>(da * 2 * df);
  Ensemble e;
  e.columns = Matrix::Zero(rows, static_cast<Eigen::Index>(d_anc * bs.size() * fs.size()));
  const Vector& psi = model.input.amplitudes();
  Eigen::Index col = 0;
  for (const auto& [bv, bw] : bs)
    for (const auto& [fv, fw] : fs) {
      e.weights.push_back(bw * fw);
      for (std::size_t x = 0; x < d_anc; ++x, ++col)
        for (std::size_t a = 0; a < da; ++a)
          for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t f = 0; f < df; ++f)
              e.columns(static_cast<Eigen::Index>((a * 2 + b) * df + f), col) =
                  psi(static_cast<Eigen::Index>(x * da + a)) * bv(static_cast<Eigen::Index>(b)) *
                  fv(static_cast<Eigen::Index>(f));
    }
  return e;
}

inline Matrix reduce_ensemble(const Ensemble& e, std::size_t d_anc, std::size_t da, std::size_t df) {
  const auto d = static_cast<Eigen::Index>(d_anc * 2);
  Matrix rho = Matrix::Zero(d, d);
  for (std::size_t m = 0; m < e.weights.size(); ++m)
    for (std::size_t x = 0; x < d_anc; ++x)
      for (std::size_t y = 0; y < d_anc; ++y) {
        const auto cx = static_cast<Eigen::Index>(m * d_anc + x), cy = static_cast<Eigen::Index>(m * d_anc + y);
        for (std::size_t b = 0; b < 2; ++b)
          for (std::size_t bp = 0; bp < 2; ++bp) {
            cplx acc = 0;
            for (std::size_t a = 0; a < da; ++a)
              for (std::size_t f = 0; f < df; ++f)
                acc += e.columns(static_cast<Eigen::Index>((a * 2 + b) * df + f), cx) *
                       std::conj(e.columns(static_cast<Eigen::Index>((a * 2 + bp) * df + f), cy));
            rho(static_cast<Eigen::Index>(x * 2 + b), static_cast<Eigen::Index>(y * 2 + bp)) +=
                e.weights[m] * acc;
          }
      }
  return rho;
}

// Fourth-order commutator-free Magnus integration over the grid.
inline Matrix evolve_ensemble(const std::vector<Generator>& gens, double scale, const TimeGrid& grid,
                              std::size_t steps, Matrix v) {
  const double h = (grid.t_max - grid.t_min) / static_cast<double>(steps);
  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6, c2 = 0.5 + r3 / 6;
  const double a1 = (3 + 2 * r3) / 12, a2 = (3 - 2 * r3) / 12;
  const auto n = gens.front().k.rows();
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = grid.t_min + h * static_cast<double>(s);
    Matrix h1 = Matrix::Zero(n, n), h2 = Matrix::Zero(n, n);
    for (const auto& g : gens) {
      h1 += (scale * g.chi(t + c1 * h)) * g.k;
      h2 += (scale * g.chi(t + c2 * h)) * g.k;
    }
    v = expm_apply(a1 * h1 + a2 * h2, h, std::move(v));
    v = expm_apply(a2 * h1 + a1 * h2, h, std::move(v));
  }
  return v;
}

}  // namespace detail

struct EvolutionOptions {
  double tol = 1e-10;  ///< Frobenius change under step halving
  std::size_t max_steps = 1u << 16;
};

/// Reduced ancilla-B state after evolving with couplings scaled by lambda_scale.
inline DensityMatrix exact_evolve(const ToyTransmissionModel& model, double lambda_scale, const TimeGrid& grid,
                                  const EvolutionOptions& opt = {}) {
  model.validate();
  grid.validate();
  if (!std::isfinite(lambda_scale)) throw ConfigError("lambda scale must be finite");
  const auto dims_out = Dims{model.ancilla_dim(), 2};
  const auto e0 = detail::initial_ensemble(model);
  auto reduce = [&](const Matrix& cols) {
    detail::Ensemble e{cols, e0.weights};
    return detail::reduce_ensemble(e, model.ancilla_dim(), model.a_dim(), model.field_dim);
  };
  const auto gens = detail::generators(model);
  if (gens.empty() || lambda_scale == 0.0) return DensityMatrix(MultipartiteOperator(reduce(e0.columns), dims_out));

  std::size_t steps = std::max<std::size_t>(grid.steps, 2);
  Matrix prev = reduce(detail::evolve_ensemble(gens, lambda_scale, grid, steps, e0.columns));
  while (true) {
    if (steps * 2 > opt.max_steps)
      throw ConvergenceError("exact evolution did not converge under step halving", 0);
    steps *= 2;
    Matrix cur = reduce(detail::evolve_ensemble(gens, lambda_scale, grid, steps, e0.columns));
    const double change = frobenius_distance(cur, prev);
    if (change <= opt.tol) {
      cur = 0.5 * (cur + cur.adjoint());
      return DensityMatrix(MultipartiteOperator(cur, dims_out), 1e-9);
    }
    prev = std::move(cur);
  }
}

inline DensityMatrix exact_evolve(const ToyTransmissionModel& model, double lambda_scale) {
  return exact_evolve(model, lambda_scale, default_grid(model));
}

struct ScalingResult {
  std::vector<double> lambdas;
  std::vector<double> negativities;
  std::vector<double> min_pt_eigenvalues;
  std::optional<double> exponent;               ///< log-log slope over negativities > 1e-12
  std::optional<double> quadratic_coefficient;  ///< lambda^2 term of min PT eigenvalue
};

namespace detail {

// Least squares with columns lambda^1..lambda^4 on p(lambda) - p(0).
inline double quadratic_coefficient(const std::vector<double>& x, const std::vector<double>& y, double y0) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 4);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 4; ++k) a(static_cast<Eigen::Index>(i), k) = std::pow(x[i], k + 1);
    b(static_cast<Eigen::Index>(i)) = y[i] - y0;
  }
  return a.colPivHouseholderQr().solve(b)(1);
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

inline ScalingResult negativity_scaling(const ToyTransmissionModel& model, const std::vector<double>& lambdas,
                                        const TimeGrid& grid) {
  model.validate();
  ScalingResult out;
  out.lambdas = lambdas;
  for (double l : lambdas)
    if (!(l >= 0 && l <= 0.1)) throw ConfigError("scaling lambdas must lie in [0, 0.1]");
  const bool all_zero = std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l == 0; });
  if (all_zero) {
    out.negativities.assign(lambdas.size(), 0.0);
    out.min_pt_eigenvalues.assign(lambdas.size(), 0.0);
    return out;
  }
  std::vector<double> nz;
  for (double l : lambdas)
    if (l > 0 && std::find(nz.begin(), nz.end(), l) == nz.end()) nz.push_back(l);
  if (nz.size() < 4) throw ConfigError("scaling fit needs at least 4 distinct nonzero lambdas");

  for (double l : lambdas) {
    const auto rho = exact_evolve(model, l, grid);
    out.negativities.push_back(negativity(rho, 0));
    out.min_pt_eigenvalues.push_back(min_pt_eigenvalue(rho.op(), 0));
  }
  const double p0 = min_pt_eigenvalue(exact_evolve(model, 0.0, grid).op(), 0);

  std::vector<double> fx, fy, lx, ly;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] == 0) continue;
    fx.push_back(lambdas[i]);
    fy.push_back(out.min_pt_eigenvalues[i]);
    if (out.negativities[i] > kNegativeEigenvalueCutoff) {
      lx.push_back(lambdas[i]);
      ly.push_back(out.negativities[i]);
    }
  }
  out.quadratic_coefficient = detail::quadratic_coefficient(fx, fy, p0);
  if (lx.size() >= 2) out.exponent = detail::loglog_slope(lx, ly);
  return out;
}

inline ScalingResult negativity_scaling(const ToyTransmissionModel& model, const std::vector<double>& lambdas) {
  return negativity_scaling(model, lambdas, default_grid(model));
}

// ---------------------------------------------------------------------------
// Model builders

/// Qubits coupled by sigma_x to a truncated oscillator (dim 10) through
/// a + a^dagger; B's window follows A's. rho_B = |g><g|, field in its ground state.
inline ToyTransmissionModel default_toy_model(double p = 0.5, std::size_t field_dim = 10) {
  if (field_dim < 2) throw ConfigError("oscillator truncation needs at least 2 levels");
  ToyTransmissionModel m;
  m.field_dim = field_dim;
  const auto n = static_cast<Eigen::Index>(field_dim);
  Matrix x = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) x(i, i + 1) = x(i + 1, i) = std::sqrt(static_cast<double>(i + 1));
  m.rho_f = DensityMatrix(PureState::basis(field_dim, 0).projector());
  m.rho_B = DensityMatrix(PureState::basis(2, 0).projector());
  Vector psi = Vector::Zero(4);
  psi(0) = std::sqrt(p);
  psi(3) = std::sqrt(1 - p);
  m.input = PureState(psi, Dims{2, 2});
  m.couplings_A.push_back({pauli(1), x, Switching{0.0, 1.0, 1.0, 0.0, 1.0}});
  m.couplings_B.push_back({pauli(1), x, Switching{3.0, 1.0, 1.0, 0.0, 1.0}});
  return m;
}

struct RandomModelOptions {
  std::size_t min_field_dim = 2, max_field_dim = 5;
  std::size_t max_field_rank = 2;
  std::size_t ancilla_dim = 2, a_dim = 2;
  std::size_t max_terms = 2;
};

namespace detail {

template <class Rng>
Matrix random_hermitian(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g;
  const auto d = static_cast<Eigen::Index>(n);
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  Matrix h = 0.5 * (a + a.adjoint());
  return h / h.norm();
}

template <class Rng>
Vector random_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace detail

/// Random Hermitian couplings, Gaussian windows with B after A, random pure
/// input and pure rho_B, mixed field state of rank <= max_field_rank.
template <class Rng>
ToyTransmissionModel random_toy_model(Rng& rng, const RandomModelOptions& opt = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  ToyTransmissionModel m;
  m.field_dim = pick(opt.min_field_dim, opt.max_field_dim);
  const std::size_t rank = pick(1, std::min(opt.max_field_rank, m.field_dim));
  Matrix rf = Matrix::Zero(static_cast<Eigen::Index>(m.field_dim), static_cast<Eigen::Index>(m.field_dim));
  double total = 0;
  for (std::size_t r = 0; r < rank; ++r) {
    const double w = uniform(0.2, 1.0);
    const Vector v = detail::random_vector(m.field_dim, rng);
    rf += w * v * v.adjoint();
    total += w;
  }
  rf /= total;
  m.rho_f = DensityMatrix(MultipartiteOperator(0.5 * (rf + rf.adjoint()), Dims{m.field_dim}));
  m.rho_B = DensityMatrix(PureState(detail::random_vector(2, rng), Dims{2}).projector());
  m.input = PureState(detail::random_vector(opt.ancilla_dim * opt.a_dim, rng), Dims{opt.ancilla_dim, opt.a_dim});

  const double center_a = uniform(-1, 1);
  auto window = [&](double center) {
    return Switching{center, uniform(0.5, 1.2), uniform(0.0, 2.0), uniform(0.0, 2 * std::numbers::pi), 1.0};
  };
  const std::size_t na = pick(1, opt.max_terms), nb = pick(1, opt.max_terms);
  for (std::size_t k = 0; k < na; ++k)
    m.couplings_A.push_back({detail::random_hermitian(opt.a_dim, rng), detail::random_hermitian(m.field_dim, rng),
                             window(center_a + uniform(-0.3, 0.3))});
  const double center_b = center_a + uniform(1.5, 3.0);
  for (std::size_t k = 0; k < nb; ++k)
    m.couplings_B.push_back({detail::random_hermitian(2, rng), detail::random_hermitian(m.field_dim, rng),
                             window(center_b + uniform(-0.3, 0.3))});
  m.lambda_A = uniform(0.5, 1.5);
  m.lambda_B = uniform(0.5, 1.5);
  return m;
}

}  // namespace qtransfer
