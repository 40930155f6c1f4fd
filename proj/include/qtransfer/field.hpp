#pragma once

// Vacuum two-point function of a free scalar field in (d+1)-dimensional
// Minkowski space, smeared with Gaussian detector profiles, and the
// second-order coefficients L_ij and M of two inertial Unruh-DeWitt detectors
// with Gaussian switching.
//
// Smearing is normalized so that its Fourier transform is exp(-sigma^2 k^2 / 2)
// (unit integral in position space). Natural units, hbar = c = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "qtransfer/error.hpp"
#include "qtransfer/quadrature.hpp"

namespace qtransfer {

struct FieldModel {
  int spatial_dimension = 3;
  double mass = 0;

  void validate() const {
    if (spatial_dimension < 1 || spatial_dimension > 3)
      throw ConfigError("field spatial dimension must be 1, 2 or 3");
    if (!(mass >= 0)) throw ConfigError("field mass must be non-negative");
    if (spatial_dimension == 1 && mass == 0)
      throw ConfigError("massless field in 1+1 dimensions is infrared divergent");
  }
};

/// chi(t) = exp(-(t - center)^2 / (2 width^2)).
struct GaussianSwitching {
  double center = 0;
  double width = 1;

  double operator()(double t) const {
    const double x = (t - center) / width;
    return std::exp(-0.5 * x * x);
  }
};

struct DetectorParams {
  std::string label;
  double coupling = 0.1;
  double gap = 1;
  std::vector<double> position{0, 0, 0};
  GaussianSwitching switching;
  double smearing_width = 0.5;  ///< 0 means pointlike

  void validate(int spatial_dimension) const {
    if (!(switching.width > 0)) throw ConfigError("detector " + label + ": switching width must be positive");
    if (!(smearing_width >= 0)) throw ConfigError("detector " + label + ": smearing width must be >= 0");
    if (!(coupling >= 0)) throw ConfigError("detector " + label + ": coupling must be >= 0");
    if (position.size() != static_cast<std::size_t>(spatial_dimension))
      throw DimensionError("detector " + label + ": position has " + std::to_string(position.size()) +
                           " components, field has " + std::to_string(spatial_dimension));
  }
};

struct QuadratureConfig {
  double k_max_multiplier = 8;        ///< momentum cutoff at multiplier / sigma_eff
  double time_window_multiplier = 8;  ///< +- multiplier * switching width
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::size_t max_intervals = 20000;

  void validate() const {
    if (!(k_max_multiplier > 0) || !(time_window_multiplier > 0) || !(rel_tol > 0) || !(abs_tol > 0) ||
        max_intervals == 0)
      throw ConfigError("quadrature settings must be positive");
  }
};

namespace detail {

inline double distance(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

/// Radial kernel for a pair of detectors: everything in the momentum
/// integrand except exp(-i omega dt).
class RadialKernel {
 public:
  RadialKernel(const FieldModel& model, const DetectorParams& di, const DetectorParams& dj,
               const QuadratureConfig& cfg)
      : d_(model.spatial_dimension), m2_(model.mass * model.mass) {
    model.validate();
    di.validate(d_);
    dj.validate(d_);
    cfg.validate();
    s2_ = di.smearing_width * di.smearing_width + dj.smearing_width * dj.smearing_width;
    if (s2_ == 0)
      throw ConfigError("two pointlike detectors: the smeared two-point function is UV divergent");
    r_ = distance(di.position, dj.position);
    k_max_ = cfg.k_max_multiplier / std::sqrt(s2_);
  }

  double omega(double k) const { return std::sqrt(k * k + m2_); }

  double operator()(double k) const {
    using std::numbers::pi;
    const double w = omega(k);
    const double damp = std::exp(-0.5 * s2_ * k * k);
    if (d_ == 1) return std::cos(k * r_) * damp / (2 * pi * w);
    const double k_over_w = w == 0 ? 1.0 : k / w;
    if (d_ == 2) return k_over_w * std::cyl_bessel_j(0.0, k * r_) * damp / (4 * pi);
    const double kr = k * r_;
    const double sinc = kr == 0 ? 1.0 : std::sin(kr) / kr;
    return k * k_over_w * sinc * damp / (4 * pi * pi);
  }

  double k_max() const { return k_max_; }
  double separation() const { return r_; }

 private:
  int d_;
  double m2_;
  double s2_ = 0;
  double r_ = 0;
  double k_max_ = 0;
};

/// Smeared W as a function of dt = t - t' for a fixed detector pair.
class WightmanFunction {
 public:
  WightmanFunction(const FieldModel& model, const DetectorParams& di, const DetectorParams& dj,
                   const QuadratureConfig& cfg, double rel_tol)
      : kernel_(model, di, dj, cfg), max_intervals_(cfg.max_intervals) {
    QuadratureOptions o;
    o.rel_tol = 1e-3;
    o.abs_tol = 0;
    o.pieces = 8;
    const auto bound = integrate_adaptive<double>([this](double k) { return std::abs(kernel_(k)); },
                                                  0.0, kernel_.k_max(), o);
    scale_ = bound.value;  // upper bound on |W|
    abs_tol_ = std::max(rel_tol * scale_, cfg.abs_tol * 1e-6);
  }

  Estimate operator()(double dt) const {
    QuadratureOptions o;
    o.rel_tol = 0;
    o.abs_tol = abs_tol_;
    o.max_intervals = max_intervals_;
    const double osc = std::max({std::abs(dt), kernel_.separation(), 1.0}) * kernel_.k_max();
    o.pieces = static_cast<std::size_t>(std::clamp(std::ceil(osc / std::numbers::pi), 4.0, 400.0));
    return integrate_adaptive<std::complex<double>>(
        [this, dt](double k) {
          const double ph = -kernel_.omega(k) * dt;
          return kernel_(k) * std::complex<double>(std::cos(ph), std::sin(ph));
        },
        0.0, kernel_.k_max(), o);
  }

  double scale() const { return scale_; }
  double abs_tol() const { return abs_tol_; }

 private:
  RadialKernel kernel_;
  std::size_t max_intervals_;
  double scale_ = 0;
  double abs_tol_ = 0;
};

/// integral over R of exp(-a t^2 + b t + c) dt, Re(a) > 0.
inline std::complex<double> gaussian_integral(double a, std::complex<double> b, std::complex<double> c) {
  return std::sqrt(std::numbers::pi / a) * std::exp(b * b / (4 * a) + c);
}

// Integrates g(u) * W(u) style products over [0, upper] and bounds the error
// contributed by the inner momentum quadrature.
template <class Outer, class Weight>
Estimate nested_time_integral(const Outer& outer, const Weight& weight, double upper, double piece_width,
                              double inner_tol, const QuadratureConfig& cfg) {
  QuadratureOptions o;
  o.rel_tol = cfg.rel_tol * 0.1;
  o.abs_tol = cfg.abs_tol * 0.1;
  o.max_intervals = cfg.max_intervals;
  o.pieces = static_cast<std::size_t>(std::clamp(std::ceil(upper / piece_width), 1.0, 2000.0));
  auto est = integrate_adaptive<std::complex<double>>(outer, 0.0, upper, o);

  QuadratureOptions wo = o;
  wo.rel_tol = 1e-3;
  wo.abs_tol = 0;
  const auto w = integrate_adaptive<double>(weight, 0.0, upper, wo);
  est.error += inner_tol * w.value;
  return est;
}

}  // namespace detail

/// Smeared Wightman function W(t, x_i; t', x_j).
inline Estimate smeared_wightman(const FieldModel& model, const DetectorParams& det_i,
                                 const DetectorParams& det_j, double t, double t_prime,
                                 const QuadratureConfig& cfg = {}) {
  const detail::WightmanFunction w(model, det_i, det_j, cfg, cfg.rel_tol);
  auto est = w(t - t_prime);
  const double target = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(est.value));
  if (est.error > target && est.error > w.abs_tol())
    throw ConvergenceError("smeared Wightman quadrature", est.error);
  return est;
}

/// L_ij = l_i l_j int dt dt' chi_i(t) chi_j(t') exp(-i(W_i t - W_j t')) W(t, x_i; t', x_j).
///
/// The integral over t + t' is done in closed form; the remaining integral over
/// u = t - t' is folded onto u >= 0 using W(-u) = conj(W(u)).
inline Estimate compute_L(const FieldModel& model, const DetectorParams& di, const DetectorParams& dj,
                          const QuadratureConfig& cfg = {}) {
  using cd = std::complex<double>;
  const double lam = di.coupling * dj.coupling;
  const double inner_rel = cfg.rel_tol * 1e-2;
  const detail::WightmanFunction w(model, di, dj, cfg, inner_rel);
  if (lam == 0) return {};

  const double ti = di.switching.center, tj = dj.switching.center;
  const double Ti = di.switching.width, Tj = dj.switching.width;
  const double a = 0.5 / (Ti * Ti) + 0.5 / (Tj * Tj);
  const double dOmega = di.gap - dj.gap;

  // int dt' chi_i(t' + u) chi_j(t') exp(-i(W_i (t' + u) - W_j t'))
  auto g = [&](double u) {
    const double alpha = ti - u;
    const cd b(alpha / (Ti * Ti) + tj / (Tj * Tj), -dOmega);
    const double c = -alpha * alpha / (2 * Ti * Ti) - tj * tj / (2 * Tj * Tj);
    return std::polar(1.0, -di.gap * u) * detail::gaussian_integral(a, b, c);
  };

  const double spread = std::sqrt(Ti * Ti + Tj * Tj);
  const double upper = std::abs(ti - tj) + cfg.time_window_multiplier * spread;
  const double piece = 0.5 * std::min(Ti, Tj);

  // same gap and window: g(-u) = conj(g(u)) and L_ij is real
  const bool mirrored = di.gap == dj.gap && ti == tj && Ti == Tj;
  auto outer = [&](double u) {
    const cd wu = w(u).value;
    if (mirrored) return cd(2 * (g(u) * wu).real(), 0.0);
    return g(u) * wu + g(-u) * std::conj(wu);
  };
  auto weight = [&](double u) { return std::abs(g(u)) + std::abs(g(-u)); };
  auto est = detail::nested_time_integral(outer, weight, upper, piece, w.abs_tol(), cfg);
  est.value *= lam;
  est.error *= lam;
  est.l1 *= lam;
  return est;
}

/// M = -l_A l_B int dt int_{t' < t} dt' [ exp(i(W_A t + W_B t')) chi_A(t) chi_B(t') W(t, x_A; t', x_B)
///                                      + exp(i(W_B t + W_A t')) chi_B(t) chi_A(t') W(t, x_B; t', x_A) ].
///
/// Rotated coordinates: the integral over t is Gaussian and done in closed form
/// for each u = t - t' >= 0; the integral over u is numeric.
inline Estimate compute_M(const FieldModel& model, const DetectorParams& da, const DetectorParams& db,
                          const QuadratureConfig& cfg = {}) {
  using cd = std::complex<double>;
  const double lam = da.coupling * db.coupling;
  const double inner_rel = cfg.rel_tol * 1e-2;
  const detail::WightmanFunction w(model, da, db, cfg, inner_rel);
  if (lam == 0) return {};

  // int dt chi_X(t) chi_Y(t - u) exp(i(W_X t + W_Y (t - u)))
  auto h = [](const DetectorParams& x, const DetectorParams& y, double u) {
    const double tx = x.switching.center, ty = y.switching.center;
    const double Tx = x.switching.width, Ty = y.switching.width;
    const double a = 0.5 / (Tx * Tx) + 0.5 / (Ty * Ty);
    const double shift = u + ty;
    const cd b(tx / (Tx * Tx) + shift / (Ty * Ty), x.gap + y.gap);
    const double c = -tx * tx / (2 * Tx * Tx) - shift * shift / (2 * Ty * Ty);
    return std::polar(1.0, -y.gap * u) * detail::gaussian_integral(a, b, c);
  };

  const double Ta = da.switching.width, Tb = db.switching.width;
  const double spread = std::sqrt(Ta * Ta + Tb * Tb);
  const double upper = std::abs(da.switching.center - db.switching.center) + cfg.time_window_multiplier * spread;
  const double piece = 0.5 * std::min(Ta, Tb);

  // W depends on |x_A - x_B| only, so both orderings share W(u)
  auto outer = [&](double u) { return w(u).value * (h(da, db, u) + h(db, da, u)); };
  auto weight = [&](double u) { return std::abs(h(da, db, u)) + std::abs(h(db, da, u)); };
  auto est = detail::nested_time_integral(outer, weight, upper, piece, w.abs_tol(), cfg);
  est.value *= -lam;
  est.error *= lam;
  est.l1 *= lam;
  return est;
}

}  // namespace qtransfer
