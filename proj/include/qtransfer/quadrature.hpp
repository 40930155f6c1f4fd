#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for real or complex
// integrands. Node tables come from Boost.Math; the driver bisects the
// interval with the largest error until the summed error meets
// max(abs_tol, rel_tol * |I|) or drops to the round-off floor.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "qtransfer/error.hpp"

namespace qtransfer {

template <class T>
struct BasicEstimate {
  T value{};
  double error = 0;  ///< absolute error estimate
  double l1 = 0;     ///< integral of |f|, for scale
};

using Estimate = BasicEstimate<std::complex<double>>;
using RealEstimate = BasicEstimate<double>;

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::size_t pieces = 1;            ///< initial uniform split
  std::size_t max_intervals = 20000;
  bool throw_on_failure = true;
};

namespace detail {

template <class T>
struct Panel {
  double a, b;
  T value;
  double error, l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk15_panel(F& f, double a, double b) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  using g = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = gk::abscissa();
  const auto& wk = gk::weights();
  const auto& wg = g::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const T fc = f(mid);
  T kron = fc * wk[0];
  T gauss = fc * wg[0];
  double l1 = std::abs(fc) * wk[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const T fp = f(mid + half * xk[i]);
    const T fm = f(mid - half * xk[i]);
    kron += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    // the Gauss nodes are the even-indexed Kronrod nodes
    if (i % 2 == 0) gauss += (fp + fm) * wg[i / 2];
  }
  return {a, b, kron * half, std::abs((kron - gauss) * half), l1 * std::abs(half)};
}

}  // namespace detail

template <class T, class F>
BasicEstimate<T> integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  BasicEstimate<T> out;
  if (a == b) return out;
  std::priority_queue<detail::Panel<T>> heap;
  const std::size_t pieces = std::max<std::size_t>(1, opt.pieces);
  const double w = (b - a) / static_cast<double>(pieces);
  for (std::size_t i = 0; i < pieces; ++i) {
    const double lo = a + w * static_cast<double>(i);
    const double hi = (i + 1 == pieces) ? b : lo + w;
    heap.push(detail::gk15_panel<T>(f, lo, hi));
  }

  auto totals = [&heap]() {
    auto copy = heap;
    BasicEstimate<T> t;
    while (!copy.empty()) {
      t.value += copy.top().value;
      t.error += copy.top().error;
      t.l1 += copy.top().l1;
      copy.pop();
    }
    return t;
  };

  T value{};
  double error = 0, l1 = 0;
  {
    const auto t = totals();
    value = t.value;
    error = t.error;
    l1 = t.l1;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto done = [&]() {
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
    return error <= target || error <= 50 * eps * l1;
  };

  std::size_t intervals = heap.size();
  while (!done() && intervals < opt.max_intervals) {
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const auto left = detail::gk15_panel<T>(f, worst.a, mid);
    const auto right = detail::gk15_panel<T>(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
    ++intervals;
    // re-sum occasionally to shed accumulated cancellation error
    if (intervals % 256 == 0) {
      const auto t = totals();
      value = t.value;
      error = t.error;
      l1 = t.l1;
    }
  }
  const auto t = totals();
  out = t;
  const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
  if (opt.throw_on_failure && !(out.error <= target || out.error <= 50 * eps * out.l1))
    throw ConvergenceError("adaptive quadrature did not converge after " +
                               std::to_string(intervals) + " intervals",
                           out.error);
  return out;
}

}  // namespace qtransfer
