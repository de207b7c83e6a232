#include "nvent/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nvent/quantum_core.hpp"

namespace nvent {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double weighted_rms(const Eigen::VectorXcd& err, const Eigen::VectorXcd& y0,
                    const Eigen::VectorXcd& y1, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < err.size(); ++k) {
    const double sc = atol + rtol * std::max(std::abs(y0(k)), std::abs(y1(k)));
    const double r = std::abs(err(k)) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace

IntegratorStats integrate_dopri5(const OdeRhs& rhs, Eigen::VectorXcd y, double t0,
                                 std::span<const double> outputs, const OdeObserver& observe,
                                 const IntegratorOptions& options) {
  IntegratorStats stats;
  if (outputs.empty()) return stats;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] < t0 || (i > 0 && outputs[i] < outputs[i - 1])) {
      throw InvalidArgument("integrate_dopri5: output times must be ascending from t0");
    }
  }

  const Eigen::Index n = y.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);

  double t = t0;
  rhs(t, y, k1);

  const double span = outputs.back() - t0;
  double h = options.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic, first stage only.
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double sc = options.atol + options.rtol * std::abs(y(k));
      d0 += std::norm(y(k)) / (sc * sc);
      d1 += std::norm(k1(k)) / (sc * sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (span > 0) h = std::min(h, span);
  }
  if (options.max_step > 0) h = std::min(h, options.max_step);

  std::size_t next = 0;
  while (next < outputs.size() && outputs[next] == t) {
    observe(next, t, y);
    ++next;
  }

  std::size_t steps = 0;
  while (next < outputs.size()) {
    if (++steps > options.max_steps) {
      throw NumericError("integrate_dopri5: step budget exhausted at t = " + std::to_string(t));
    }
    const double target = outputs[next];
    double step = h;
    bool lands = false;
    if (t + step >= target || (target - (t + step)) < 1e-12 * std::abs(target)) {
      step = target - t;
      lands = true;
    }
    if (!(step > 0) || t + step == t) {
      throw NumericError("integrate_dopri5: step size underflow at t = " + std::to_string(t));
    }

    tmp = y + step * a21 * k1;
    rhs(t + c2 * step, tmp, k2);
    tmp = y + step * (a31 * k1 + a32 * k2);
    rhs(t + c3 * step, tmp, k3);
    tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * step, tmp, k4);
    tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * step, tmp, k5);
    tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + step, tmp, k6);
    y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + step, y_new, k7);
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = weighted_rms(err, y, y_new, options.atol, options.rtol);
    if (!std::isfinite(en)) {
      throw NumericError("integrate_dopri5: non-finite error estimate at t = " + std::to_string(t));
    }
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    if (en <= 1.0) {
      ++stats.accepted;
      stats.error_estimate += err.cwiseAbs().maxCoeff();
      t = lands ? target : t + step;
      y.swap(y_new);
      k1.swap(k7);
      // Landing steps are often truncated; do not let them shrink the next step.
      h = lands ? std::max(h, step * factor) : step * factor;
      while (next < outputs.size() && outputs[next] <= t) {
        observe(next, outputs[next], y);
        ++next;
      }
    } else {
      ++stats.rejected;
      h = step * std::max(factor, 0.1);
    }
    if (options.max_step > 0) h = std::min(h, options.max_step);
  }
  return stats;
}

}  // namespace nvent
