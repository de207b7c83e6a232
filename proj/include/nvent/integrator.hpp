#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace nvent {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = 0.0;      // 0 means unbounded
  std::size_t max_steps = 20'000'000;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Sum of the embedded local error estimates in max-norm; an upper estimate
  /// of the global error for non-expanding dynamics.
  double error_estimate = 0.0;
};

/// dy/dt = f(t, y), written into dydt.
using OdeRhs = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

/// Called at each requested output time with the solution there.
using OdeObserver = std::function<void(std::size_t, double, const Eigen::VectorXcd&)>;

/// Adaptive Dormand-Prince 5(4) with local extrapolation. Steps are shortened
/// to land exactly on every output time, so no interpolation error enters the
/// samples. Output times must be ascending and >= t0.
IntegratorStats integrate_dopri5(const OdeRhs& rhs, Eigen::VectorXcd y, double t0,
                                 std::span<const double> outputs, const OdeObserver& observe,
                                 const IntegratorOptions& options = {});

}  // namespace nvent
