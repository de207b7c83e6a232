#include "nvent/dynamics.hpp"

#include <algorithm>
#include <string>

#include "nvent/quadrature.hpp"

namespace nvent {

namespace {

constexpr double kTraceTolerance = 1e-8;
constexpr double kNormTolerance = 1e-10;
constexpr int kRefinements = 2;

}  // namespace

DephasingSpec DephasingSpec::from_system(const SpinSystem& system) {
  DephasingSpec spec;
  for (int s = 0; s < 3; ++s) {
    const double t2 = system.site(s).t2;
    if (std::isfinite(t2)) {
      spec.channels.push_back({site_sz(system, s), 2.0 / t2});
    }
  }
  return spec;
}

bool DephasingSpec::empty() const {
  return std::none_of(channels.begin(), channels.end(),
                      [](const Channel& c) { return c.rate > 0; });
}

namespace {

void check_grid(std::span<const double> t_grid, double t_start, double end_time) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < t_start || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw InvalidArgument("time grid must be ascending and start at or after the initial time");
    }
  }
  if (!t_grid.empty() && t_grid.back() > end_time * (1.0 + 1e-12)) {
    throw InvalidArgument("time grid extends past the end of the schedule");
  }
}

}  // namespace

EvolutionResult evolve_master_equation(const Operator& rho0, const TimeDependentHamiltonian& h,
                                       const DephasingSpec& dephasing,
                                       std::span<const double> t_grid,
                                       const IntegratorOptions& options, double t_start) {
  require_density_matrix(rho0, "evolve_master_equation", {kTraceTolerance, 1e-10, -1e-8});
  const Eigen::Index n = rho0.rows();
  if (h.dim() != n) {
    throw InvalidArgument("evolve_master_equation: Hamiltonian and state dimensions differ");
  }
  check_grid(t_grid, t_start, h.end_time);

  // Precomputed anticommutator pieces for each channel.
  std::vector<std::pair<Operator, Operator>> channels;  // (sqrt(rate) L, rate L^+ L / 2)
  for (const auto& c : dephasing.channels) {
    if (c.rate < 0) throw InvalidArgument("evolve_master_equation: negative dephasing rate");
    if (c.rate == 0) continue;
    channels.emplace_back(std::sqrt(c.rate) * c.jump, 0.5 * c.rate * c.jump.adjoint() * c.jump);
  }

  IntegratorOptions opts = options;
  for (int attempt = 0;; ++attempt) {
    EvolutionResult result;
    result.times.assign(t_grid.begin(), t_grid.end());
    result.states.resize(t_grid.size());

    Operator ham(n, n), drho(n, n);
    OdeRhs rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
      Eigen::Map<const Operator> rho(y.data(), n, n);
      ham = h.constant();
      for (const auto& term : h.terms()) ham += term.coefficient(t) * term.op;
      drho.noalias() = -kI * (ham * rho);
      drho.noalias() += kI * (rho * ham);
      for (const auto& [l, half_ll] : channels) {
        drho.noalias() += l * rho * l.adjoint();
        drho.noalias() -= half_ll * rho;
        drho.noalias() -= rho * half_ll;
      }
      dy = Eigen::Map<const Eigen::VectorXcd>(drho.data(), n * n);
    };
    double max_trace_error = 0.0;
    OdeObserver observe = [&](std::size_t i, double, const Eigen::VectorXcd& y) {
      Operator rho = Eigen::Map<const Operator>(y.data(), n, n);
      max_trace_error = std::max(max_trace_error, std::abs(rho.trace() - Complex(1.0)));
      result.states[i] = rho;
    };
    const Eigen::VectorXcd y0 = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), n * n);
    result.diagnostics.integrator = integrate_dopri5(rhs, y0, t_start, t_grid, observe, opts);
    result.diagnostics.max_trace_error = max_trace_error;
    if (max_trace_error <= kTraceTolerance) return result;
    if (attempt == kRefinements) {
      throw NumericError("evolve_master_equation: trace drift " + std::to_string(max_trace_error) +
                         " exceeds tolerance after refinement");
    }
    opts.rtol *= 0.1;
    opts.atol *= 0.1;
  }
}

CoherentResult evolve_coherent(const Ket& psi0, const TimeDependentHamiltonian& h,
                               std::span<const double> t_grid, const IntegratorOptions& options,
                               Propagation method, double t_start) {
  if (std::abs(psi0.norm() - 1.0) > 1e-10) {
    throw InvalidArgument("evolve_coherent: initial state is not normalised");
  }
  const Eigen::Index n = psi0.size();
  if (h.dim() != n) {
    throw InvalidArgument("evolve_coherent: Hamiltonian and state dimensions differ");
  }
  check_grid(t_grid, t_start, h.end_time);

  const bool exact_ok = h.commuting_with_integrals();
  if (method == Propagation::Exact && !exact_ok) {
    throw InvalidArgument("evolve_coherent: exact propagation needs a commuting schedule");
  }
  CoherentResult result;
  result.times.assign(t_grid.begin(), t_grid.end());
  result.states.resize(t_grid.size());

  if (method == Propagation::Exact || (method == Propagation::Auto && exact_ok)) {
    const Operator start = h.integrated(t_start);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const Operator phase = h.integrated(t_grid[i]) - start;
      result.states[i] = unitary_propagator(phase, 1.0) * psi0;
    }
    result.diagnostics.exact = true;
    return result;
  }

  IntegratorOptions opts = options;
  for (int attempt = 0;; ++attempt) {
    Eigen::VectorXcd hpsi(n);
    OdeRhs rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
      hpsi.noalias() = h.constant() * y;
      for (const auto& term : h.terms()) hpsi.noalias() += term.coefficient(t) * (term.op * y);
      dy = -kI * hpsi;
    };
    double max_norm_error = 0.0;
    OdeObserver observe = [&](std::size_t i, double, const Eigen::VectorXcd& y) {
      max_norm_error = std::max(max_norm_error, std::abs(y.norm() - 1.0));
      result.states[i] = y;
    };
    result.diagnostics.integrator = integrate_dopri5(rhs, psi0, t_start, t_grid, observe, opts);
    result.diagnostics.max_trace_error = max_norm_error;
    if (max_norm_error <= kNormTolerance) {
      // Runge-Kutta steps do not conserve the norm; the drift is reported above.
      for (auto& psi : result.states) psi.normalize();
      return result;
    }
    if (attempt == kRefinements) {
      throw NumericError("evolve_coherent: norm drift " + std::to_string(max_norm_error) +
                         " exceeds tolerance after refinement");
    }
    opts.rtol *= 0.1;
    opts.atol *= 0.1;
  }
}

double sine_difference_over_omega(double omega, double t, double phi) {
  const double x = omega * t;
  if (std::abs(x) < 1e-6) {
    return t * std::cos(phi) - 0.5 * omega * t * t * std::sin(phi) -
           omega * omega * t * t * t * std::cos(phi) / 6.0;
  }
  return (std::sin(x + phi) - std::sin(phi)) / omega;
}

double one_minus_cos_over_omega_squared(double omega, double t) {
  const double x = omega * t;
  if (std::abs(x) < 1e-6) {
    return 0.5 * t * t - omega * omega * t * t * t * t / 24.0;
  }
  // 1 - cos x = 2 sin^2(x/2) avoids cancellation.
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (omega * omega);
}

namespace {

struct ZzPair {
  Operator a1;  // S_z,NV S_z,1
  Operator a2;  // S_z,NV S_z,2
};

ZzPair zz_pair(const SpinSystem& system) {
  return {nv_qubit_zz(system, SpinSystem::kQubit1), nv_qubit_zz(system, SpinSystem::kQubit2)};
}

int panels_for(const VibrationMode& mode, double t) {
  return std::max(4, static_cast<int>(std::ceil(mode.angular_frequency * std::abs(t) / 0.5)));
}

}  // namespace

Operator perturbative_propagate(const Operator& rho0, const SpinSystem& system,
                                const StaticGeometry& g, const VibrationMode& mode, double t,
                                int order) {
  if (order != 1 && order != 2) {
    throw InvalidArgument("perturbative_propagate: order must be 1 or 2");
  }
  validate(g, mode);
  const auto [a1, a2] = zz_pair(system);
  const std::array<const Operator*, 2> ops{&a1, &a2};
  auto coeff = [&](double s, int j) {
    const auto c = interaction_series_coefficients(s, system, g, mode, order);
    return j == 0 ? c.first : c.second;
  };
  const int panels = panels_for(mode, t);

  Operator out = rho0;
  for (int j = 0; j < 2; ++j) {
    const double first = integrate([&](double s) { return coeff(s, j); }, 0.0, t, panels, 12);
    out += -kI * first * commutator(*ops[j], rho0);
  }
  if (order == 2) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double nested = integrate(
            [&](double s1) {
              const double inner = integrate([&](double s2) { return coeff(s2, k); }, 0.0, s1,
                                             panels_for(mode, s1), 12);
              return coeff(s1, j) * inner;
            },
            0.0, t, panels, 12);
        out -= nested * commutator(*ops[j], commutator(*ops[k], rho0));
      }
    }
  }
  return out;
}

Operator perturbative_state_first_order(double t, const SpinSystem& system,
                                        const StaticGeometry& g, const VibrationMode& mode) {
  validate(g, mode);
  const auto [a1, a2] = zz_pair(system);
  const Operator rho0 = projector(initial_plus_state(system));
  const double c = system.coupling(SpinSystem::kNv, SpinSystem::kQubit1);
  const double coefficient = 6.0 * c / std::pow(g.delta, 4) * mode.amplitude *
                             sine_difference_over_omega(mode.angular_frequency, t, mode.phase);
  return rho0 + kI * coefficient * commutator(a1 - a2, rho0);
}

Operator phase_averaged_state_second_order(double t, const SpinSystem& system,
                                           const StaticGeometry& g, const VibrationMode& mode) {
  validate(g, mode);
  const auto [a1, a2] = zz_pair(system);
  const Operator rho0 = projector(initial_plus_state(system));
  const double c = system.coupling(SpinSystem::kNv, SpinSystem::kQubit1);
  const double d2 = mode.amplitude * mode.amplitude;
  const double drift = 6.0 * c / std::pow(g.delta, 5) * d2 * t;
  const double decoherence = 18.0 * c * c / std::pow(g.delta, 8) * d2 *
                             one_minus_cos_over_omega_squared(mode.angular_frequency, t);
  const Operator diff = a1 - a2;
  return rho0 - kI * drift * commutator(a1 + a2, rho0) -
         decoherence * commutator(diff, commutator(diff, rho0));
}

Operator from_interaction_picture(const Operator& rho_i, const Operator& h_ref, double t) {
  const Operator u = unitary_propagator(h_ref, t);
  return u * rho_i * u.adjoint();
}

Operator to_interaction_picture(const Operator& rho, const Operator& h_ref, double t) {
  const Operator u = unitary_propagator(h_ref, t);
  return u.adjoint() * rho * u;
}

}  // namespace nvent
