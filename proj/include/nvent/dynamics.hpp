#pragma once

#include <vector>

#include "nvent/hamiltonians.hpp"
#include "nvent/integrator.hpp"

namespace nvent {

/// Pure dephasing with jump operators S_z,j at rates 2/T2_j.
struct DephasingSpec {
  struct Channel {
    Operator jump;
    double rate = 0.0;
  };
  std::vector<Channel> channels;

  /// Channels for every finite T2 of the system.
  static DephasingSpec from_system(const SpinSystem& system);
  bool empty() const;
};

struct EvolutionDiagnostics {
  IntegratorStats integrator;
  double max_trace_error = 0.0;
  bool exact = false;  // closed-form propagator used
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<Operator> states;
  EvolutionDiagnostics diagnostics;
};

struct CoherentResult {
  std::vector<double> times;
  std::vector<Ket> states;
  EvolutionDiagnostics diagnostics;
};

enum class Propagation {
  Auto,   // exact propagator when all pieces commute and integrals are known, else ODE
  Ode,
  Exact,
};

/// rho' = -i[H(t), rho] + sum_j gamma_j (L_j rho L_j^+ - 1/2 {L_j^+ L_j, rho}).
/// Integration starts at t_start with rho0; t_grid ascending and >= t_start.
EvolutionResult evolve_master_equation(const Operator& rho0, const TimeDependentHamiltonian& h,
                                       const DephasingSpec& dephasing,
                                       std::span<const double> t_grid,
                                       const IntegratorOptions& options = {},
                                       double t_start = 0.0);

/// Schroedinger evolution. Propagation::Auto takes the exact path for commuting
/// schedules (static, flying, vibrating without qubit-qubit coupling). ODE
/// outputs are renormalised; diagnostics.max_trace_error keeps the raw drift.
CoherentResult evolve_coherent(const Ket& psi0, const TimeDependentHamiltonian& h,
                               std::span<const double> t_grid,
                               const IntegratorOptions& options = {},
                               Propagation method = Propagation::Auto, double t_start = 0.0);

/// Dyson series to second order for the vibrating perturbation of a commuting
/// zz reference. Order 1 keeps the first Dyson term with the first-order
/// series; order 2 keeps both Dyson terms with the second-order series. Time
/// integrals are done by composite Gauss-Legendre quadrature.
Operator perturbative_propagate(const Operator& rho0, const SpinSystem& system,
                                const StaticGeometry& g, const VibrationMode& mode, double t,
                                int order);

/// (sin(w t + phi) - sin(phi)) / w with its w -> 0 limit.
double sine_difference_over_omega(double omega, double t, double phi);

/// (1 - cos(w t)) / w^2 with its w -> 0 limit.
double one_minus_cos_over_omega_squared(double omega, double t);

/// First-order-in-amplitude interaction-picture state from |+,+,+>.
Operator perturbative_state_first_order(double t, const SpinSystem& system,
                                        const StaticGeometry& g, const VibrationMode& mode);

/// Second-order state averaged over a uniform vibration phase; mode.phase is ignored.
Operator phase_averaged_state_second_order(double t, const SpinSystem& system,
                                           const StaticGeometry& g, const VibrationMode& mode);

/// rho = U rho_I U^+ with U = exp(-i H_ref t).
Operator from_interaction_picture(const Operator& rho_i, const Operator& h_ref, double t);
Operator to_interaction_picture(const Operator& rho, const Operator& h_ref, double t);

}  // namespace nvent
