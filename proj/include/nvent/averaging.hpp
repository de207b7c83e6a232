#pragma once

#include <cstdint>

#include "nvent/measurement.hpp"

namespace nvent {

enum class DistributionKind { TruncatedNormal, UniformPhase };

/// Law of a shared mode parameter. The truncated normal lives on [0, inf) and
/// is renormalised over that support; the uniform law covers [0, 2 pi).
struct ParameterDistribution {
  DistributionKind kind = DistributionKind::TruncatedNormal;
  double mean = 0.0;
  double std_dev = 0.0;

  static ParameterDistribution truncated_normal(double mean, double std_dev);
  static ParameterDistribution uniform_phase();

  double density(double x) const;
};

enum class EnsembleParameter { Frequency, Amplitude, Phase };
enum class AveragingBackend { Quadrature, MonteCarlo };

struct AveragingOptions {
  AveragingBackend backend = AveragingBackend::Quadrature;
  int nodes = 33;
  int samples = 4096;
  std::uint64_t seed = 20110425;
  /// Averages master-equation states instead of pure trajectories (not part of
  /// the reference protocol, which averages Schroedinger solutions).
  bool with_dephasing = false;
  IntegratorOptions integrator{};
  int threads = 1;
};

struct VibratingScenario {
  SpinSystem system = SpinSystem::standard();
  StaticGeometry geometry{};
  VibrationMode mode{};
  QubitCoupling qubit_coupling = QubitCoupling::Full;
};

struct WeightedNodes {
  std::vector<double> values;
  std::vector<double> weights;  // sum to 1
  double mass = 1.0;            // law probability of the covered interval
};

/// Gauss-Legendre nodes on mean +/- 6 sigma clipped to the support, widened
/// while the captured mass is below 0.999.
WeightedNodes quadrature_nodes(const ParameterDistribution& dist, int nodes);

/// Seeded draws in sample-index order, equal weights.
WeightedNodes monte_carlo_nodes(const ParameterDistribution& dist, int samples,
                                std::uint64_t seed);

WeightedNodes ensemble_nodes(const ParameterDistribution& dist, const AveragingOptions& options);

VibrationMode with_parameter(VibrationMode mode, EnsembleParameter parameter, double value);

struct AveragedState {
  Operator rho_bar;
  /// Monte Carlo: largest entrywise standard error. Quadrature: largest
  /// entrywise change against a rule with about half the nodes.
  double error_bound = 0.0;
  int count = 0;
};

/// Mixture of trajectory states over the parameter law at time t.
AveragedState average_state(EnsembleParameter parameter, const ParameterDistribution& dist,
                            const VibratingScenario& scenario, double t,
                            const AveragingOptions& options = {});

/// The same on a time grid, integrating each trajectory once.
std::vector<Operator> average_states(EnsembleParameter parameter,
                                     const ParameterDistribution& dist,
                                     const VibratingScenario& scenario,
                                     std::span<const double> t_grid,
                                     const AveragingOptions& options = {});

/// average_state -> measure -> mean EF -> maximum over [0, 2 pi/|alpha|].
MaxMeanEf max_mean_ef_averaged(EnsembleParameter parameter, const ParameterDistribution& dist,
                               const VibratingScenario& scenario,
                               const AveragingOptions& options = {},
                               const MaximizeOptions& maximize = {});

/// Mixture of the first-order perturbative states, returned in the lab
/// (rotating) frame of the static Hamiltonian.
Operator average_first_order_state(EnsembleParameter parameter, const ParameterDistribution& dist,
                                   const VibratingScenario& scenario, double t,
                                   const AveragingOptions& options = {});

/// Phase-averaged second-order state in the rotating frame.
Operator phase_averaged_second_order_state(const VibratingScenario& scenario, double t);

/// Maximal mean EF of the perturbative approximations. The approximate states
/// are projected onto valid density matrices before the entanglement step.
MaxMeanEf max_mean_ef_first_order_averaged(EnsembleParameter parameter,
                                           const ParameterDistribution& dist,
                                           const VibratingScenario& scenario,
                                           const AveragingOptions& options = {},
                                           const MaximizeOptions& maximize = {});
MaxMeanEf max_mean_ef_phase_averaged_second_order(const VibratingScenario& scenario,
                                                  const MaximizeOptions& maximize = {});

}  // namespace nvent
