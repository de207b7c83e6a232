#include "nvent/averaging.hpp"

#include <algorithm>
#include <numbers>
#include <random>

#include "nvent/parallel.hpp"
#include "nvent/quadrature.hpp"

namespace nvent {

ParameterDistribution ParameterDistribution::truncated_normal(double mean, double std_dev) {
  if (!(std_dev > 0) || !std::isfinite(std_dev) || !std::isfinite(mean)) {
    throw InvalidArgument("truncated normal: std_dev must be positive and finite");
  }
  return {DistributionKind::TruncatedNormal, mean, std_dev};
}

ParameterDistribution ParameterDistribution::uniform_phase() {
  return {DistributionKind::UniformPhase, std::numbers::pi, std::numbers::pi / std::sqrt(3.0)};
}

double ParameterDistribution::density(double x) const {
  if (kind == DistributionKind::UniformPhase) {
    return (x >= 0 && x < 2.0 * std::numbers::pi) ? 0.5 / std::numbers::pi : 0.0;
  }
  if (x < 0) return 0.0;
  const double z = (x - mean) / std_dev;
  const double support_mass = 0.5 * std::erfc(-mean / (std_dev * std::numbers::sqrt2));
  return std::exp(-0.5 * z * z) / (std_dev * std::sqrt(2.0 * std::numbers::pi) * support_mass);
}

WeightedNodes quadrature_nodes(const ParameterDistribution& dist, int nodes) {
  if (nodes < 1) throw InvalidArgument("quadrature_nodes: need at least one node");
  WeightedNodes out;
  if (dist.kind == DistributionKind::UniformPhase) {
    const auto rule = gauss_legendre(nodes, 0.0, 2.0 * std::numbers::pi);
    out.values = rule.nodes;
    for (double w : rule.weights) out.weights.push_back(w / (2.0 * std::numbers::pi));
    out.mass = 1.0;
    return out;
  }
  const double root2 = std::numbers::sqrt2 * dist.std_dev;
  const double support = 0.5 * std::erfc(-dist.mean / root2);
  for (double width : {6.0, 8.0, 10.0}) {
    const double lo = std::max(0.0, dist.mean - width * dist.std_dev);
    const double hi = dist.mean + width * dist.std_dev;
    if (!(hi > lo)) break;
    // Probability of [lo, hi] under the truncated law, independent of the rule.
    const double mass =
        0.5 * (std::erf((hi - dist.mean) / root2) - std::erf((lo - dist.mean) / root2)) / support;
    if (mass < 0.999) continue;
    const auto rule = gauss_legendre(nodes, lo, hi);
    WeightedNodes candidate;
    candidate.values = rule.nodes;
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double w = rule.weights[k] * dist.density(rule.nodes[k]);
      candidate.weights.push_back(w);
      sum += w;
    }
    if (!(sum > 0)) throw NumericError("quadrature_nodes: rule misses the density");
    for (double& w : candidate.weights) w /= sum;
    candidate.mass = mass;
    return candidate;
  }
  throw NumericError("quadrature_nodes: captured probability mass stays below 0.999");
}

WeightedNodes monte_carlo_nodes(const ParameterDistribution& dist, int samples,
                                std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("monte_carlo_nodes: need at least one sample");
  std::mt19937_64 rng(seed);
  WeightedNodes out;
  out.values.reserve(static_cast<std::size_t>(samples));
  if (dist.kind == DistributionKind::UniformPhase) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < samples; ++i) out.values.push_back(u(rng));
  } else {
    std::normal_distribution<double> normal(dist.mean, dist.std_dev);
    while (static_cast<int>(out.values.size()) < samples) {
      const double x = normal(rng);
      if (x >= 0) out.values.push_back(x);
    }
  }
  out.weights.assign(out.values.size(), 1.0 / samples);
  return out;
}

WeightedNodes ensemble_nodes(const ParameterDistribution& dist, const AveragingOptions& options) {
  return options.backend == AveragingBackend::Quadrature
             ? quadrature_nodes(dist, options.nodes)
             : monte_carlo_nodes(dist, options.samples, options.seed);
}

VibrationMode with_parameter(VibrationMode mode, EnsembleParameter parameter, double value) {
  switch (parameter) {
    case EnsembleParameter::Frequency:
      mode.angular_frequency = value;
      break;
    case EnsembleParameter::Amplitude:
      mode.amplitude = value;
      break;
    case EnsembleParameter::Phase:
      mode.phase = value;
      break;
  }
  return mode;
}

namespace {

/// Evolves one ensemble member; pure trajectories unless dephasing is requested.
class NodeEvolver {
 public:
  NodeEvolver(EnsembleParameter parameter, const VibratingScenario& scenario,
              const AveragingOptions& options)
      : parameter_(parameter), scenario_(scenario), options_(options),
        dephasing_(options.with_dephasing ? DephasingSpec::from_system(scenario.system)
                                          : DephasingSpec{}),
        psi0_(initial_plus_state(scenario.system)) {}

  TimeDependentHamiltonian hamiltonian(double value) const {
    return vibrating_hamiltonian(scenario_.system, scenario_.geometry,
                                 with_parameter(scenario_.mode, parameter_, value),
                                 scenario_.qubit_coupling);
  }

  std::vector<Operator> run(double value, std::span<const double> grid) const {
    return advance(value, projector(psi0_), 0.0, grid);
  }

  std::vector<Operator> advance(double value, const Operator& from, double t0,
                                std::span<const double> grid) const {
    const auto h = hamiltonian(value);
    if (options_.with_dephasing) {
      return evolve_master_equation(from, h, dephasing_, grid, options_.integrator, t0).states;
    }
    // Pure path: recover the ket from the rank-one projector.
    Eigen::SelfAdjointEigenSolver<Operator> es(from);
    Ket psi = es.eigenvectors().col(es.eigenvalues().size() - 1);
    auto kets = evolve_coherent(psi, h, grid, options_.integrator, Propagation::Auto, t0).states;
    std::vector<Operator> out;
    out.reserve(kets.size());
    for (const auto& k : kets) out.push_back(projector(k));
    return out;
  }

 private:
  EnsembleParameter parameter_;
  VibratingScenario scenario_;
  AveragingOptions options_;
  DephasingSpec dephasing_;
  Ket psi0_;
};

/// Weighted mixture on a grid; chunks keep memory bounded for large sample
/// counts and the reduction runs in node order.
std::vector<Operator> mix_on_grid(const NodeEvolver& evolver, const WeightedNodes& nodes,
                                  std::span<const double> grid, int threads,
                                  const std::vector<Operator>* starts = nullptr, double t0 = 0.0,
                                  std::vector<Operator>* second_moment = nullptr) {
  const int dim = static_cast<int>(evolver.hamiltonian(nodes.values.front()).dim());
  std::vector<Operator> acc(grid.size(), Operator::Zero(dim, dim));
  if (second_moment) second_moment->assign(grid.size(), Operator::Zero(dim, dim));
  const std::size_t n = nodes.values.size();
  const std::size_t chunk = 64;
  std::vector<std::vector<Operator>> results(std::min(chunk, n));
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t count = std::min(chunk, n - begin);
    parallel_for(count, threads, [&](std::size_t i) {
      const std::size_t node = begin + i;
      results[i] = starts ? evolver.advance(nodes.values[node], (*starts)[node], t0, grid)
                          : evolver.run(nodes.values[node], grid);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const double w = nodes.weights[begin + i];
      for (std::size_t g = 0; g < grid.size(); ++g) {
        acc[g] += w * results[i][g];
        if (second_moment) {
          (*second_moment)[g] += w * results[i][g].cwiseAbs2().cast<Complex>();
        }
      }
    }
  }
  return acc;
}

}  // namespace

std::vector<Operator> average_states(EnsembleParameter parameter,
                                     const ParameterDistribution& dist,
                                     const VibratingScenario& scenario,
                                     std::span<const double> t_grid,
                                     const AveragingOptions& options) {
  const NodeEvolver evolver(parameter, scenario, options);
  const WeightedNodes nodes = ensemble_nodes(dist, options);
  return mix_on_grid(evolver, nodes, t_grid, options.threads);
}

AveragedState average_state(EnsembleParameter parameter, const ParameterDistribution& dist,
                            const VibratingScenario& scenario, double t,
                            const AveragingOptions& options) {
  const NodeEvolver evolver(parameter, scenario, options);
  const WeightedNodes nodes = ensemble_nodes(dist, options);
  const double ts[] = {t};
  AveragedState out;
  out.count = static_cast<int>(nodes.values.size());
  if (options.backend == AveragingBackend::MonteCarlo) {
    std::vector<Operator> second;
    out.rho_bar = mix_on_grid(evolver, nodes, ts, options.threads, nullptr, 0.0, &second).front();
    const double n = static_cast<double>(nodes.values.size());
    const Eigen::MatrixXd var =
        (second.front().real() - out.rho_bar.cwiseAbs2()).cwiseMax(0.0);
    out.error_bound = n > 1 ? std::sqrt(var.maxCoeff() / (n - 1)) : 0.0;
  } else {
    out.rho_bar = mix_on_grid(evolver, nodes, ts, options.threads).front();
    if (options.nodes > 2) {
      const WeightedNodes coarse = quadrature_nodes(dist, (options.nodes + 1) / 2);
      const Operator rough = mix_on_grid(evolver, coarse, ts, options.threads).front();
      out.error_bound = (rough - out.rho_bar).cwiseAbs().maxCoeff();
    }
  }
  return out;
}

MaxMeanEf max_mean_ef_averaged(EnsembleParameter parameter, const ParameterDistribution& dist,
                               const VibratingScenario& scenario, const AveragingOptions& options,
                               const MaximizeOptions& maximize) {
  const NodeEvolver evolver(parameter, scenario, options);
  const WeightedNodes nodes = ensemble_nodes(dist, options);
  const SpinSystem& system = scenario.system;

  std::vector<double> grid;
  auto on_grid = [&](std::span<const double> g) {
    grid.assign(g.begin(), g.end());
    const auto states = mix_on_grid(evolver, nodes, g, options.threads);
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(mean_ef_of_state(s, system));
    return out;
  };

  // Node states at one grid point below the refinement bracket.
  double checkpoint_time = -1.0;
  std::vector<Operator> checkpoint;
  auto at = [&](double t) {
    if (checkpoint_time < 0 || t < checkpoint_time) {
      auto it = std::upper_bound(grid.begin(), grid.end(), t);
      checkpoint_time = it == grid.begin() ? 0.0 : *(it - 1);
      const double ct[] = {checkpoint_time};
      checkpoint.assign(nodes.values.size(), Operator());
      parallel_for(nodes.values.size(), options.threads, [&](std::size_t i) {
        checkpoint[i] = evolver.run(nodes.values[i], ct).front();
      });
    }
    const double ts[] = {t};
    const Operator rho =
        mix_on_grid(evolver, nodes, ts, options.threads, &checkpoint, checkpoint_time).front();
    return mean_ef_of_state(rho, system);
  };
  return maximize_on_window(mean_ef_window(system, scenario.geometry), on_grid, at, maximize);
}

Operator average_first_order_state(EnsembleParameter parameter, const ParameterDistribution& dist,
                                   const VibratingScenario& scenario, double t,
                                   const AveragingOptions& options) {
  const WeightedNodes nodes = ensemble_nodes(dist, options);
  const int dim = scenario.system.dim();
  Operator rho_i = Operator::Zero(dim, dim);
  for (std::size_t k = 0; k < nodes.values.size(); ++k) {
    rho_i += nodes.weights[k] *
             perturbative_state_first_order(t, scenario.system, scenario.geometry,
                                            with_parameter(scenario.mode, parameter,
                                                           nodes.values[k]));
  }
  const Operator h_ref =
      static_rwa_hamiltonian(scenario.system, scenario.geometry, scenario.qubit_coupling);
  return from_interaction_picture(rho_i, h_ref, t);
}

Operator phase_averaged_second_order_state(const VibratingScenario& scenario, double t) {
  const Operator rho_i =
      phase_averaged_state_second_order(t, scenario.system, scenario.geometry, scenario.mode);
  const Operator h_ref =
      static_rwa_hamiltonian(scenario.system, scenario.geometry, scenario.qubit_coupling);
  return from_interaction_picture(rho_i, h_ref, t);
}

namespace {

double approximate_mean_ef(const Operator& rho, const SpinSystem& system) {
  return mean_ef_of_state(project_to_density_matrix(rho), system);
}

MaxMeanEf maximize_direct(const std::function<double(double)>& f, double window,
                          const MaximizeOptions& maximize) {
  auto on_grid = [&](std::span<const double> g) {
    std::vector<double> out;
    out.reserve(g.size());
    for (double t : g) out.push_back(f(t));
    return out;
  };
  return maximize_on_window(window, on_grid, f, maximize);
}

}  // namespace

MaxMeanEf max_mean_ef_first_order_averaged(EnsembleParameter parameter,
                                           const ParameterDistribution& dist,
                                           const VibratingScenario& scenario,
                                           const AveragingOptions& options,
                                           const MaximizeOptions& maximize) {
  auto f = [&](double t) {
    return approximate_mean_ef(average_first_order_state(parameter, dist, scenario, t, options),
                               scenario.system);
  };
  return maximize_direct(f, mean_ef_window(scenario.system, scenario.geometry), maximize);
}

MaxMeanEf max_mean_ef_phase_averaged_second_order(const VibratingScenario& scenario,
                                                  const MaximizeOptions& maximize) {
  auto f = [&](double t) {
    return approximate_mean_ef(phase_averaged_second_order_state(scenario, t), scenario.system);
  };
  return maximize_direct(f, mean_ef_window(scenario.system, scenario.geometry), maximize);
}

}  // namespace nvent
