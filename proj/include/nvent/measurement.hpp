#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "nvent/dynamics.hpp"

namespace nvent {

enum class Outcome { Plus, Minus };

struct MeasurementOutcome {
  Outcome label = Outcome::Plus;
  double probability = 0.0;
  /// Two-qubit state after the outcome; empty when the branch has probability < 1e-12.
  std::optional<Operator> qubit_state;
};

struct MeasurementPair {
  MeasurementOutcome plus;
  MeasurementOutcome minus;
};

inline constexpr double kUndefinedBranch = 1e-12;

/// Projects the NV site on (|0> +/- |1>)/sqrt(2) and traces it out.
MeasurementPair measure_nv_pm(const Operator& rho, const SpinSystem& system);
MeasurementPair measure_nv_pm(const Ket& psi, const SpinSystem& system);

/// Unnormalised two-qubit ket <+/-|_NV psi.
Ket project_nv(const Ket& psi, const SpinSystem& system, Outcome outcome);

struct OutcomeProbabilities {
  double plus = 0.0;
  double minus = 0.0;
};

/// p_+/- = (1 +/- exp(-t/T2,NV) cos^2(alpha t / 2)) / 2.
OutcomeProbabilities static_outcome_probability(double t, double alpha, double t2_nv);

struct QubitKets {
  Ket plus;
  Ket minus;
};

/// Post-measurement qubit kets of the dephasing-free static protocol, in the
/// basis (up-up, up-down, down-up, down-down). The plus branch is written with
/// its denominator cleared, so it is regular at 1 + exp(i alpha t) = 0.
QubitKets static_post_measurement_states(double t, double alpha);

/// Local two-qubit unitary exp(i theta (S_z,1 + S_z,2) / 2). Maps states
/// simulated with the symmetric NV convention S_z = +/-1/2 onto the printed
/// closed forms, where theta is the NV phase accumulated for |up,up>.
Operator level_offset_frame(double theta);

/// sigma_y (x) sigma_y in the two-qubit basis.
Operator spin_flip();

/// Wootters concurrence, from the singular values of W^T (sy x sy) W with rho = W W^+.
double concurrence(const Operator& rho);
double concurrence(const Operator& rho, const DensityMatrixTolerances& tol);

/// -x log2 x - (1-x) log2 (1-x), continuous at 0 and 1.
double binary_entropy(double x);

double ef_from_concurrence(double c);
double entanglement_of_formation(const Operator& rho);

/// EF of a post-measurement state, nan for an undefined branch. The
/// positivity tolerance is divided by the branch probability.
double branch_ef(const MeasurementOutcome& outcome);

/// Probability-weighted EF; an undefined branch contributes nothing.
double mean_ef(const MeasurementPair& outcomes);

/// mean EF after measuring a full-system state.
double mean_ef_of_state(const Operator& rho, const SpinSystem& system);
double mean_ef_of_state(const Ket& psi, const SpinSystem& system);

struct FlyingDerived {
  double beta = 0.0;
  double xi = 0.0;
  double p_minus = 0.0;
  double p_plus = 0.0;
};

/// beta = C ((D - z0)^-2 - z0^-2) / v.
double flying_beta(const FlightPath& path, const SpinSystem& system);
FlyingDerived flying_derived(double beta);

/// Closed-form outcomes of a full pass.
MeasurementPair flying_outcome(double beta);

/// H(1/2 + sqrt(1 - xi^2)/2) with xi = (1 - cos beta)/(3 + cos beta).
double ef_plus_from_beta(double beta);

/// Fastest velocity with |beta| = pi.
double optimal_velocity(double separation, double start_offset, const SpinSystem& system);

/// Mean EF of the closed-form static / flying protocol without qubit-qubit
/// coupling and dephasing as a function of the accumulated phase theta.
double ideal_mean_ef(double theta);

/// Unwrapped phase of <0|_NV / <1|_NV amplitudes of the |up,up> component
/// along a trajectory; equals int (k1 + k2)/2 dt for a zz Hamiltonian.
std::vector<double> accumulated_nv_phase(const std::vector<Ket>& trajectory,
                                         const SpinSystem& system);

/// Least-squares slope kappa of the plus-branch cross-term phase against
/// alpha t, from exact static evolution with qubit-qubit coupling.
double fit_cross_phase_coefficient(const SpinSystem& system, const StaticGeometry& g,
                                   std::span<const double> times);

struct MaximizeOptions {
  int grid_points = 401;
  double resolution = 1e-4;  // fraction of the window
};

struct MaxMeanEf {
  double value = 0.0;
  double argmax = 0.0;
};

/// Grid search on [0, window] followed by golden-section refinement in the
/// bracket around the best grid point. Ties go to the smaller time.
MaxMeanEf maximize_on_window(double window,
                             const std::function<std::vector<double>(std::span<const double>)>& on_grid,
                             const std::function<double(double)>& at,
                             const MaximizeOptions& options = {});

std::vector<double> uniform_grid(double from, double to, int count);

/// Evolution window [0, 2 pi / |alpha|].
double mean_ef_window(const SpinSystem& system, const StaticGeometry& g);

/// Maximal achievable mean EF for the static sensor (master equation when any
/// T2 is finite, exact propagation otherwise).
MaxMeanEf max_mean_ef_static(const SpinSystem& system, const StaticGeometry& g,
                             QubitCoupling qq = QubitCoupling::Full,
                             const MaximizeOptions& options = {},
                             const IntegratorOptions& integrator = {});

/// Maximal achievable mean EF for a single vibration mode (pure states).
MaxMeanEf max_mean_ef_vibrating(const SpinSystem& system, const StaticGeometry& g,
                                const VibrationMode& mode, QubitCoupling qq = QubitCoupling::Full,
                                const MaximizeOptions& options = {},
                                const IntegratorOptions& integrator = {});

}  // namespace nvent
