#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <variant>

#include "nvent/quantum_core.hpp"

namespace nvent {

/// Qubits at z = 0 and z = 2*delta, sensor at the midpoint, all on the z axis.
struct StaticGeometry {
  double delta = 10e-9;  // m
};

/// Single axial vibration mode d_NV,1/2(t) = delta +/- amplitude * cos(omega t + phase).
struct VibrationMode {
  double amplitude = 0.0;          // m
  double angular_frequency = 0.0;  // rad/s
  double phase = 0.0;              // rad

  /// delta(t) = amplitude * cos(omega t + phase)
  double displacement(double t) const {
    return amplitude * std::cos(angular_frequency * t + phase);
  }
};

/// Straight flight from z0 to D - z0 at constant velocity.
struct FlightPath {
  double separation = 100e-9;  // D, m
  double start_offset = 5e-9;  // z0, m
  double velocity = 1.0;       // m/s

  double measurement_time() const { return (separation - 2.0 * start_offset) / velocity; }
};

void validate(const StaticGeometry& g);
void validate(const StaticGeometry& g, const VibrationMode& mode);
void validate(const FlightPath& path);

/// Whether the qubit-qubit dipole term is included.
enum class QubitCoupling { Off, Full };

enum class ScheduleKind { Static, Vibrating, Flying };

/// NV-qubit distances as a function of time.
class Schedule {
 public:
  static Schedule fixed(const StaticGeometry& g);
  static Schedule vibrating(const StaticGeometry& g, const VibrationMode& mode);
  static Schedule flying(const FlightPath& path);

  ScheduleKind kind() const { return kind_; }

  /// (d_NV,1(t), d_NV,2(t)) in meters.
  std::pair<double, double> distances(double t) const;

  /// (int_0^t d_NV,1^-3, int_0^t d_NV,2^-3). Closed form for static and flying
  /// schedules, composite Gauss-Legendre for the vibrating one.
  std::pair<double, double> integrated_inverse_cubes(double t) const;

  /// Window of valid times, [0, end].
  double end_time() const;

 private:
  ScheduleKind kind_ = ScheduleKind::Static;
  StaticGeometry geometry_{};
  VibrationMode mode_{};
  FlightPath path_{};
};

/// H(t) = constant + sum_k coefficient_k(t) * op_k.
struct HamiltonianTerm {
  Operator op;
  std::function<double(double)> coefficient;
  /// int_0^t coefficient, when known; enables the exact commuting propagator.
  std::function<double(double)> integral;
};

class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian() = default;
  explicit TimeDependentHamiltonian(Operator constant) : constant_(std::move(constant)) {}

  void add_term(HamiltonianTerm term) { terms_.push_back(std::move(term)); }

  int dim() const { return static_cast<int>(constant_.rows()); }
  const Operator& constant() const { return constant_; }
  const std::vector<HamiltonianTerm>& terms() const { return terms_; }

  Operator at(double t) const;

  /// True if every piece commutes with every other and all integrals are known,
  /// so that U(t) = exp(-i int_0^t H).
  bool commuting_with_integrals(double tol = 1e-12) const;

  /// int_0^t H(t') dt'. Requires all integrals.
  Operator integrated(double t) const;

  /// Last valid time of the underlying schedule.
  double end_time = kInf;

 private:
  Operator constant_;
  std::vector<HamiltonianTerm> terms_;
};

/// C d^-3 (3 (x.S_i)(x.S_j) - S_i.S_j) embedded in the full space.
Operator dipole_hamiltonian(const SpinSystem& system, int site_i, int site_j, double distance,
                            const Eigen::Vector3d& unit_vector);

/// Lab-frame H_0 + H_DIP with Zeeman and zero-field terms. NV must be spin-1.
Operator static_full_hamiltonian(const SpinSystem& system, const StaticGeometry& g);

/// Free part H_0 of the lab-frame Hamiltonian (diagonal).
Operator free_hamiltonian(const SpinSystem& system);

/// 2C d^-3 S_z,i S_z,j embedded.
Operator secular_zz(const SpinSystem& system, int site_i, int site_j, double distance);

/// Rotating-frame static Hamiltonian: zz NV-qubit couplings plus the qubit-qubit dipole.
Operator static_rwa_hamiltonian(const SpinSystem& system, const StaticGeometry& g,
                                QubitCoupling qq = QubitCoupling::Full);

Operator vibrational_hamiltonian(double t, const SpinSystem& system, const StaticGeometry& g,
                                 const VibrationMode& mode,
                                 QubitCoupling qq = QubitCoupling::Full);

TimeDependentHamiltonian vibrating_hamiltonian(const SpinSystem& system, const StaticGeometry& g,
                                               const VibrationMode& mode,
                                               QubitCoupling qq = QubitCoupling::Full);

TimeDependentHamiltonian static_hamiltonian(const SpinSystem& system, const StaticGeometry& g,
                                            QubitCoupling qq = QubitCoupling::Full);

/// Perturbation in powers of delta(t) to first or second order, without the
/// qubit-qubit term.
Operator interaction_picture_series(double t, const SpinSystem& system, const StaticGeometry& g,
                                    const VibrationMode& mode, int order);

/// Scalar coefficients (c_1(t), c_2(t)) of S_z,NV S_z,j in the series above.
std::pair<double, double> interaction_series_coefficients(double t, const SpinSystem& system,
                                                          const StaticGeometry& g,
                                                          const VibrationMode& mode, int order);

Operator flying_hamiltonian(double t, const SpinSystem& system, const FlightPath& path);

TimeDependentHamiltonian flying_schedule_hamiltonian(const SpinSystem& system,
                                                     const FlightPath& path);

/// NV-qubit coupling constant alpha = 2 C delta^-3 (rad/s).
double alpha(const SpinSystem& system, const StaticGeometry& g);

/// S_z,NV S_z,j embedded, j = 0 or 2.
Operator nv_qubit_zz(const SpinSystem& system, int qubit_site);

}  // namespace nvent
