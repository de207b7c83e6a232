#include "nvent/hamiltonians.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "nvent/quadrature.hpp"

namespace nvent {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) {
    throw InvalidArgument("gauss_legendre: need at least one node");
  }
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = 2.0 * v0 * v0;
  }
  // Symmetrise to remove eigen-solver round-off.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[k] + rule.weights[n - 1 - k]);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  std::lock_guard lock(mutex);
  cache.emplace(n, rule);
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    rule.nodes[k] = mid + half * rule.nodes[k];
    rule.weights[k] *= half;
  }
  return rule;
}

void validate(const StaticGeometry& g) {
  if (!(g.delta > 0) || !std::isfinite(g.delta)) {
    throw InvalidArgument("geometry: half-separation must be positive");
  }
}

void validate(const StaticGeometry& g, const VibrationMode& mode) {
  validate(g);
  if (!(mode.amplitude >= 0) || !(mode.amplitude < g.delta)) {
    throw InvalidArgument("vibration: amplitude must satisfy 0 <= amplitude < half-separation");
  }
  if (!(mode.angular_frequency >= 0) || !std::isfinite(mode.angular_frequency)) {
    throw InvalidArgument("vibration: angular frequency must be non-negative");
  }
  if (!std::isfinite(mode.phase)) {
    throw InvalidArgument("vibration: phase must be finite");
  }
}

void validate(const FlightPath& path) {
  if (!(path.start_offset > 0) || !(path.start_offset < 0.5 * path.separation)) {
    throw InvalidArgument("flight: need 0 < z0 < D/2");
  }
  if (!(path.velocity > 0) || !std::isfinite(path.velocity)) {
    throw InvalidArgument("flight: velocity must be positive");
  }
}

Schedule Schedule::fixed(const StaticGeometry& g) {
  validate(g);
  Schedule s;
  s.kind_ = ScheduleKind::Static;
  s.geometry_ = g;
  return s;
}

Schedule Schedule::vibrating(const StaticGeometry& g, const VibrationMode& mode) {
  validate(g, mode);
  Schedule s;
  s.kind_ = ScheduleKind::Vibrating;
  s.geometry_ = g;
  s.mode_ = mode;
  return s;
}

Schedule Schedule::flying(const FlightPath& path) {
  validate(path);
  Schedule s;
  s.kind_ = ScheduleKind::Flying;
  s.path_ = path;
  return s;
}

double Schedule::end_time() const {
  return kind_ == ScheduleKind::Flying ? path_.measurement_time() : kInf;
}

std::pair<double, double> Schedule::distances(double t) const {
  switch (kind_) {
    case ScheduleKind::Static:
      return {geometry_.delta, geometry_.delta};
    case ScheduleKind::Vibrating: {
      const double x = mode_.displacement(t);
      return {geometry_.delta + x, geometry_.delta - x};
    }
    case ScheduleKind::Flying: {
      const double d1 = path_.velocity * t + path_.start_offset;
      return {d1, path_.separation - d1};
    }
  }
  return {};
}

std::pair<double, double> Schedule::integrated_inverse_cubes(double t) const {
  switch (kind_) {
    case ScheduleKind::Static: {
      const double v = t / std::pow(geometry_.delta, 3);
      return {v, v};
    }
    case ScheduleKind::Vibrating: {
      if (t == 0.0) return {0.0, 0.0};
      const int panels =
          std::max(4, static_cast<int>(std::ceil(mode_.angular_frequency * std::abs(t) / 0.5)));
      const double i1 = integrate([&](double s) { return std::pow(distances(s).first, -3); }, 0.0,
                                  t, panels, 16);
      const double i2 = integrate([&](double s) { return std::pow(distances(s).second, -3); },
                                  0.0, t, panels, 16);
      return {i1, i2};
    }
    case ScheduleKind::Flying: {
      const double v = path_.velocity;
      const double z0 = path_.start_offset;
      const double far = path_.separation - z0;
      const double d1 = v * t + z0;
      const double d2 = far - v * t;
      const double i1 = (1.0 / (z0 * z0) - 1.0 / (d1 * d1)) / (2.0 * v);
      const double i2 = (1.0 / (d2 * d2) - 1.0 / (far * far)) / (2.0 * v);
      return {i1, i2};
    }
  }
  return {};
}

Operator TimeDependentHamiltonian::at(double t) const {
  Operator h = constant_;
  for (const auto& term : terms_) {
    h += term.coefficient(t) * term.op;
  }
  return h;
}

bool TimeDependentHamiltonian::commuting_with_integrals(double tol) const {
  std::vector<const Operator*> pieces;
  if (constant_.norm() > 0) pieces.push_back(&constant_);
  for (const auto& term : terms_) {
    if (!term.integral) return false;
    pieces.push_back(&term.op);
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const double scale = pieces[i]->norm() * pieces[j]->norm();
      if (commutator(*pieces[i], *pieces[j]).norm() > tol * std::max(scale, 1e-300)) {
        return false;
      }
    }
  }
  return true;
}

Operator TimeDependentHamiltonian::integrated(double t) const {
  Operator h = constant_ * t;
  for (const auto& term : terms_) {
    if (!term.integral) {
      throw InvalidArgument("TimeDependentHamiltonian: term has no closed-form integral");
    }
    h += term.integral(t) * term.op;
  }
  return h;
}

Operator dipole_hamiltonian(const SpinSystem& system, int site_i, int site_j, double distance,
                            const Eigen::Vector3d& unit_vector) {
  if (!(distance > 0)) {
    throw InvalidArgument("dipole_hamiltonian: distance must be positive");
  }
  if (std::abs(unit_vector.norm() - 1.0) > 1e-12) {
    throw InvalidArgument("dipole_hamiltonian: unit vector is not normalised");
  }
  const auto si = spin_operators<double>(system.site(site_i).two_s);
  const auto sj = spin_operators<double>(system.site(site_j).two_s);
  const std::array<const Operator*, 3> ci{&si.x, &si.y, &si.z};
  const std::array<const Operator*, 3> cj{&sj.x, &sj.y, &sj.z};
  const int n = system.dim();
  Operator h = Operator::Zero(n, n);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double w = 3.0 * unit_vector(a) * unit_vector(b) - (a == b ? 1.0 : 0.0);
      if (w == 0.0) continue;
      h += w * embed_pair(*ci[a], site_i, *cj[b], site_j, system);
    }
  }
  return system.coupling(site_i, site_j) / std::pow(distance, 3) * h;
}

Operator free_hamiltonian(const SpinSystem& system) {
  const auto& k = system.constants();
  const double b = system.b_field();
  const int n = system.dim();
  Operator h = Operator::Zero(n, n);
  for (int s = 0; s < 3; ++s) {
    h -= k.zeeman(system.site(s).magnetic_moment, b) * site_sz(system, s);
  }
  const Operator sz_nv = site_sz(system, SpinSystem::kNv);
  h += k.d_nv * sz_nv * sz_nv;
  return h;
}

Operator static_full_hamiltonian(const SpinSystem& system, const StaticGeometry& g) {
  if (system.nv_mode() != NvMode::SpinOne) {
    throw InvalidArgument("static_full_hamiltonian: requires the spin-1 NV mode");
  }
  validate(g);
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  return free_hamiltonian(system) +
         dipole_hamiltonian(system, SpinSystem::kNv, SpinSystem::kQubit1, g.delta, z) +
         dipole_hamiltonian(system, SpinSystem::kNv, SpinSystem::kQubit2, g.delta, z) +
         dipole_hamiltonian(system, SpinSystem::kQubit1, SpinSystem::kQubit2, 2.0 * g.delta, z);
}

Operator nv_qubit_zz(const SpinSystem& system, int qubit_site) {
  return site_sz(system, SpinSystem::kNv) * site_sz(system, qubit_site);
}

Operator secular_zz(const SpinSystem& system, int site_i, int site_j, double distance) {
  return 2.0 * system.coupling(site_i, site_j) / std::pow(distance, 3) *
         (site_sz(system, site_i) * site_sz(system, site_j));
}

namespace {

Operator qubit_qubit_term(const SpinSystem& system, const StaticGeometry& g, QubitCoupling qq) {
  if (qq == QubitCoupling::Off) return Operator::Zero(system.dim(), system.dim());
  return dipole_hamiltonian(system, SpinSystem::kQubit1, SpinSystem::kQubit2, 2.0 * g.delta,
                            Eigen::Vector3d::UnitZ());
}

}  // namespace

double alpha(const SpinSystem& system, const StaticGeometry& g) {
  return 2.0 * system.coupling(SpinSystem::kNv, SpinSystem::kQubit1) / std::pow(g.delta, 3);
}

Operator static_rwa_hamiltonian(const SpinSystem& system, const StaticGeometry& g,
                                QubitCoupling qq) {
  validate(g);
  return secular_zz(system, SpinSystem::kNv, SpinSystem::kQubit1, g.delta) +
         secular_zz(system, SpinSystem::kNv, SpinSystem::kQubit2, g.delta) +
         qubit_qubit_term(system, g, qq);
}

TimeDependentHamiltonian static_hamiltonian(const SpinSystem& system, const StaticGeometry& g,
                                            QubitCoupling qq) {
  return TimeDependentHamiltonian(static_rwa_hamiltonian(system, g, qq));
}

Operator vibrational_hamiltonian(double t, const SpinSystem& system, const StaticGeometry& g,
                                 const VibrationMode& mode, QubitCoupling qq) {
  validate(g, mode);
  const auto [d1, d2] = Schedule::vibrating(g, mode).distances(t);
  return secular_zz(system, SpinSystem::kNv, SpinSystem::kQubit1, d1) +
         secular_zz(system, SpinSystem::kNv, SpinSystem::kQubit2, d2) +
         qubit_qubit_term(system, g, qq);
}

TimeDependentHamiltonian vibrating_hamiltonian(const SpinSystem& system, const StaticGeometry& g,
                                               const VibrationMode& mode, QubitCoupling qq) {
  const Schedule schedule = Schedule::vibrating(g, mode);
  TimeDependentHamiltonian h(qubit_qubit_term(system, g, qq));
  const double c1 = 2.0 * system.coupling(SpinSystem::kNv, SpinSystem::kQubit1);
  const double c2 = 2.0 * system.coupling(SpinSystem::kNv, SpinSystem::kQubit2);
  h.add_term({nv_qubit_zz(system, SpinSystem::kQubit1),
              [schedule, c1](double t) { return c1 / std::pow(schedule.distances(t).first, 3); },
              [schedule, c1](double t) { return c1 * schedule.integrated_inverse_cubes(t).first; }});
  h.add_term({nv_qubit_zz(system, SpinSystem::kQubit2),
              [schedule, c2](double t) { return c2 / std::pow(schedule.distances(t).second, 3); },
              [schedule, c2](double t) {
                return c2 * schedule.integrated_inverse_cubes(t).second;
              }});
  return h;
}

std::pair<double, double> interaction_series_coefficients(double t, const SpinSystem& system,
                                                          const StaticGeometry& g,
                                                          const VibrationMode& mode, int order) {
  if (order != 1 && order != 2) {
    throw InvalidArgument("interaction_picture_series: order must be 1 or 2");
  }
  validate(g, mode);
  const double scale = 2.0 * system.coupling(SpinSystem::kNv, SpinSystem::kQubit1) /
                       std::pow(g.delta, 3);
  const double x = mode.displacement(t) / g.delta;
  double c1 = -3.0 * x;
  double c2 = 3.0 * x;
  if (order == 2) {
    c1 += 6.0 * x * x;
    c2 += 6.0 * x * x;
  }
  return {scale * c1, scale * c2};
}

Operator interaction_picture_series(double t, const SpinSystem& system, const StaticGeometry& g,
                                    const VibrationMode& mode, int order) {
  const auto [c1, c2] = interaction_series_coefficients(t, system, g, mode, order);
  return c1 * nv_qubit_zz(system, SpinSystem::kQubit1) +
         c2 * nv_qubit_zz(system, SpinSystem::kQubit2);
}

Operator flying_hamiltonian(double t, const SpinSystem& system, const FlightPath& path) {
  validate(path);
  const double tm = path.measurement_time();
  if (t < 0.0 || t > tm * (1.0 + 1e-12)) {
    throw InvalidArgument("flying_hamiltonian: time outside [0, t_M]");
  }
  const auto [d1, d2] = Schedule::flying(path).distances(std::min(t, tm));
  return secular_zz(system, SpinSystem::kNv, SpinSystem::kQubit1, d1) +
         secular_zz(system, SpinSystem::kNv, SpinSystem::kQubit2, d2);
}

TimeDependentHamiltonian flying_schedule_hamiltonian(const SpinSystem& system,
                                                     const FlightPath& path) {
  const Schedule schedule = Schedule::flying(path);
  TimeDependentHamiltonian h(Operator::Zero(system.dim(), system.dim()));
  const double c1 = 2.0 * system.coupling(SpinSystem::kNv, SpinSystem::kQubit1);
  const double c2 = 2.0 * system.coupling(SpinSystem::kNv, SpinSystem::kQubit2);
  h.add_term({nv_qubit_zz(system, SpinSystem::kQubit1),
              [schedule, c1](double t) { return c1 / std::pow(schedule.distances(t).first, 3); },
              [schedule, c1](double t) { return c1 * schedule.integrated_inverse_cubes(t).first; }});
  h.add_term({nv_qubit_zz(system, SpinSystem::kQubit2),
              [schedule, c2](double t) { return c2 / std::pow(schedule.distances(t).second, 3); },
              [schedule, c2](double t) {
                return c2 * schedule.integrated_inverse_cubes(t).second;
              }});
  h.end_time = path.measurement_time();
  return h;
}

}  // namespace nvent
