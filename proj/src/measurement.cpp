#include "nvent/measurement.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace nvent {

namespace {

constexpr int kUpUp = 0, kUpDown = 1, kDownUp = 2, kDownDown = 3;

Ket nv_pm_vector(const SpinSystem& system, Outcome outcome) {
  const int d = system.site(SpinSystem::kNv).dim();
  const auto lv = nv_levels(system);
  Ket v = Ket::Zero(d);
  const double r = 1.0 / std::sqrt(2.0);
  v(lv.zero) = r;
  v(lv.one) = outcome == Outcome::Plus ? r : -r;
  return v;
}

/// sum_{m,m'} conj(v_m) rho[(a,m,b),(a',m',b')] v_m'
Operator contract_nv(const Operator& rho, const SpinSystem& system, const Ket& v) {
  const auto dims = system.dims();
  const int dn = dims[1], d2 = dims[2], d1 = dims[0];
  const int q = d1 * d2;
  Operator out = Operator::Zero(q, q);
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d2; ++b)
      for (int a2 = 0; a2 < d1; ++a2)
        for (int b2 = 0; b2 < d2; ++b2) {
          Complex sum = 0.0;
          for (int m = 0; m < dn; ++m) {
            if (v(m) == 0.0) continue;
            for (int m2 = 0; m2 < dn; ++m2) {
              if (v(m2) == 0.0) continue;
              sum += std::conj(v(m)) * rho((a * dn + m) * d2 + b, (a2 * dn + m2) * d2 + b2) *
                     v(m2);
            }
          }
          out(a * d2 + b, a2 * d2 + b2) = sum;
        }
  return out;
}

MeasurementOutcome make_outcome(Outcome label, Operator unnormalised) {
  MeasurementOutcome out;
  out.label = label;
  out.probability = std::max(0.0, std::real(unnormalised.trace()));
  if (out.probability >= kUndefinedBranch) {
    Operator state = unnormalised / out.probability;
    out.qubit_state = 0.5 * (state + state.adjoint());
  }
  return out;
}

}  // namespace

MeasurementPair measure_nv_pm(const Operator& rho, const SpinSystem& system) {
  if (rho.rows() != system.dim() || rho.cols() != system.dim()) {
    throw InvalidArgument("measure_nv_pm: state is not on the three-site space");
  }
  return {make_outcome(Outcome::Plus, contract_nv(rho, system, nv_pm_vector(system, Outcome::Plus))),
          make_outcome(Outcome::Minus,
                       contract_nv(rho, system, nv_pm_vector(system, Outcome::Minus)))};
}

Ket project_nv(const Ket& psi, const SpinSystem& system, Outcome outcome) {
  if (psi.size() != system.dim()) {
    throw InvalidArgument("project_nv: state is not on the three-site space");
  }
  const auto dims = system.dims();
  const int dn = dims[1], d2 = dims[2], d1 = dims[0];
  const Ket v = nv_pm_vector(system, outcome);
  Ket out = Ket::Zero(d1 * d2);
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d2; ++b)
      for (int m = 0; m < dn; ++m) out(a * d2 + b) += std::conj(v(m)) * psi((a * dn + m) * d2 + b);
  return out;
}

MeasurementPair measure_nv_pm(const Ket& psi, const SpinSystem& system) {
  const Ket p = project_nv(psi, system, Outcome::Plus);
  const Ket m = project_nv(psi, system, Outcome::Minus);
  return {make_outcome(Outcome::Plus, projector(p)), make_outcome(Outcome::Minus, projector(m))};
}

OutcomeProbabilities static_outcome_probability(double t, double alpha, double t2_nv) {
  if (t < 0) throw InvalidArgument("static_outcome_probability: t must be non-negative");
  const double decay = std::isfinite(t2_nv) ? std::exp(-t / t2_nv) : 1.0;
  const double c = std::cos(0.5 * alpha * t);
  const double x = decay * c * c;
  return {0.5 * (1.0 + x), 0.5 * (1.0 - x)};
}

QubitKets static_post_measurement_states(double t, double alpha) {
  const Complex e = std::exp(kI * alpha * t);
  QubitKets out;
  out.minus = Ket::Zero(4);
  out.minus(kUpUp) = 1.0;
  out.minus(kDownDown) = -1.0 / e;
  out.minus /= std::sqrt(2.0);

  // (1 + e)(e^{-i alpha t}|dd> + |uu>) + 2 e^{i 3 alpha t / 32}(|du> + |ud>)
  const Complex cross = 2.0 * std::exp(kI * (3.0 * alpha * t / 32.0));
  out.plus = Ket::Zero(4);
  out.plus(kUpUp) = 1.0 + e;
  out.plus(kDownDown) = (1.0 + e) / e;
  out.plus(kUpDown) = cross;
  out.plus(kDownUp) = cross;
  out.plus.normalize();
  return out;
}

Operator level_offset_frame(double theta) {
  Operator u = Operator::Zero(4, 4);
  u(kUpUp, kUpUp) = std::exp(kI * (0.5 * theta));
  u(kUpDown, kUpDown) = 1.0;
  u(kDownUp, kDownUp) = 1.0;
  u(kDownDown, kDownDown) = std::exp(-kI * (0.5 * theta));
  return u;
}

Operator spin_flip() {
  Operator s = Operator::Zero(4, 4);
  s(0, 3) = -1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 0) = -1.0;
  return s;
}

double concurrence(const Operator& rho) { return concurrence(rho, DensityMatrixTolerances{}); }

double concurrence(const Operator& rho, const DensityMatrixTolerances& tol) {
  if (rho.rows() != 4 || rho.cols() != 4) {
    throw InvalidArgument("concurrence: need a two-qubit (4x4) state");
  }
  require_density_matrix(rho, "concurrence", tol);
  const Operator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm);
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Operator root = es.eigenvectors() * w.cast<Complex>().asDiagonal();
  const Operator tau = root.transpose() * spin_flip() * root;
  Eigen::JacobiSVD<Operator> svd(tau);
  const Eigen::VectorXd lam = svd.singularValues();  // descending
  const double c = lam(0) - lam(1) - lam(2) - lam(3);
  return std::clamp(c, 0.0, 1.0);
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double ef_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return binary_entropy(0.5 + 0.5 * std::sqrt(std::max(0.0, 1.0 - c * c)));
}

double entanglement_of_formation(const Operator& rho) { return ef_from_concurrence(concurrence(rho)); }

double branch_ef(const MeasurementOutcome& outcome) {
  if (!outcome.qubit_state) return std::numeric_limits<double>::quiet_NaN();
  // Normalising by p magnifies absolute errors of the full state by 1/p.
  DensityMatrixTolerances tol;
  tol.min_eigenvalue /= std::min(1.0, outcome.probability);
  return ef_from_concurrence(concurrence(*outcome.qubit_state, tol));
}

double mean_ef(const MeasurementPair& outcomes) {
  double sum = 0.0;
  for (const auto* o : {&outcomes.plus, &outcomes.minus}) {
    if (o->qubit_state) sum += o->probability * branch_ef(*o);
  }
  return sum;
}

double mean_ef_of_state(const Operator& rho, const SpinSystem& system) {
  return mean_ef(measure_nv_pm(rho, system));
}

double mean_ef_of_state(const Ket& psi, const SpinSystem& system) {
  return mean_ef(measure_nv_pm(psi, system));
}

double flying_beta(const FlightPath& path, const SpinSystem& system) {
  validate(path);
  const double c = system.coupling(SpinSystem::kNv, SpinSystem::kQubit1);
  const double far = path.separation - path.start_offset;
  return c * (1.0 / (far * far) - 1.0 / (path.start_offset * path.start_offset)) / path.velocity;
}

FlyingDerived flying_derived(double beta) {
  FlyingDerived d;
  d.beta = beta;
  const double cb = std::cos(beta);
  d.xi = (1.0 - cb) / (3.0 + cb);
  const double s = std::sin(0.5 * beta);
  d.p_minus = 0.5 * s * s;
  d.p_plus = (3.0 + cb) / 4.0;
  return d;
}

MeasurementPair flying_outcome(double beta) {
  const FlyingDerived d = flying_derived(beta);
  const Complex e = std::exp(kI * beta);
  Ket minus = Ket::Zero(4);
  minus(kUpUp) = 1.0;
  minus(kDownDown) = -e;
  minus /= std::sqrt(2.0);

  // (1 + e)(e|dd> + |uu>) + 2e(|du> + |ud>)
  Ket plus = Ket::Zero(4);
  plus(kUpUp) = 1.0 + e;
  plus(kDownDown) = (1.0 + e) * e;
  plus(kUpDown) = 2.0 * e;
  plus(kDownUp) = 2.0 * e;
  plus.normalize();

  MeasurementPair out;
  out.plus = {Outcome::Plus, d.p_plus, projector(plus)};
  out.minus = {Outcome::Minus, d.p_minus, std::nullopt};
  if (d.p_minus >= kUndefinedBranch) out.minus.qubit_state = projector(minus);
  return out;
}

double ef_plus_from_beta(double beta) {
  const double xi = flying_derived(beta).xi;
  return binary_entropy(0.5 + 0.5 * std::sqrt(std::max(0.0, 1.0 - xi * xi)));
}

double optimal_velocity(double separation, double start_offset, const SpinSystem& system) {
  // beta is linear in 1/v, so the fastest pass with |beta| = pi uses |beta * v| / pi.
  const FlightPath unit{separation, start_offset, 1.0};
  return std::abs(flying_beta(unit, system)) / std::numbers::pi;
}

double ideal_mean_ef(double theta) {
  const FlyingDerived d = flying_derived(theta);
  return d.p_minus + d.p_plus * ef_plus_from_beta(theta);
}

std::vector<double> accumulated_nv_phase(const std::vector<Ket>& trajectory,
                                         const SpinSystem& system) {
  const auto dims = system.dims();
  const int dn = dims[1], d2 = dims[2];
  const auto lv = nv_levels(system);
  // |up,up> has qubit indices a = b = 0.
  const int i_zero = lv.zero * d2;
  const int i_one = lv.one * d2;
  (void)dn;
  std::vector<double> out;
  out.reserve(trajectory.size());
  double previous = 0.0;
  for (const auto& psi : trajectory) {
    const double raw = std::arg(psi(i_zero) / psi(i_one));
    double unwrapped = raw;
    if (!out.empty()) {
      const double two_pi = 2.0 * std::numbers::pi;
      unwrapped = raw + two_pi * std::round((previous - raw) / two_pi);
    }
    out.push_back(unwrapped);
    previous = unwrapped;
  }
  return out;
}

double fit_cross_phase_coefficient(const SpinSystem& system, const StaticGeometry& g,
                                   std::span<const double> times) {
  const double a = alpha(system, g);
  const auto h = static_hamiltonian(system, g, QubitCoupling::Full);
  const auto traj = evolve_coherent(initial_plus_state(system), h, times);
  std::vector<double> x, y;
  double previous = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double theta = a * times[i];
    Ket q = project_nv(traj.states[i], system, Outcome::Plus);
    q = level_offset_frame(theta) * q;
    const Complex ratio = q(kUpDown) * (1.0 + std::exp(kI * theta)) / (2.0 * q(kUpUp));
    double phase = std::arg(ratio);
    if (!x.empty()) {
      const double two_pi = 2.0 * std::numbers::pi;
      phase += two_pi * std::round((previous - phase) / two_pi);
    }
    previous = phase;
    x.push_back(theta);
    y.push_back(phase);
  }
  // Slope through the origin.
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (sxx == 0.0) throw InvalidArgument("fit_cross_phase_coefficient: need nonzero times");
  return sxy / sxx;
}

std::vector<double> uniform_grid(double from, double to, int count) {
  if (count < 0) throw InvalidArgument("uniform_grid: negative count");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = from;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = i == count - 1 ? to : from + (to - from) * i / (count - 1);
  }
  return out;
}

MaxMeanEf maximize_on_window(double window,
                             const std::function<std::vector<double>(std::span<const double>)>& on_grid,
                             const std::function<double(double)>& at,
                             const MaximizeOptions& options) {
  if (!(window > 0)) throw InvalidArgument("maximize_on_window: window must be positive");
  if (options.grid_points < 3) throw InvalidArgument("maximize_on_window: need >= 3 grid points");
  const auto grid = uniform_grid(0.0, window, options.grid_points);
  const auto values = on_grid(grid);
  std::size_t k = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[k]) k = i;
  }
  MaxMeanEf best{values[k], grid[k]};
  auto consider = [&](double t, double v) {
    if (v > best.value || (v == best.value && t < best.argmax)) best = {v, t};
  };

  double lo = grid[k == 0 ? 0 : k - 1];
  double hi = grid[std::min(k + 1, grid.size() - 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = at(x1), f2 = at(x2);
  consider(x1, f1);
  consider(x2, f2);
  while (hi - lo > options.resolution * window) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = at(x1);
      consider(x1, f1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = at(x2);
      consider(x2, f2);
    }
  }
  return best;
}

double mean_ef_window(const SpinSystem& system, const StaticGeometry& g) {
  return 2.0 * std::numbers::pi / std::abs(alpha(system, g));
}

namespace {

/// Index of the last grid point at or before t.
std::size_t checkpoint_index(std::span<const double> grid, double t) {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  return it == grid.begin() ? 0 : static_cast<std::size_t>(std::distance(grid.begin(), it) - 1);
}

MaxMeanEf maximize_coherent(const SpinSystem& system, const TimeDependentHamiltonian& h,
                            double window, const MaximizeOptions& options,
                            const IntegratorOptions& integrator) {
  const Ket psi0 = initial_plus_state(system);
  std::vector<double> grid;
  std::vector<Ket> checkpoints;
  auto on_grid = [&](std::span<const double> g) {
    grid.assign(g.begin(), g.end());
    checkpoints = evolve_coherent(psi0, h, g, integrator).states;
    std::vector<double> out;
    for (const auto& s : checkpoints) out.push_back(mean_ef_of_state(s, system));
    return out;
  };
  auto at = [&](double t) {
    const std::size_t k = checkpoint_index(grid, t);
    const double ts[] = {t};
    const Ket s = evolve_coherent(checkpoints[k], h, ts, integrator, Propagation::Auto, grid[k])
                      .states.front();
    return mean_ef_of_state(s, system);
  };
  return maximize_on_window(window, on_grid, at, options);
}

}  // namespace

MaxMeanEf max_mean_ef_static(const SpinSystem& system, const StaticGeometry& g, QubitCoupling qq,
                             const MaximizeOptions& options, const IntegratorOptions& integrator) {
  const auto h = static_hamiltonian(system, g, qq);
  const double window = mean_ef_window(system, g);
  const auto dephasing = DephasingSpec::from_system(system);
  if (dephasing.empty()) return maximize_coherent(system, h, window, options, integrator);

  const Operator rho0 = projector(initial_plus_state(system));
  std::vector<double> grid;
  std::vector<Operator> checkpoints;
  auto on_grid = [&](std::span<const double> gr) {
    grid.assign(gr.begin(), gr.end());
    checkpoints = evolve_master_equation(rho0, h, dephasing, gr, integrator).states;
    std::vector<double> out;
    for (const auto& s : checkpoints) out.push_back(mean_ef_of_state(s, system));
    return out;
  };
  auto at = [&](double t) {
    const std::size_t k = checkpoint_index(grid, t);
    const double ts[] = {t};
    const Operator s =
        evolve_master_equation(checkpoints[k], h, dephasing, ts, integrator, grid[k]).states.front();
    return mean_ef_of_state(s, system);
  };
  return maximize_on_window(window, on_grid, at, options);
}

MaxMeanEf max_mean_ef_vibrating(const SpinSystem& system, const StaticGeometry& g,
                                const VibrationMode& mode, QubitCoupling qq,
                                const MaximizeOptions& options,
                                const IntegratorOptions& integrator) {
  const auto h = vibrating_hamiltonian(system, g, mode, qq);
  return maximize_coherent(system, h, mean_ef_window(system, g), options, integrator);
}

}  // namespace nvent
