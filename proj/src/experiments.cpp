#include "nvent/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "nvent/parallel.hpp"

namespace nvent {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

Table SweepResult::table() const {
  Table t;
  t.header = coordinate_names;
  for (const char* c : {"p_plus", "p_minus", "ef_plus", "ef_minus", "mean_ef"}) t.header.push_back(c);
  if (maximised) {
    t.header.push_back("max_mean_ef");
    t.header.push_back("argmax_t_us");
  }
  t.header.insert(t.header.end(), extra_names.begin(), extra_names.end());
  for (const auto& r : rows) {
    std::vector<double> v = r.coordinates;
    for (double x : {r.p_plus, r.p_minus, r.ef_plus, r.ef_minus, r.mean_ef}) v.push_back(x);
    if (maximised) {
      v.push_back(r.max_mean_ef);
      v.push_back(r.argmax_t_us);
    }
    v.insert(v.end(), r.extras.begin(), r.extras.end());
    t.rows.push_back(std::move(v));
  }
  return t;
}

void check_row(const SweepRow& row, const std::vector<std::string>& coordinate_names) {
  auto fail = [&](const std::string& what) {
    std::string where;
    for (std::size_t i = 0; i < row.coordinates.size() && i < coordinate_names.size(); ++i) {
      where += (where.empty() ? "" : ", ") + coordinate_names[i] + "=" +
               format_number(row.coordinates[i]);
    }
    throw NumericError("row invariant violated at " + where + ": " + what);
  };
  for (double p : {row.p_plus, row.p_minus}) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) fail("probability outside [0, 1]");
  }
  if (std::abs(row.p_plus + row.p_minus - 1.0) > 1e-10) fail("probabilities do not sum to 1");
  auto ef_ok = [](double ef, double p) {
    if (std::isnan(ef)) return p < kUndefinedBranch;
    return ef >= 0.0 && ef <= 1.0 + 1e-12;
  };
  if (!ef_ok(row.ef_plus, row.p_plus) || !ef_ok(row.ef_minus, row.p_minus)) {
    fail("EF outside [0, 1]");
  }
  if (!(row.mean_ef >= 0.0 && row.mean_ef <= 1.0 + 1e-12)) fail("mean EF outside [0, 1]");
}

namespace {

constexpr double kUs = 1e-6;

/// Measurement of a full state into the row fields.
void fill_row(SweepRow& row, const Operator& rho, const SpinSystem& system) {
  const MeasurementPair m = measure_nv_pm(rho, system);
  row.p_plus = m.plus.probability;
  row.p_minus = m.minus.probability;
  row.ef_plus = branch_ef(m.plus);
  row.ef_minus = branch_ef(m.minus);
  row.mean_ef = mean_ef(m);
}

ParameterDistribution distribution_for(const ScenarioConfig& c) {
  switch (c.average) {
    case AverageOver::Frequency:
      return ParameterDistribution::truncated_normal(c.mode.angular_frequency,
                                                     c.rel_sigma * c.mode.angular_frequency);
    case AverageOver::Amplitude:
      return ParameterDistribution::truncated_normal(c.mode.amplitude,
                                                     c.rel_sigma * c.mode.amplitude);
    default:
      return ParameterDistribution::uniform_phase();
  }
}

EnsembleParameter parameter_for(AverageOver a) {
  switch (a) {
    case AverageOver::Frequency:
      return EnsembleParameter::Frequency;
    case AverageOver::Amplitude:
      return EnsembleParameter::Amplitude;
    default:
      return EnsembleParameter::Phase;
  }
}

/// States of one static or vibrating configuration, on a grid and maximised.
struct Pipeline {
  std::function<std::vector<Operator>(std::span<const double>)> states;
  std::function<MaxMeanEf()> maximise;
  bool approximate = false;
};

Pipeline make_pipeline(const ScenarioConfig& c, int threads) {
  const SpinSystem& system = c.system;
  MaximizeOptions maximize;
  maximize.grid_points = std::max(3, c.time_points);
  const double window = mean_ef_window(system, c.geometry);

  if (c.scenario == ScenarioKind::Static) {
    Pipeline p;
    const auto h = static_hamiltonian(system, c.geometry, c.qubit_coupling);
    const auto dephasing = DephasingSpec::from_system(system);
    p.states = [=](std::span<const double> grid) {
      if (!dephasing.empty()) {
        return evolve_master_equation(projector(initial_plus_state(system)), h, dephasing, grid,
                                      c.integrator)
            .states;
      }
      std::vector<Operator> out;
      for (const auto& k : evolve_coherent(initial_plus_state(system), h, grid, c.integrator).states) {
        out.push_back(projector(k));
      }
      return out;
    };
    p.maximise = [=] {
      return max_mean_ef_static(system, c.geometry, c.qubit_coupling, maximize, c.integrator);
    };
    return p;
  }

  VibratingScenario scenario{system, c.geometry, c.mode, c.qubit_coupling};
  AveragingOptions averaging = c.averaging;
  averaging.integrator = c.integrator;
  averaging.threads = threads;
  const EnsembleParameter parameter = parameter_for(c.average);

  Pipeline p;
  if (c.method == VibratingMethod::Exact) {
    if (c.average == AverageOver::None) {
      const auto h = vibrating_hamiltonian(system, c.geometry, c.mode, c.qubit_coupling);
      p.states = [=](std::span<const double> grid) {
        std::vector<Operator> out;
        for (const auto& k :
             evolve_coherent(initial_plus_state(system), h, grid, c.integrator).states) {
          out.push_back(projector(k));
        }
        return out;
      };
      p.maximise = [=] {
        return max_mean_ef_vibrating(system, c.geometry, c.mode, c.qubit_coupling, maximize,
                                     c.integrator);
      };
      return p;
    }
    const ParameterDistribution dist = distribution_for(c);
    p.states = [=](std::span<const double> grid) {
      return average_states(parameter, dist, scenario, grid, averaging);
    };
    p.maximise = [=] {
      return max_mean_ef_averaged(parameter, dist, scenario, averaging, maximize);
    };
    return p;
  }

  std::function<Operator(double)> at;
  if (c.method == VibratingMethod::SecondOrderPhase) {
    at = [=](double t) { return phase_averaged_second_order_state(scenario, t); };
  } else if (c.average == AverageOver::None) {
    const Operator h_ref = static_rwa_hamiltonian(system, c.geometry, c.qubit_coupling);
    at = [=](double t) {
      return from_interaction_picture(
          perturbative_state_first_order(t, system, c.geometry, c.mode), h_ref, t);
    };
  } else {
    const ParameterDistribution dist = distribution_for(c);
    at = [=](double t) {
      return average_first_order_state(parameter, dist, scenario, t, averaging);
    };
  }
  p.approximate = true;
  p.states = [=](std::span<const double> grid) {
    std::vector<Operator> out;
    for (double t : grid) out.push_back(project_to_density_matrix(at(t)));
    return out;
  };
  p.maximise = [=] {
    auto ef = [&](double t) { return mean_ef_of_state(project_to_density_matrix(at(t)), system); };
    auto on_grid = [&](std::span<const double> g) {
      std::vector<double> out;
      for (double t : g) out.push_back(ef(t));
      return out;
    };
    return maximize_on_window(window, on_grid, ef, maximize);
  };
  return p;
}

/// One row per time for a static or vibrating configuration.
std::vector<SweepRow> time_rows(const ScenarioConfig& c, std::span<const double> t_us,
                                std::vector<double> prefix, int threads) {
  std::vector<double> grid;
  for (double t : t_us) grid.push_back(t * kUs);
  std::vector<SweepRow> rows;
  if (grid.empty()) return rows;
  const auto states = make_pipeline(c, threads).states(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepRow row;
    row.coordinates = prefix;
    row.coordinates.push_back(t_us[i]);
    fill_row(row, states[i], c.system);
    rows.push_back(std::move(row));
  }
  return rows;
}

SweepRow maximised_row(const ScenarioConfig& c, std::vector<double> coordinates, int threads) {
  const Pipeline p = make_pipeline(c, threads);
  const MaxMeanEf best = p.maximise();
  SweepRow row;
  row.coordinates = std::move(coordinates);
  const double ts[] = {best.argmax};
  fill_row(row, p.states(ts).front(), c.system);
  row.max_mean_ef = best.value;
  row.argmax_t_us = best.argmax / kUs;
  return row;
}

SweepRow flying_row(const ScenarioConfig& c, double velocity, std::vector<double> coordinates) {
  FlightPath path = c.flight;
  path.velocity = velocity;
  validate(path);
  const auto h = flying_schedule_hamiltonian(c.system, path);
  const double ts[] = {path.measurement_time()};
  const auto dephasing = DephasingSpec::from_system(c.system);
  const Operator rho =
      dephasing.empty()
          ? projector(evolve_coherent(initial_plus_state(c.system), h, ts, c.integrator).states.front())
          : evolve_master_equation(projector(initial_plus_state(c.system)), h, dephasing, ts,
                                   c.integrator)
                .states.front();
  SweepRow row;
  row.coordinates = std::move(coordinates);
  fill_row(row, rho, c.system);
  row.extras = {flying_beta(path, c.system), path.measurement_time() / kUs};
  return row;
}

std::vector<double> default_times_us(const ScenarioConfig& c) {
  std::vector<double> out;
  for (double t : uniform_grid(0.0, mean_ef_window(c.system, c.geometry), c.time_points)) {
    out.push_back(t / kUs);
  }
  return out;
}

}  // namespace

SweepResult run_scenario(const ScenarioConfig& config, int threads) {
  if (config.scenario == ScenarioKind::RwaCheck) {
    throw InvalidArgument("run_scenario: use rwa_check for the rwa_check scenario");
  }
  threads = std::max(1, threads);
  SweepResult result;
  if (config.series) result.coordinate_names.push_back(config.series->key);

  const bool flying = config.scenario == ScenarioKind::Flying;
  std::string axis;
  if (config.sweep) {
    axis = config.sweep->key;
  } else if (!flying) {
    axis = "t_us";
  }
  if (!axis.empty()) result.coordinate_names.push_back(axis);
  if (flying) {
    if (axis.empty()) result.coordinate_names.push_back("velocity_mps");
    result.extra_names = {"beta", "t_measure_us"};
  }
  result.maximised = !flying && !axis.empty() && !is_point_axis(axis);

  std::vector<ScenarioConfig> outer;
  std::vector<std::vector<double>> prefixes;
  if (config.series) {
    for (double v : config.series->values) {
      outer.push_back(with_value(config, config.series->key, v));
      prefixes.push_back({v});
    }
  } else {
    outer.push_back(config);
    prefixes.push_back({});
  }

  for (std::size_t s = 0; s < outer.size(); ++s) {
    const ScenarioConfig& c = outer[s];
    const auto& prefix = prefixes[s];
    try {
      if (axis == "t_us") {
        const std::vector<double> t_us = config.sweep ? config.sweep->values : default_times_us(c);
        auto rows = time_rows(c, t_us, prefix, threads);
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
        continue;
      }
      if (flying && (axis.empty() || axis == "v_inverse")) {
        const std::vector<double> values =
            axis.empty() ? std::vector<double>{c.flight.velocity} : config.sweep->values;
        std::vector<SweepRow> rows(values.size());
        parallel_for(values.size(), threads, [&](std::size_t i) {
          auto coords = prefix;
          coords.push_back(values[i]);
          rows[i] = flying_row(c, axis.empty() ? values[i] : 1.0 / values[i], coords);
        });
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
        continue;
      }
      // Config-key axis: one pipeline per point.
      const auto& values = config.sweep->values;
      std::vector<SweepRow> rows(values.size());
      parallel_for(values.size(), threads, [&](std::size_t i) {
        const ScenarioConfig point = with_value(c, axis, values[i]);
        auto coords = prefix;
        coords.push_back(values[i]);
        rows[i] = flying ? flying_row(point, point.flight.velocity, coords)
                         : maximised_row(point, coords, values.size() > 1 ? 1 : threads);
      });
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    } catch (const NumericError& e) {
      std::string where = prefix.empty() ? std::string("")
                                         : " at " + config.series->key + "=" +
                                               format_number(prefix.front());
      throw NumericError(std::string(e.what()) + where);
    }
  }
  for (const auto& row : result.rows) check_row(row, result.coordinate_names);
  return result;
}

namespace {

KeyValueConfig merged(const std::string& base, const KeyValueConfig& overrides) {
  KeyValueConfig c = KeyValueConfig::parse(base, "<figure defaults>");
  for (const auto& [k, v] : overrides.entries()) {
    // A sweep given as a value list replaces the default range and vice versa.
    if (k.rfind("sweep.", 0) == 0) {
      const std::string stem = k.substr(0, k.rfind('.'));
      const bool values = k.size() > 7 && k.substr(k.rfind('.')) == ".values";
      for (const char* part : {".from", ".to", ".count", ".spacing", ".values"}) {
        const bool is_values = std::string(part) == ".values";
        if (values != is_values) c.erase(stem + part);
      }
    }
    c.set(k, v);
  }
  return c;
}

/// Takes and removes a figure-level list key.
std::vector<double> take_list(KeyValueConfig& c, const std::string& key) {
  std::vector<double> out = c.numbers(key);
  c.erase(key);
  if (out.empty()) throw ConfigError(key + ": needs at least one value");
  return out;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

struct PlotSeries {
  std::string column;
  std::string style;
  std::string title;
};

std::string plot_script(const std::string& name, const std::string& title, const std::string& x,
                        const std::string& xlabel, const std::string& ylabel,
                        const std::vector<PlotSeries>& series) {
  std::ostringstream out;
  out << "# plot command file; columns refer to the CSV header\n";
  out << "data " << name << ".csv\n";
  out << "title " << title << "\n";
  out << "x " << x << "\n";
  out << "xlabel " << xlabel << "\n";
  out << "ylabel " << ylabel << "\n";
  for (const auto& s : series) {
    out << "series " << s.column << " style=" << s.style << " title=\"" << s.title << "\"\n";
  }
  return out.str();
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw InvalidArgument("no column " + name);
}

/// Appends column `name` of `from` to `to` as `as`.
void append_column(Table& to, const Table& from, const std::string& name, const std::string& as) {
  const std::size_t k = column(from, name);
  if (to.rows.size() != from.rows.size()) throw InvalidArgument("column lengths differ");
  to.header.push_back(as);
  for (std::size_t i = 0; i < from.rows.size(); ++i) to.rows[i].push_back(from.rows[i][k]);
}

Table first_column(const Table& from) {
  Table t;
  t.header = {from.header.front()};
  for (const auto& r : from.rows) t.rows.push_back({r.front()});
  return t;
}

}  // namespace

FigureOutput fig2(const KeyValueConfig& overrides, int threads) {
  KeyValueConfig c = merged(
      "scenario=static\ngeometry.delta_nm=10\ntime.points=401\nfig2.t2_ms=2\n", overrides);
  const double t2 = c.number("fig2.t2_ms", 2.0);
  c.erase("fig2.t2_ms");
  const std::string t2s = format_number(t2);

  struct Variant {
    std::string column, title;
    std::string q, nv;
  };
  const std::vector<Variant> variants = {
      {"mean_ef_t2_inf", "T2 = inf", "inf", "inf"},
      {"mean_ef_t2_all", "T2 = " + label(t2) + " ms on all spins", t2s, t2s},
      {"mean_ef_t2_nv", "T2 = " + label(t2) + " ms on the NV only", "inf", t2s},
  };
  FigureOutput fig;
  fig.name = "fig2";
  std::vector<PlotSeries> series;
  const char* styles[] = {"solid", "dashed", "dotted"};
  for (std::size_t i = 0; i < variants.size(); ++i) {
    KeyValueConfig v = c;
    v.set("qubit1.t2_ms", variants[i].q);
    v.set("qubit2.t2_ms", variants[i].q);
    v.set("nv.t2_ms", variants[i].nv);
    const Table t = run_scenario(parse_scenario(v), threads).table();
    if (i == 0) fig.table = first_column(t);
    append_column(fig.table, t, "mean_ef", variants[i].column);
    series.push_back({variants[i].column, styles[i], variants[i].title});
  }
  fig.plot_script = plot_script(fig.name, "Mean EF against measurement time", "t_us", "t (us)",
                                "mean EF", series);
  return fig;
}

FigureOutput fig3a(const KeyValueConfig& overrides, int threads) {
  KeyValueConfig c = merged(
      "scenario=vibrating\ngeometry.delta_nm=10\nmode.phase_rad=1.5707963267948966\n"
      "average.parameter=omega\naverage.rel_sigma=0.01\n"
      "sweep.mode.freq_khz.from=50\nsweep.mode.freq_khz.to=500\nsweep.mode.freq_khz.count=46\n"
      "fig3a.delta_nm=0.1,0.2,0.4\n",
      overrides);
  const auto deltas = take_list(c, "fig3a.delta_nm");
  FigureOutput fig;
  fig.name = "fig3a";
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    for (const char* method : {"exact", "first_order"}) {
      KeyValueConfig v = c;
      v.set("mode.delta_nm", label(deltas[i]));
      v.set("vibrating.method", method);
      const Table t = run_scenario(parse_scenario(v), threads).table();
      if (fig.table.header.empty()) fig.table = first_column(t);
      const std::string name = "M_" + std::string(method) + "_delta_" + label(deltas[i]) + "nm";
      append_column(fig.table, t, "max_mean_ef", name);
      series.push_back({name, std::string(method) == "exact" ? "solid" : "dashed",
                        "delta = " + label(deltas[i]) + " nm, " + method});
    }
  }
  fig.plot_script = plot_script(fig.name, "Maximal mean EF, frequency-averaged modes",
                                "mode.freq_khz", "omega / 2 pi (kHz)", "M", series);
  return fig;
}

FigureOutput fig3b(const KeyValueConfig& overrides, int threads) {
  KeyValueConfig c = merged(
      "scenario=vibrating\ngeometry.delta_nm=10\naverage.parameter=phi\n"
      "sweep.mode.delta_nm.from=0\nsweep.mode.delta_nm.to=0.5\nsweep.mode.delta_nm.count=26\n"
      "fig3b.freq_khz=50,100,200,500\n",
      overrides);
  const auto freqs = take_list(c, "fig3b.freq_khz");
  FigureOutput fig;
  fig.name = "fig3b";
  std::vector<PlotSeries> series;
  for (double f : freqs) {
    for (const char* method : {"exact", "second_order_phase"}) {
      KeyValueConfig v = c;
      v.set("mode.freq_khz", label(f));
      v.set("vibrating.method", method);
      const Table t = run_scenario(parse_scenario(v), threads).table();
      if (fig.table.header.empty()) fig.table = first_column(t);
      const std::string name = "M_" + std::string(method) + "_freq_" + label(f) + "khz";
      append_column(fig.table, t, "max_mean_ef", name);
      series.push_back({name, std::string(method) == "exact" ? "solid" : "dashed",
                        "omega / 2 pi = " + label(f) + " kHz, " + method});
    }
  }
  fig.plot_script = plot_script(fig.name, "Maximal mean EF, uniformly distributed phase",
                                "mode.delta_nm", "delta (nm)", "M", series);
  return fig;
}

FigureOutput fig4(const KeyValueConfig& overrides, int threads) {
  KeyValueConfig c = merged("scenario=flying\ngeometry.D_nm=100\ngeometry.z0_nm=5\n", overrides);
  const bool has_sweep = !c.keys_with_prefix("sweep").empty();
  if (!has_sweep) {
    // 1/v from 1% to 300% of 1/v_opt.
    const ScenarioConfig probe = parse_scenario(c);
    const double v_opt =
        optimal_velocity(probe.flight.separation, probe.flight.start_offset, probe.system);
    c.set("sweep.v_inverse.from", format_number(3.0 / (300.0 * v_opt)));
    c.set("sweep.v_inverse.to", format_number(3.0 / v_opt));
    c.set("sweep.v_inverse.count", "300");
  }
  const Table t = run_scenario(parse_scenario(c), threads).table();
  FigureOutput fig;
  fig.name = "fig4";
  fig.table = first_column(t);
  for (const char* name : {"beta", "ef_minus", "ef_plus", "mean_ef", "p_minus", "p_plus"}) {
    append_column(fig.table, t, name, name);
  }
  fig.plot_script = plot_script(fig.name, "Flying sensor: EF and outcome probabilities",
                                fig.table.header.front(), "1/v (s/m)", "EF, probability",
                                {{"ef_minus", "solid", "EF(Psi-)"},
                                 {"ef_plus", "solid", "EF(Psi+)"},
                                 {"mean_ef", "solid", "mean EF"},
                                 {"p_minus", "dashed", "p-"},
                                 {"p_plus", "dashed", "p+"}});
  return fig;
}

void write_figure(const FigureOutput& figure, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [file, text] :
       {std::pair{dir / (figure.name + ".csv"), format_csv(figure.table)},
        std::pair{dir / (figure.name + ".plot"), figure.plot_script}}) {
    std::ofstream out(file, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + file.string());
  }
}

Table RwaReport::table() const {
  Table t;
  t.header = {"ratio", "max_deficit"};
  for (const auto& p : points) t.rows.push_back({p.ratio, p.max_deficit});
  return t;
}

double rwa_fidelity_deficit(const SpinSystem& system, const StaticGeometry& g, double ratio,
                            double zfs_over_zeeman, QubitCoupling qq, int time_points) {
  if (system.nv_mode() != NvMode::SpinOne) {
    throw InvalidArgument("rwa_fidelity_deficit: needs the spin-1 NV mode");
  }
  if (!(ratio > 0)) throw InvalidArgument("rwa_fidelity_deficit: ratio must be positive");
  const double a = std::abs(alpha(system, g));
  PhysicalConstants k = system.constants();
  const double zeeman = ratio * a;
  k.d_nv = zfs_over_zeeman * zeeman;
  const double b = zeeman / k.zeeman(system.site(SpinSystem::kQubit1).magnetic_moment, 1.0);
  const SpinSystem scaled(system.sites(), b, k);

  const Operator h_lab = static_full_hamiltonian(scaled, g);
  const Operator h0 = free_hamiltonian(scaled);
  const Operator h_rwa = static_rwa_hamiltonian(scaled, g, qq);
  if (qq == QubitCoupling::Off) {
    throw InvalidArgument("rwa_fidelity_deficit: the lab-frame Hamiltonian always has the qubit-qubit term");
  }
  const Ket psi0 = initial_plus_state(scaled);
  Eigen::SelfAdjointEigenSolver<Operator> lab(h_lab), rwa(h_rwa);
  const Ket lab0 = lab.eigenvectors().adjoint() * psi0;
  const Ket rwa0 = rwa.eigenvectors().adjoint() * psi0;
  const Eigen::VectorXd e0 = h0.diagonal().real();

  double worst = 0.0;
  for (double t : uniform_grid(0.0, mean_ef_window(scaled, g), time_points)) {
    auto phases = [t](const Eigen::VectorXd& e, double sign) {
      return (sign * kI * t * e.cast<Complex>()).array().exp().matrix();
    };
    const Ket psi_lab = lab.eigenvectors() * phases(lab.eigenvalues(), -1.0).cwiseProduct(lab0);
    const Ket psi_rot = phases(e0, 1.0).cwiseProduct(psi_lab);
    const Ket psi_rwa = rwa.eigenvectors() * phases(rwa.eigenvalues(), -1.0).cwiseProduct(rwa0);
    worst = std::max(worst, 1.0 - state_fidelity(psi_rwa, psi_rot));
  }
  return worst;
}

RwaReport rwa_check(const ScenarioConfig& config, int threads) {
  if (config.scenario != ScenarioKind::RwaCheck) {
    throw InvalidArgument("rwa_check: config is not an rwa_check scenario");
  }
  if (config.series) throw ConfigError("series: not available for rwa_check");
  std::vector<double> ratios;
  if (!config.sweep) {
    for (int i = 0; i < 5; ++i) ratios.push_back(std::pow(10.0, 3.0 + 0.25 * i));
  } else if (config.sweep->key == "ratio") {
    ratios = config.sweep->values;
  } else {
    throw ConfigError("sweep." + config.sweep->key + ": rwa_check sweeps only the ratio");
  }
  RwaReport report;
  report.points.resize(ratios.size());
  parallel_for(ratios.size(), std::max(1, threads), [&](std::size_t i) {
    report.points[i] = {ratios[i],
                        rwa_fidelity_deficit(config.system, config.geometry, ratios[i],
                                             config.zfs_over_zeeman, config.qubit_coupling,
                                             config.time_points)};
  });
  report.monotone = true;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    if (!(report.points[i].max_deficit < report.points[i - 1].max_deficit)) report.monotone = false;
  }
  if (report.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(report.points.size());
    for (const auto& p : report.points) {
      const double x = std::log(p.ratio), y = std::log(std::max(p.max_deficit, 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return report;
}

}  // namespace nvent
