#include "nvent/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "nvent/parallel.hpp"

namespace nvent {

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SIM_THREADS")) {
    int value = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size() && value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_number(std::string_view text, const std::string& key) {
  const std::string_view s = trim(text);
  if (s == "inf" || s == "infinity" || s == "+inf") return kInf;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || std::isnan(value)) {
    throw ConfigError(key + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig out;
  out.source_ = source;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    if (out.entries_.count(key)) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key " + key);
    }
    out.entries_[key] = value;
  }
  return out;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void KeyValueConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

void KeyValueConfig::erase(const std::string& key) {
  entries_.erase(key);
  used_.erase(key);
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
  used_.insert(key);
  return entries_.at(key);
}

std::string KeyValueConfig::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double KeyValueConfig::number(const std::string& key, double fallback) const {
  return has(key) ? parse_number(raw(key), key) : fallback;
}

std::optional<double> KeyValueConfig::number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return parse_number(raw(key), key);
}

int KeyValueConfig::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const std::string_view s = trim(raw(key));
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

bool KeyValueConfig::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = raw(key);
  if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "off" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + s + "'");
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  const std::string& s = raw(key);
  std::size_t pos = 0;
  if (trim(s).empty()) return out;
  while (pos <= s.size()) {
    const auto end = std::min(s.find(',', pos), s.size());
    out.push_back(parse_number(std::string_view(s).substr(pos, end - pos), key));
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : entries_) {
    if (k.rfind(p, 0) == 0) {
      used_.insert(k);
      out.push_back(k);
    }
  }
  return out;
}

void KeyValueConfig::reject_unused() const {
  std::string unknown;
  for (const auto& [k, v] : entries_) {
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  }
  if (!unknown.empty()) {
    throw ConfigError(source_ + ": unknown or unused keys for this scenario: " + unknown);
  }
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Static:
      return "static";
    case ScenarioKind::Vibrating:
      return "vibrating";
    case ScenarioKind::Flying:
      return "flying";
    case ScenarioKind::RwaCheck:
      return "rwa_check";
  }
  return "?";
}

bool is_point_axis(const std::string& key) {
  return key == "t_us" || key == "v_inverse" || key == "ratio";
}

namespace {

constexpr double kNm = 1e-9;
constexpr double kMs = 1e-3;

ScenarioKind parse_kind(const std::string& s) {
  if (s == "static") return ScenarioKind::Static;
  if (s == "vibrating") return ScenarioKind::Vibrating;
  if (s == "flying") return ScenarioKind::Flying;
  if (s == "rwa_check") return ScenarioKind::RwaCheck;
  throw ConfigError("scenario: expected static|vibrating|flying|rwa_check, got '" + s + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

double positive(const KeyValueConfig& c, const std::string& key, double fallback) {
  const double v = c.number(key, fallback);
  require(v > 0, key, "must be positive");
  return v;
}

double t2_seconds(const KeyValueConfig& c, const std::string& key) {
  const double ms = positive(c, key, kInf);
  return std::isinf(ms) ? kInf : ms * kMs;
}

std::vector<double> axis_values(const KeyValueConfig& c, const std::string& stem) {
  if (c.has(stem + ".values")) {
    if (c.has(stem + ".from") || c.has(stem + ".to") || c.has(stem + ".count")) {
      throw ConfigError(stem + ": give either .values or .from/.to/.count");
    }
    return c.numbers(stem + ".values");
  }
  for (const char* part : {".from", ".to", ".count"}) {
    require(c.has(stem + part), stem + part, "missing");
  }
  const double from = c.number(stem + ".from", 0.0);
  const double to = c.number(stem + ".to", 0.0);
  const int count = c.integer(stem + ".count", 0);
  require(count >= 0, stem + ".count", "must be non-negative");
  require(std::isfinite(from) && std::isfinite(to), stem, "bounds must be finite");
  const std::string spacing = c.text(stem + ".spacing", "linear");
  require(spacing == "linear" || spacing == "log", stem + ".spacing", "expected linear|log");
  std::vector<double> out;
  if (spacing == "log") {
    require(from > 0 && to > 0, stem, "log spacing needs positive bounds");
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      out.push_back(std::exp(std::log(from) + f * (std::log(to) - std::log(from))));
    }
    if (count > 1) out.back() = to;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(from + f * (to - from));
  }
  return out;
}

/// Collects the single sweep.<axis>.* or series.<key> entry from `c`.
std::optional<SweepAxis> extract_sweep(KeyValueConfig& c) {
  std::optional<SweepAxis> out;
  std::set<std::string> stems;
  for (const auto& key : c.keys_with_prefix("sweep")) {
    const auto last = key.rfind('.');
    if (last <= 6) throw ConfigError(key + ": expected sweep.<axis>.<from|to|count|values|spacing>");
    stems.insert(key.substr(0, last));
  }
  if (stems.size() > 1) throw ConfigError("sweep: exactly one axis may be swept");
  if (!stems.empty()) {
    const std::string stem = *stems.begin();
    out = SweepAxis{stem.substr(6), axis_values(c, stem)};
    for (const char* part : {".from", ".to", ".count", ".values", ".spacing"}) {
      if (c.has(stem + part)) c.erase(stem + part);
    }
    const auto stray = c.keys_with_prefix("sweep");
    if (!stray.empty()) throw ConfigError(stray.front() + ": unknown sweep key");
  }
  return out;
}

ScenarioConfig parse_body(const KeyValueConfig& c) {
  ScenarioConfig out;
  require(c.has("scenario"), "scenario", "missing");
  out.scenario = parse_kind(c.text("scenario", ""));

  NvMode nv_mode = NvMode::TwoLevel;
  if (out.scenario == ScenarioKind::RwaCheck) {
    nv_mode = NvMode::SpinOne;
  } else {
    const std::string m = c.text("nv.mode", "two_level");
    require(m == "two_level" || m == "spin_one", "nv.mode", "expected two_level|spin_one");
    nv_mode = m == "spin_one" ? NvMode::SpinOne : NvMode::TwoLevel;
  }
  auto sites = SpinSystem::standard(nv_mode).sites();
  const char* names[3] = {"qubit1", "nv", "qubit2"};
  for (int s = 0; s < 3; ++s) {
    sites[static_cast<std::size_t>(s)].magnetic_moment =
        positive(c, std::string(names[s]) + ".moment_muB", 2.0);
  }
  // Dephasing is read only where the pipeline uses it.
  auto read_t2 = [&] {
    for (int s = 0; s < 3; ++s) {
      sites[static_cast<std::size_t>(s)].t2 = t2_seconds(c, std::string(names[s]) + ".t2_ms");
    }
  };
  if (out.scenario == ScenarioKind::Static || out.scenario == ScenarioKind::Flying) read_t2();
  out.system = SpinSystem(sites);

  out.integrator.rtol = positive(c, "integrator.rtol", out.integrator.rtol);
  out.integrator.atol = positive(c, "integrator.atol", out.integrator.atol);
  const int max_steps = c.integer("integrator.max_steps", 20'000'000);
  require(max_steps >= 1, "integrator.max_steps", "must be at least 1");
  out.integrator.max_steps = static_cast<std::size_t>(max_steps);

  if (out.scenario == ScenarioKind::Flying) {
    out.qubit_coupling = QubitCoupling::Off;
    out.flight.separation = positive(c, "geometry.D_nm", 100.0) * kNm;
    out.flight.start_offset = positive(c, "geometry.z0_nm", 5.0) * kNm;
    require(out.flight.separation > 2.0 * out.flight.start_offset, "geometry.z0_nm",
            "must be less than half of geometry.D_nm");
    const auto v = c.number("flight.velocity_mps");
    out.flight.velocity = v ? *v
                            : optimal_velocity(out.flight.separation, out.flight.start_offset,
                                               out.system);
    require(out.flight.velocity > 0 && std::isfinite(out.flight.velocity), "flight.velocity_mps",
            "must be positive and finite");
    return out;
  }

  out.qubit_coupling =
      c.flag("coupling.qubit_qubit", true) ? QubitCoupling::Full : QubitCoupling::Off;
  out.geometry.delta = positive(c, "geometry.delta_nm", 10.0) * kNm;
  require(std::isfinite(out.geometry.delta), "geometry.delta_nm", "must be finite");

  if (out.scenario == ScenarioKind::RwaCheck) {
    out.zfs_over_zeeman = positive(c, "rwa.zfs_over_zeeman", 2.87);
    require(std::abs(out.zfs_over_zeeman - 1.0) > 1e-3, "rwa.zfs_over_zeeman",
            "must differ from 1 (resonant NV transition)");
    out.time_points = c.integer("time.points", 201);
    require(out.time_points >= 1, "time.points", "must be at least 1");
    return out;
  }

  out.time_points = c.integer("time.points", 401);
  require(out.time_points >= 2, "time.points", "must be at least 2");

  if (out.scenario == ScenarioKind::Vibrating) {
    out.mode.amplitude = c.number("mode.delta_nm", 0.0) * kNm;
    require(out.mode.amplitude >= 0, "mode.delta_nm", "must be non-negative");
    require(out.mode.amplitude < out.geometry.delta, "mode.delta_nm",
            "must be smaller than geometry.delta_nm");
    out.mode.angular_frequency = 2.0 * std::numbers::pi * 1e3 * c.number("mode.freq_khz", 100.0);
    require(out.mode.angular_frequency >= 0 && std::isfinite(out.mode.angular_frequency),
            "mode.freq_khz", "must be non-negative and finite");
    out.mode.phase = c.number("mode.phase_rad", 0.0);
    require(std::isfinite(out.mode.phase), "mode.phase_rad", "must be finite");

    const std::string method = c.text("vibrating.method", "exact");
    if (method == "exact") {
      out.method = VibratingMethod::Exact;
    } else if (method == "first_order") {
      out.method = VibratingMethod::FirstOrder;
    } else if (method == "second_order_phase") {
      out.method = VibratingMethod::SecondOrderPhase;
    } else {
      throw ConfigError("vibrating.method: expected exact|first_order|second_order_phase");
    }

    const std::string p = c.text("average.parameter", "none");
    if (p == "none") {
      out.average = AverageOver::None;
    } else if (p == "omega") {
      out.average = AverageOver::Frequency;
    } else if (p == "delta") {
      out.average = AverageOver::Amplitude;
    } else if (p == "phi") {
      out.average = AverageOver::Phase;
    } else {
      throw ConfigError("average.parameter: expected none|omega|delta|phi");
    }
    if (out.method == VibratingMethod::SecondOrderPhase && out.average != AverageOver::Phase) {
      throw ConfigError("vibrating.method: second_order_phase needs average.parameter=phi");
    }
    if (out.average != AverageOver::None) {
      if (out.average != AverageOver::Phase) {
        out.rel_sigma = positive(c, "average.rel_sigma", 0.01);
        const double mean = out.average == AverageOver::Frequency ? out.mode.angular_frequency
                                                                  : out.mode.amplitude;
        require(mean > 0, "average.parameter", "averaged parameter must have a positive mean");
        if (out.average == AverageOver::Amplitude) {
          require(out.mode.amplitude * (1.0 + 10.0 * out.rel_sigma) < out.geometry.delta,
                  "average.rel_sigma", "amplitude distribution reaches geometry.delta_nm");
        }
      }
      const std::string backend = c.text("average.backend", "quadrature");
      require(backend == "quadrature" || backend == "monte_carlo", "average.backend",
              "expected quadrature|monte_carlo");
      out.averaging.backend = backend == "quadrature" ? AveragingBackend::Quadrature
                                                      : AveragingBackend::MonteCarlo;
      out.averaging.nodes = c.integer("average.nodes", 33);
      require(out.averaging.nodes >= 1, "average.nodes", "must be at least 1");
      out.averaging.samples = c.integer("average.samples", 4096);
      require(out.averaging.samples >= 1, "average.samples", "must be at least 1");
      const double seed = c.number("average.seed", 20110425.0);
      require(seed >= 0 && seed == std::floor(seed) && seed < 1.8e19, "average.seed",
              "must be a non-negative integer");
      out.averaging.seed = static_cast<std::uint64_t>(seed);
      out.averaging.with_dephasing = c.flag("average.with_dephasing", false);
      if (out.averaging.with_dephasing) {
        read_t2();
        out.system = SpinSystem(sites);
      }
    }
  }
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(const KeyValueConfig& config) {
  KeyValueConfig c = config;
  c.reset_usage();
  std::optional<SweepAxis> sweep = extract_sweep(c);

  std::optional<SweepAxis> series;
  const auto series_keys = c.keys_with_prefix("series");
  if (series_keys.size() > 1) throw ConfigError("series: at most one series key");
  if (!series_keys.empty()) {
    series = SweepAxis{series_keys.front().substr(7), c.numbers(series_keys.front())};
    c.erase(series_keys.front());
    if (is_point_axis(series->key)) {
      throw ConfigError(series_keys.front() + ": series must name a config key");
    }
  }

  ScenarioConfig out = parse_body(c);
  c.reject_unused();
  out.sweep = sweep;
  out.series = series;
  out.base = c;

  const std::string scenario(to_string(out.scenario));
  if (sweep) {
    const std::string& k = sweep->key;
    if (is_point_axis(k)) {
      const bool ok = (k == "t_us" && (out.scenario == ScenarioKind::Static ||
                                       out.scenario == ScenarioKind::Vibrating)) ||
                      (k == "v_inverse" && out.scenario == ScenarioKind::Flying) ||
                      (k == "ratio" && out.scenario == ScenarioKind::RwaCheck);
      if (!ok) throw ConfigError("sweep." + k + ": not available for scenario " + scenario);
      for (double v : sweep->values) {
        require(std::isfinite(v) && (k == "t_us" ? v >= 0 : v > 0), "sweep." + k,
                "values out of range");
      }
    } else {
      for (double v : sweep->values) (void)with_value(out, k, v);
    }
  }
  if (series) {
    for (double v : series->values) (void)with_value(out, series->key, v);
  }
  return out;
}

ScenarioConfig with_value(const ScenarioConfig& config, const std::string& key, double value) {
  if (is_point_axis(key)) throw ConfigError(key + ": not a config key");
  KeyValueConfig c = config.base;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  c.set(key, buf);
  c.reset_usage();
  ScenarioConfig out = parse_body(c);
  c.reject_unused();
  out.base = c;
  out.sweep = config.sweep;
  out.series = config.series;
  return out;
}

}  // namespace nvent
