#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nvent/averaging.hpp"

namespace nvent {

/// Malformed or out-of-range configuration; the message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key=value` document with `#` comments. Every lookup marks the key as
/// consumed so leftovers can be reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  /// Adds or replaces an entry; `assignment` has the form key=value.
  void set(const std::string& key, const std::string& value);
  void apply_override(std::string_view assignment);
  void erase(const std::string& key);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::optional<double> number(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Marks every key below `prefix.` as consumed and returns them.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void reset_usage() const { used_.clear(); }

  /// Throws ConfigError listing keys never looked up.
  void reject_unused() const;

 private:
  const std::string& raw(const std::string& key) const;

  std::map<std::string, std::string> entries_;
  std::string source_;
  mutable std::set<std::string> used_;
};

/// Parses a double; accepts inf/infinity.
double parse_number(std::string_view text, const std::string& key);

enum class ScenarioKind { Static, Vibrating, Flying, RwaCheck };
enum class AverageOver { None, Frequency, Amplitude, Phase };
enum class VibratingMethod { Exact, FirstOrder, SecondOrderPhase };

/// One axis of a sweep. `key` is either a config key (mode.freq_khz, ...) or
/// one of the point axes t_us, v_inverse, ratio.
struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Static;
  SpinSystem system = SpinSystem::standard();
  StaticGeometry geometry{};
  FlightPath flight{};
  VibrationMode mode{};
  QubitCoupling qubit_coupling = QubitCoupling::Full;
  AverageOver average = AverageOver::None;
  double rel_sigma = 0.01;
  AveragingOptions averaging{};
  VibratingMethod method = VibratingMethod::Exact;
  int time_points = 401;
  IntegratorOptions integrator{};
  double zfs_over_zeeman = 2.87;
  std::optional<SweepAxis> sweep;
  std::optional<SweepAxis> series;

  /// Source entries without sweep/series keys; used to re-derive a config
  /// with one key replaced.
  KeyValueConfig base;
};

ScenarioConfig parse_scenario(const KeyValueConfig& config);

/// Copy of `config` with `key` set to `value` and re-validated. Point axes
/// (t_us, v_inverse, ratio) are not config keys and are rejected here.
ScenarioConfig with_value(const ScenarioConfig& config, const std::string& key, double value);

bool is_point_axis(const std::string& key);

std::string_view to_string(ScenarioKind kind);

}  // namespace nvent
