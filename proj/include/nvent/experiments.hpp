#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nvent/config.hpp"

namespace nvent {

/// Rectangular numeric table with named columns.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// %.16e, with nan / inf / -inf spelled out.
std::string format_number(double x);

/// Comma-separated, header row, '\n' line ends.
std::string format_csv(const Table& table);

struct SweepRow {
  std::vector<double> coordinates;
  double p_plus = 0.0;
  double p_minus = 0.0;
  double ef_plus = 0.0;   // nan when the branch is undefined
  double ef_minus = 0.0;
  double mean_ef = 0.0;
  double max_mean_ef = 0.0;  // rows of a maximisation only
  double argmax_t_us = 0.0;
  std::vector<double> extras;
};

struct SweepResult {
  std::vector<std::string> coordinate_names;
  std::vector<std::string> extra_names;
  bool maximised = false;
  std::vector<SweepRow> rows;

  Table table() const;
};

/// Probabilities in [0,1] (1e-12 slack) summing to 1 within 1e-10, EF in [0,1]
/// (nan only for an undefined branch). Throws NumericError naming the coordinates.
void check_row(const SweepRow& row, const std::vector<std::string>& coordinate_names);

/// Runs the configured pipeline at every sweep (and series) point. Rows come
/// out in parameter order whatever the thread count.
SweepResult run_scenario(const ScenarioConfig& config, int threads = 1);

struct FigureOutput {
  std::string name;
  Table table;
  std::string plot_script;
};

/// Mean EF against t for T2 = inf, 2 ms on every site and 2 ms on the NV only.
FigureOutput fig2(const KeyValueConfig& overrides, int threads = 1);
/// M against the mean vibration frequency, exact and first-order columns per amplitude.
FigureOutput fig3a(const KeyValueConfig& overrides, int threads = 1);
/// M against the amplitude for uniform phases, exact and second-order columns per frequency.
FigureOutput fig3b(const KeyValueConfig& overrides, int threads = 1);
/// Single-pass flying sensor against 1/v.
FigureOutput fig4(const KeyValueConfig& overrides, int threads = 1);

/// Writes <name>.csv and <name>.plot into `dir` (created if needed).
void write_figure(const FigureOutput& figure, const std::filesystem::path& dir);

struct RwaPoint {
  double ratio = 0.0;
  double max_deficit = 0.0;  // 1 - min_t fidelity
};

struct RwaReport {
  std::vector<RwaPoint> points;
  /// Least-squares slope of log deficit against log ratio.
  double slope = 0.0;
  bool monotone = false;

  Table table() const;
};

/// Largest fidelity deficit on [0, 2 pi/|alpha|] between the lab-frame state
/// (taken to the rotating frame of H_0) and the rotating-wave evolution. The
/// qubit Zeeman frequency is ratio |alpha| and the zero-field splitting is
/// zfs_over_zeeman times that.
double rwa_fidelity_deficit(const SpinSystem& system, const StaticGeometry& g, double ratio,
                            double zfs_over_zeeman, QubitCoupling qq, int time_points);

RwaReport rwa_check(const ScenarioConfig& config, int threads = 1);

}  // namespace nvent
