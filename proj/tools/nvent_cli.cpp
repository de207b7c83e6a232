// nvent: command-line driver for the scenarios and figure sweeps.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "nvent/experiments.hpp"
#include "nvent/parallel.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

void emit(const std::string& text, const std::string& out_dir, const std::string& file) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / file;
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::cerr << "wrote " << path.string() << "\n";
}

int report_rwa(const nvent::RwaReport& report, const std::string& out_dir, const std::string& stem) {
  emit(nvent::format_csv(report.table()), out_dir, stem + ".csv");
  std::fprintf(stderr, "rwa-check: log-log slope %.3f, deficit %s with ratio\n", report.slope,
               report.monotone ? "decreasing" : "NOT decreasing");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-mediated entanglement via a dipole-coupled NV sensor"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: SIM_THREADS, else all cores)");

  std::string config_path, out_dir, figure_dir;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "run a scenario config and emit its CSV");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (default: stdout)");

  auto* rwa = app.add_subcommand("rwa-check", "lab frame against rotating-wave dynamics");
  rwa->add_option("config", config_path, "config file")->required();
  rwa->add_option("--out", out_dir, "output directory (default: stdout)");

  auto* validate = app.add_subcommand("validate", "parse and check a config only");
  validate->add_option("config", config_path, "config file")->required();

  std::vector<std::pair<CLI::App*, nvent::FigureOutput (*)(const nvent::KeyValueConfig&, int)>>
      figures;
  for (auto [name, fn] : {std::pair{"fig2", &nvent::fig2}, std::pair{"fig3a", &nvent::fig3a},
                          std::pair{"fig3b", &nvent::fig3b}, std::pair{"fig4", &nvent::fig4}}) {
    auto* sub = app.add_subcommand(name, std::string("reproduce ") + name);
    sub->add_option("--out", figure_dir, "output directory")->default_val("out");
    sub->add_option("--override", overrides, "key=value applied over the figure defaults");
    figures.emplace_back(sub, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    const int workers = nvent::resolve_thread_count(threads);
    const std::string stem = std::filesystem::path(config_path).stem().string();
    if (*validate) {
      const auto config = nvent::parse_scenario(nvent::KeyValueConfig::load(config_path));
      std::cout << config_path << ": ok (" << nvent::to_string(config.scenario) << ")\n";
      return 0;
    }
    if (*run || *rwa) {
      const auto config = nvent::parse_scenario(nvent::KeyValueConfig::load(config_path));
      if (config.scenario == nvent::ScenarioKind::RwaCheck) {
        return report_rwa(nvent::rwa_check(config, workers), out_dir, stem);
      }
      if (*rwa) throw nvent::ConfigError("scenario: rwa-check needs scenario=rwa_check");
      emit(nvent::format_csv(nvent::run_scenario(config, workers).table()), out_dir,
           stem + ".csv");
      return 0;
    }
    for (const auto& [sub, fn] : figures) {
      if (!*sub) continue;
      nvent::KeyValueConfig extra;
      for (const auto& o : overrides) extra.apply_override(o);
      const auto figure = fn(extra, workers);
      nvent::write_figure(figure, figure_dir);
      std::cerr << "wrote " << (std::filesystem::path(figure_dir) / (figure.name + ".csv")).string()
                << " and " << figure.name << ".plot\n";
    }
    return 0;
  } catch (const nvent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nvent::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nvent::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
