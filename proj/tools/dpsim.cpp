#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpsim/attack.hpp"
#include "dpsim/experiment.hpp"
#include "dpsim/experiment_config.hpp"
#include "dpsim/simulator.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kInvariant = 2, kEscape = 3 };

struct CommonOpts {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  unsigned parallel = 1;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("config,--config", o.config, "Experiment config (TOML-style or .json)")->required();
  cmd->add_option("--out", o.out, "CSV output path (default: config 'out' or stdout)");
  cmd->add_option("--seeds", o.seeds, "Comma-separated seeds, replacing the config's list")->delimiter(',');
  cmd->add_option("--parallel", o.parallel, "Worker threads for independent runs")->check(CLI::PositiveNumber);
  cmd->add_option("--override", o.overrides, "key=value applied after the file (dot path)");
  cmd->add_flag("--quiet", o.quiet, "No summary table on stderr");
}

dpsim::ExperimentConfig load(const CommonOpts& o) {
  auto cfg = dpsim::load_config_file(o.config, o.overrides);
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  cfg.validate();
  return cfg;
}

// Writes through a temporary file so a failed run never leaves a partial CSV.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << text;
  }
  std::filesystem::rename(tmp, path);
}

void print_table(const std::vector<dpsim::PointResult>& results) {
  std::fprintf(stderr, "%-36s %-12s %5s %12s %12s %10s %10s %10s\n", "experiment", "policy", "seed", "offered",
               "throughput", "p50_us", "p99_us", "util");
  for (const auto& r : results) {
    for (const auto& row : dpsim::csv_rows(r)) {
      std::fprintf(stderr, "%-36s %-12s %5llu %12.0f %12.0f %10.2f %10.2f %10.3f\n", row.experiment.c_str(),
                   row.policy.c_str(), static_cast<unsigned long long>(row.seed), row.offered_load_ops,
                   row.throughput_ops, static_cast<double>(row.p50_ns) / 1e3, static_cast<double>(row.p99_ns) / 1e3,
                   row.util_mean);
    }
  }
}

std::string csv_text(const std::vector<dpsim::PointResult>& results) {
  std::vector<dpsim::CsvRow> rows;
  for (const auto& r : results) {
    for (auto& row : dpsim::csv_rows(r)) rows.push_back(std::move(row));
  }
  std::ostringstream os;
  dpsim::write_csv(os, rows);
  return os.str();
}

int cmd_run(const CommonOpts& o) {
  const auto cfg = load(o);
  const auto results = dpsim::run_points(dpsim::expand_run(cfg), o.parallel);
  emit(o.out.empty() ? cfg.out : o.out, csv_text(results));
  if (!o.quiet) print_table(results);
  return kOk;
}

int cmd_sweep(const CommonOpts& o, const std::string& axis_name) {
  const auto cfg = load(o);
  dpsim::SweepAxis axis{};
  if (!axis_name.empty()) {
    axis = dpsim::parse_sweep_axis(axis_name);
  } else {
    const auto present = cfg.sweep.present();
    if (present.size() != 1) {
      throw dpsim::ConfigError(present.empty() ? "sweep: the config lists no [sweep] values"
                                               : "sweep: several [sweep] axes present; choose one with --axis");
    }
    axis = present.front();
  }
  const auto results = dpsim::run_points(dpsim::expand_sweep(cfg, axis), o.parallel);
  const std::string out = o.out.empty() ? cfg.out : o.out;
  emit(out, csv_text(results));
  if (!out.empty() && out != "-") {
    std::string side(dpsim::kSweepCsvHeader);
    side += '\n';
    for (const auto& r : results) side += dpsim::sweep_csv_row(r) + '\n';
    emit(out + ".sweep.csv", side);
  }
  if (!o.quiet) print_table(results);
  return kOk;
}

int cmd_attack(const std::string& path, bool quiet, bool directed) {
  std::ifstream in(path);
  if (!in) throw dpsim::ConfigError(path + ": cannot open corpus");
  const auto corpus = dpsim::attack::parse_corpus(in, path);
  const auto report = dpsim::attack::replay(corpus);
  if (!quiet) {
    for (const auto& v : report.verdicts) {
      std::printf("line %zu: %s%s%s\n", v.line, std::string(dpsim::attack::to_string(v.actual)).c_str(),
                  v.matches ? "" : " MISMATCH", v.escape ? " ESCAPE" : "");
    }
  }
  std::size_t escapes = report.escapes;
  for (const auto& viol : report.trace_violations) {
    if (viol.kind == dpsim::protection::ViolationKind::ckey_changed_outside_gate) ++escapes;
  }
  std::size_t directed_failures = 0;
  if (directed) {
    for (const auto& t : dpsim::attack::directed_traces(corpus.gates)) {
      const auto found = dpsim::protection::verify_gate_trace(t.trace, corpus.gates);
      for (const auto& viol : found) {
        if (viol.kind == dpsim::protection::ViolationKind::ckey_changed_outside_gate) ++escapes;
      }
      const bool ok = found == t.expected;
      if (!ok) ++directed_failures;
      if (!quiet) {
        std::printf("trace '%s': %zu violation(s)%s\n", t.name.c_str(), found.size(), ok ? "" : " UNEXPECTED");
      }
    }
  }
  std::printf("attempts=%zu faults=%zu full=%zu low30=%zu mismatches=%zu escapes=%zu directed_failures=%zu\n",
              report.verdicts.size(), report.faults, report.full_writes, report.low_writes, report.mismatches, escapes,
              directed_failures);
  if (escapes > 0) return kEscape;
  if (report.mismatches > 0 || directed_failures > 0) return kInvariant;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of decentralized protected data-plane scheduling"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  auto* run = app.add_subcommand("run", "Run every (load, seed) point of a config and write CSV");
  add_common(run, run_opts);

  CommonOpts sweep_opts;
  std::string axis;
  auto* sweep = app.add_subcommand("sweep", "Run a config across one [sweep] axis");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis, "load, cores, io_cores, n or t");

  std::string corpus;
  bool attack_quiet = false;
  bool no_directed = false;
  auto* attack = app.add_subcommand("attack", "Replay a WRPKRU corpus through the gate model");
  attack->add_option("corpus,--corpus", corpus, "Corpus file")->required();
  attack->add_flag("--quiet", attack_quiet, "Only print the summary line");
  attack->add_flag("--no-directed", no_directed, "Skip the built-in control-flow attack traces");

  auto* list = app.add_subcommand("list-presets", "List built-in experiment presets");

  CommonOpts validate_opts;
  auto* validate = app.add_subcommand("validate", "Check a config and print its canonical form");
  validate->add_option("config,--config", validate_opts.config, "Experiment config")->required();
  validate->add_option("--override", validate_opts.overrides, "key=value applied after the file");

  std::string preset;
  auto* show = app.add_subcommand("show", "Print a preset as a config file");
  show->add_option("preset", preset, "Preset name")->required();

  std::size_t gen_lines = 100000;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-corpus", "Write a random WRPKRU attack corpus");
  gen->add_option("--lines", gen_lines, "Number of attempts");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, axis);
    if (*attack) return cmd_attack(corpus, attack_quiet, !no_directed);
    if (*list) {
      for (const auto& name : dpsim::preset_names()) {
        const auto cfg = dpsim::build_experiment(name);
        std::printf("%-18s %-12s", name.c_str(), std::string(dpsim::sched::to_string(cfg.policy)).c_str());
        for (const auto& a : cfg.apps) {
          std::printf(" %s:%ux%s", a.name.c_str(), cfg.app_cores(static_cast<std::size_t>(&a - cfg.apps.data())),
                      dpsim::render_service(a.service).c_str());
        }
        std::printf("\n");
      }
      return kOk;
    }
    if (*validate) {
      const auto cfg = dpsim::load_config_file(validate_opts.config, validate_opts.overrides);
      std::cout << dpsim::render_config(cfg);
      return kOk;
    }
    if (*show) {
      std::cout << dpsim::render_config(dpsim::build_experiment(preset));
      return kOk;
    }
    if (*gen) {
      std::ostringstream os;
      dpsim::attack::generate_corpus(os, gen_lines, gen_seed);
      emit(gen_out, os.str());
      return kOk;
    }
  } catch (const dpsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "invariant violated: %s\n", e.what());
    return kInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kOk;
}
