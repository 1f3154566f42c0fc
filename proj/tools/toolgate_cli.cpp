// toolgate: corpus generation, matrix runs, reporting and pack linting.

#include "toolgate/builtin_packs.hpp"
#include "toolgate/dsl.hpp"
#include "toolgate/pack_lint.hpp"
#include "toolgate/report.hpp"
#include "toolgate/runner.hpp"
#include "toolgate/suites.hpp"
#include "toolgate/trace_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int cmd_gen(const std::string& suite_name, std::uint64_t seed, const toolgate::GenOptions& gen,
            const std::string& out) {
  const auto suite = toolgate::parse_suite(suite_name);
  if (!suite) throw ConfigFailure("unknown suite '" + suite_name + "'");
  const auto corpus = toolgate::generate_suite(*suite, seed, gen);
  toolgate::write_corpus(corpus, out);
  std::cout << "wrote " << corpus.trace.size() << " steps to " << out << "\n";
  return kExitOk;
}

int cmd_run(const std::string& matrix_path, const std::string& out, bool measure_overhead, bool quiet) {
  toolgate::MatrixConfig config;
  if (!matrix_path.empty()) {
    const std::filesystem::path p(matrix_path);
    std::string text;
    try {
      text = toolgate::read_file(p);
    } catch (const std::exception& e) {
      throw ConfigFailure(e.what());
    }
    config = toolgate::parse_matrix_config(text, p.parent_path());
  }
  if (measure_overhead) config.measure_overhead = true;
  const auto start = std::chrono::steady_clock::now();
  const auto run = toolgate::run_matrix(config, out, [&](const toolgate::CellSpec& cell, std::size_t i, std::size_t n) {
    if (!quiet) std::cerr << "[" << (i + 1) << "/" << n << "] " << cell.key().id() << "\n";
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "completed " << run.results.size() << " runs in " << secs << " s; tables in " << out << "\n";
  return kExitOk;
}

int cmd_report(const std::string& runs, const std::string& format, int table) {
  if (format != "csv" && format != "json") throw ConfigFailure("format must be csv or json");
  const auto report = toolgate::build_report(toolgate::load_results(runs));
  if (format == "json") {
    std::cout << toolgate::report_to_json(report).dump(2) << "\n";
  } else {
    if (table != 2) std::cout << toolgate::table1_csv(report);
    if (table == 0) std::cout << "\n";
    if (table != 1) std::cout << toolgate::table2_csv(report);
  }
  return kExitOk;
}

int cmd_lint(const std::string& pack_path, const std::string& builtin, bool print) {
  toolgate::PolicyPack pack;
  if (!builtin.empty()) {
    const auto level = toolgate::parse_level(builtin);
    if (!level || *level == toolgate::PackLevel::Custom) throw ConfigFailure("unknown builtin pack '" + builtin + "'");
    pack = toolgate::builtin_pack(*level);
  } else {
    std::string text;
    try {
      text = toolgate::read_file(pack_path);
    } catch (const std::exception& e) {
      throw ConfigFailure(e.what());
    }
    pack = toolgate::parse_pack(text);
  }
  if (print) std::cout << toolgate::print_pack(pack);
  const auto diags = toolgate::validate_pack(pack, toolgate::default_registry());
  for (const auto& d : diags) std::cerr << d.code << ": " << d.policy << ": " << d.message << "\n";
  if (!diags.empty()) return kExitConfig;
  if (!print) std::cout << "ok: " << pack.policies.size() << " policies\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolgate: policy enforcement for tool calls and trace-replay benchmark"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a suite corpus");
  std::string suite;
  std::uint64_t gen_seed = 1;
  toolgate::GenOptions gen_opts;
  std::string gen_out;
  gen->add_option("--suite", suite, "Suite A..E")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--traces", gen_opts.traces, "Traces per suite")->check(CLI::NonNegativeNumber);
  gen->add_option("--steps", gen_opts.steps, "Steps per trace")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run the experiment matrix");
  std::string matrix_path;
  std::string run_out;
  bool measure_overhead = false;
  bool quiet = false;
  run->add_option("--matrix", matrix_path, "Matrix YAML (default: built-in 225-cell matrix)");
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_flag("--measure-overhead", measure_overhead, "Record wall-clock PDP+PEP overhead");
  run->add_flag("-q,--quiet", quiet, "No per-cell progress");

  auto* report = app.add_subcommand("report", "Aggregate tables from a run directory");
  std::string runs_dir;
  std::string format = "csv";
  int table = 0;
  report->add_option("--runs", runs_dir, "Matrix output directory")->required();
  report->add_option("--format", format, "csv or json");
  report->add_option("--table", table, "1 or 2 (default both)")->check(CLI::Range(0, 2));

  auto* lint = app.add_subcommand("lint", "Validate a policy pack");
  std::string pack_path;
  std::string builtin;
  bool print = false;
  auto* pack_opt = lint->add_option("--pack", pack_path, "Policy pack file");
  auto* builtin_opt = lint->add_option("--builtin", builtin, "Built-in pack P0..P4");
  pack_opt->excludes(builtin_opt);
  lint->add_flag("--print", print, "Print the canonical pack text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(suite, gen_seed, gen_opts, gen_out);
    if (*run) return cmd_run(matrix_path, run_out, measure_overhead, quiet);
    if (*report) return cmd_report(runs_dir, format, table);
    if (*lint) {
      if (pack_path.empty() && builtin.empty()) throw ConfigFailure("lint needs --pack or --builtin");
      return cmd_lint(pack_path, builtin, print);
    }
  } catch (const ConfigFailure& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const toolgate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const toolgate::DslError& e) {
    std::cerr << "pack error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRun;
  }
  return kExitOk;
}
