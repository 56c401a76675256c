// sepcov: separability tests for space-time covariance kernels.
//
// Exit codes: 0 test ran and did not reject, 3 test rejected,
// 1 runtime failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sepcov/bootstrap.hpp"
#include "sepcov/errors.hpp"
#include "sepcov/io.hpp"
#include "sepcov/simulate.hpp"
#include "sepcov/statistic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApproxOptions {
  std::string approx = "trace";
  std::optional<std::string> psi;
};

void add_approx_options(CLI::App* cmd, ApproxOptions& opt) {
  cmd->add_option("--approx", opt.approx, "separable approximation")
      ->check(CLI::IsMember({"trace", "product", "spca"}));
  cmd->add_option("--psi", opt.psi, "weight function for --approx product (default const)")
      ->check(CLI::IsMember({"const", "cosine"}));
}

sepcov::ApproxKind resolve_approx(const ApproxOptions& opt, const sepcov::AxisGrid& temporal) {
  if (opt.psi && opt.approx != "product") throw UsageError("--psi only applies to --approx product");
  if (opt.approx == "trace") return sepcov::ApproxKind::trace();
  if (opt.approx == "spca") return sepcov::ApproxKind::spca();
  const std::string psi = opt.psi.value_or("const");
  if (psi == "cosine") return sepcov::ApproxKind::product(sepcov::MarginalKernel::cosine(temporal), psi);
  return sepcov::ApproxKind::product(sepcov::MarginalKernel::constant(temporal, 1.0), psi);
}

std::optional<sepcov::SampleFormat> parse_format(const std::string& name) {
  if (name == "csv") return sepcov::SampleFormat::Csv;
  if (name == "bin") return sepcov::SampleFormat::Bin;
  return std::nullopt;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

// "S=4,6;N=100;c=0,1" -> {S: [4, 6], N: [100], c: [0, 1]}
std::map<std::string, std::vector<double>> parse_rows(const std::string& text) {
  std::map<std::string, std::vector<double>> axes;
  for (const auto& segment : split(text, ';')) {
    const auto eq = segment.find('=');
    if (eq == std::string::npos) throw UsageError("--rows: segment '" + segment + "' lacks '='");
    const std::string key = segment.substr(0, eq);
    if (key != "S" && key != "N" && key != "c") {
      throw UsageError("--rows: unknown key '" + key + "' (use S, N, c)");
    }
    for (const auto& v : split(segment.substr(eq + 1), ',')) {
      try {
        axes[key].push_back(std::stod(v));
      } catch (const std::exception&) {
        throw UsageError("--rows: cannot parse '" + v + "'");
      }
    }
  }
  if (!axes.count("S") || !axes.count("N")) throw UsageError("--rows must list S and N values");
  if (!axes.count("c")) axes["c"] = {0.0, 1.0};
  return axes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sup-norm bootstrap tests for separability of space-time covariance kernels"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file")->check(CLI::ExistingFile);
  app.allow_config_extras(false);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  // test
  auto* test = app.add_subcommand("test", "run the bootstrap separability test on a sample file");
  std::string test_in, test_out, test_format;
  ApproxOptions test_approx;
  std::size_t replicates = 400;
  std::optional<std::size_t> block_length;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t block_size = sepcov::kDefaultBlockSize;
  test->add_option("--in", test_in, "sample file (.csv or binary)")->required();
  test->add_option("--format", test_format, "override format detection")->check(CLI::IsMember({"csv", "bin"}));
  add_approx_options(test, test_approx);
  test->add_option("--replicates", replicates, "bootstrap replicates")->check(CLI::PositiveNumber);
  test->add_option("--block-length", block_length, "multiplier block length")->check(CLI::PositiveNumber);
  test->add_option("--alpha", alpha, "nominal level")->check(CLI::Range(0.0, 1.0));
  test->add_option("--seed", seed, "random seed");
  test->add_option("--block-size", block_size, "evaluation tile size")->check(CLI::PositiveNumber);
  test->add_option("--out", test_out, "report path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "write an MA(1) space-time sample file");
  sepcov::SimConfig sim;
  std::string sim_out, sim_format;
  bool sim_paper_grid = false;
  bool sim_integer_sites = false;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--a", sim.params.a, "temporal decay")->check(CLI::PositiveNumber);
  simulate->add_option("--b", sim.params.b, "spatial scale")->check(CLI::PositiveNumber);
  simulate->add_option("--c", sim.params.c, "separability-breaking exponent")->check(CLI::NonNegativeNumber);
  simulate->add_option("--S", sim.spatial, "spatial resolution")->check(CLI::Range(2, 1 << 20));
  simulate->add_option("--T", sim.temporal, "temporal gridpoints")->check(CLI::Range(2, 1 << 20));
  simulate->add_option("--N", sim.sample_size, "sample size")->check(CLI::Range(2, 1 << 30));
  simulate->add_option("--seed", sim_seed, "random seed");
  simulate->add_flag("--paper-grid", sim_paper_grid, "spatial grid 1/S..(S-1)/S");
  simulate->add_flag("--ma1-integer-sites", sim_integer_sites, "literal integer s' in the MA(1) smoother");
  simulate->add_option("--format", sim_format, "override format detection")->check(CLI::IsMember({"csv", "bin"}));
  simulate->add_option("--out", sim_out, "output sample file")->required();

  // table1
  auto* table1 = app.add_subcommand("table1", "Monte-Carlo rejection rates over (S, N, c) cells");
  std::string rows = "S=4;N=100;c=0,1";
  std::string table_out, table_json;
  sepcov::SimConfig tab;
  ApproxOptions tab_approx;
  std::optional<std::size_t> tab_block_length;
  bool tab_default_grid = false;
  bool tab_integer_sites = false;
  table1->add_option("--rows", rows, "cells, e.g. \"S=4,6;N=100,150;c=0,1\"");
  table1->add_option("--runs", tab.runs, "Monte-Carlo runs per cell")->check(CLI::PositiveNumber);
  table1->add_option("--T", tab.temporal, "temporal gridpoints")->check(CLI::Range(2, 1 << 20));
  table1->add_option("--replicates", tab.bootstrap.replicates, "bootstrap replicates")->check(CLI::PositiveNumber);
  table1->add_option("--alpha", tab.bootstrap.alpha, "nominal level")->check(CLI::Range(0.0, 1.0));
  table1->add_option("--block-length", tab_block_length, "override the block-length lookup")->check(CLI::PositiveNumber);
  table1->add_option("--a", tab.params.a, "temporal decay")->check(CLI::PositiveNumber);
  table1->add_option("--b", tab.params.b, "spatial scale")->check(CLI::PositiveNumber);
  table1->add_option("--seed", tab.seed, "random seed");
  table1->add_flag("--default-grid", tab_default_grid, "spatial grid 1/S..S/S instead of 1/S..(S-1)/S");
  table1->add_flag("--ma1-integer-sites", tab_integer_sites, "literal integer s' in the MA(1) smoother");
  add_approx_options(table1, tab_approx);
  table1->add_option("--out", table_out, "CSV path (default stdout)");
  table1->add_option("--json", table_json, "also write per-cell results as JSON");

  // relmeasure
  auto* rel = app.add_subcommand("relmeasure", "print ||C_N - C_N^x|| / ||C_N||");
  std::string rel_in, rel_format;
  ApproxOptions rel_approx;
  rel->add_option("--in", rel_in, "sample file")->required();
  rel->add_option("--format", rel_format, "override format detection")->check(CLI::IsMember({"csv", "bin"}));
  add_approx_options(rel, rel_approx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*test) {
      const auto fmt = test_format.empty() ? sepcov::format_from_path(test_in) : *parse_format(test_format);
      const auto sample = sepcov::read_sample(test_in, fmt);
      sepcov::BootstrapConfig cfg;
      cfg.kind = resolve_approx(test_approx, sample.grid().temporal);
      cfg.replicates = replicates;
      cfg.block_length = block_length.value_or(sepcov::default_block_length(sample.size()));
      cfg.alpha = alpha;
      cfg.seed = seed;
      cfg.block_size = block_size;
      cfg.threads = threads;
      if (cfg.block_length > sample.size()) throw UsageError("--block-length exceeds the sample size");
      const auto report = sepcov::run_test(sample, cfg);
      write_text(test_out, sepcov::report_to_json(report).dump(2) + "\n");
      return report.reject ? kExitReject : kExitOk;
    }

    if (*simulate) {
      sim.paper_grid = sim_paper_grid;
      sim.sites = sim_integer_sites ? sepcov::Ma1Sites::Integer : sepcov::Ma1Sites::Grid;
      const auto sample = sepcov::simulate_sample(sim, sim_seed);
      const auto fmt = sim_format.empty() ? sepcov::format_from_path(sim_out) : *parse_format(sim_format);
      sepcov::write_sample(sim_out, sample, fmt);
      return kExitOk;
    }

    if (*table1) {
      const auto axes = parse_rows(rows);
      tab.paper_grid = !tab_default_grid;
      tab.sites = tab_integer_sites ? sepcov::Ma1Sites::Integer : sepcov::Ma1Sites::Grid;
      tab.threads = threads;
      std::ostringstream csv;
      sepcov::write_table_header(csv);
      nlohmann::json cells = nlohmann::json::array();
      for (double s : axes.at("S")) {
        for (double n : axes.at("N")) {
          for (double c : axes.at("c")) {
            sepcov::SimConfig cell = tab;
            cell.spatial = static_cast<std::size_t>(s);
            cell.sample_size = static_cast<std::size_t>(n);
            cell.params.c = c;
            if (cell.spatial < 2 || cell.sample_size < 2) throw UsageError("--rows: S and N must be >= 2");
            const auto grid = sepcov::simulation_grid(cell.spatial, cell.temporal, cell.paper_grid);
            cell.bootstrap.kind = resolve_approx(tab_approx, grid.temporal);
            cell.bootstrap.block_length =
                tab_block_length.value_or(sepcov::default_block_length(cell.sample_size));
            const auto result = sepcov::run_experiment(cell);
            sepcov::write_table_row(csv, result);
            cells.push_back(sepcov::experiment_to_json(result));
            std::cerr << "S=" << cell.spatial << " N=" << cell.sample_size << " c=" << c
                      << " rejection_rate=" << result.rejection_rate << " (" << result.wall_time_s
                      << " s)\n";
          }
        }
      }
      write_text(table_out, csv.str());
      if (!table_json.empty()) write_text(table_json, cells.dump(2) + "\n");
      return kExitOk;
    }

    if (*rel) {
      const auto fmt = rel_format.empty() ? sepcov::format_from_path(rel_in) : *parse_format(rel_format);
      const auto sample = sepcov::read_sample(rel_in, fmt);
      const auto kind = resolve_approx(rel_approx, sample.grid().temporal);
      const sepcov::LazyCovariance cov(sample);
      const auto measure = sepcov::relative_measure(cov, kind);
      std::cout.precision(17);
      std::cout << measure.value << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sepcov::DegenerateKernelError& e) {
    std::cerr << "degenerate kernel: " << e.what() << "\n";
    return kExitError;
  } catch (const sepcov::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
