#pragma once

// Experiment configuration and the sweep runner behind the CLI.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qpd/bath.hpp"
#include "qpd/grover.hpp"

namespace qpd {

struct BathSpec {
  std::string kind = "none";  // none, thermal_bosonic, tabulated, dirac_probe
  ThermalParams thermal;
  std::vector<std::pair<double, double>> samples;  // tabulated, inline
  std::string table_path;                          // tabulated, two-column CSV
  double omega0 = 0;                               // dirac_probe
  double weight = 1;
  double scale = 1;
  bool mirror = false;  // f(-omega): thermal form -> single-operator convention

  bool operator==(const BathSpec&) const = default;
};

struct ExperimentConfig {
  std::string experiment;  // spectrum, ed, sweep, response, grover, scaling
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output;

  std::string model = "ising_ring";
  std::uint64_t marked = 0;
  std::vector<int> n_list;
  std::vector<double> g_grid;
  int levels = 2;
  std::string sector = "physical";  // physical, full, even, odd
  bool derivatives = false;
  double fd_step = 1e-3;

  std::vector<std::string> schedules{"linear"};
  std::vector<double> t_list;
  double epsilon = 0;  // with an empty T list: T = adiabatic_runtime(kind, N, epsilon)
  double frozen_g = 0;

  std::string modes = "lowest";  // lowest, positive, all, explicit
  std::vector<double> ka;
  std::vector<double> kpa;
  std::vector<double> omega;
  double omega_jitter = 0;  // fraction of the local half spacing, uses seed

  std::string channel = "uniform_x";
  double lambda = 1;
  std::vector<std::string> methods{"quadrature"};
  bool extended = false;
  bool switching = false;
  bool pair_phase = false;
  double rho = 3;
  std::string source = "asymptotic";

  BathSpec bath;
  ChannelWeights weights;
  double multiplier = 1;
  bool estimate_only = false;
  double omega_cap = 4;

  std::string study;    // scaling: gap_law, mixed_gap, near_gap_bound, bitflip,
                        // total_error, grover_estimate
  double probe_ka = 0;  // 0: pi/N

  bool operator==(const ExperimentConfig&) const;
};

// Strict: unknown keys, unsorted or empty required grids and bad enum
// strings throw Error(config). Relative table paths resolve against base.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

// SHA-256 of the canonical JSON without threads and output.
std::string config_hash(const ExperimentConfig& cfg);

SpectralFunction make_bath(const BathSpec& spec);

using Cell = std::variant<long long, double, std::string>;
using Row = std::vector<Cell>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<Row> rows;

  bool operator==(const Table&) const;
};

struct PlotSeries {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ResultBundle {
  std::string experiment;
  std::vector<Table> tables;  // first is the primary table
  std::vector<PlotSeries> plots;
  int nonconverged = 0;  // rows with status "nonconverged"
  int failed = 0;        // rows carrying an error code
};

// Rows fan out to min(threads, items) workers; order is restored before
// returning. Row failures are recorded in the status column.
ResultBundle run(const ExperimentConfig& cfg);

}  // namespace qpd
