#pragma once

// CSV, JSON and plot-data output for result bundles.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpd/experiment.hpp"

namespace qpd {

// 17 significant digits; always carries '.', 'e', "nan" or "inf" so that a
// reader can tell doubles from integers.
std::string format_double(double x);

std::string to_csv(const Table& table);
// Inverse of to_csv: integers, doubles and strings are told apart by their
// spelling.
Table parse_csv(const std::string& text, const std::string& name);
Table read_csv(const std::filesystem::path& path);

nlohmann::json to_json(const ResultBundle& bundle);
// Two whitespace-separated columns with a '#' header.
std::string to_plot_data(const PlotSeries& series);

struct RunInfo {
  std::string started_utc;
  double wall_seconds = 0;
};

// Writes <table>.csv per table, <experiment>.json, <series>.dat per plot
// and manifest.json into dir (created if missing). Returns the file names.
std::vector<std::string> emit(const ResultBundle& bundle, const ExperimentConfig& cfg,
                              const std::filesystem::path& dir, const RunInfo& info);

}  // namespace qpd
