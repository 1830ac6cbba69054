#include "qpd/emit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qpd/error.hpp"

#ifndef QPD_VERSION
#define QPD_VERSION "0.0.0"
#endif

namespace qpd {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string quote(const std::string& s, bool force = false) {
  if (!force && s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Cell parse_cell(const std::string& s, bool quoted);

std::string cell_text(const Cell& c) {
  if (auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (auto* d = std::get_if<double>(&c)) return format_double(*d);
  // Strings that would read back as numbers are quoted.
  const std::string& s = std::get<std::string>(c);
  return quote(s, !std::holds_alternative<std::string>(parse_cell(s, false)));
}

// Splits one CSV record; handles quoted fields without embedded newlines.
std::vector<std::pair<std::string, bool>> split_record(const std::string& line) {
  std::vector<std::pair<std::string, bool>> out;
  std::string cur;
  bool quoted = false, in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = quoted = true;
    } else if (c == ',') {
      out.emplace_back(cur, quoted);
      cur.clear();
      quoted = false;
    } else {
      cur += c;
    }
  }
  require(!in_quotes, ErrorCode::io, "csv: unterminated quote");
  out.emplace_back(cur, quoted);
  return out;
}

Cell parse_cell(const std::string& s, bool quoted) {
  if (quoted || s.empty()) return s;
  const char* b = s.data();
  const char* e = b + s.size();
  long long i = 0;
  auto [pi, ei] = std::from_chars(b, e, i);
  if (ei == std::errc() && pi == e) return i;
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double d = 0;
  auto [pd, ed] = std::from_chars(b, e, d);
  if (ed == std::errc() && pd == e) return d;
  return s;
}

json cell_json(const Cell& c) {
  if (auto* i = std::get_if<long long>(&c)) return *i;
  if (auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(nullptr);
  return std::get<std::string>(c);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out += (i ? "," : "") + quote(table.columns[i]);
  out += '\n';
  for (const Row& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + cell_text(r[i]);
    out += '\n';
  }
  return out;
}

Table parse_csv(const std::string& text, const std::string& name) {
  Table t;
  t.name = name;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_record(line);
    if (header) {
      for (auto& [f, q] : fields) t.columns.push_back(f);
      header = false;
      continue;
    }
    require(fields.size() == t.columns.size(), ErrorCode::io, "csv: ragged row");
    Row r;
    for (auto& [f, q] : fields) r.push_back(parse_cell(f, q));
    t.rows.push_back(std::move(r));
  }
  require(!header, ErrorCode::io, "csv: missing header");
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.stem().string());
}

json to_json(const ResultBundle& bundle) {
  json j;
  j["experiment"] = bundle.experiment;
  json tables = json::object();
  for (const Table& t : bundle.tables) {
    json rows = json::array();
    for (const Row& r : t.rows) {
      json row = json::array();
      for (const Cell& c : r) row.push_back(cell_json(c));
      rows.push_back(std::move(row));
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
  }
  j["tables"] = std::move(tables);
  return j;
}

std::string to_plot_data(const PlotSeries& s) {
  std::string out = "# " + s.x_label + " " + s.y_label + "\n";
  for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
    out += format_double(s.x[i]) + " " + format_double(s.y[i]) + "\n";
  return out;
}

std::vector<std::string> emit(const ResultBundle& bundle, const ExperimentConfig& cfg,
                              const std::filesystem::path& dir, const RunInfo& info) {
  require(!bundle.tables.empty(), ErrorCode::io, "emit: no results");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::string> files;
  for (const Table& t : bundle.tables) {
    files.push_back(t.name + ".csv");
    write_file(dir / files.back(), to_csv(t));
  }
  files.push_back(bundle.experiment + ".json");
  write_file(dir / files.back(), to_json(bundle).dump(1) + "\n");
  for (const PlotSeries& p : bundle.plots) {
    files.push_back(p.name + ".dat");
    write_file(dir / files.back(), to_plot_data(p));
  }

  json m;
  m["experiment"] = bundle.experiment;
  m["config_hash"] = config_hash(cfg);
  m["config"] = to_json(cfg);
  m["version"] = QPD_VERSION;
  m["compiler"] = __VERSION__;
  m["started_utc"] = info.started_utc;
  m["wall_seconds"] = info.wall_seconds;
  m["threads"] = cfg.threads;
  m["seed"] = cfg.seed;
  std::size_t rows = 0;
  for (const Table& t : bundle.tables) rows += t.rows.size();
  m["rows"] = rows;
  m["nonconverged"] = bundle.nonconverged;
  m["failed"] = bundle.failed;
  m["files"] = files;
  write_file(dir / "manifest.json", m.dump(1) + "\n");
  files.push_back("manifest.json");
  return files;
}

}  // namespace qpd
