#include "qpd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include <openssl/evp.h>

#include "qpd/error.hpp"
#include "qpd/exact_diag.hpp"
#include "qpd/fit.hpp"
#include "qpd/ising_spectral.hpp"
#include "qpd/response.hpp"
#include "qpd/schedule.hpp"

namespace qpd {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::config, what);
}

// Numbers may be spelled "inf", "-inf" or "nan" so that non-finite values
// survive a JSON round trip.
double get_number(const json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return kNaN;
  }
  config_error("'" + key + "' must be a number");
}

json put_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::vector<double> get_grid(const json& j, const std::string& key) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const json& v : j) out.push_back(get_number(v, key));
    return out;
  }
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "start" && it.key() != "stop" && it.key() != "count")
        config_error("unknown key '" + it.key() + "' in grid '" + key + "'");
    if (!j.contains("start") || !j.contains("stop") || !j.contains("count"))
      config_error("grid '" + key + "' needs start, stop and count");
    double a = get_number(j["start"], key), b = get_number(j["stop"], key);
    if (!j["count"].is_number_integer()) config_error("grid '" + key + "': count not an integer");
    int n = j["count"].get<int>();
    if (n < 1) config_error("grid '" + key + "': count < 1");
    if (n == 1) return {a};
    for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? b : a + (b - a) * i / (n - 1));
    return out;
  }
  config_error("'" + key + "' must be a list or {start, stop, count}");
}

std::vector<int> get_int_list(const json& j, const std::string& key) {
  std::vector<int> out;
  if (j.is_array()) {
    for (const json& v : j) {
      if (!v.is_number_integer()) config_error("'" + key + "' entries must be integers");
      out.push_back(v.get<int>());
    }
    return out;
  }
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "start" && it.key() != "stop" && it.key() != "step")
        config_error("unknown key '" + it.key() + "' in list '" + key + "'");
    int a = j.value("start", 0), b = j.value("stop", -1), s = j.value("step", 1);
    if (s <= 0) config_error("'" + key + "': step must be positive");
    for (int v = a; v <= b; v += s) out.push_back(v);
    return out;
  }
  config_error("'" + key + "' must be a list of integers");
}

std::vector<std::string> get_string_list(const json& j, const std::string& key) {
  if (!j.is_array()) config_error("'" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const json& v : j) {
    if (!v.is_string()) config_error("'" + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <class T>
T get_typed(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error("'" + key + "' has the wrong type");
  }
}

bool one_of(const std::string& s, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (s == o) return true;
  return false;
}

template <class V>
void require_sorted(const std::vector<V>& v, const std::string& key, bool strict) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (strict ? !(v[i - 1] < v[i]) : !(v[i - 1] <= v[i]))
      config_error("'" + key + "' must be sorted ascending");
}

BathSpec parse_bath(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) config_error("'bath' must be an object");
  BathSpec b;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "kind") b.kind = get_typed<std::string>(v, k);
    else if (k == "theta") b.thermal.theta = get_number(v, k);
    else if (k == "omega_ph") b.thermal.omega_ph = get_number(v, k);
    else if (k == "epsilon") b.thermal.epsilon = get_number(v, k);
    else if (k == "omega_c") b.thermal.omega_c = get_number(v, k);
    else if (k == "beta") b.thermal.beta = get_number(v, k);
    else if (k == "omega0") b.omega0 = get_number(v, k);
    else if (k == "weight") b.weight = get_number(v, k);
    else if (k == "scale") b.scale = get_number(v, k);
    else if (k == "mirror") b.mirror = get_typed<bool>(v, k);
    else if (k == "path") {
      std::filesystem::path p = get_typed<std::string>(v, k);
      if (!p.empty() && p.is_relative() && !base.empty()) p = base / p;
      b.table_path = p.string();
    } else if (k == "samples") {
      if (!v.is_array()) config_error("'bath.samples' must be a list of pairs");
      for (const json& s : v) {
        if (!s.is_array() || s.size() != 2) config_error("'bath.samples' entries are [omega, f]");
        b.samples.emplace_back(get_number(s[0], k), get_number(s[1], k));
      }
    } else {
      config_error("unknown key 'bath." + k + "'");
    }
  }
  if (!one_of(b.kind, {"none", "thermal_bosonic", "tabulated", "dirac_probe"}))
    config_error("unknown bath kind '" + b.kind + "'");
  if (b.kind == "tabulated" && b.samples.empty() && b.table_path.empty())
    config_error("tabulated bath needs samples or path");
  return b;
}

json bath_json(const BathSpec& b) {
  json j;
  j["kind"] = b.kind;
  j["theta"] = put_number(b.thermal.theta);
  j["omega_ph"] = put_number(b.thermal.omega_ph);
  j["epsilon"] = put_number(b.thermal.epsilon);
  j["omega_c"] = put_number(b.thermal.omega_c);
  j["beta"] = put_number(b.thermal.beta);
  j["omega0"] = put_number(b.omega0);
  j["weight"] = put_number(b.weight);
  j["scale"] = put_number(b.scale);
  j["mirror"] = b.mirror;
  j["path"] = b.table_path;
  json s = json::array();
  for (auto [w, f] : b.samples) s.push_back({put_number(w), put_number(f)});
  j["samples"] = s;
  return j;
}

json number_list(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(put_number(x));
  return a;
}

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  // Compare through the serialized form so that NaN fields compare equal.
  return to_json(*this) == to_json(o);
}

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) config_error("top level must be an object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "experiment") c.experiment = get_typed<std::string>(v, k);
    else if (k == "seed") c.seed = get_typed<std::uint64_t>(v, k);
    else if (k == "threads") c.threads = get_typed<int>(v, k);
    else if (k == "output") c.output = get_typed<std::string>(v, k);
    else if (k == "model") c.model = get_typed<std::string>(v, k);
    else if (k == "marked") c.marked = get_typed<std::uint64_t>(v, k);
    else if (k == "N") c.n_list = get_int_list(v, k);
    else if (k == "g") c.g_grid = get_grid(v, k);
    else if (k == "levels") c.levels = get_typed<int>(v, k);
    else if (k == "sector") c.sector = get_typed<std::string>(v, k);
    else if (k == "derivatives") c.derivatives = get_typed<bool>(v, k);
    else if (k == "fd_step") c.fd_step = get_number(v, k);
    else if (k == "schedules") c.schedules = get_string_list(v, k);
    else if (k == "T") c.t_list = get_grid(v, k);
    else if (k == "epsilon") c.epsilon = get_number(v, k);
    else if (k == "frozen_g") c.frozen_g = get_number(v, k);
    else if (k == "modes") c.modes = get_typed<std::string>(v, k);
    else if (k == "ka") c.ka = get_grid(v, k);
    else if (k == "kpa") c.kpa = get_grid(v, k);
    else if (k == "omega") c.omega = get_grid(v, k);
    else if (k == "omega_jitter") c.omega_jitter = get_number(v, k);
    else if (k == "channel") c.channel = get_typed<std::string>(v, k);
    else if (k == "lambda") c.lambda = get_number(v, k);
    else if (k == "methods") c.methods = get_string_list(v, k);
    else if (k == "extended") c.extended = get_typed<bool>(v, k);
    else if (k == "switching") c.switching = get_typed<bool>(v, k);
    else if (k == "pair_phase") c.pair_phase = get_typed<bool>(v, k);
    else if (k == "rho") c.rho = get_number(v, k);
    else if (k == "source") c.source = get_typed<std::string>(v, k);
    else if (k == "bath") c.bath = parse_bath(v, base);
    else if (k == "weights") {
      if (!v.is_object()) config_error("'weights' must be an object");
      for (auto w = v.begin(); w != v.end(); ++w) {
        if (w.key() == "xx") c.weights.xx = get_number(w.value(), "weights.xx");
        else if (w.key() == "xz") c.weights.xz = get_number(w.value(), "weights.xz");
        else if (w.key() == "zx") c.weights.zx = get_number(w.value(), "weights.zx");
        else if (w.key() == "zz") c.weights.zz = get_number(w.value(), "weights.zz");
        else config_error("unknown key 'weights." + w.key() + "'");
      }
    } else if (k == "multiplier") c.multiplier = get_number(v, k);
    else if (k == "estimate_only") c.estimate_only = get_typed<bool>(v, k);
    else if (k == "omega_cap") c.omega_cap = get_number(v, k);
    else if (k == "study") c.study = get_typed<std::string>(v, k);
    else if (k == "probe_ka") c.probe_ka = get_number(v, k);
    else config_error("unknown key '" + k + "'");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  j["model"] = c.model;
  j["marked"] = c.marked;
  j["N"] = c.n_list;
  j["g"] = number_list(c.g_grid);
  j["levels"] = c.levels;
  j["sector"] = c.sector;
  j["derivatives"] = c.derivatives;
  j["fd_step"] = put_number(c.fd_step);
  j["schedules"] = c.schedules;
  j["T"] = number_list(c.t_list);
  j["epsilon"] = put_number(c.epsilon);
  j["frozen_g"] = put_number(c.frozen_g);
  j["modes"] = c.modes;
  j["ka"] = number_list(c.ka);
  j["kpa"] = number_list(c.kpa);
  j["omega"] = number_list(c.omega);
  j["omega_jitter"] = put_number(c.omega_jitter);
  j["channel"] = c.channel;
  j["lambda"] = put_number(c.lambda);
  j["methods"] = c.methods;
  j["extended"] = c.extended;
  j["switching"] = c.switching;
  j["pair_phase"] = c.pair_phase;
  j["rho"] = put_number(c.rho);
  j["source"] = c.source;
  j["bath"] = bath_json(c.bath);
  j["weights"] = {{"xx", put_number(c.weights.xx)},
                  {"xz", put_number(c.weights.xz)},
                  {"zx", put_number(c.weights.zx)},
                  {"zz", put_number(c.weights.zz)}};
  j["multiplier"] = put_number(c.multiplier);
  j["estimate_only"] = c.estimate_only;
  j["omega_cap"] = put_number(c.omega_cap);
  j["study"] = c.study;
  j["probe_ka"] = put_number(c.probe_ka);
  return j;
}

void validate(const ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (!one_of(e, {"spectrum", "ed", "sweep", "response", "grover", "scaling"}))
    config_error("unknown experiment '" + e + "'");
  if (c.threads < 1) config_error("threads must be >= 1");
  if (c.n_list.empty()) config_error("N list is empty");
  require_sorted(c.n_list, "N", true);
  for (int n : c.n_list)
    if (n < 1) config_error("N entries must be positive");
  try {
    spin_model_from_string(c.model);
  } catch (const Error&) {
    config_error("unknown model '" + c.model + "'");
  }
  if (!one_of(c.sector, {"physical", "full", "even", "odd"}))
    config_error("unknown sector '" + c.sector + "'");
  for (const std::string& s : c.schedules) {
    try {
      schedule_kind_from_string(s);
    } catch (const Error&) {
      config_error("unknown schedule '" + s + "'");
    }
  }
  if (!one_of(c.modes, {"lowest", "positive", "all", "explicit"}))
    config_error("unknown modes '" + c.modes + "'");
  try {
    channel_kind_from_string(c.channel);
  } catch (const Error&) {
    config_error("unknown channel '" + c.channel + "'");
  }
  for (const std::string& m : c.methods)
    if (!one_of(m, {"quadrature", "saddle_point", "phase_free_bound"}))
      config_error("unknown method '" + m + "'");
  if (!one_of(c.source, {"asymptotic", "quadrature"}))
    config_error("unknown source '" + c.source + "'");
  require_sorted(c.g_grid, "g", true);
  require_sorted(c.t_list, "T", true);
  require_sorted(c.omega, "omega", true);
  require_sorted(c.ka, "ka", true);
  require_sorted(c.kpa, "kpa", true);
  for (double g : c.g_grid)
    if (!(g >= 0 && g <= 1)) config_error("g outside [0,1]");
  for (double t : c.t_list)
    if (!(t > 0) || !std::isfinite(t)) config_error("T entries must be positive");
  if (!(c.omega_jitter >= 0 && c.omega_jitter < 1)) config_error("omega_jitter outside [0,1)");
  if (!(c.epsilon >= 0)) config_error("epsilon must be >= 0");
  if (!(c.rho > 1)) config_error("rho must exceed 1");

  const bool needs_time = one_of(e, {"sweep", "response", "grover"}) ||
                          (e == "scaling" && one_of(c.study, {"near_gap_bound", "bitflip",
                                                              "total_error"}));
  if (needs_time && c.t_list.empty() && c.epsilon <= 0)
    config_error("give a T list or a positive epsilon");
  if (needs_time && c.schedules.empty()) config_error("schedule list is empty");
  if (e == "spectrum" || e == "ed") {
    if (c.g_grid.empty()) config_error("g grid is empty");
  }
  if (e == "ed" && c.levels < 1) config_error("levels must be >= 1");
  if (c.modes == "explicit" && (e == "sweep" || e == "response") && c.ka.empty())
    config_error("explicit modes need a ka list");
  if (e == "response" && c.omega.empty()) config_error("omega grid is empty");
  if (e == "grover" || (e == "scaling" && c.study == "grover_estimate")) {
    if (c.bath.kind == "none") config_error("grover runs need a bath");
    if (!(c.multiplier >= 0.5 && c.multiplier <= 2)) config_error("multiplier outside [1/2, 2]");
  }
  if (e == "scaling") {
    if (!one_of(c.study, {"gap_law", "mixed_gap", "near_gap_bound", "bitflip", "total_error",
                          "grover_estimate"}))
      config_error("unknown scaling study '" + c.study + "'");
    if (c.study == "total_error" && c.bath.kind == "none")
      config_error("total_error needs a bath");
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("threads");
  j.erase("output");
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr, ErrorCode::io, "hash: context allocation failed");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, text.data(), text.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  require(ok, ErrorCode::io, "hash: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

SpectralFunction make_bath(const BathSpec& spec) {
  SpectralFunction f;
  if (spec.kind == "thermal_bosonic") {
    f = SpectralFunction::thermal_bosonic(spec.thermal);
  } else if (spec.kind == "tabulated") {
    if (!spec.samples.empty()) {
      f = SpectralFunction::tabulated(spec.samples);
    } else {
      std::ifstream in(spec.table_path);
      if (!in) throw Error(ErrorCode::io, "cannot read bath table " + spec.table_path);
      f = SpectralFunction::from_csv(in);
    }
  } else if (spec.kind == "dirac_probe") {
    f = SpectralFunction::dirac_probe(spec.omega0, spec.weight);
  }
  if (spec.scale != 1) f = f.scaled(spec.scale);
  if (spec.mirror) f = f.mirrored();
  return f;
}

bool Table::operator==(const Table& o) const {
  if (name != o.name || columns != o.columns || rows.size() != o.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != o.rows[i].size()) return false;
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      const Cell& a = rows[i][k];
      const Cell& b = o.rows[i][k];
      if (a.index() != b.index()) return false;
      if (a.index() == 1) {
        if (!same_number(std::get<double>(a), std::get<double>(b))) return false;
      } else if (a != b) {
        return false;
      }
    }
  }
  return true;
}

namespace {

// One unit of parallel work: compute() yields rows, fail() builds the row
// recorded when compute() throws.
struct WorkItem {
  std::function<std::vector<Row>()> compute;
  std::function<Row(const std::string& status)> fail;
};

std::vector<Row> run_items(const std::vector<WorkItem>& items, int threads) {
  std::vector<std::vector<Row>> results(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        results[i] = items[i].compute();
      } catch (const Error& e) {
        results[i] = {items[i].fail(to_string(e.code()))};
      } catch (const std::exception&) {
        results[i] = {items[i].fail("error")};
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, int(items.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  std::vector<Row> rows;
  for (auto& r : results)
    for (auto& row : r) rows.push_back(std::move(row));
  return rows;
}

Row nan_row(Row prefix, std::size_t values, const std::string& status) {
  for (std::size_t i = 0; i < values; ++i) prefix.push_back(kNaN);
  prefix.push_back(status);
  return prefix;
}

const char* status_of(bool converged) { return converged ? "ok" : "nonconverged"; }

Schedule ising_schedule(const ExperimentConfig& c, ScheduleKind kind, int n, double T) {
  if (kind == ScheduleKind::frozen) return Schedule::frozen(c.frozen_g, T);
  return Schedule::make(kind, n, T);
}

Schedule grover_schedule(const ExperimentConfig& c, ScheduleKind kind, int n, double T) {
  switch (kind) {
    case ScheduleKind::linear: return Schedule::linear(T);
    case ScheduleKind::gap_adapted: return GroverParams::adapted_schedule(n, 1, T);
    case ScheduleKind::gap_squared_adapted: return GroverParams::adapted_schedule(n, 2, T);
    case ScheduleKind::frozen: return Schedule::frozen(c.frozen_g, T);
  }
  throw Error(ErrorCode::invalid_argument, "unknown schedule");
}

// Explicit T list, or the adiabatic run time for this N and kind.
std::vector<double> times_for(const ExperimentConfig& c, ScheduleKind kind, int n, bool grover) {
  if (!c.t_list.empty()) return c.t_list;
  if (grover)
    return {adiabatic_runtime(SqrtQuadratic::grover_gap(std::ldexp(1.0, n)), kind, c.epsilon)};
  return {adiabatic_runtime(kind, n, c.epsilon)};
}

std::vector<double> modes_for(const ExperimentConfig& c, int n) {
  if (c.modes == "explicit") return c.ka;
  ChainParams p = ChainParams::make(n);
  if (c.modes == "positive") return positive_modes(p);
  if (c.modes == "all") return momentum_grid(p);
  return {kPi / n};
}

double probe_mode(const ExperimentConfig& c, int n) { return c.probe_ka > 0 ? c.probe_ka : kPi / n; }

std::vector<double> jittered_omega(const ExperimentConfig& c) {
  std::vector<double> w = c.omega;
  if (c.omega_jitter <= 0 || w.size() < 2) return w;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> out = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double left = i > 0 ? w[i] - w[i - 1] : w[i + 1] - w[i];
    double right = i + 1 < w.size() ? w[i + 1] - w[i] : left;
    out[i] = w[i] + u(rng) * c.omega_jitter * std::min(left, right) / 2;
  }
  return out;
}

// ---- spectrum ----------------------------------------------------------

void run_spectrum(const ExperimentConfig& c, ResultBundle& out) {
  Table t{"spectrum",
          {"N", "g", "ka", "energy", "alpha", "beta", "u_re", "u_im", "v_re", "v_im", "status"},
          {}};
  std::vector<WorkItem> items;
  for (int n : c.n_list)
    for (double g : c.g_grid)
      items.push_back({[n, g] {
                         ChainSpectrum s = chain_spectrum(ChainParams::make(n), g);
                         std::vector<Row> rows;
                         for (std::size_t i = 0; i < s.momenta.size(); ++i) {
                           double ka = s.momenta[i];
                           ModeCoefficients m = mode_coefficients(ka, g);
                           const BogoliubovPair& b = s.bogoliubov[i];
                           rows.push_back({(long long)n, g, ka, s.energies[i], m.alpha, m.beta,
                                           b.u.real(), b.u.imag(), b.v.real(), b.v.imag(),
                                           std::string("ok")});
                         }
                         return rows;
                       },
                       [n, g](const std::string& st) {
                         return nan_row({(long long)n, g}, 8, st);
                       }});
  t.rows = run_items(items, c.threads);
  out.tables.push_back(std::move(t));
}

// ---- ed ----------------------------------------------------------------

void run_ed(const ExperimentConfig& c, ResultBundle& out) {
  const SpinModel model = spin_model_from_string(c.model);
  const std::string model_name = to_string(model);
  Table t{"ed",
          {"model", "N", "g", "sector", "level", "energy", "gap", "parity", "residual", "status"},
          {}};
  std::vector<WorkItem> items;
  for (int n : c.n_list) {
    Sector sector = physical_sector(model);
    if (c.sector == "full") sector = Sector::full;
    if (c.sector == "even") sector = Sector::even;
    if (c.sector == "odd") sector = Sector::odd;
    const std::string sector_name = to_string(sector);
    for (double g : c.g_grid) {
      items.push_back(
          {[=, &c] {
             SpinHamiltonian h = build_hamiltonian(model, n, g, c.marked);
             bool want_parity = sector == Sector::full && h.parity_symmetric();
             LowSpectrum ls = low_spectrum(h, c.levels, want_parity, sector);
             std::vector<int> parity(ls.eigenvalues.size(), 0);
             if (want_parity) parity = parity_resolve(h, ls);
             if (sector == Sector::even) std::fill(parity.begin(), parity.end(), 1);
             if (sector == Sector::odd) std::fill(parity.begin(), parity.end(), -1);
             std::vector<Row> rows;
             for (std::size_t i = 0; i < ls.eigenvalues.size(); ++i)
               rows.push_back({model_name, (long long)n, g, sector_name, (long long)i,
                               ls.eigenvalues[i], ls.eigenvalues[i] - ls.eigenvalues[0],
                               (long long)parity[i], ls.residuals[i],
                               std::string(status_of(ls.converged))});
             return rows;
           },
           [=](const std::string& st) {
             return Row{model_name, (long long)n, g, sector_name, -1LL, kNaN, kNaN, 0LL, kNaN,
                        st};
           }});
    }
  }
  t.rows = run_items(items, c.threads);
  out.tables.push_back(std::move(t));
  if (!c.derivatives) return;

  Table d{"ed_derivatives",
          {"model", "N", "g", "energy", "first", "second", "richardson", "status"},
          {}};
  std::vector<WorkItem> ditems;
  for (int n : c.n_list)
    ditems.push_back({[=, &c] {
                        EnergyDerivatives ed = energy_derivatives(model, n, c.g_grid, c.fd_step);
                        std::vector<Row> rows;
                        for (std::size_t i = 0; i < ed.g.size(); ++i)
                          rows.push_back({model_name, (long long)n, ed.g[i], ed.energy[i],
                                          ed.first[i], ed.second[i], ed.max_richardson,
                                          std::string(status_of(ed.converged))});
                        return rows;
                      },
                      [=](const std::string& st) {
                        return nan_row({model_name, (long long)n, kNaN}, 4, st);
                      }});
  d.rows = run_items(ditems, c.threads);
  for (int n : c.n_list) {
    PlotSeries first{"ed_first_" + model_name + "_N" + std::to_string(n), "g", "dE0/dg", {}, {}};
    PlotSeries second{"ed_second_" + model_name + "_N" + std::to_string(n), "g", "d2E0/dg2",
                      {}, {}};
    for (const Row& r : d.rows) {
      if (std::get<long long>(r[1]) != n || std::get<std::string>(r[7]) == "error") continue;
      double g = std::get<double>(r[2]);
      if (std::isnan(g)) continue;
      first.x.push_back(g);
      first.y.push_back(std::get<double>(r[4]));
      second.x.push_back(g);
      second.y.push_back(std::get<double>(r[5]));
    }
    if (!first.x.empty()) {
      out.plots.push_back(std::move(first));
      out.plots.push_back(std::move(second));
    }
  }
  out.tables.push_back(std::move(d));
}

// ---- sweep -------------------------------------------------------------

void run_sweep(const ExperimentConfig& c, ResultBundle& out) {
  Table t{"sweep",
          {"N", "schedule", "T", "ka", "probability", "adiabatic_mismatch", "step_error",
           "norm_error", "status"},
          {}};
  std::vector<WorkItem> items;
  for (int n : c.n_list)
    for (const std::string& sname : c.schedules) {
      const ScheduleKind kind = schedule_kind_from_string(sname);
      for (double T : times_for(c, kind, n, false))
        for (double ka : modes_for(c, n))
          items.push_back({[=, &c] {
                             Schedule s = ising_schedule(c, kind, n, T);
                             BogoliubovTrajectory tr = integrate_bogoliubov(ka, s);
                             BogoliubovPair ad = adiabatic_bogoliubov(ka, s, T);
                             ExcitationResult ex = excitation_probability_mode(ka, s);
                             bool ok = tr.converged && ex.converged;
                             return std::vector<Row>{{(long long)n, sname, T, ka, ex.probability,
                                                      state_mismatch(tr.end, ad), tr.step_error,
                                                      tr.max_norm_error,
                                                      std::string(status_of(ok))}};
                           },
                           [=](const std::string& st) {
                             return nan_row({(long long)n, sname, T, ka}, 4, st);
                           }});
    }
  t.rows = run_items(items, c.threads);
  out.tables.push_back(std::move(t));
}

// ---- response ----------------------------------------------------------

void run_response(const ExperimentConfig& c, ResultBundle& out) {
  const ChannelKind channel = channel_kind_from_string(c.channel);
  const std::string cname = to_string(channel);
  Table t{"response",
          {"channel", "N", "schedule", "T", "ka", "kpa", "omega", "regime", "method", "term",
           "re", "im", "modulus", "quad_error", "validity", "status"},
          {}};
  ResponseOptions opt;
  opt.extended = c.extended;
  opt.switching = c.switching;
  opt.rho = c.rho;
  const std::vector<double> omegas = jittered_omega(c);
  std::vector<WorkItem> items;
  for (int n : c.n_list)
    for (const std::string& sname : c.schedules) {
      const ScheduleKind kind = schedule_kind_from_string(sname);
      for (double T : times_for(c, kind, n, false)) {
        std::vector<std::pair<double, double>> pairs;
        for (double ka : modes_for(c, n)) {
          if (channel == ChannelKind::nonuniform_x) {
            std::vector<double> partners = c.kpa.empty() ? modes_for(c, n) : c.kpa;
            for (double kpa : partners) pairs.emplace_back(ka, kpa);
          } else {
            pairs.emplace_back(ka, ka);
          }
        }
        for (auto [ka, kpa] : pairs)
          for (double w : omegas)
            for (const std::string& method : c.methods) {
              std::string regime = to_string(classify_regime(w, ka, c.rho));
              Row prefix{cname, (long long)n, sname, T, ka, kpa, w, regime, method};
              items.push_back(
                  {[=, &c] {
                     Schedule s = ising_schedule(c, kind, n, T);
                     auto row = [&](long long term, const AmplitudeResult& a) {
                       Row r = prefix;
                       r.insert(r.end(), {Cell(term), a.value.real(), a.value.imag(),
                                          a.modulus(), a.quad_error, a.validity,
                                          std::string(status_of(a.converged))});
                       return r;
                     };
                     auto bound_row = [&](double b) {
                       Row r = prefix;
                       r.insert(r.end(), {Cell(0LL), b, 0.0, b, 0.0, 0.0, std::string("ok")});
                       return r;
                     };
                     std::vector<Row> rows;
                     if (channel == ChannelKind::uniform_x) {
                       if (method == "quadrature")
                         rows.push_back(row(0, amplitude_direct_uniform(ka, w, s, opt)));
                       else if (method == "saddle_point")
                         rows.push_back(row(0, amplitude_saddle_uniform(w, ka, s)));
                       else
                         rows.push_back(bound_row(amplitude_bound_near_gap(ka, s, w)));
                     } else if (channel == ChannelKind::nonuniform_x) {
                       require(method == "quadrature", ErrorCode::invalid_argument,
                               "nonuniform channel supports quadrature only");
                       rows.push_back(row(0, amplitude_direct_nonuniform(ka, kpa, w, n, s, opt,
                                                                         c.pair_phase)));
                     } else {
                       if (method == "quadrature") {
                         BitflipAmplitudes b = amplitude_bitflip(ka, w, s, opt);
                         rows.push_back(row(1, b.first));
                         rows.push_back(row(2, b.second));
                       } else if (method == "phase_free_bound") {
                         rows.push_back(bound_row(bitflip_bound(ka, s)));
                       } else {
                         throw Error(ErrorCode::invalid_argument,
                                     "bitflip channel has no saddle method");
                       }
                     }
                     return rows;
                   },
                   [=](const std::string& st) {
                     Row r = prefix;
                     r.push_back(0LL);
                     return nan_row(r, 5, st);
                   }});
            }
      }
    }
  t.rows = run_items(items, c.threads);
  out.tables.push_back(std::move(t));
}

// ---- grover ------------------------------------------------------------

void run_grover(const ExperimentConfig& c, ResultBundle& out) {
  const SpectralFunction f = make_bath(c.bath);
  Table t{"grover",
          {"N", "D", "schedule", "T", "error", "rel_change", "panels", "estimate",
           "estimate_mirror", "channel_factor", "status"},
          {}};
  std::vector<WorkItem> items;
  for (int n : c.n_list)
    for (const std::string& sname : c.schedules) {
      const ScheduleKind kind = schedule_kind_from_string(sname);
      for (double T : times_for(c, kind, n, true))
        items.push_back({[=, &c, &f] {
                           GroverParams p;
                           p.n_qubits = n;
                           p.marked = c.marked;
                           p.lambda = c.lambda;
                           p.schedule = grover_schedule(c, kind, n, T);
                           p.f = f;
                           p.weights = c.weights;
                           double est = error_estimate(p, c.multiplier);
                           double est_m = error_estimate(p, c.multiplier, true);
                           GroverError e;
                           e.value = kNaN;
                           e.rel_change = kNaN;
                           if (!c.estimate_only) e = error_probability(p, c.omega_cap);
                           return std::vector<Row>{{(long long)n, p.dim(), sname, T, e.value,
                                                    e.rel_change, (long long)e.panels, est,
                                                    est_m, channel_factor(p),
                                                    std::string(status_of(e.converged))}};
                         },
                         [=](const std::string& st) {
                           Row r{(long long)n, std::ldexp(1.0, n), sname, T, kNaN, kNaN, 0LL};
                           return nan_row(r, 3, st);
                         }});
    }
  t.rows = run_items(items, c.threads);
  PlotSeries err{"grover_error", "D", "error", {}, {}};
  PlotSeries est{"grover_estimate", "D", "estimate", {}, {}};
  for (const Row& r : t.rows) {
    double D = std::get<double>(r[1]);
    double e = std::get<double>(r[4]), m = std::get<double>(r[7]);
    if (std::isfinite(e)) {
      err.x.push_back(D);
      err.y.push_back(e);
    }
    if (std::isfinite(m)) {
      est.x.push_back(D);
      est.y.push_back(m);
    }
  }
  if (!err.x.empty()) out.plots.push_back(std::move(err));
  if (!est.x.empty()) out.plots.push_back(std::move(est));
  out.tables.push_back(std::move(t));
}

// ---- scaling -----------------------------------------------------------

struct SeriesValue {
  std::string series;
  double y = 0;
  bool converged = true;
};
using SeriesValues = std::vector<SeriesValue>;

void run_scaling(const ExperimentConfig& c, ResultBundle& out) {
  const std::string& study = c.study;
  Table t{"scaling", {"study", "series", "N", "x", "y", "T", "status"}, {}};
  std::vector<WorkItem> items;
  std::vector<std::string> series_order;
  auto add = [&](const std::string& series, int n, double T,
                 std::function<SeriesValues()> compute, double x) {
    if (std::find(series_order.begin(), series_order.end(), series) == series_order.end())
      series_order.push_back(series);
    items.push_back({[=] {
                       std::vector<Row> rows;
                       for (const SeriesValue& v : compute())
                         rows.push_back({study, v.series, (long long)n, x, v.y, T,
                                         std::string(status_of(v.converged))});
                       return rows;
                     },
                     [=](const std::string& st) {
                       return Row{study, series, (long long)n, x, kNaN, T, st};
                     }});
  };

  const SpectralFunction f = c.bath.kind == "none" ? SpectralFunction{} : make_bath(c.bath);

  if (study == "gap_law") {
    for (int n : c.n_list)
      add("ising_analytic", n, kNaN,
          [n] {
            return SeriesValues{
                {"ising_analytic", global_min_gap(ChainParams::make(n))}};
          },
          n);
  } else if (study == "mixed_gap") {
    const SpinModel model = spin_model_from_string(c.model);
    const std::string name = to_string(model);
    for (int n : c.n_list)
      add(name, n, kNaN,
          [=] {
            return SeriesValues{
                {name, minimum_gap(model, n, physical_sector(model)).gap}};
          },
          n);
  } else if (study == "near_gap_bound" || study == "bitflip") {
    for (const std::string& sname : c.schedules) {
      const ScheduleKind kind = schedule_kind_from_string(sname);
      for (int n : c.n_list)
        for (double T : times_for(c, kind, n, false)) {
          const double ka = probe_mode(c, n);
          const bool bitflip = study == "bitflip";
          add(sname, n, T,
              [=, &c] {
                Schedule s = ising_schedule(c, kind, n, T);
                double y = bitflip ? bitflip_bound(ka, s) / std::sqrt(double(n))
                                   : amplitude_bound_near_gap(ka, s);
                return SeriesValues{{sname, y}};
              },
              n);
        }
    }
  } else if (study == "total_error") {
    const Channel channel{channel_kind_from_string(c.channel), c.lambda, 0};
    const AmplitudeSource source =
        c.source == "quadrature" ? AmplitudeSource::quadrature : AmplitudeSource::asymptotic;
    const std::vector<double> omegas = jittered_omega(c);
    for (const std::string& sname : c.schedules) {
      const ScheduleKind kind = schedule_kind_from_string(sname);
      series_order.push_back(sname);
      series_order.push_back(sname + ":probability");
      for (int n : c.n_list)
        for (double T : times_for(c, kind, n, false))
          add(sname, n, T,
              [=, &c, &f] {
                Schedule s = ising_schedule(c, kind, n, T);
                TotalError te = total_error(channel, s, f, modes_for(c, n), omegas, source, c.rho);
                bool ok = te.nonconverged == 0;
                return SeriesValues{{sname, te.value, ok},
                                    {sname + ":probability", te.probability, ok}};
              },
              n);
    }
  } else if (study == "grover_estimate") {
    for (int n : c.n_list) {
      const double D = std::ldexp(1.0, n);
      add("grover", n, kNaN,
          [=, &c, &f] {
            GroverParams p;
            p.n_qubits = n;
            p.lambda = c.lambda;
            p.f = f;
            return SeriesValues{
                {"grover", error_estimate(p, c.multiplier)}};
          },
          D);
    }
  }
  t.rows = run_items(items, c.threads);

  // Fits per series, in first-appearance order.
  Table fits{"scaling_fits",
             {"study", "series", "model", "transform", "exponent", "prefactor", "r2", "x_lo",
              "x_hi", "points", "status"},
             {}};
  for (const std::string& series : series_order) {
    std::vector<double> xs, ys;
    bool complete = true, converged = true;
    for (const Row& r : t.rows) {
      if (std::get<std::string>(r[1]) != series) continue;
      const std::string& st = std::get<std::string>(r[6]);
      if (st == "nonconverged") converged = false;
      else if (st != "ok") complete = false;
      xs.push_back(std::get<double>(r[3]));
      ys.push_back(std::get<double>(r[4]));
    }
    if (xs.empty()) continue;
    PlotSeries plot{"scaling_" + study + "_" + series, study == "grover_estimate" ? "D" : "N",
                    "y", xs, ys};
    std::replace(plot.name.begin(), plot.name.end(), ':', '_');
    out.plots.push_back(std::move(plot));

    std::vector<std::pair<std::string, std::string>> models{{"power_law", "log-log"}};
    if (study == "mixed_gap") models.insert(models.begin(), {"exponential", "semilog"});
    if (study == "near_gap_bound") models.push_back({"power_law", "log(y/ln x)-log x"});
    for (auto [model, transform] : models) {
      Row prefix{study, series, model, transform};
      try {
        require(complete, ErrorCode::fit_failure, "fit: series has failed rows");
        std::vector<double> fy = ys;
        if (transform == "log(y/ln x)-log x")
          for (std::size_t i = 0; i < fy.size(); ++i) fy[i] /= std::log(xs[i]);
        FitResult r = model == "exponential" ? fit_exponential(xs, fy) : fit_power_law(xs, fy);
        Row row = prefix;
        row.insert(row.end(), {r.exponent, r.prefactor, r.r2, r.x_lo, r.x_hi,
                               Cell((long long)xs.size()), std::string(status_of(converged))});
        fits.rows.push_back(std::move(row));
      } catch (const Error& e) {
        Row row = prefix;
        row.insert(row.end(), {kNaN, kNaN, kNaN, kNaN, kNaN, Cell((long long)xs.size()),
                               std::string(to_string(e.code()))});
        fits.rows.push_back(std::move(row));
      }
    }
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(fits));
}

}  // namespace

ResultBundle run(const ExperimentConfig& cfg) {
  validate(cfg);
  ResultBundle out;
  out.experiment = cfg.experiment;
  if (cfg.experiment == "spectrum") run_spectrum(cfg, out);
  else if (cfg.experiment == "ed") run_ed(cfg, out);
  else if (cfg.experiment == "sweep") run_sweep(cfg, out);
  else if (cfg.experiment == "response") run_response(cfg, out);
  else if (cfg.experiment == "grover") run_grover(cfg, out);
  else run_scaling(cfg, out);

  for (const Table& t : out.tables) {
    std::size_t k = t.columns.size() - 1;  // status is always last
    for (const Row& r : t.rows) {
      const std::string& st = std::get<std::string>(r[k]);
      if (st == "nonconverged") ++out.nonconverged;
      else if (st != "ok") ++out.failed;
    }
  }
  return out;
}

}  // namespace qpd
