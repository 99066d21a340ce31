#include "cwlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace cwlab {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

// Values of one config, keyed by "section.key".
class Entries {
 public:
  void add(const std::string& key, Entry e, int line) {
    if (!values_.emplace(key, std::move(e)).second) {
      throw ConfigError(line, key, "duplicate key");
    }
  }
  const Entry* find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Entry>& all() const { return values_; }

 private:
  std::map<std::string, Entry> values_;
};

double to_double(const std::string& key, const Entry& e) {
  double v = 0.0;
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(e.line, key, "expected a number, got '" + e.value + "'");
  }
  return v;
}

template <class Int>
Int to_int(const std::string& key, const Entry& e) {
  Int v = 0;
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(e.line, key, "expected an integer, got '" + e.value + "'");
  }
  return v;
}

std::vector<double> to_doubles(const std::string& key, const Entry& e) {
  std::vector<double> out;
  for (const auto& item : split(e.value, ',')) out.push_back(to_double(key, {item, e.line}));
  return out;
}

std::vector<std::int64_t> to_ints(const std::string& key, const Entry& e) {
  std::vector<std::int64_t> out;
  for (const auto& item : split(e.value, ',')) out.push_back(to_int<std::int64_t>(key, {item, e.line}));
  return out;
}

Command to_command(const std::string& key, const Entry& e) {
  static const std::map<std::string, Command> names = {
      {"env-sample", Command::env_sample}, {"kernel", Command::kernel}, {"walk", Command::walk},
      {"verify", Command::verify},         {"all", Command::all},
  };
  const auto it = names.find(e.value);
  if (it == names.end()) throw ConfigError(e.line, key, "unknown command '" + e.value + "'");
  return it->second;
}

EnvSpec parse_env(const Entries& entries, std::vector<std::string>& used) {
  auto get = [&](const std::string& k) -> const Entry* {
    const std::string key = "env." + k;
    const Entry* e = entries.find(key);
    if (e) used.push_back(key);
    return e;
  };
  auto require = [&](const std::string& k) -> std::pair<std::string, Entry> {
    const Entry* e = get(k);
    if (!e) throw ConfigError(0, "env." + k, "required for this environment kind");
    return {"env." + k, *e};
  };

  EnvSpec spec;
  if (const Entry* seed = get("seed")) spec.seed = to_int<std::uint64_t>("env.seed", *seed);
  const Entry* kind = get("kind");
  if (!kind) throw ConfigError(0, "env.kind", "missing");

  const std::string& k = kind->value;
  if (k == "constant") {
    auto [key, e] = require("kappa");
    spec.kind = ConstantKind{to_double(key, e)};
  } else if (k == "periodic") {
    PeriodicKind p;
    auto [key, e] = require("cycle");
    p.cycle = to_doubles(key, e);
    if (const Entry* phase = get("phase")) p.phase = to_int<std::int64_t>("env.phase", *phase);
    spec.kind = p;
  } else if (k == "iid_lognormal") {
    auto [km, em] = require("m");
    auto [ks, es] = require("s");
    spec.kind = LognormalKind{to_double(km, em), to_double(ks, es)};
  } else if (k == "iid_pareto") {
    auto [ka, ea] = require("alpha");
    ParetoKind p{to_double(ka, ea), 1.0};
    if (const Entry* xm = get("xm")) p.xm = to_double("env.xm", *xm);
    spec.kind = p;
  } else if (k == "iid_power") {
    auto [kb, eb] = require("beta");
    spec.kind = PowerKind{to_double(kb, eb)};
  } else if (k == "markov") {
    MarkovKind m;
    auto [ks, es] = require("states");
    m.states = to_doubles(ks, es);
    auto [kt, et] = require("transition");
    for (const auto& row : split(et.value, ';')) m.transition.push_back(to_doubles(kt, {row, et.line}));
    spec.kind = m;
  } else {
    throw ConfigError(kind->line, "env.kind", "unknown environment kind '" + k + "'");
  }
  try {
    cwlab::validate(spec);
  } catch (const EnvSpecError& err) {
    const std::string key = "env." + err.key();
    const Entry* e = entries.find(key);
    throw ConfigError(0, key, std::string(err.what()).substr(err.key().size() + 2) +
                                  (e ? " (line " + std::to_string(e->line) + ")" : ""));
  }
  return spec;
}

}  // namespace

ConfigError::ConfigError(int line, std::string key, const std::string& what)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : key + ": ") + what),
      line_(line),
      key_(std::move(key)) {}

std::string_view command_name(Command c) {
  switch (c) {
    case Command::env_sample: return "env-sample";
    case Command::kernel: return "kernel";
    case Command::walk: return "walk";
    case Command::verify: return "verify";
    case Command::all: return "all";
  }
  return "?";
}

std::vector<std::int64_t> default_schedule(std::int64_t n_max, int dyadic_min) {
  std::vector<std::int64_t> out;
  int jmax = 0;
  while ((std::int64_t{2} << jmax) <= n_max) ++jmax;
  const int jmin = dyadic_min <= jmax ? dyadic_min : 0;
  for (int j = jmin; j <= jmax; ++j) out.push_back(std::int64_t{1} << j);
  return out;
}

RunConfig parse_config(std::string_view text) {
  Entries entries;
  static const std::vector<std::string> sections = {"env", "run", "tolerance"};
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        throw ConfigError(line_no, section, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    if (section.empty()) throw ConfigError(line_no, "", "key outside of any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "", "empty key");
    if (value.empty()) throw ConfigError(line_no, section + "." + key, "empty value");
    entries.add(section + "." + key, {value, line_no}, line_no);
  }

  RunConfig cfg;
  std::vector<std::string> used;
  cfg.env = parse_env(entries, used);

  auto with = [&](const std::string& key, const std::function<void(const Entry&)>& apply) {
    if (const Entry* e = entries.find(key)) {
      used.push_back(key);
      apply(*e);
    }
  };
  auto int_key = [&](const std::string& key, std::int64_t& dst) {
    with(key, [&](const Entry& e) { dst = to_int<std::int64_t>(key, e); });
  };
  auto tol_key = [&](const std::string& name, double& dst) {
    const std::string key = "tolerance." + name;
    with(key, [&](const Entry& e) { dst = to_double(key, e); });
  };

  with("run.command", [&](const Entry& e) { cfg.command = to_command("run.command", e); });
  int_key("run.n_max", cfg.n_max);
  int_key("run.x0", cfg.x0);
  int_key("run.walkers", cfg.walkers);
  int_key("run.walk_steps", cfg.walk_steps);
  int_key("run.cm_n", cfg.cm_n);
  int_key("run.cm_k", cfg.cm_k);
  int_key("run.identity_n", cfg.identity_n);
  int_key("run.nash_n", cfg.nash_n);
  int_key("run.clt_n", cfg.clt_n);
  int_key("run.birkhoff_window", cfg.birkhoff_window);
  with("run.walk_seed", [&](const Entry& e) { cfg.walk_seed = to_int<std::uint64_t>("run.walk_seed", e); });
  with("run.dyadic_min", [&](const Entry& e) { cfg.dyadic_min = to_int<int>("run.dyadic_min", e); });
  with("run.threads", [&](const Entry& e) { cfg.threads = to_int<unsigned>("run.threads", e); });
  with("run.delta", [&](const Entry& e) { cfg.delta = to_doubles("run.delta", e); });
  with("run.K", [&](const Entry& e) { cfg.K = to_ints("run.K", e); });
  with("run.out", [&](const Entry& e) { cfg.out = e.value; });
  std::optional<Entry> schedule;
  with("run.schedule", [&](const Entry& e) { schedule = e; });

  tol_key("llt", cfg.tol.llt);
  tol_key("band_margin", cfg.tol.band_margin);
  tol_key("ks", cfg.tol.ks);
  tol_key("tv", cfg.tol.tv);
  tol_key("regularity_variation", cfg.tol.regularity_variation);
  tol_key("escape_sigmas", cfg.tol.escape_sigmas);
  tol_key("cm", cfg.tol.cm);
  tol_key("cm_agreement", cfg.tol.cm_agreement);
  tol_key("nash", cfg.tol.nash);
  tol_key("identity", cfg.tol.identity);
  tol_key("mass", cfg.tol.mass);
  tol_key("trend_factor", cfg.tol.trend_factor);

  for (const auto& [key, entry] : entries.all()) {
    if (std::find(used.begin(), used.end(), key) == used.end()) {
      throw ConfigError(entry.line, key, "unknown key");
    }
  }

  if (cfg.n_max < 1) throw ConfigError(0, "run.n_max", "must be >= 1");
  if (!schedule || schedule->value == "dyadic") {
    cfg.schedule = default_schedule(cfg.n_max, cfg.dyadic_min);
  } else {
    cfg.schedule = to_ints("run.schedule", *schedule);
  }
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  cwlab::validate(cfg.env);
  if (cfg.n_max < 1) throw ConfigError(0, "run.n_max", "must be >= 1");
  if (cfg.schedule.empty()) throw ConfigError(0, "run.schedule", "must not be empty");
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    const auto n = cfg.schedule[i];
    if (n < 1 || n > cfg.n_max) {
      throw ConfigError(0, "run.schedule", "entry " + std::to_string(n) + " outside [1, n_max]");
    }
    if (i > 0 && n <= cfg.schedule[i - 1]) throw ConfigError(0, "run.schedule", "must be increasing");
  }
  if (cfg.x0 % 2 != 0) throw ConfigError(0, "run.x0", "must be even");
  if (cfg.walkers < 1) throw ConfigError(0, "run.walkers", "must be >= 1");
  if (cfg.walk_steps < 1) throw ConfigError(0, "run.walk_steps", "must be >= 1");
  if (cfg.delta.empty()) throw ConfigError(0, "run.delta", "must not be empty");
  for (double d : cfg.delta) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError(0, "run.delta", "entries must be positive");
  }
  for (auto k : cfg.K) {
    if (k < 1) throw ConfigError(0, "run.K", "entries must be >= 1");
  }
  if (cfg.cm_n < 1) throw ConfigError(0, "run.cm_n", "must be >= 1");
  if (cfg.cm_k < 0 || cfg.cm_k > cfg.cm_n) throw ConfigError(0, "run.cm_k", "must lie in [0, cm_n]");
  if (cfg.identity_n < 0) throw ConfigError(0, "run.identity_n", "must be >= 0");
  if (cfg.nash_n < 0) throw ConfigError(0, "run.nash_n", "must be >= 0");
  if (cfg.clt_n < 0) throw ConfigError(0, "run.clt_n", "must be >= 0 (0 selects n_max)");
  if (cfg.birkhoff_window < 1) throw ConfigError(0, "run.birkhoff_window", "must be >= 1");
  if (cfg.threads < 1) throw ConfigError(0, "run.threads", "must be >= 1");
  if (cfg.out.empty()) throw ConfigError(0, "run.out", "must not be empty");

  const std::pair<const char*, double> tols[] = {
      {"llt", cfg.tol.llt},
      {"band_margin", cfg.tol.band_margin},
      {"ks", cfg.tol.ks},
      {"tv", cfg.tol.tv},
      {"regularity_variation", cfg.tol.regularity_variation},
      {"escape_sigmas", cfg.tol.escape_sigmas},
      {"cm", cfg.tol.cm},
      {"cm_agreement", cfg.tol.cm_agreement},
      {"nash", cfg.tol.nash},
      {"identity", cfg.tol.identity},
      {"mass", cfg.tol.mass},
      {"trend_factor", cfg.tol.trend_factor},
  };
  for (const auto& [name, v] : tols) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(0, std::string("tolerance.") + name, "must be positive");
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace cwlab
