#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ahead/dataset.hpp"
#include "ahead/errors.hpp"
#include "ahead/solver.hpp"

namespace ahead {

enum class ProblemFamily { kSynthetic, kLogistic };
enum class NetworkModel { kErdosRenyi, kRing, kComplete };

struct ProblemSpec {
  ProblemFamily family = ProblemFamily::kSynthetic;
  bool paper_preset = false;                 // synthetic: the paper instance
  std::vector<double> a, b, c, d, e;         // synthetic: explicit sequences
  double x_box = 2.0;
  std::string dataset_path;                  // logistic
  PartitionMode partition = PartitionMode::kAssignmentColumn;

  bool operator==(const ProblemSpec&) const = default;
};

struct NetworkSpec {
  NetworkModel model = NetworkModel::kErdosRenyi;
  int m = 0;
  double p = 0.0;                            // erdos-renyi only
  std::uint64_t seed = 0;

  bool operator==(const NetworkSpec&) const = default;
};

struct StepSpec {
  bool auto_mode = false;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;  // explicit mode
  double safety = 0.9;                           // auto mode
  double lambda = 0.0;
  std::int64_t K = 0;
  bool force = false;  // allow explicit steps that violate the caps

  bool operator==(const StepSpec&) const = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  NetworkSpec network;
  StepSpec steps;
  InitMode init_mode = InitMode::kZeros;
  std::uint64_t init_seed = 0;
  std::int64_t log_interval = 0;  // 0 = auto: max(1, K / 1000)
  std::string output_dir;
  bool bound_checks = false;
  bool with_metrics = true;
  bool save_snapshots = false;
  double oracle_tol = 1e-10;

  bool operator==(const ExperimentConfig&) const = default;

  std::int64_t effective_log_interval() const {
    if (log_interval > 0) return log_interval;
    return std::max<std::int64_t>(1, steps.K / 1000);
  }
};

namespace detail {

struct ConfigLine {
  std::string section;
  std::string key;
  std::string value;
  int lineno = 0;
  bool used = false;
};

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::string origin)
      : origin_(std::move(origin)) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          fail(lineno, "malformed section header '" + t + "'");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      auto eq = t.find('=');
      if (eq == std::string::npos)
        fail(lineno, "expected key = value, got '" + t + "'");
      ConfigLine cl;
      cl.section = section;
      cl.key = trim(t.substr(0, eq));
      cl.value = trim(t.substr(eq + 1));
      cl.lineno = lineno;
      if (cl.key.empty()) fail(lineno, "empty key");
      if (find(cl.section, cl.key))
        fail(lineno, "duplicate key '" + cl.key + "' in [" + cl.section + "]");
      lines_.push_back(cl);
    }
  }

  [[noreturn]] void fail(int lineno, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(lineno) + ": " + msg);
  }

  ConfigLine* find(const std::string& section, const std::string& key) {
    for (auto& l : lines_)
      if (l.section == section && l.key == key) return &l;
    return nullptr;
  }

  bool has(const std::string& section, const std::string& key) {
    return find(section, key) != nullptr;
  }

  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) {
    ConfigLine* l = find(section, key);
    if (!l) return std::nullopt;
    l->used = true;
    return l->value;
  }

  std::string require(const std::string& section, const std::string& key,
                      const std::string& why = "") {
    auto v = get(section, key);
    if (!v)
      throw ConfigError(origin_ + ": missing required key '" + key +
                        "' in [" + section + "]" +
                        (why.empty() ? "" : " (" + why + ")"));
    return *v;
  }

  double as_double(const std::string& section, const std::string& key,
                   const std::string& raw) {
    try {
      std::size_t pos = 0;
      double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      fail(find(section, key)->lineno,
           "value of '" + key + "' is not a number: '" + raw + "'");
    }
  }

  std::int64_t as_int(const std::string& section, const std::string& key,
                      const std::string& raw) {
    try {
      std::size_t pos = 0;
      long long v = std::stoll(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      fail(find(section, key)->lineno,
           "value of '" + key + "' is not an integer: '" + raw + "'");
    }
  }

  std::uint64_t as_uint(const std::string& section, const std::string& key,
                        const std::string& raw) {
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      fail(find(section, key)->lineno,
           "value of '" + key + "' is not an unsigned integer: '" + raw +
               "'");
    }
  }

  bool as_bool(const std::string& section, const std::string& key,
               const std::string& raw) {
    if (raw == "true" || raw == "on" || raw == "yes" || raw == "1")
      return true;
    if (raw == "false" || raw == "off" || raw == "no" || raw == "0")
      return false;
    fail(find(section, key)->lineno,
         "value of '" + key + "' is not a boolean: '" + raw + "'");
  }

  std::vector<double> as_list(const std::string& section,
                              const std::string& key,
                              const std::string& raw) {
    std::string norm = raw;
    for (char& ch : norm)
      if (ch == ',') ch = ' ';
    std::istringstream ss(norm);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof())
      fail(find(section, key)->lineno,
           "value of '" + key + "' is not a numeric list: '" + raw + "'");
    return out;
  }

  void check_all_used() const {
    for (const auto& l : lines_)
      if (!l.used)
        throw ConfigError(origin_ + ":" + std::to_string(l.lineno) +
                          ": unknown key '" + l.key + "' in [" + l.section +
                          "]");
  }

 private:
  std::string origin_;
  std::vector<ConfigLine> lines_;
};

}  // namespace detail

/// Parses the sectioned key=value config format. Unknown keys, missing
/// required keys, and type errors are reported with the file line number.
/// Referenced files must exist at parse time.
inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::string& origin) {
  detail::ConfigReader r(text, origin);
  ExperimentConfig cfg;

  // [problem]
  {
    const std::string family = r.require("problem", "family");
    if (family == "synthetic") {
      cfg.problem.family = ProblemFamily::kSynthetic;
      if (auto preset = r.get("problem", "preset")) {
        if (*preset != "paper")
          r.fail(r.find("problem", "preset")->lineno,
                 "unknown preset '" + *preset + "' (only 'paper')");
        cfg.problem.paper_preset = true;
      }
      if (!cfg.problem.paper_preset) {
        const std::pair<const char*, std::vector<double>*> sequences[] = {
            {"a", &cfg.problem.a}, {"b", &cfg.problem.b},
            {"c", &cfg.problem.c}, {"d", &cfg.problem.d},
            {"e", &cfg.problem.e}};
        for (const auto& [name, dst] : sequences) {
          *dst = r.as_list("problem", name,
                           r.require("problem", name,
                                     "synthetic family without preset"));
        }
      }
      if (auto v = r.get("problem", "x_box"))
        cfg.problem.x_box = r.as_double("problem", "x_box", *v);
      if (!(cfg.problem.x_box > 0.0))
        throw ConfigError(origin + ": x_box must be positive");
    } else if (family == "logistic") {
      cfg.problem.family = ProblemFamily::kLogistic;
      cfg.problem.dataset_path = r.require("problem", "dataset");
      if (!std::filesystem::exists(cfg.problem.dataset_path))
        throw ConfigError(origin + ": dataset file does not exist: " +
                          cfg.problem.dataset_path);
      if (auto v = r.get("problem", "partition")) {
        if (*v == "round-robin")
          cfg.problem.partition = PartitionMode::kRoundRobin;
        else if (*v == "column")
          cfg.problem.partition = PartitionMode::kAssignmentColumn;
        else
          r.fail(r.find("problem", "partition")->lineno,
                 "partition must be 'round-robin' or 'column'");
      }
    } else {
      r.fail(r.find("problem", "family")->lineno,
             "unknown problem family '" + family + "'");
    }
  }

  // [network]
  {
    const std::string model = r.require("network", "model");
    if (model == "erdos-renyi")
      cfg.network.model = NetworkModel::kErdosRenyi;
    else if (model == "ring")
      cfg.network.model = NetworkModel::kRing;
    else if (model == "complete")
      cfg.network.model = NetworkModel::kComplete;
    else
      r.fail(r.find("network", "model")->lineno,
             "unknown network model '" + model + "'");
    cfg.network.m = static_cast<int>(
        r.as_int("network", "m", r.require("network", "m")));
    if (cfg.network.m <= 0)
      throw ConfigError(origin + ": network m must be positive");
    if (cfg.network.model == NetworkModel::kErdosRenyi) {
      cfg.network.p =
          r.as_double("network", "p", r.require("network", "p"));
      if (!(cfg.network.p > 0.0 && cfg.network.p <= 1.0))
        throw ConfigError(origin + ": edge probability must lie in (0, 1]");
    }
    if (auto v = r.get("network", "seed"))
      cfg.network.seed = r.as_uint("network", "seed", *v);
  }

  // [stepsize]
  {
    const std::string mode = r.require("stepsize", "mode");
    if (mode == "auto") {
      cfg.steps.auto_mode = true;
      if (auto v = r.get("stepsize", "safety"))
        cfg.steps.safety = r.as_double("stepsize", "safety", *v);
      if (!(cfg.steps.safety > 0.0 && cfg.steps.safety < 1.0))
        throw ConfigError(origin + ": safety factor must lie in (0, 1)");
      for (const char* k : {"alpha", "beta", "gamma"})
        if (r.has("stepsize", k))
          r.fail(r.find("stepsize", k)->lineno,
                 std::string("'") + k + "' conflicts with mode = auto");
    } else if (mode == "explicit") {
      cfg.steps.auto_mode = false;
      cfg.steps.alpha = r.as_double(
          "stepsize", "alpha",
          r.require("stepsize", "alpha", "explicit step sizes"));
      cfg.steps.beta = r.as_double(
          "stepsize", "beta",
          r.require("stepsize", "beta", "explicit step sizes"));
      cfg.steps.gamma = r.as_double(
          "stepsize", "gamma",
          r.require("stepsize", "gamma", "explicit step sizes"));
      if (r.has("stepsize", "safety"))
        r.fail(r.find("stepsize", "safety")->lineno,
               "'safety' conflicts with mode = explicit");
    } else {
      r.fail(r.find("stepsize", "mode")->lineno,
             "stepsize mode must be 'explicit' or 'auto'");
    }
    cfg.steps.lambda = r.as_double(
        "stepsize", "lambda", r.require("stepsize", "lambda"));
    cfg.steps.K =
        r.as_int("stepsize", "K", r.require("stepsize", "K"));
    if (auto v = r.get("stepsize", "force"))
      cfg.steps.force = r.as_bool("stepsize", "force", *v);
    if (!(cfg.steps.lambda > 0.0))
      throw ConfigError(origin + ": lambda must be positive");
    if (cfg.steps.K < 0)
      throw ConfigError(origin + ": K must be nonnegative");
    if (!cfg.steps.auto_mode &&
        !(cfg.steps.alpha > 0.0 && cfg.steps.beta > 0.0 &&
          cfg.steps.gamma > 0.0))
      throw ConfigError(origin + ": step sizes must be positive");
  }

  // [init]
  {
    if (auto v = r.get("init", "mode")) {
      if (*v == "zeros")
        cfg.init_mode = InitMode::kZeros;
      else if (*v == "random")
        cfg.init_mode = InitMode::kRandom;
      else if (*v == "consensus-random")
        cfg.init_mode = InitMode::kConsensusRandom;
      else
        r.fail(r.find("init", "mode")->lineno,
               "init mode must be zeros | random | consensus-random");
    }
    if (auto v = r.get("init", "seed"))
      cfg.init_seed = r.as_uint("init", "seed", *v);
  }

  // [run]
  {
    if (auto v = r.get("run", "log_interval")) {
      cfg.log_interval = r.as_int("run", "log_interval", *v);
      if (cfg.log_interval < 0)
        throw ConfigError(origin + ": log_interval must be nonnegative");
    }
    if (auto v = r.get("run", "output_dir")) cfg.output_dir = *v;
    if (auto v = r.get("run", "bound_checks"))
      cfg.bound_checks = r.as_bool("run", "bound_checks", *v);
    if (auto v = r.get("run", "metrics"))
      cfg.with_metrics = r.as_bool("run", "metrics", *v);
    if (auto v = r.get("run", "save_snapshots"))
      cfg.save_snapshots = r.as_bool("run", "save_snapshots", *v);
    if (auto v = r.get("run", "oracle_tol")) {
      cfg.oracle_tol = r.as_double("run", "oracle_tol", *v);
      if (!(cfg.oracle_tol > 0.0))
        throw ConfigError(origin + ": oracle_tol must be positive");
    }
  }

  r.check_all_used();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

/// Serializes with every default filled in; parse(serialize(cfg)) == cfg.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "[problem]\n";
  if (cfg.problem.family == ProblemFamily::kSynthetic) {
    out << "family = synthetic\n";
    if (cfg.problem.paper_preset) {
      out << "preset = paper\n";
    } else {
      auto list = [&](const char* name, const std::vector<double>& v) {
        out << name << " = ";
        for (std::size_t i = 0; i < v.size(); ++i)
          out << (i ? "," : "") << v[i];
        out << "\n";
      };
      list("a", cfg.problem.a);
      list("b", cfg.problem.b);
      list("c", cfg.problem.c);
      list("d", cfg.problem.d);
      list("e", cfg.problem.e);
    }
    out << "x_box = " << cfg.problem.x_box << "\n";
  } else {
    out << "family = logistic\n";
    out << "dataset = " << cfg.problem.dataset_path << "\n";
    out << "partition = "
        << (cfg.problem.partition == PartitionMode::kRoundRobin
                ? "round-robin"
                : "column")
        << "\n";
  }
  out << "\n[network]\n";
  switch (cfg.network.model) {
    case NetworkModel::kErdosRenyi:
      out << "model = erdos-renyi\n";
      break;
    case NetworkModel::kRing:
      out << "model = ring\n";
      break;
    case NetworkModel::kComplete:
      out << "model = complete\n";
      break;
  }
  out << "m = " << cfg.network.m << "\n";
  if (cfg.network.model == NetworkModel::kErdosRenyi)
    out << "p = " << cfg.network.p << "\n";
  out << "seed = " << cfg.network.seed << "\n";
  out << "\n[stepsize]\n";
  if (cfg.steps.auto_mode) {
    out << "mode = auto\n";
    out << "safety = " << cfg.steps.safety << "\n";
  } else {
    out << "mode = explicit\n";
    out << "alpha = " << cfg.steps.alpha << "\n";
    out << "beta = " << cfg.steps.beta << "\n";
    out << "gamma = " << cfg.steps.gamma << "\n";
  }
  out << "lambda = " << cfg.steps.lambda << "\n";
  out << "K = " << cfg.steps.K << "\n";
  out << "force = " << (cfg.steps.force ? "true" : "false") << "\n";
  out << "\n[init]\n";
  switch (cfg.init_mode) {
    case InitMode::kZeros:
      out << "mode = zeros\n";
      break;
    case InitMode::kRandom:
      out << "mode = random\n";
      break;
    case InitMode::kConsensusRandom:
      out << "mode = consensus-random\n";
      break;
  }
  out << "seed = " << cfg.init_seed << "\n";
  out << "\n[run]\n";
  out << "log_interval = " << cfg.log_interval << "\n";
  if (!cfg.output_dir.empty()) out << "output_dir = " << cfg.output_dir << "\n";
  out << "bound_checks = " << (cfg.bound_checks ? "true" : "false") << "\n";
  out << "metrics = " << (cfg.with_metrics ? "true" : "false") << "\n";
  out << "save_snapshots = " << (cfg.save_snapshots ? "true" : "false")
      << "\n";
  out << "oracle_tol = " << cfg.oracle_tol << "\n";
  return out.str();
}

}  // namespace ahead
