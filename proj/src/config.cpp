#include "levyclock/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "levyclock/errors.hpp"

namespace levyclock {

namespace {

using nlohmann::json;

// Read access to one JSON object that remembers which keys were consumed, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_ + ": must be an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key) + ": required field is missing");
    return doc_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key) + ": must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(field(key) + ": must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key) + ": must be true or false");
    return v.get<bool>();
  }

  void reject_unknown() const {
    for (const auto& item : doc_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError(field(item.key()) + ": unknown key");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

SubordinatorSpec parse_subordinator(const json& doc) {
  Section s(doc, "process.subordinator");
  const std::string kind = s.string("kind");
  SubordinatorSpec out;
  if (kind == "gamma") {
    out = SubordinatorSpec::gamma(s.number("nu"), s.number("drift", 0.0));
  } else if (kind == "tempered_stable") {
    out = SubordinatorSpec::tempered_stable(s.number("c"), s.number("m"), s.number("y"),
                                            s.number("epsilon", 1e-4), s.number("drift", 0.0));
  } else {
    throw ConfigError(s.field("kind") + ": expected 'gamma' or 'tempered_stable', got '" + kind +
                      "'");
  }
  s.reject_unknown();
  return out;
}

json subordinator_json(const SubordinatorSpec& sub) {
  json out;
  out["kind"] = to_string(sub.kind);
  if (sub.kind == SubordinatorKind::Gamma) {
    out["nu"] = sub.nu;
  } else {
    out["c"] = sub.c;
    out["m"] = sub.m;
    out["y"] = sub.y;
    out["epsilon"] = sub.epsilon;
  }
  out["drift"] = sub.drift;
  return out;
}

ClockSpec parse_clock(const json& doc) {
  Section s(doc, "clock");
  const std::string kind = s.string("kind");
  CKLSParams p;
  p.kappa = s.number("kappa");
  p.eta = s.number("eta");
  p.lambda = s.number("lambda");
  p.y0 = s.number("y0", p.eta);
  const double dt = s.number("dt", 1e-2);
  ClockSpec out;
  if (kind == "cir") {
    if (s.has("alpha") && s.number("alpha") != 0.5) {
      throw ConfigError(s.field("alpha") + ": a CIR clock has alpha = 0.5");
    }
    out = ClockSpec::cir(p.cir(), dt);
  } else if (kind == "ckls") {
    p.alpha = s.number("alpha");
    out = ClockSpec::ckls(p, dt);
  } else {
    throw ConfigError(s.field("kind") + ": expected 'cir' or 'ckls', got '" + kind + "'");
  }
  const std::string scheme = s.string("scheme", "auto");
  if (scheme == "auto") {
    out.scheme = ClockScheme::Auto;
  } else if (scheme == "exact") {
    out.scheme = ClockScheme::Exact;
  } else if (scheme == "euler") {
    out.scheme = ClockScheme::Euler;
  } else {
    throw ConfigError(s.field("scheme") + ": expected 'auto', 'exact' or 'euler', got '" + scheme +
                      "'");
  }
  s.reject_unknown();
  return out;
}

json clock_json(const ClockSpec& clock) {
  json out;
  out["kind"] = to_string(clock.kind);
  out["kappa"] = clock.params.kappa;
  out["eta"] = clock.params.eta;
  out["lambda"] = clock.params.lambda;
  out["y0"] = clock.params.y0;
  if (clock.kind == ClockKind::Ckls) out["alpha"] = clock.params.alpha;
  out["dt"] = clock.dt;
  out["scheme"] = to_string(clock.scheme);
  return out;
}

ProcessSpec parse_process(const json& doc, const std::optional<ClockSpec>& clock) {
  Section s(doc, "process");
  const std::string kind_name = s.string("kind");
  ProcessKind kind;
  try {
    kind = process_kind_from_string(kind_name);
  } catch (const ParameterError&) {
    throw ConfigError(s.field("kind") + ": unknown process kind '" + kind_name + "'");
  }
  ProcessSpec out;
  switch (kind) {
    case ProcessKind::VG:
    case ProcessKind::VGSA: {
      const VGParams p{s.number("theta"), s.number("sigma"), s.number("nu")};
      out = ProcessSpec::vg(p);
      break;
    }
    case ProcessKind::SB:
    case ProcessKind::SBSA:
      out = ProcessSpec::sb(s.number("theta"), s.number("sigma"),
                            parse_subordinator(s.raw("subordinator")));
      break;
    case ProcessKind::CgmyDirect: {
      CgmyParams p;
      p.c = s.number("c");
      p.m_left = s.number("m_left");
      p.m_right = s.number("m_right");
      p.y = s.number("y");
      p.epsilon = s.number("epsilon", 1e-4);
      out = ProcessSpec::cgmy_direct(p);
      break;
    }
    case ProcessKind::Clock:
      break;
  }
  out.kind = kind;
  out.clock = clock;
  s.reject_unknown();
  return out;
}

json process_json(const ProcessSpec& spec) {
  json out;
  out["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case ProcessKind::VG:
    case ProcessKind::VGSA:
      out["theta"] = spec.theta;
      out["sigma"] = spec.sigma;
      out["nu"] = spec.subordinator.nu;
      break;
    case ProcessKind::SB:
    case ProcessKind::SBSA:
      out["theta"] = spec.theta;
      out["sigma"] = spec.sigma;
      out["subordinator"] = subordinator_json(spec.subordinator);
      break;
    case ProcessKind::CgmyDirect:
      out["c"] = spec.cgmy.c;
      out["m_left"] = spec.cgmy.m_left;
      out["m_right"] = spec.cgmy.m_right;
      out["y"] = spec.cgmy.y;
      out["epsilon"] = spec.cgmy.epsilon;
      break;
    case ProcessKind::Clock:
      break;
  }
  return out;
}

std::vector<double> parse_t_grid(const json& doc) {
  if (doc.is_array()) {
    std::vector<double> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (!doc[i].is_number()) {
        throw ConfigError("experiment.t_grid[" + std::to_string(i) + "]: must be a number");
      }
      out.push_back(doc[i].get<double>());
    }
    return out;
  }
  Section s(doc, "experiment.t_grid");
  const double start = s.number("start");
  const double stop = s.number("stop");
  const double step = s.number("step");
  s.reject_unknown();
  if (!(step > 0.0)) throw ConfigError("experiment.t_grid.step: must be positive");
  if (!(stop >= start)) throw ConfigError("experiment.t_grid.stop: must be >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1000000) throw ConfigError("experiment.t_grid: more than 10^6 points");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
  return out;
}

json t_grid_json(const std::vector<double>& grid) {
  if (grid.size() >= 3) {
    const double step = grid[1] - grid[0];
    bool arithmetic = step > 0.0;
    for (std::size_t i = 0; arithmetic && i < grid.size(); ++i) {
      arithmetic = grid[i] == grid[0] + static_cast<double>(i) * step;
    }
    if (arithmetic) {
      // Only use the range form if parsing it reproduces the grid exactly.
      json range = {{"start", grid[0]}, {"stop", grid.back()}, {"step", step}};
      if (parse_t_grid(range) == grid) return range;
    }
  }
  return json(grid);
}

}  // namespace

json config_to_json(const ExperimentConfig& config) {
  json doc;
  doc["name"] = config.name;
  if (!config.description.empty()) doc["description"] = config.description;
  doc["process"] = process_json(config.process);
  if (config.process.clock) doc["clock"] = clock_json(*config.process.clock);
  json exp;
  exp["kind"] = to_string(config.kind);
  exp["t_grid"] = t_grid_json(config.t_grid);
  exp["n_paths"] = config.n_paths;
  exp["seed"] = config.seed;
  exp["batches"] = config.batches;
  exp["ma_window"] = config.ma_window;
  doc["experiment"] = exp;
  doc["output"] = {{"directory", config.output.directory},
                   {"write_samples", config.output.write_samples}};
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  Section top(doc, "");
  ExperimentConfig config;
  config.name = top.string("name");
  config.description = top.string("description", "");

  std::optional<ClockSpec> clock;
  if (top.has("clock")) clock = parse_clock(doc.at("clock"));
  config.process = parse_process(top.raw("process"), clock);

  Section exp(top.raw("experiment"), "experiment");
  const std::string kind = exp.string("kind");
  try {
    config.kind = experiment_kind_from_string(kind);
  } catch (const ConfigError&) {
    throw ConfigError("experiment.kind: unknown experiment kind '" + kind + "'");
  }
  config.t_grid = parse_t_grid(exp.raw("t_grid"));
  config.n_paths = exp.unsigned_integer("n_paths", 1000);
  config.seed = exp.unsigned_integer("seed", 0);
  config.batches = exp.unsigned_integer("batches", 1);
  config.ma_window = exp.unsigned_integer("ma_window", 10);
  exp.reject_unknown();

  if (top.has("output")) {
    Section out(doc.at("output"), "output");
    config.output.directory = out.string("directory", config.output.directory);
    config.output.write_samples = out.boolean("write_samples", true);
    out.reject_unknown();
  }
  top.reject_unknown();
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << config_to_json(config).dump(2) << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string canonical_config(const ExperimentConfig& config) {
  json doc = config_to_json(config);
  doc.erase("output");
  doc.erase("description");
  return doc.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace levyclock
