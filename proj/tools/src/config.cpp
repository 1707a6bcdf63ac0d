#include "cising/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "cising/error.hpp"

namespace cising::cli {

using nlohmann::json;

namespace {

constexpr const char* kTaskNames[] = {
    "mf-fixed-points", "mf-evolve",     "mf-phase-diagram", "multistability", "quantum-steady",
    "quantum-gap",     "quantum-evolve", "hysteresis",      "boundaries",
};

// A JSON object whose keys are consumed one by one; leftovers are rejected.
class Object {
 public:
  Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(name(key) + " must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(name(key) + " must be finite");
    return x;
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw ConfigError(name(key) + " is required");
    return number(key, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(name(key) + " must be an integer");
    const auto x = v->get<long long>();
    if (x < -(1LL << 30) || x > (1LL << 30)) throw ConfigError(name(key) + " is out of range");
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(name(key) + " must be true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(name(key) + " must be a string");
    return v->get<std::string>();
  }

  void finish(const std::string& context = {}) const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key))
        throw ConfigError("unknown key '" + name(key) + "'" + (context.empty() ? "" : " " + context));
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-throws library validation failures as config errors carrying the block name.
template <class F>
void validated(const std::string& block, F&& check) {
  try {
    check();
  } catch (const InvalidArgument& e) {
    throw ConfigError(block + ": " + e.what());
  }
}

ModelParams parse_model(Object& top) {
  const json* j = top.child("model");
  if (!j) throw ConfigError("model is required");
  Object o(*j, "model");
  ModelParams m;
  m.V = o.number("V", 0.0);
  m.g = o.number("g", 0.0);
  m.Gamma = o.number("Gamma", 1.0);
  m.p = o.number("p", 0.0);
  m.N = o.integer("N", 0);
  o.finish();
  validated("model", [&] { m.validate(); });
  if (m.N < 0) throw ConfigError("model.N must be >= 0");
  return m;
}

BlochVector parse_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path + " must be an array [X, Y, Z]");
  BlochVector v;
  double* out[] = {&v.X, &v.Y, &v.Z};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ConfigError(path + " entries must be numbers");
    *out[i] = j[i].get<double>();
    if (!std::isfinite(*out[i])) throw ConfigError(path + " entries must be finite");
  }
  return v;
}

sweep::Axis parse_axis(const json& j, const std::string& path) {
  Object o(j, path);
  sweep::Axis a;
  validated(path, [&] { a.parameter = sweep::parse_parameter(o.string("parameter", "")); });
  a.min = o.required_number("min");
  a.max = o.required_number("max");
  if (!o.has("count")) throw ConfigError(o.name("count") + " is required");
  a.count = o.integer("count", 2);
  o.finish();
  if (a.count < 2) throw ConfigError(path + ".count must be >= 2");
  if (!(a.min < a.max)) throw ConfigError(path + ": min must be < max");
  if (a.parameter == sweep::Parameter::kP && (a.min < 0.0 || a.max > 1.0))
    throw ConfigError(path + ": p must satisfy 0 <= p <= 1");
  return a;
}

GridConfig parse_grid(Object& top, bool both_axes) {
  const json* j = top.child("grid");
  if (!j) throw ConfigError("grid is required");
  Object o(*j, "grid");
  GridConfig g;
  const json* a1 = o.child("axis1");
  if (!a1) throw ConfigError("grid.axis1 is required");
  g.axis1 = parse_axis(*a1, "grid.axis1");
  if (const json* a2 = o.child("axis2")) g.axis2 = parse_axis(*a2, "grid.axis2");
  o.finish();
  if (both_axes && !g.axis2) throw ConfigError("grid.axis2 is required");
  if (g.axis2 && g.axis2->parameter == g.axis1.parameter)
    throw ConfigError("grid: axis parameters must be distinct");
  return g;
}

mf::SearchOptions parse_search(Object& top) {
  mf::SearchOptions s;
  if (const json* j = top.child("search")) {
    Object o(*j, "search");
    s.n_seeds = o.integer("n_seeds", s.n_seeds);
    s.max_newton_iterations = o.integer("max_newton_iterations", s.max_newton_iterations);
    o.finish();
  }
  if (s.n_seeds < 1) throw ConfigError("search.n_seeds must be >= 1");
  if (s.max_newton_iterations < 1) throw ConfigError("search.max_newton_iterations must be >= 1");
  return s;
}

SelectionConfig parse_selection(Object& top) {
  SelectionConfig s;
  if (const json* j = top.child("selection")) {
    Object o(*j, "selection");
    s.settle_time_max = o.number("settle_time_max", s.settle_time_max);
    s.cycle_time = o.number("cycle_time", s.cycle_time);
    o.finish();
  }
  if (!(s.settle_time_max > 0.0)) throw ConfigError("selection.settle_time_max must be > 0");
  if (!(s.cycle_time > 0.0)) throw ConfigError("selection.cycle_time must be > 0");
  return s;
}

void check_tolerances(const std::string& block, double rel, double abs) {
  if (!(rel > 0.0 && rel <= 1e-3)) throw ConfigError(block + ".rel_tol must lie in (0, 1e-3]");
  if (!(abs > 0.0 && abs <= 1e-3)) throw ConfigError(block + ".abs_tol must lie in (0, 1e-3]");
}

EvolveConfig parse_evolve(Object& top) {
  EvolveConfig e;
  if (const json* j = top.child("evolve")) {
    Object o(*j, "evolve");
    if (const json* s = o.child("initial_states")) {
      if (!s->is_array() || s->empty()) throw ConfigError("evolve.initial_states must be a non-empty array");
      e.initial_states.clear();
      for (std::size_t i = 0; i < s->size(); ++i)
        e.initial_states.push_back(parse_vector((*s)[i], "evolve.initial_states[" + std::to_string(i) + "]"));
    }
    e.t_end = o.number("t_end", e.t_end);
    e.sample_interval = o.number("sample_interval", e.sample_interval);
    e.rel_tol = o.number("rel_tol", e.rel_tol);
    e.abs_tol = o.number("abs_tol", e.abs_tol);
    e.transient_fraction = o.number("transient_fraction", e.transient_fraction);
    o.finish();
  }
  if (!(e.t_end > 0.0)) throw ConfigError("evolve.t_end must be > 0");
  if (!(e.sample_interval >= 0.0)) throw ConfigError("evolve.sample_interval must be >= 0");
  if (!(e.transient_fraction >= 0.0 && e.transient_fraction < 1.0))
    throw ConfigError("evolve.transient_fraction must lie in [0, 1)");
  check_tolerances("evolve", e.rel_tol, e.abs_tol);
  return e;
}

SpectralMethod parse_method(const std::string& s) {
  if (s == "auto") return SpectralMethod::kAuto;
  if (s == "dense") return SpectralMethod::kDense;
  if (s == "iterative") return SpectralMethod::kIterative;
  throw ConfigError("quantum.method must be one of auto, dense, iterative");
}

std::string method_name(SpectralMethod m) {
  switch (m) {
    case SpectralMethod::kAuto: return "auto";
    case SpectralMethod::kDense: return "dense";
    case SpectralMethod::kIterative: return "iterative";
  }
  return "auto";
}

int checked_spins(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + " must be an integer");
  const auto n = v.get<long long>();
  if (n < 1 || n > sweep::kMaxQuantumSpins)
    throw ConfigError(path + " must satisfy 1 <= N <= " + std::to_string(sweep::kMaxQuantumSpins));
  return static_cast<int>(n);
}

QuantumConfig parse_quantum(Object& top) {
  const json* j = top.child("quantum");
  if (!j) throw ConfigError("quantum is required");
  Object o(*j, "quantum");
  QuantumConfig q;
  if (const json* n = o.child("N")) {
    q.N.clear();
    if (n->is_array()) {
      if (n->empty()) throw ConfigError("quantum.N must not be empty");
      for (std::size_t i = 0; i < n->size(); ++i)
        q.N.push_back(checked_spins((*n)[i], "quantum.N[" + std::to_string(i) + "]"));
    } else {
      q.N.push_back(checked_spins(*n, "quantum.N"));
    }
  } else {
    throw ConfigError("quantum.N is required");
  }
  q.method = parse_method(o.string("method", "auto"));
  q.mean_field_reference = o.boolean("mean_field_reference", q.mean_field_reference);
  o.finish();
  return q;
}

QuantumEvolveConfig parse_quantum_evolve(Object& top, const ModelParams& model) {
  QuantumEvolveConfig q;
  if (const json* j = top.child("quantum_evolve")) {
    Object o(*j, "quantum_evolve");
    q.initial = o.string("initial", q.initial);
    q.t_end = o.number("t_end", q.t_end);
    q.samples = o.integer("samples", q.samples);
    q.rel_tol = o.number("rel_tol", q.rel_tol);
    q.abs_tol = o.number("abs_tol", q.abs_tol);
    o.finish();
  }
  if (q.initial != "north" && q.initial != "south" && q.initial != "mixed")
    throw ConfigError("quantum_evolve.initial must be one of north, south, mixed");
  if (!(q.t_end > 0.0)) throw ConfigError("quantum_evolve.t_end must be > 0");
  if (q.samples < 1) throw ConfigError("quantum_evolve.samples must be >= 1");
  check_tolerances("quantum_evolve", q.rel_tol, q.abs_tol);
  if (model.N < 1 || model.N > sweep::kMaxQuantumSpins)
    throw ConfigError("model.N must satisfy 1 <= N <= " + std::to_string(sweep::kMaxQuantumSpins) +
                      " for task quantum-evolve");
  return q;
}

HysteresisConfig parse_hysteresis(Object& top) {
  const json* j = top.child("hysteresis");
  if (!j) throw ConfigError("hysteresis is required");
  Object o(*j, "hysteresis");
  HysteresisConfig h;
  h.p_min = o.number("p_min", h.p_min);
  h.p_max = o.number("p_max", h.p_max);
  h.p_count = o.integer("p_count", h.p_count);
  validated("hysteresis", [&] { h.direction = sweep::parse_direction(o.string("direction", "both")); });
  h.threshold = o.number("threshold", h.threshold);
  h.settle_time = o.number("settle_time", h.settle_time);
  h.window = o.number("window", h.window);
  if (const json* v = o.child("initial")) h.initial = parse_vector(*v, "hysteresis.initial");
  if (const json* b = o.child("branches")) {
    if (!b->is_array() || b->empty()) throw ConfigError("hysteresis.branches must be a non-empty array");
    h.branches.clear();
    for (std::size_t i = 0; i < b->size(); ++i) {
      const std::string path = "hysteresis.branches[" + std::to_string(i) + "]";
      Object bo((*b)[i], path);
      BranchConfig bc;
      const std::string solver = bo.string("solver", "mean-field");
      if (solver == "mean-field") {
        bc.kind = sweep::SolverSpec::Kind::kMeanField;
      } else if (solver == "quantum") {
        bc.kind = sweep::SolverSpec::Kind::kQuantum;
        const json* n = bo.child("N");
        if (!n) throw ConfigError(path + ".N is required for the quantum solver");
        bc.N = checked_spins(*n, path + ".N");
      } else {
        throw ConfigError(path + ".solver must be mean-field or quantum");
      }
      bo.finish();
      h.branches.push_back(bc);
    }
  }
  o.finish();
  if (!(h.p_min >= 0.0 && h.p_max <= 1.0)) throw ConfigError("hysteresis: p must satisfy 0 <= p <= 1");
  if (!(h.p_min <= h.p_max)) throw ConfigError("hysteresis: p_min must be <= p_max");
  if (h.p_count < 1) throw ConfigError("hysteresis.p_count must be >= 1");
  if (h.p_count == 1 && h.p_min != h.p_max) throw ConfigError("hysteresis: p_count 1 needs p_min == p_max");
  if (!(h.threshold > 0.0)) throw ConfigError("hysteresis.threshold must be > 0");
  if (!(h.settle_time > 0.0)) throw ConfigError("hysteresis.settle_time must be > 0");
  if (!(h.window >= 0.0)) throw ConfigError("hysteresis.window must be >= 0");
  return h;
}

sweep::Axis parse_boundaries(Object& top) {
  sweep::Axis a{sweep::Parameter::kV, -10.0, -0.5, 96};
  if (const json* j = top.child("boundaries")) {
    Object o(*j, "boundaries");
    a.min = o.number("V_min", a.min);
    a.max = o.number("V_max", a.max);
    a.count = o.integer("V_count", a.count);
    o.finish();
  }
  if (a.count < 1) throw ConfigError("boundaries.V_count must be >= 1");
  if (a.count > 1 && !(a.min < a.max)) throw ConfigError("boundaries: V_min must be < V_max");
  if (a.count == 1 && a.min != a.max) throw ConfigError("boundaries: V_count 1 needs V_min == V_max");
  return a;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

json axis_json(const sweep::Axis& a) {
  return {{"parameter", sweep::to_string(a.parameter)}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
}

json vector_json(const BlochVector& v) { return json::array({v.X, v.Y, v.Z}); }

}  // namespace

Task parse_task(const std::string& name) {
  for (std::size_t i = 0; i < std::size(kTaskNames); ++i)
    if (name == kTaskNames[i]) return static_cast<Task>(i);
  std::string all;
  for (const char* t : kTaskNames) all += (all.empty() ? "" : ", ") + std::string(t);
  throw ConfigError("task must be one of " + all + " (got '" + name + "')");
}

std::string to_string(Task task) { return kTaskNames[static_cast<std::size_t>(task)]; }

std::vector<double> HysteresisConfig::p_values() const {
  if (p_count == 1) return {p_min};
  return sweep::Axis{sweep::Parameter::kP, p_min, p_max, p_count}.values();
}

mf::SearchOptions RunConfig::search_options() const {
  mf::SearchOptions s = search;
  s.rng_seed = rng_seed;
  return s;
}

RunConfig parse_config(const json& input) {
  const json* doc = &input;
  if (input.is_object() && input.contains("config") && input.contains("tool")) doc = &input.at("config");

  Object top(*doc, "");
  RunConfig cfg;
  const json* task = top.child("task");
  if (!task || !task->is_string()) throw ConfigError("task is required and must be a string");
  cfg.task = parse_task(task->get<std::string>());
  cfg.model = parse_model(top);

  if (const json* s = top.child("rng_seed")) {
    if (!s->is_number_unsigned()) throw ConfigError("rng_seed must be a non-negative integer");
    cfg.rng_seed = s->get<std::uint64_t>();
  } else {
    cfg.rng_seed = fresh_seed();
  }
  cfg.workers = top.integer("workers", 1);
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (const json* out = top.child("output")) {
    Object o(*out, "output");
    cfg.output_directory = o.string("directory", "");
    if (o.string("format", "csv") != "csv") throw ConfigError("output.format must be csv");
    o.finish();
  }

  switch (cfg.task) {
    case Task::kMfFixedPoints:
      cfg.search = parse_search(top);
      break;
    case Task::kMfEvolve:
      cfg.evolve = parse_evolve(top);
      break;
    case Task::kMfPhaseDiagram:
      cfg.grid = parse_grid(top, true);
      cfg.search = parse_search(top);
      cfg.selection = parse_selection(top);
      break;
    case Task::kMultistability: {
      cfg.grid = parse_grid(top, true);
      const auto a = cfg.grid->axis1.parameter, b = cfg.grid->axis2->parameter;
      if (!((a == sweep::Parameter::kG && b == sweep::Parameter::kP) ||
            (a == sweep::Parameter::kP && b == sweep::Parameter::kG)))
        throw ConfigError("grid: multistability axes must be g and p");
      cfg.search = parse_search(top);
      cfg.selection = parse_selection(top);
      break;
    }
    case Task::kQuantumSteady:
    case Task::kQuantumGap:
      if (top.has("grid")) cfg.grid = parse_grid(top, false);
      cfg.quantum = parse_quantum(top);
      if (cfg.quantum.mean_field_reference) {
        cfg.search = parse_search(top);
        cfg.selection = parse_selection(top);
      }
      break;
    case Task::kQuantumEvolve:
      cfg.quantum_evolve = parse_quantum_evolve(top, cfg.model);
      break;
    case Task::kHysteresis:
      cfg.hysteresis = parse_hysteresis(top);
      break;
    case Task::kBoundaries:
      cfg.boundaries = parse_boundaries(top);
      break;
  }
  top.finish("for task '" + to_string(cfg.task) + "'");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["task"] = to_string(cfg.task);
  j["model"] = {{"V", cfg.model.V}, {"g", cfg.model.g}, {"Gamma", cfg.model.Gamma}, {"p", cfg.model.p},
                {"N", cfg.model.N}};
  j["rng_seed"] = cfg.rng_seed;
  j["workers"] = cfg.workers;
  j["output"] = {{"directory", cfg.output_directory}, {"format", "csv"}};

  const auto search = [&] {
    j["search"] = {{"n_seeds", cfg.search.n_seeds}, {"max_newton_iterations", cfg.search.max_newton_iterations}};
  };
  const auto selection = [&] {
    j["selection"] = {{"settle_time_max", cfg.selection.settle_time_max}, {"cycle_time", cfg.selection.cycle_time}};
  };
  const auto grid = [&] {
    if (!cfg.grid) return;
    json g{{"axis1", axis_json(cfg.grid->axis1)}};
    if (cfg.grid->axis2) g["axis2"] = axis_json(*cfg.grid->axis2);
    j["grid"] = g;
  };

  switch (cfg.task) {
    case Task::kMfFixedPoints:
      search();
      break;
    case Task::kMfEvolve: {
      json states = json::array();
      for (const auto& s : cfg.evolve.initial_states) states.push_back(vector_json(s));
      j["evolve"] = {{"initial_states", states},
                     {"t_end", cfg.evolve.t_end},
                     {"sample_interval", cfg.evolve.sample_interval},
                     {"rel_tol", cfg.evolve.rel_tol},
                     {"abs_tol", cfg.evolve.abs_tol},
                     {"transient_fraction", cfg.evolve.transient_fraction}};
      break;
    }
    case Task::kMfPhaseDiagram:
    case Task::kMultistability:
      grid();
      search();
      selection();
      break;
    case Task::kQuantumSteady:
    case Task::kQuantumGap:
      grid();
      j["quantum"] = {{"N", cfg.quantum.N},
                      {"method", method_name(cfg.quantum.method)},
                      {"mean_field_reference", cfg.quantum.mean_field_reference}};
      if (cfg.quantum.mean_field_reference) {
        search();
        selection();
      }
      break;
    case Task::kQuantumEvolve:
      j["quantum_evolve"] = {{"initial", cfg.quantum_evolve.initial},
                             {"t_end", cfg.quantum_evolve.t_end},
                             {"samples", cfg.quantum_evolve.samples},
                             {"rel_tol", cfg.quantum_evolve.rel_tol},
                             {"abs_tol", cfg.quantum_evolve.abs_tol}};
      break;
    case Task::kHysteresis: {
      const auto& h = cfg.hysteresis;
      json branches = json::array();
      for (const auto& b : h.branches) {
        if (b.kind == sweep::SolverSpec::Kind::kMeanField)
          branches.push_back({{"solver", "mean-field"}});
        else
          branches.push_back({{"solver", "quantum"}, {"N", b.N}});
      }
      j["hysteresis"] = {{"p_min", h.p_min},
                         {"p_max", h.p_max},
                         {"p_count", h.p_count},
                         {"direction", sweep::to_string(h.direction)},
                         {"threshold", h.threshold},
                         {"settle_time", h.settle_time},
                         {"window", h.window},
                         {"initial", vector_json(h.initial)},
                         {"branches", branches}};
      break;
    }
    case Task::kBoundaries:
      j["boundaries"] = {{"V_min", cfg.boundaries.min}, {"V_max", cfg.boundaries.max}, {"V_count", cfg.boundaries.count}};
      break;
  }
  return j;
}

}  // namespace cising::cli
