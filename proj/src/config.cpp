#include "acmob/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace acmob {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"grid",   "physics", "scheme",   "time",  "solver",
                                       "initial", "forcing", "monitors", "output"};
  return s;
}

class Document {
public:
  explicit Document(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find_first_of("#;");
      const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ParseError(line, "unterminated section header");
        current = trim(s.substr(1, s.size() - 2));
        if (!known_sections().contains(current))
          throw ParseError(line, "unknown section [" + current + "]");
        sections_[current];
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
      if (current.empty()) throw ParseError(line, "key outside of a section");
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (key.empty()) throw ParseError(line, "empty key");
      if (value.empty()) throw ParseError(line, "empty value for '" + key + "'");
      auto& sec = sections_[current];
      if (sec.contains(key)) throw ParseError(line, "duplicate key '" + current + "." + key + "'");
      sec[key] = Entry{value, line, false};
    }
  }

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  void reject_unused() const {
    for (const auto& [sec, entries] : sections_)
      for (const auto& [key, e] : entries)
        if (!e.used) throw ParseError(e.line, "unknown or inapplicable key '" + sec + "." + key + "'");
  }

private:
  std::map<std::string, Section> sections_;
};

double to_double(const Entry& e, const std::string& name) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError(e.line, name + ": expected a finite number, got '" + e.value + "'");
  return v;
}

long long to_integer(const Entry& e, const std::string& name) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError(e.line, name + ": expected an integer, got '" + e.value + "'");
  return v;
}

std::uint64_t to_seed(const Entry& e, const std::string& name) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError(e.line, name + ": expected a non-negative integer, got '" + e.value + "'");
  return v;
}

bool to_bool(const Entry& e, const std::string& name) {
  if (e.value == "true" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "off" || e.value == "0") return false;
  throw ParseError(e.line, name + ": expected true or false, got '" + e.value + "'");
}

MonitorPolicy to_policy(const Entry& e, const std::string& name) {
  if (e.value == "warn") return MonitorPolicy::Warn;
  if (e.value == "abort") return MonitorPolicy::Abort;
  if (e.value == "off") return MonitorPolicy::Off;
  throw ParseError(e.line, name + ": expected warn, abort or off, got '" + e.value + "'");
}

std::string policy_name(MonitorPolicy p) {
  switch (p) {
    case MonitorPolicy::Warn:
      return "warn";
    case MonitorPolicy::Abort:
      return "abort";
    case MonitorPolicy::Off:
      return "off";
  }
  return "warn";
}

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Read helpers: assign only when the key is present.
struct Reader {
  Document& doc;
  std::string section;

  const Entry* get(const std::string& key) { return doc.find(section, key); }
  void real(const std::string& key, double& out) {
    if (const auto* e = get(key)) out = to_double(*e, section + "." + key);
  }
  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const auto* e = get(key)) out = static_cast<Int>(to_integer(*e, section + "." + key));
  }
  void seed(const std::string& key, std::uint64_t& out) {
    if (const auto* e = get(key)) out = to_seed(*e, section + "." + key);
  }
};

}  // namespace

double RunConfig::resolved_s2() const { return resolve_s2(scheme_params(), mobility, grid()); }

void RunConfig::validate() const {
  if (dim < 1 || dim > 3) throw ConfigError("grid.dim: must be 1, 2 or 3");
  if (cells < 1) throw ConfigError("grid.cells: must be positive");
  if (!(length > 0.0)) throw ConfigError("grid.length: must be positive");
  (void)grid();
  if (!(eps > 0.0)) throw ConfigError("physics.eps: must be > 0");
  if (!(s1 >= kReactionLipschitz))
    throw ConfigError("scheme.s1: S₁ ≥ 2 required (got " + num(s1) + ")");
  if (s2 && !(*s2 >= 0.0)) throw ConfigError("scheme.s2: must be >= 0 or auto");
  if (!(horizon >= 0.0)) throw ConfigError("time.T: must be >= 0");
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, UniformSteps>) {
          if (!(m.tau > 0.0)) throw ConfigError("time.tau: must be > 0");
        } else if constexpr (std::is_same_v<M, RandomSteps>) {
          if (!(m.tau_mean > 0.0)) throw ConfigError("time.tau_mean: must be > 0");
          if (!(m.amplitude >= 0.0 && m.amplitude < 1.0))
            throw ConfigError("time.amplitude: must be in [0, 1)");
        } else {
          if (!(m.tau_min > 0.0)) throw ConfigError("time.tau_min: must be > 0");
          if (!(m.tau_max >= m.tau_min)) throw ConfigError("time.tau_max: must be >= tau_min");
          if (!(m.alpha >= 0.0)) throw ConfigError("time.alpha: must be >= 0");
        }
      },
      steps);
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (const auto* r = std::get_if<RandomUniformInit>(&initial); r && !(r->lo <= r->hi))
    throw ConfigError("initial.lo: must be <= initial.hi");
  if (const auto* f = std::get_if<FlowerInit>(&initial)) {
    if (dim != 2) throw ConfigError("initial.kind: flower requires dim = 2");
    if (!(f->lambda > 0.0)) throw ConfigError("initial.lambda: must be > 0");
  }
  if (const auto* b = std::get_if<Bubbles3dInit>(&initial)) {
    if (dim != 3) throw ConfigError("initial.kind: bubbles3d requires dim = 3");
    if (!(b->radius > 0.0)) throw ConfigError("initial.radius: must be > 0");
  }
  if (std::holds_alternative<ManufacturedInit>(initial) && dim != 2)
    throw ConfigError("initial.kind: manufactured requires dim = 2");
  if (forcing && !std::holds_alternative<ManufacturedInit>(initial))
    throw ConfigError("forcing.enabled: requires initial.kind = manufactured");
  if (!(monitors.mbp_slack >= 0.0) || !(monitors.energy_rel_slack >= 0.0) ||
      !(monitors.energy_bound_slack >= 0.0))
    throw ConfigError("monitors: slacks must be >= 0");
  if (output.csv_every < 0) throw ConfigError("output.csv_every: must be >= 0");
  if (output.snapshot_every < 0) throw ConfigError("output.snapshot_every: must be >= 0");
}

RunConfig parse_config(const std::string& text) {
  Document doc(text);
  RunConfig cfg;

  {
    Reader r{doc, "grid"};
    r.integer("dim", cfg.dim);
    r.integer("cells", cfg.cells);
    r.real("length", cfg.length);
    r.real("origin", cfg.origin);
  }
  {
    Reader r{doc, "physics"};
    r.real("eps", cfg.eps);
    std::string kind = "constant";
    int kind_line = 0;
    if (const auto* e = r.get("mobility")) {
      kind = e->value;
      kind_line = e->line;
    }
    if (kind == "constant") {
      double c = 1.0;
      r.real("mobility_c", c);
      if (!(c >= 0.0)) throw ConfigError("physics.mobility_c: must be >= 0");
      cfg.mobility = Mobility::constant(c);
    } else if (kind == "two_sided") {
      double m = 1.0;
      r.real("mobility_m", m);
      if (!(m > 0.0)) throw ConfigError("physics.mobility_m: exponent m must be > 0");
      cfg.mobility = Mobility::two_sided(m);
    } else if (kind == "one_sided") {
      cfg.mobility = Mobility::one_sided();
    } else {
      throw ParseError(kind_line, "physics.mobility: expected constant, two_sided or one_sided");
    }
  }
  {
    Reader r{doc, "scheme"};
    if (const auto* e = r.get("kind")) {
      if (e->value == "dsbe")
        cfg.scheme = SchemeKind::DsBE;
      else if (e->value == "dscn")
        cfg.scheme = SchemeKind::DsCN;
      else
        throw ParseError(e->line, "scheme.kind: expected dsbe or dscn");
    }
    r.real("s1", cfg.s1);
    if (const auto* e = r.get("s2")) {
      if (e->value == "auto")
        cfg.s2.reset();
      else
        cfg.s2 = to_double(*e, "scheme.s2");
    }
  }
  {
    Reader r{doc, "time"};
    r.real("T", cfg.horizon);
    std::string kind = "uniform";
    int kind_line = 0;
    if (const auto* e = r.get("controller")) {
      kind = e->value;
      kind_line = e->line;
    }
    if (kind == "uniform") {
      UniformSteps u;
      r.real("tau", u.tau);
      cfg.steps = u;
    } else if (kind == "random") {
      RandomSteps s;
      r.real("tau_mean", s.tau_mean);
      r.real("amplitude", s.amplitude);
      r.seed("seed", s.seed);
      cfg.steps = s;
    } else if (kind == "adaptive") {
      AdaptiveSteps a;
      r.real("tau_max", a.tau_max);
      r.real("tau_min", a.tau_min);
      r.real("alpha", a.alpha);
      cfg.steps = a;
    } else {
      throw ParseError(kind_line, "time.controller: expected uniform, random or adaptive");
    }
  }
  {
    Reader r{doc, "solver"};
    r.real("rel_tol", cfg.solver.rel_tol);
    r.real("abs_tol", cfg.solver.abs_tol);
    r.integer("max_iter", cfg.solver.max_iter);
  }
  {
    Reader r{doc, "initial"};
    std::string kind = "random_uniform";
    int kind_line = 0;
    if (const auto* e = r.get("kind")) {
      kind = e->value;
      kind_line = e->line;
    }
    if (kind == "random_uniform") {
      RandomUniformInit init;
      r.real("lo", init.lo);
      r.real("hi", init.hi);
      r.seed("seed", init.seed);
      cfg.initial = init;
    } else if (kind == "flower") {
      FlowerInit init;
      const auto* e = r.get("lambda");
      if (!e) throw ConfigError("initial.lambda: required for flower (suggested: eps^2)");
      init.lambda = to_double(*e, "initial.lambda");
      cfg.initial = init;
    } else if (kind == "bubbles3d") {
      Bubbles3dInit init;
      r.real("offset", init.offset);
      r.real("radius", init.radius);
      cfg.initial = init;
    } else if (kind == "manufactured") {
      cfg.initial = ManufacturedInit{};
    } else if (kind == "constant") {
      ConstantInit init;
      r.real("value", init.value);
      cfg.initial = init;
    } else {
      throw ParseError(kind_line, "initial.kind: unknown initial condition '" + kind + "'");
    }
  }
  {
    Reader r{doc, "forcing"};
    if (const auto* e = r.get("enabled")) cfg.forcing = to_bool(*e, "forcing.enabled");
  }
  {
    Reader r{doc, "monitors"};
    if (const auto* e = r.get("mbp")) cfg.monitors.mbp = to_policy(*e, "monitors.mbp");
    if (const auto* e = r.get("energy")) cfg.monitors.energy = to_policy(*e, "monitors.energy");
    r.real("mbp_slack", cfg.monitors.mbp_slack);
    r.real("energy_rel_slack", cfg.monitors.energy_rel_slack);
    r.real("energy_bound_slack", cfg.monitors.energy_bound_slack);
  }
  {
    Reader r{doc, "output"};
    if (const auto* e = r.get("dir")) cfg.output.dir = e->value;
    r.integer("csv_every", cfg.output.csv_every);
    r.integer("snapshot_every", cfg.output.snapshot_every);
  }
  doc.reject_unused();
  cfg.validate();
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream o;
  o << "[grid]\n"
    << "dim = " << cfg.dim << "\n"
    << "cells = " << cfg.cells << "\n"
    << "length = " << num(cfg.length) << "\n"
    << "origin = " << num(cfg.origin) << "\n\n";

  o << "[physics]\n"
    << "eps = " << num(cfg.eps) << "\n";
  switch (cfg.mobility.kind()) {
    case Mobility::Kind::Constant:
      o << "mobility = constant\nmobility_c = " << num(cfg.mobility.parameter()) << "\n";
      break;
    case Mobility::Kind::TwoSidedDegenerate:
      o << "mobility = two_sided\nmobility_m = " << num(cfg.mobility.parameter()) << "\n";
      break;
    case Mobility::Kind::OneSided:
      o << "mobility = one_sided\n";
      break;
  }
  o << "\n[scheme]\n"
    << "kind = " << to_string(cfg.scheme) << "\n"
    << "s1 = " << num(cfg.s1) << "\n"
    << "s2 = " << (cfg.s2 ? num(*cfg.s2) : std::string("auto")) << "\n\n";

  o << "[time]\nT = " << num(cfg.horizon) << "\n";
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, UniformSteps>) {
          o << "controller = uniform\ntau = " << num(m.tau) << "\n";
        } else if constexpr (std::is_same_v<M, RandomSteps>) {
          o << "controller = random\ntau_mean = " << num(m.tau_mean)
            << "\namplitude = " << num(m.amplitude) << "\nseed = " << m.seed << "\n";
        } else {
          o << "controller = adaptive\ntau_max = " << num(m.tau_max)
            << "\ntau_min = " << num(m.tau_min) << "\nalpha = " << num(m.alpha) << "\n";
        }
      },
      cfg.steps);

  o << "\n[solver]\n"
    << "rel_tol = " << num(cfg.solver.rel_tol) << "\n"
    << "abs_tol = " << num(cfg.solver.abs_tol) << "\n"
    << "max_iter = " << cfg.solver.max_iter << "\n\n";

  o << "[initial]\n";
  std::visit(
      [&](const auto& init) {
        using I = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<I, RandomUniformInit>) {
          o << "kind = random_uniform\nlo = " << num(init.lo) << "\nhi = " << num(init.hi)
            << "\nseed = " << init.seed << "\n";
        } else if constexpr (std::is_same_v<I, FlowerInit>) {
          o << "kind = flower\nlambda = " << num(init.lambda) << "\n";
        } else if constexpr (std::is_same_v<I, Bubbles3dInit>) {
          o << "kind = bubbles3d\noffset = " << num(init.offset)
            << "\nradius = " << num(init.radius) << "\n";
        } else if constexpr (std::is_same_v<I, ManufacturedInit>) {
          o << "kind = manufactured\n";
        } else {
          o << "kind = constant\nvalue = " << num(init.value) << "\n";
        }
      },
      cfg.initial);

  o << "\n[forcing]\nenabled = " << (cfg.forcing ? "true" : "false") << "\n\n";
  o << "[monitors]\n"
    << "mbp = " << policy_name(cfg.monitors.mbp) << "\n"
    << "energy = " << policy_name(cfg.monitors.energy) << "\n"
    << "mbp_slack = " << num(cfg.monitors.mbp_slack) << "\n"
    << "energy_rel_slack = " << num(cfg.monitors.energy_rel_slack) << "\n"
    << "energy_bound_slack = " << num(cfg.monitors.energy_bound_slack) << "\n\n";
  o << "[output]\n"
    << "dir = " << cfg.output.dir << "\n"
    << "csv_every = " << cfg.output.csv_every << "\n"
    << "snapshot_every = " << cfg.output.snapshot_every << "\n";
  return o.str();
}

RunConfig preset_experiment(const std::string& name) {
  RunConfig c;
  c.s1 = 2.0;
  c.s2.reset();
  c.output.dir = "out/" + name;
  if (name == "convergence_forced") {
    c.dim = 2;
    c.cells = 400;
    c.length = 2.0 * std::numbers::pi;
    c.eps = 0.01;
    c.mobility = Mobility::constant(1.0);
    c.scheme = SchemeKind::DsCN;
    c.horizon = 1.0;
    c.steps = UniformSteps{1.0 / 320.0};
    c.initial = ManufacturedInit{};
    c.forcing = true;
    c.monitors.mbp = MonitorPolicy::Off;
    c.monitors.energy = MonitorPolicy::Off;
    c.output.snapshot_every = 0;
  } else if (name == "coarsening_2d") {
    c.dim = 2;
    c.cells = 128;
    c.length = 1.0;
    c.eps = 0.01;
    c.mobility = Mobility::constant(1.0);
    c.scheme = SchemeKind::DsCN;
    c.horizon = 20.0;
    c.steps = UniformSteps{0.1};
    c.initial = RandomUniformInit{-0.8, 0.8, 1};
  } else if (name == "adaptive_2d") {
    c.dim = 2;
    c.cells = 128;
    c.length = 1.0;
    c.eps = 0.01;
    c.mobility = Mobility::constant(1.0);
    c.scheme = SchemeKind::DsCN;
    c.horizon = 1000.0;
    c.steps = AdaptiveSteps{0.25, 0.025, 1e10};
    c.initial = RandomUniformInit{-0.8, 0.8, 1};
    c.output.csv_every = 1;
    c.output.snapshot_every = 0;
  } else if (name == "mobility_effect_2d") {
    c.dim = 2;
    c.cells = 128;
    c.length = 1.0;
    c.eps = 0.01;
    c.mobility = Mobility::two_sided(1.0);
    c.scheme = SchemeKind::DsCN;
    c.horizon = 300.0;
    c.steps = AdaptiveSteps{0.25, 0.025, 1e7};
    c.initial = FlowerInit{c.eps * c.eps};
  } else if (name == "bubbles_3d") {
    c.dim = 3;
    c.cells = 64;
    c.length = 1.0;
    c.origin = -0.5;
    c.eps = 0.03;
    c.mobility = Mobility::constant(1.0);
    c.scheme = SchemeKind::DsCN;
    c.horizon = 20.0;
    c.steps = AdaptiveSteps{0.1, 0.01, 1e7};
    c.initial = Bubbles3dInit{0.14, 0.2};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

namespace {

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Field build_initial_condition(const RunConfig& cfg) {
  const GridSpec g = cfg.grid();
  const double centre = cfg.origin + 0.5 * cfg.length;
  return std::visit(
      [&](const auto& init) -> Field {
        using I = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<I, RandomUniformInit>) {
          std::mt19937_64 rng(init.seed);
          Field f(g);
          for (Eigen::Index i = 0; i < f.size(); ++i)
            f[i] = init.lo + (init.hi - init.lo) * uniform_unit(rng);
          return f;
        } else if constexpr (std::is_same_v<I, FlowerInit>) {
          const double width = std::sqrt(2.0 * init.lambda);
          return Field::sample(g, [&](const std::array<double, 3>& x) {
            const double dx = x[0] - centre, dy = x[1] - centre;
            const double theta = std::atan2(dy, dx);
            const double r = std::hypot(dx, dy);
            return 0.9 * std::tanh((1.5 + 1.2 * std::cos(6.0 * theta) -
                                    2.0 * std::numbers::pi * r) / width);
          });
        } else if constexpr (std::is_same_v<I, Bubbles3dInit>) {
          return Field::sample(g, [&](const std::array<double, 3>& x) {
            const double y = x[1] - centre, z = x[2] - centre;
            auto ball = [&](double cx) {
              const double dx = x[0] - centre - cx;
              return 0.9 * std::tanh((init.radius - std::sqrt(dx * dx + y * y + z * z)) / cfg.eps);
            };
            return std::max(ball(init.offset), ball(-init.offset));
          });
        } else if constexpr (std::is_same_v<I, ManufacturedInit>) {
          const ForcingSpec spec{ForcingSpec::Exact::ExpDecaySinSin, cfg.eps};
          return Field::sample(g, [&](const std::array<double, 3>& x) {
            return exact_solution(spec, x, 0.0);
          });
        } else {
          return Field(g, init.value);
        }
      },
      cfg.initial);
}

SimulationConfig to_simulation_config(const RunConfig& cfg) {
  cfg.validate();
  SimulationConfig sim;
  sim.scheme = cfg.scheme_params();
  sim.mobility = cfg.mobility;
  sim.solver = cfg.solver;
  sim.steps = cfg.steps;
  sim.horizon = cfg.horizon;
  if (cfg.forcing) sim.forcing = ForcingSpec{ForcingSpec::Exact::ExpDecaySinSin, cfg.eps};
  sim.monitors = cfg.monitors;
  return sim;
}

}  // namespace acmob
