#pragma once

#include "acmob/grid.hpp"
#include "acmob/physics.hpp"
#include "acmob/schemes.hpp"
#include "acmob/timestepping.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace acmob {

class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

struct RandomUniformInit {
  double lo = -0.8;
  double hi = 0.8;
  std::uint64_t seed = 1;
  friend bool operator==(const RandomUniformInit&, const RandomUniformInit&) = default;
};
/// 0.9 tanh((1.5 + 1.2 cos 6θ − 2πr) / sqrt(2λ)) about the domain centre.
struct FlowerInit {
  double lambda = 1e-4;
  friend bool operator==(const FlowerInit&, const FlowerInit&) = default;
};
/// max of two 0.9 tanh((R − |x ∓ c e_x|)/ε) balls about the domain centre.
struct Bubbles3dInit {
  double offset = 0.14;
  double radius = 0.2;
  friend bool operator==(const Bubbles3dInit&, const Bubbles3dInit&) = default;
};
struct ManufacturedInit {
  friend bool operator==(const ManufacturedInit&, const ManufacturedInit&) = default;
};
struct ConstantInit {
  double value = 0.0;
  friend bool operator==(const ConstantInit&, const ConstantInit&) = default;
};

using InitialCondition =
    std::variant<RandomUniformInit, FlowerInit, Bubbles3dInit, ManufacturedInit, ConstantInit>;

struct OutputConfig {
  std::string dir = "out";
  int csv_every = 1;       // 0 disables the CSV
  int snapshot_every = 0;  // 0 = final snapshot only
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  int dim = 2;
  int cells = 128;
  double length = 1.0;
  double origin = 0.0;

  double eps = 0.01;
  Mobility mobility = Mobility::constant(1.0);

  SchemeKind scheme = SchemeKind::DsCN;
  double s1 = 2.0;
  std::optional<double> s2;  // empty = auto

  double horizon = 1.0;
  StepMode steps = UniformSteps{0.1};

  KrylovConfig solver;
  InitialCondition initial = RandomUniformInit{};
  bool forcing = false;
  MonitorConfig monitors;
  OutputConfig output;

  GridSpec grid() const { return GridSpec(dim, cells, length, origin); }
  SchemeParams scheme_params() const { return SchemeParams(eps, s1, s2, scheme); }
  /// S2 with "auto" resolved against the grid and mobility.
  double resolved_s2() const;
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"convergence_forced", "coarsening_2d",
                                              "adaptive_2d", "mobility_effect_2d", "bubbles_3d"};
  return names;
}
RunConfig preset_experiment(const std::string& name);

Field build_initial_condition(const RunConfig& cfg);
SimulationConfig to_simulation_config(const RunConfig& cfg);

}  // namespace acmob
