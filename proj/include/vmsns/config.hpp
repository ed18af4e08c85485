#pragma once

#include "vmsns/mesh.hpp"
#include "vmsns/solver.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vmsns {

/// Scenario description read from a flat `section.key = value` file.
struct ScenarioConfig {
  int dim = 2;
  int n = 8;
  Box box = Box::unit();
  int degree = 1;

  double nu = 0.01;
  std::string forcing = "zero";  ///< zero | constant | manufactured
  double forcing_value = 0.0;
  std::string initial = "vortex";  ///< zero | vortex | manufactured
  double amplitude = 1.0;
  double pressure_scale = 1.0;
  bool convection = true;

  double C_s = 4.0;
  double C_c = 2.0;

  double dt = 0.01;
  double T = 0.1;
  int snapshot_every = 1;

  double picard_tol = 1e-10;
  int picard_max = 50;
  double linear_tol = 1e-12;

  std::string out_dir = "out";
  std::vector<std::string> formats{"csv"};

  StabParams stab() const { return {nu, C_s, C_c, convection}; }
  SolveConfig solve() const { return {dt, T, picard_tol, picard_max, linear_tol}; }
  bool wants(std::string_view format) const;
};

/// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();
/// Keys that must be present.
const std::vector<std::string>& required_config_keys();

/// Parses and validates; throws ConfigError listing every problem found.
ScenarioConfig parse_config_text(std::string_view text);
ScenarioConfig parse_config(const std::filesystem::path& path);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace vmsns
