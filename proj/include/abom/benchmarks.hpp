#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "abom/matrix.hpp"

namespace abom {

// One box-constrained test function. `evaluate` is pure and thread-safe.
struct BenchmarkFunction {
  std::string id;
  std::size_t dim = 0;
  Vector lower;
  Vector upper;
  // Known minimizer inside the box; empty when the true minimizer lies
  // outside the box (schwefel on the default bounds).
  Vector optimum_point;
  double optimum_value = 0.0;
  double (*fn)(std::span<const double>) = nullptr;
};

const std::vector<std::string>& benchmark_ids();

// Builds one of the named functions on the default box [-100, 100]^dim.
// Throws std::invalid_argument for unknown ids or unsupported dimensions.
BenchmarkFunction make_benchmark(const std::string& id, std::size_t dim);

double evaluate(const BenchmarkFunction& fn, std::span<const double> x);

// Vertical-cylinder threat standing on the ground plane (z in [0, height]).
struct CylinderThreat {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double height = 0.0;
};

// Waypoint-encoding path problem: a candidate is node_count free 3-D nodes
// flattened as (x0, y0, z0, x1, ...); the path runs start -> nodes -> goal.
// Cost is path length plus penalty_coefficient times the integrated
// constraint violation (cylinder interiors and the z < 0 half-space).
struct UavScenario {
  std::array<double, 3> start{};
  std::array<double, 3> goal{};
  std::size_t node_count = 0;
  std::vector<CylinderThreat> threats;
  double penalty_coefficient = 10.0;
  std::array<double, 3> box_lower{};
  std::array<double, 3> box_upper{};

  std::size_t dimension() const { return 3 * node_count; }
  Vector lower_bounds() const;
  Vector upper_bounds() const;
  void validate() const;
};

double uav_path_cost(const UavScenario& scenario, std::span<const double> nodes);

// Fixed 10-node scenario with five deterministic cylinder threats.
UavScenario default_uav_scenario();

std::string uav_scenario_to_json(const UavScenario& scenario);
UavScenario uav_scenario_from_json(const std::string& text);
void save_uav_scenario(const UavScenario& scenario, const std::string& path);
UavScenario load_uav_scenario(const std::string& path);

}  // namespace abom
