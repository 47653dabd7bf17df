#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "abom/benchmarks.hpp"
#include "abom/rng.hpp"

using namespace abom;

namespace {

double eval_at(const std::string& id, const std::vector<double>& x) {
  const BenchmarkFunction f = make_benchmark(id, x.size());
  return evaluate(f, x);
}

// Scenario with no threats on a roomy box; tests add what they need.
UavScenario open_scenario(std::size_t node_count) {
  UavScenario sc;
  sc.start = {0.0, 0.0, 0.0};
  sc.goal = {10.0, 0.0, 0.0};
  sc.node_count = node_count;
  sc.penalty_coefficient = 10.0;
  sc.box_lower = {-50.0, -50.0, 0.0};
  sc.box_upper = {50.0, 50.0, 50.0};
  return sc;
}

}  // namespace

TEST_SUITE("benchmarks") {

TEST_CASE("registry lists ten functions and builds each of them") {
  const std::vector<std::string> expected = {
      "sphere",      "ellipsoidal", "rastrigin",        "rosenbrock",
      "bent_cigar",  "discus",      "sharp_ridge",      "different_powers",
      "schwefel",    "griewank_rosenbrock"};
  CHECK(benchmark_ids() == expected);
  for (const std::string& id : benchmark_ids()) {
    const BenchmarkFunction f = make_benchmark(id, 30);
    CHECK(f.id == id);
    CHECK(f.dim == 30);
    REQUIRE(f.lower.size() == 30);
    REQUIRE(f.upper.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(f.lower[i] == -100.0);
      CHECK(f.upper[i] == 100.0);
    }
    CHECK(f.optimum_value == 0.0);
    CHECK(f.fn != nullptr);
  }
}

TEST_CASE("hand-computed values at (1, 2, 3)") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  CHECK(eval_at("sphere", x) == doctest::Approx(14.0).epsilon(1e-12));
  // 1 + 1e3 * 4 + 1e6 * 9 with condition 1e6 spread geometrically.
  CHECK(eval_at("ellipsoidal", x) == doctest::Approx(9004001.0).epsilon(1e-12));
  // Cosine terms vanish at integers: 30 + (14 - 30).
  CHECK(eval_at("rastrigin", x) == doctest::Approx(14.0).epsilon(1e-12));
  // 100 * (2 - 1)^2 + 0 + 100 * (3 - 4)^2 + 1.
  CHECK(eval_at("rosenbrock", x) == doctest::Approx(201.0).epsilon(1e-12));
  CHECK(eval_at("bent_cigar", x) == doctest::Approx(13000001.0).epsilon(1e-12));
  CHECK(eval_at("discus", x) == doctest::Approx(1000013.0).epsilon(1e-12));
  CHECK(eval_at("sharp_ridge", x) ==
        doctest::Approx(1.0 + 100.0 * std::sqrt(13.0)).epsilon(1e-12));
  // Exponents 2, 4, 6: sqrt(1 + 16 + 729).
  CHECK(eval_at("different_powers", x) ==
        doctest::Approx(std::sqrt(746.0)).epsilon(1e-12));
}

TEST_CASE("hand-computed values at special points") {
  // Half-integers flip every cosine: 20 + 0.5 - (-10) - (-10) ... = 40.5.
  CHECK(eval_at("rastrigin", {0.5, -0.5}) == doctest::Approx(40.5).epsilon(1e-12));
  // At the origin the sine terms vanish, leaving the normalization offset.
  CHECK(eval_at("schwefel", {0.0, 0.0}) ==
        doctest::Approx(837.9657745448678).epsilon(1e-12));
  // One pair term: t = 1, so 10 * (1/4000 - cos 1) + 10.
  CHECK(eval_at("griewank_rosenbrock", {0.0, 0.0}) ==
        doctest::Approx(4.599476941318602).epsilon(1e-12));
}

TEST_CASE("known optima evaluate to the stored optimum value") {
  for (const std::string& id : benchmark_ids()) {
    const BenchmarkFunction f = make_benchmark(id, 12);
    if (f.optimum_point.empty()) {
      CHECK(id == "schwefel");  // only the shifted function lacks an in-box optimum
      continue;
    }
    REQUIRE(f.optimum_point.size() == 12);
    CHECK(evaluate(f, f.optimum_point) ==
          doctest::Approx(f.optimum_value).epsilon(1e-9));
  }
  // Spot-check the two minimizer families.
  CHECK(make_benchmark("sphere", 4).optimum_point == Vector(4, 0.0));
  CHECK(make_benchmark("rosenbrock", 4).optimum_point == Vector(4, 1.0));
}

TEST_CASE("random points never beat the stored optimum value") {
  RngStream rng(404, 0);
  for (const std::string& id : benchmark_ids()) {
    const BenchmarkFunction f = make_benchmark(id, 5);
    double worst_gap = 0.0;
    for (int trial = 0; trial < 20000; ++trial) {
      std::vector<double> x(5);
      for (double& v : x) v = rng.uniform(-100.0, 100.0);
      const double value = evaluate(f, x);
      REQUIRE(std::isfinite(value));
      worst_gap = std::min(worst_gap, value - f.optimum_value);
    }
    CHECK(worst_gap >= 0.0);
  }
}

TEST_CASE("far corners stay finite in high dimension") {
  std::vector<double> corner(200);
  for (std::size_t i = 0; i < corner.size(); ++i) {
    corner[i] = (i % 2 == 0) ? 100.0 : -100.0;
  }
  for (const std::string& id : benchmark_ids()) {
    const BenchmarkFunction f = make_benchmark(id, 200);
    const double value = evaluate(f, corner);
    CHECK(std::isfinite(value));
    CHECK(value >= f.optimum_value);
  }
}

TEST_CASE("evaluation is deterministic") {
  RngStream rng(77, 0);
  std::vector<double> x(8);
  for (double& v : x) v = rng.uniform(-100.0, 100.0);
  for (const std::string& id : benchmark_ids()) {
    const BenchmarkFunction f = make_benchmark(id, 8);
    CHECK(evaluate(f, x) == evaluate(f, x));
  }
}

TEST_CASE("make_benchmark rejects unknown ids and undersized dimensions") {
  CHECK_THROWS_AS(make_benchmark("ackley", 10), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("", 10), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("sphere", 0), std::invalid_argument);
  // Pairwise and axis-weighted functions need at least two coordinates.
  CHECK_THROWS_AS(make_benchmark("ellipsoidal", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("rosenbrock", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("bent_cigar", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("discus", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("sharp_ridge", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("different_powers", 1), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("griewank_rosenbrock", 1), std::invalid_argument);
  // One-dimensional separable functions are fine.
  CHECK_NOTHROW(make_benchmark("sphere", 1));
  CHECK_NOTHROW(make_benchmark("rastrigin", 1));
  CHECK_NOTHROW(make_benchmark("schwefel", 1));
}

TEST_CASE("evaluate rejects dimension mismatches") {
  const BenchmarkFunction f = make_benchmark("sphere", 3);
  const std::vector<double> short_x = {1.0, 2.0};
  const std::vector<double> long_x = {1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(evaluate(f, short_x), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(f, long_x), std::invalid_argument);
}

TEST_CASE("uav cost of a straight threat-free path is its length") {
  UavScenario sc = open_scenario(3);
  sc.validate();
  // Collinear nodes on the start-goal segment at z = 0.
  const std::vector<double> nodes = {2.5, 0.0, 0.0, 5.0, 0.0, 0.0, 7.5, 0.0, 0.0};
  CHECK(uav_path_cost(sc, nodes) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("uav cost without threats is the polyline length") {
  UavScenario sc = open_scenario(1);
  sc.goal = {4.0, 0.0, 0.0};
  sc.validate();
  const std::vector<double> nodes = {2.0, 3.0, 0.0};
  CHECK(uav_path_cost(sc, nodes) ==
        doctest::Approx(2.0 * std::sqrt(13.0)).epsilon(1e-12));
}

TEST_CASE("duplicate nodes leave the cost unchanged") {
  UavScenario one = open_scenario(1);
  one.goal = {4.0, 0.0, 0.0};
  UavScenario two = open_scenario(2);
  two.goal = {4.0, 0.0, 0.0};
  const double a = uav_path_cost(one, std::vector<double>{2.0, 3.0, 0.0});
  const double b = uav_path_cost(two, std::vector<double>{2.0, 3.0, 0.0, 2.0, 3.0, 0.0});
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("cylinder crossing pays the integrated radial depth") {
  UavScenario sc = open_scenario(1);
  sc.start = {-10.0, 0.0, 5.0};
  sc.goal = {10.0, 0.0, 5.0};
  sc.threats.push_back({0.0, 0.0, 4.0, 10.0});
  sc.validate();
  // Diameter crossing at z = 5: depth 4 - |x| over x in [-4, 4]. The exact
  // line integral is 16; the 32-sample midpoint rule lands on 15.99609375
  // and every sample is a dyadic rational, so the value is reproducible to
  // the last bit.
  const std::vector<double> through = {0.0, 0.0, 5.0};
  CHECK(uav_path_cost(sc, through) ==
        doctest::Approx(20.0 + 10.0 * 15.99609375).epsilon(1e-12));

  // Same path split at the quarter points: the penalty is a line integral,
  // so extra collinear nodes change only the quadrature grid.
  UavScenario split = sc;
  split.node_count = 3;
  const std::vector<double> nodes3 = {-5.0, 0.0, 5.0, 0.0, 0.0, 5.0, 5.0, 0.0, 5.0};
  CHECK(uav_path_cost(split, nodes3) ==
        doctest::Approx(uav_path_cost(sc, through)).epsilon(1e-6));

  // A detour above the cylinder cap avoids the penalty entirely.
  const std::vector<double> above = {0.0, 0.0, 20.0};
  const double detour = uav_path_cost(sc, above);
  CHECK(detour == doctest::Approx(2.0 * std::sqrt(100.0 + 225.0)).epsilon(1e-12));
  CHECK(detour < uav_path_cost(sc, through));
}

TEST_CASE("flying below ground pays the integrated depth") {
  UavScenario sc = open_scenario(1);
  sc.validate();
  // Node at (5, 0, -8): depth grows linearly from 0 to 8 along each leg, so
  // the midpoint rule is exact and the violation integral is 8 * leg length.
  const std::vector<double> nodes = {5.0, 0.0, -8.0};
  const double leg = std::sqrt(25.0 + 64.0);
  CHECK(uav_path_cost(sc, nodes) ==
        doctest::Approx(2.0 * leg + 10.0 * 8.0 * leg).epsilon(1e-12));
  // Deeper dives cost strictly more.
  const std::vector<double> deeper = {5.0, 0.0, -16.0};
  CHECK(uav_path_cost(sc, deeper) > uav_path_cost(sc, nodes));
}

TEST_CASE("uav cost rejects wrong candidate sizes") {
  const UavScenario sc = open_scenario(2);
  CHECK_THROWS_AS(uav_path_cost(sc, std::vector<double>(5, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(uav_path_cost(sc, std::vector<double>(7, 0.0)), std::invalid_argument);
}

TEST_CASE("scenario validation catches inconsistent setups") {
  UavScenario sc = open_scenario(1);
  CHECK_NOTHROW(sc.validate());

  UavScenario no_nodes = sc;
  no_nodes.node_count = 0;
  CHECK_THROWS_AS(no_nodes.validate(), std::invalid_argument);

  UavScenario bad_radius = sc;
  bad_radius.threats.push_back({5.0, 5.0, 0.0, 10.0});
  CHECK_THROWS_AS(bad_radius.validate(), std::invalid_argument);

  UavScenario bad_height = sc;
  bad_height.threats.push_back({5.0, 5.0, 2.0, -1.0});
  CHECK_THROWS_AS(bad_height.validate(), std::invalid_argument);

  UavScenario blocked_start = sc;
  blocked_start.threats.push_back({0.0, 0.0, 5.0, 10.0});
  CHECK_THROWS_AS(blocked_start.validate(), std::invalid_argument);

  UavScenario sunken_start = sc;
  sunken_start.start = {0.0, 0.0, -1.0};
  CHECK_THROWS_AS(sunken_start.validate(), std::invalid_argument);

  UavScenario bad_box = sc;
  bad_box.box_lower = {0.0, 0.0, 0.0};
  bad_box.box_upper = {0.0, 50.0, 50.0};
  CHECK_THROWS_AS(bad_box.validate(), std::invalid_argument);

  UavScenario bad_penalty = sc;
  bad_penalty.penalty_coefficient = -1.0;
  CHECK_THROWS_AS(bad_penalty.validate(), std::invalid_argument);
}

TEST_CASE("scenario bounds repeat the box per node") {
  UavScenario sc = open_scenario(2);
  CHECK(sc.dimension() == 6);
  const Vector lo = sc.lower_bounds();
  const Vector hi = sc.upper_bounds();
  REQUIRE(lo.size() == 6);
  REQUIRE(hi.size() == 6);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(lo[3 * k + a] == sc.box_lower[a]);
      CHECK(hi[3 * k + a] == sc.box_upper[a]);
    }
  }
}

TEST_CASE("default scenario is valid and thirty-dimensional") {
  const UavScenario sc = default_uav_scenario();
  CHECK_NOTHROW(sc.validate());
  CHECK(sc.node_count == 10);
  CHECK(sc.dimension() == 30);
  CHECK(sc.threats.size() == 5);
  // Building it twice yields the same threat field.
  const UavScenario again = default_uav_scenario();
  REQUIRE(again.threats.size() == sc.threats.size());
  for (std::size_t i = 0; i < sc.threats.size(); ++i) {
    CHECK(sc.threats[i].x == again.threats[i].x);
    CHECK(sc.threats[i].y == again.threats[i].y);
    CHECK(sc.threats[i].radius == again.threats[i].radius);
    CHECK(sc.threats[i].height == again.threats[i].height);
  }
  // A straight midline path is evaluable on the default scenario.
  std::vector<double> nodes(sc.dimension());
  for (std::size_t k = 0; k < sc.node_count; ++k) {
    const double t = static_cast<double>(k + 1) / static_cast<double>(sc.node_count + 1);
    for (std::size_t a = 0; a < 3; ++a) {
      nodes[3 * k + a] = sc.start[a] + t * (sc.goal[a] - sc.start[a]);
    }
  }
  CHECK(std::isfinite(uav_path_cost(sc, nodes)));
}

TEST_CASE("scenario json round trip preserves every field") {
  UavScenario sc = open_scenario(2);
  sc.threats.push_back({12.0, -7.5, 3.25, 18.0});
  sc.penalty_coefficient = 2.5;
  sc.validate();

  const UavScenario back = uav_scenario_from_json(uav_scenario_to_json(sc));
  CHECK(back.start == sc.start);
  CHECK(back.goal == sc.goal);
  CHECK(back.node_count == sc.node_count);
  CHECK(back.penalty_coefficient == sc.penalty_coefficient);
  CHECK(back.box_lower == sc.box_lower);
  CHECK(back.box_upper == sc.box_upper);
  REQUIRE(back.threats.size() == 1);
  CHECK(back.threats[0].x == 12.0);
  CHECK(back.threats[0].y == -7.5);
  CHECK(back.threats[0].radius == 3.25);
  CHECK(back.threats[0].height == 18.0);

  // Round-tripped scenarios price paths identically.
  const std::vector<double> nodes = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  CHECK(uav_path_cost(back, nodes) == uav_path_cost(sc, nodes));
}

TEST_CASE("scenario file round trip and error paths") {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "abom_uav_scenario_test.json";
  const UavScenario sc = default_uav_scenario();
  save_uav_scenario(sc, path.string());
  const UavScenario back = load_uav_scenario(path.string());
  CHECK(uav_scenario_to_json(back) == uav_scenario_to_json(sc));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_uav_scenario("/nonexistent/dir/scenario.json"), std::runtime_error);
  CHECK_THROWS_AS(uav_scenario_from_json("not json at all"), std::invalid_argument);
  CHECK_THROWS_AS(uav_scenario_from_json("{\"start\": [0, 0, 0]}"), std::invalid_argument);
  // Structurally valid JSON describing an invalid scenario still throws.
  UavScenario zero_nodes = open_scenario(1);
  zero_nodes.node_count = 0;
  CHECK_THROWS_AS(uav_scenario_from_json(uav_scenario_to_json(zero_nodes)),
                  std::invalid_argument);
}

}  // TEST_SUITE
