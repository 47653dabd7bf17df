#include "abom/benchmarks.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "abom/rng.hpp"

namespace abom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Condition number 1e6, exponent spread over the coordinate index.
double ellipsoidal(std::span<const double> x) {
  const double dm1 = static_cast<double>(x.size() - 1);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += std::pow(1e6, static_cast<double>(i) / dm1) * x[i] * x[i];
  }
  return s;
}

double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(kTwoPi * v);
  return s;
}

double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = x[i] - 1.0;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

double bent_cigar(std::span<const double> x) {
  double s = x[0] * x[0];
  for (std::size_t i = 1; i < x.size(); ++i) s += 1e6 * x[i] * x[i];
  return s;
}

double discus(std::span<const double> x) {
  double s = 1e6 * x[0] * x[0];
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
  return s;
}

double sharp_ridge(std::span<const double> x) {
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i] * x[i];
  return x[0] * x[0] + 100.0 * std::sqrt(tail);
}

// Exponents ramp from 2 to 6 across coordinates; the outer square root keeps
// the value finite in double precision on the full box at any dimension.
double different_powers(std::span<const double> x) {
  const double dm1 = static_cast<double>(x.size() - 1);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = 2.0 + 4.0 * static_cast<double>(i) / dm1;
    s += std::pow(std::abs(x[i]), e);
  }
  return std::sqrt(s);
}

// Offset puts the global minimum value at 0; the minimizer itself sits at
// ~420.97 per coordinate, outside the default box.
double schwefel(std::span<const double> x) {
  double s = 418.9828872724339 * static_cast<double>(x.size());
  for (double v : x) s -= v * std::sin(std::sqrt(std::abs(v)));
  return s;
}

double griewank_rosenbrock(std::span<const double> x) {
  const double dm1 = static_cast<double>(x.size() - 1);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i] * x[i] - x[i + 1];
    const double b = x[i] - 1.0;
    const double t = 100.0 * a * a + b * b;
    s += t / 4000.0 - std::cos(t);
  }
  return 10.0 * s / dm1 + 10.0;
}

struct Descriptor {
  const char* id;
  double (*fn)(std::span<const double>);
  std::size_t min_dim;
  enum class Opt { kZeros, kOnes, kNone } opt;
};

constexpr Descriptor kDescriptors[] = {
    {"sphere", sphere, 1, Descriptor::Opt::kZeros},
    {"ellipsoidal", ellipsoidal, 2, Descriptor::Opt::kZeros},
    {"rastrigin", rastrigin, 1, Descriptor::Opt::kZeros},
    {"rosenbrock", rosenbrock, 2, Descriptor::Opt::kOnes},
    {"bent_cigar", bent_cigar, 2, Descriptor::Opt::kZeros},
    {"discus", discus, 2, Descriptor::Opt::kZeros},
    {"sharp_ridge", sharp_ridge, 2, Descriptor::Opt::kZeros},
    {"different_powers", different_powers, 2, Descriptor::Opt::kZeros},
    {"schwefel", schwefel, 1, Descriptor::Opt::kNone},
    {"griewank_rosenbrock", griewank_rosenbrock, 2, Descriptor::Opt::kOnes},
};

}  // namespace

const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const Descriptor& d : kDescriptors) v.emplace_back(d.id);
    return v;
  }();
  return ids;
}

BenchmarkFunction make_benchmark(const std::string& id, std::size_t dim) {
  for (const Descriptor& d : kDescriptors) {
    if (id != d.id) continue;
    if (dim < d.min_dim) {
      throw std::invalid_argument("make_benchmark: " + id + " needs dim >= " +
                                  std::to_string(d.min_dim));
    }
    BenchmarkFunction f;
    f.id = id;
    f.dim = dim;
    f.lower.assign(dim, -100.0);
    f.upper.assign(dim, 100.0);
    f.fn = d.fn;
    f.optimum_value = 0.0;
    switch (d.opt) {
      case Descriptor::Opt::kZeros:
        f.optimum_point.assign(dim, 0.0);
        break;
      case Descriptor::Opt::kOnes:
        f.optimum_point.assign(dim, 1.0);
        break;
      case Descriptor::Opt::kNone:
        break;
    }
    return f;
  }
  throw std::invalid_argument("make_benchmark: unknown id '" + id + "'");
}

double evaluate(const BenchmarkFunction& fn, std::span<const double> x) {
  if (x.size() != fn.dim) {
    throw std::invalid_argument("evaluate: point dimension does not match function");
  }
  return fn.fn(x);
}

Vector UavScenario::lower_bounds() const {
  Vector lo(dimension());
  for (std::size_t k = 0; k < node_count; ++k) {
    for (std::size_t a = 0; a < 3; ++a) lo[3 * k + a] = box_lower[a];
  }
  return lo;
}

Vector UavScenario::upper_bounds() const {
  Vector hi(dimension());
  for (std::size_t k = 0; k < node_count; ++k) {
    for (std::size_t a = 0; a < 3; ++a) hi[3 * k + a] = box_upper[a];
  }
  return hi;
}

void UavScenario::validate() const {
  if (node_count == 0) throw std::invalid_argument("UavScenario: need at least one node");
  if (!(penalty_coefficient >= 0.0)) {
    throw std::invalid_argument("UavScenario: negative penalty coefficient");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(box_lower[a] < box_upper[a])) {
      throw std::invalid_argument("UavScenario: degenerate box");
    }
  }
  for (const CylinderThreat& c : threats) {
    if (!(c.radius > 0.0) || !(c.height > 0.0)) {
      throw std::invalid_argument("UavScenario: threat radius and height must be positive");
    }
    // Endpoints must be feasible or the zero-violation baseline is unreachable.
    for (const auto& p : {start, goal}) {
      const double dx = p[0] - c.x;
      const double dy = p[1] - c.y;
      if (p[2] >= 0.0 && p[2] <= c.height && std::hypot(dx, dy) < c.radius) {
        throw std::invalid_argument("UavScenario: start or goal inside a threat");
      }
    }
  }
  if (start[2] < 0.0 || goal[2] < 0.0) {
    throw std::invalid_argument("UavScenario: start or goal below ground");
  }
}

namespace {

// Depth of constraint violation at a point: radial depth inside every
// cylinder within its height band, plus depth below the ground plane.
double violation_depth(const UavScenario& sc, double x, double y, double z) {
  double depth = std::max(0.0, -z);
  for (const CylinderThreat& c : sc.threats) {
    if (z < 0.0 || z > c.height) continue;
    const double rho = std::hypot(x - c.x, y - c.y);
    if (rho < c.radius) depth += c.radius - rho;
  }
  return depth;
}

constexpr std::size_t kSegmentSamples = 32;

}  // namespace

double uav_path_cost(const UavScenario& scenario, std::span<const double> nodes) {
  if (nodes.size() != scenario.dimension()) {
    throw std::invalid_argument("uav_path_cost: candidate dimension mismatch");
  }
  // start -> node_0 -> ... -> node_{K-1} -> goal
  std::vector<std::array<double, 3>> pts;
  pts.reserve(scenario.node_count + 2);
  pts.push_back(scenario.start);
  for (std::size_t k = 0; k < scenario.node_count; ++k) {
    pts.push_back({nodes[3 * k], nodes[3 * k + 1], nodes[3 * k + 2]});
  }
  pts.push_back(scenario.goal);

  double length = 0.0;
  double violation = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const auto& a = pts[s];
    const auto& b = pts[s + 1];
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double dz = b[2] - a[2];
    const double seg_len = std::sqrt(dx * dx + dy * dy + dz * dz);
    length += seg_len;
    if (seg_len == 0.0) continue;  // duplicate nodes add nothing
    // Midpoint rule along the segment; weighting by seg_len keeps the
    // penalty a line integral, so splitting a segment changes nothing.
    const double weight = seg_len / static_cast<double>(kSegmentSamples);
    double depth_sum = 0.0;
    for (std::size_t q = 0; q < kSegmentSamples; ++q) {
      const double t = (static_cast<double>(q) + 0.5) / static_cast<double>(kSegmentSamples);
      depth_sum += violation_depth(scenario, a[0] + t * dx, a[1] + t * dy, a[2] + t * dz);
    }
    violation += weight * depth_sum;
  }
  return length + scenario.penalty_coefficient * violation;
}

UavScenario default_uav_scenario() {
  UavScenario sc;
  sc.start = {10.0, 10.0, 5.0};
  sc.goal = {190.0, 190.0, 5.0};
  sc.node_count = 10;
  sc.penalty_coefficient = 10.0;
  sc.box_lower = {0.0, 0.0, 0.0};
  sc.box_upper = {200.0, 200.0, 50.0};
  // Deterministic threat field; draws rejected until clear of both endpoints.
  RngStream rng(0x75617630ULL, 0);
  while (sc.threats.size() < 5) {
    CylinderThreat c;
    c.x = rng.uniform(40.0, 160.0);
    c.y = rng.uniform(40.0, 160.0);
    c.radius = rng.uniform(10.0, 25.0);
    c.height = rng.uniform(15.0, 45.0);
    const double clear_start = std::hypot(sc.start[0] - c.x, sc.start[1] - c.y);
    const double clear_goal = std::hypot(sc.goal[0] - c.x, sc.goal[1] - c.y);
    if (clear_start < c.radius + 5.0 || clear_goal < c.radius + 5.0) continue;
    sc.threats.push_back(c);
  }
  sc.validate();
  return sc;
}

std::string uav_scenario_to_json(const UavScenario& scenario) {
  nlohmann::json j;
  j["start"] = scenario.start;
  j["goal"] = scenario.goal;
  j["node_count"] = scenario.node_count;
  j["penalty_coefficient"] = scenario.penalty_coefficient;
  j["box_lower"] = scenario.box_lower;
  j["box_upper"] = scenario.box_upper;
  j["threats"] = nlohmann::json::array();
  for (const CylinderThreat& c : scenario.threats) {
    j["threats"].push_back({{"x", c.x}, {"y", c.y}, {"radius", c.radius}, {"height", c.height}});
  }
  return j.dump(2);
}

UavScenario uav_scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("uav scenario: bad JSON: ") + e.what());
  }
  UavScenario sc;
  try {
    sc.start = j.at("start").get<std::array<double, 3>>();
    sc.goal = j.at("goal").get<std::array<double, 3>>();
    sc.node_count = j.at("node_count").get<std::size_t>();
    sc.penalty_coefficient = j.at("penalty_coefficient").get<double>();
    sc.box_lower = j.at("box_lower").get<std::array<double, 3>>();
    sc.box_upper = j.at("box_upper").get<std::array<double, 3>>();
    for (const auto& t : j.at("threats")) {
      CylinderThreat c;
      c.x = t.at("x").get<double>();
      c.y = t.at("y").get<double>();
      c.radius = t.at("radius").get<double>();
      c.height = t.at("height").get<double>();
      sc.threats.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("uav scenario: missing or bad field: ") + e.what());
  }
  sc.validate();
  return sc;
}

void save_uav_scenario(const UavScenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_uav_scenario: cannot open " + path);
  out << uav_scenario_to_json(scenario) << '\n';
}

UavScenario load_uav_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_uav_scenario: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return uav_scenario_from_json(ss.str());
}

}  // namespace abom
