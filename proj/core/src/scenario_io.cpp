#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wcdrs/error.hpp"
#include "wcdrs/hedging.hpp"
#include "wcdrs/phase_retrieval.hpp"

namespace wcdrs {

namespace {

using nlohmann::json;

Vector vector_of(const json& j, Index expected, const char* what) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != expected) {
    throw FormatError(std::string("scenario: '") + what + "' has wrong length");
  }
  return Eigen::Map<const Vector>(values.data(), expected);
}

ProxFn objective_of(const json& spec, Index dim) {
  const auto type = spec.at("type").get<std::string>();
  if (type == "zero") return zero_prox();
  if (type == "quadratic") {
    const double curvature = spec.value("curvature", 1.0);
    Vector center = spec.contains("center") ? vector_of(spec.at("center"), dim, "center")
                                            : Vector::Zero(dim);
    return quadratic_prox(curvature, std::move(center));
  }
  if (type == "l1") return l1_prox(spec.value("scale", 1.0));
  if (type == "point") return point_indicator(vector_of(spec.at("point"), dim, "point"));
  if (type == "phase") {
    return phase::phase_term(vector_of(spec.at("a"), dim, "a"), spec.at("b").get<double>());
  }
  throw FormatError("scenario: unknown objective type '" + type + "'");
}

}  // namespace

ScenarioProblem scenario_problem_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto dim = j.at("scenario_dim").get<Index>();
    if (dim < 1) throw FormatError("scenario: scenario_dim must be positive");
    const auto& specs = j.at("scenarios");
    if (!specs.is_array() || specs.empty()) {
      throw FormatError("scenario: 'scenarios' must be a nonempty array");
    }
    std::vector<double> probs;
    if (j.contains("probabilities")) {
      probs = j.at("probabilities").get<std::vector<double>>();
      if (probs.size() != specs.size()) {
        throw FormatError("scenario: one probability per scenario required");
      }
    } else {
      probs.assign(specs.size(), 1.0 / static_cast<double>(specs.size()));
    }
    std::vector<Scenario> scenarios;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      scenarios.push_back({objective_of(specs[i], dim), probs[i]});
    }
    std::optional<double> mu;
    if (j.contains("mu")) mu = j.at("mu").get<double>();
    return ScenarioProblem(std::move(scenarios), dim, mu);
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
}

ScenarioProblem load_scenario_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_problem_from_json(buf.str());
}

}  // namespace wcdrs
