#include "wcdrs/geometry.hpp"

#include <cmath>
#include <string>

#include "wcdrs/error.hpp"

namespace wcdrs {

DescentViolation::DescentViolation(int iteration, double deficit)
    : Error("envelope decrease below the sufficient-decrease bound at iteration " +
            std::to_string(iteration) + " (deficit " + std::to_string(deficit) +
            ")"),
      iteration_(iteration),
      deficit_(deficit) {}

EquivalenceError::EquivalenceError(int iteration, double deviation)
    : Error("equivalent iterations diverged at iteration " +
            std::to_string(iteration) + " (deviation " +
            std::to_string(deviation) + ")"),
      iteration_(iteration),
      deviation_(deviation) {}

ScenarioError::ScenarioError(std::size_t scenario, const std::string& what)
    : Error("scenario " + std::to_string(scenario) + ": " + what),
      scenario_(scenario) {}

Geometry Geometry::weighted(Vector weights) {
  if ((weights.array() <= 0.0).any()) {
    throw DimensionError("geometry weights must be positive");
  }
  return Geometry(std::move(weights));
}

Geometry Geometry::scenario(std::span<const double> probabilities,
                            Index block_dim) {
  if (block_dim <= 0) throw DimensionError("block dimension must be positive");
  Vector w(static_cast<Index>(probabilities.size()) * block_dim);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    w.segment(static_cast<Index>(i) * block_dim, block_dim)
        .setConstant(probabilities[i]);
  }
  return weighted(std::move(w));
}

double Geometry::dot(const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& y) const {
  if (x.size() != y.size()) throw DimensionError("dot: size mismatch");
  if (is_euclidean()) return x.dot(y);
  if (weights_.size() != x.size()) {
    throw DimensionError("dot: vector size does not match geometry");
  }
  return (weights_.array() * x.array() * y.array()).sum();
}

double Geometry::squared_norm(const Eigen::Ref<const Vector>& x) const {
  return dot(x, x);
}

double Geometry::norm(const Eigen::Ref<const Vector>& x) const {
  // stableNorm rescales, so tiny iterates do not underflow through x^2.
  if (is_euclidean()) return x.stableNorm();
  if (weights_.size() != x.size()) {
    throw DimensionError("norm: vector size does not match geometry");
  }
  return Vector(weights_.array().sqrt() * x.array()).stableNorm();
}

double Geometry::distance(const Eigen::Ref<const Vector>& x,
                          const Eigen::Ref<const Vector>& y) const {
  return norm(x - y);
}

}  // namespace wcdrs
