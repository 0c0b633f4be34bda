#pragma once

#include <span>

#include "wcdrs/types.hpp"

namespace wcdrs {

/// Inner product <x, y> = sum_j weight_j x_j y_j. An empty weight vector is
/// the Euclidean inner product.
///
/// Scenario-decomposed problems store a block vector (x_1, ..., x_N) flattened
/// into one Vector; their geometry repeats p_i over the coordinates of block i,
/// which gives <x, z> = sum_i p_i x_i^T z_i.
class Geometry {
 public:
  Geometry() = default;

  static Geometry euclidean() { return {}; }
  static Geometry weighted(Vector weights);
  static Geometry scenario(std::span<const double> probabilities,
                           Index block_dim);

  bool is_euclidean() const noexcept { return weights_.size() == 0; }
  const Vector& weights() const noexcept { return weights_; }

  double dot(const Eigen::Ref<const Vector>& x,
             const Eigen::Ref<const Vector>& y) const;
  double squared_norm(const Eigen::Ref<const Vector>& x) const;
  double norm(const Eigen::Ref<const Vector>& x) const;
  double distance(const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& y) const;

 private:
  explicit Geometry(Vector weights) : weights_(std::move(weights)) {}
  Vector weights_;
};

}  // namespace wcdrs
