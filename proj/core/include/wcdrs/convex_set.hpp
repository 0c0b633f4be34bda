#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "wcdrs/geometry.hpp"
#include "wcdrs/types.hpp"

namespace wcdrs {

/// A nonempty closed convex set, represented by its projection oracle in the
/// set's declared geometry.
class ConvexSet {
 public:
  enum class Kind { Subspace, Box, Ball, Consensus, Custom };

  /// Range of `basis` (columns need not be orthonormal, only independent).
  static ConvexSet subspace_from_basis(const Matrix& basis);
  /// `projector` must be the symmetric idempotent matrix of the subspace.
  static ConvexSet subspace_from_projector(Matrix projector);
  static ConvexSet box(Vector lower, Vector upper);
  static ConvexSet ball(Vector center, double radius);
  /// {(x_1, ..., x_N) : x_1 = ... = x_N} under the p-weighted geometry.
  static ConvexSet consensus(std::vector<double> probabilities,
                             Index block_dim);
  /// A user projector; `linear` declares the set a subspace.
  static ConvexSet custom(std::function<Vector(const Vector&)> projector,
                          Geometry geometry, bool linear);

  Kind kind() const noexcept { return kind_; }
  /// Subspaces (including consensus) satisfy P(a x + b y) = a P(x) + b P(y).
  bool is_linear() const noexcept {
    return kind_ == Kind::Subspace || kind_ == Kind::Consensus || linear_;
  }
  const Geometry& geometry() const noexcept { return geometry_; }
  /// Consensus sets only.
  const std::vector<double>& probabilities() const noexcept {
    return probabilities_;
  }
  Index block_dim() const noexcept { return block_dim_; }

  Vector project(const Vector& x) const;
  double distance(const Vector& x) const;
  double squared_distance(const Vector& x) const;

 private:
  ConvexSet() = default;

  Kind kind_ = Kind::Custom;
  bool linear_ = false;
  Geometry geometry_;
  std::function<Vector(const Vector&)> project_;
  std::vector<double> probabilities_;
  Index block_dim_ = 0;
};

/// Projection of the block vector x = (x_1, ..., x_N) onto the consensus
/// subspace in the p-weighted geometry: every block becomes sum_i p_i x_i.
/// Summation runs in scenario order. Throws DimensionError when x.size() is
/// not a multiple of p.size().
Vector project_consensus(const Vector& x, std::span<const double> p);

/// Checks p_i > 0 and |sum p_i - 1| <= 1e-12.
void validate_probabilities(std::span<const double> p);

}  // namespace wcdrs
