#include "wcdrs/convex_set.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "wcdrs/error.hpp"

namespace wcdrs {

void validate_probabilities(std::span<const double> p) {
  if (p.empty()) throw DimensionError("probability vector is empty");
  double total = 0.0;
  for (double pi : p) {
    if (!(pi > 0.0)) throw DimensionError("probabilities must be positive");
    total += pi;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DimensionError("probabilities must sum to one");
  }
}

Vector project_consensus(const Vector& x, std::span<const double> p) {
  const auto blocks = static_cast<Index>(p.size());
  if (blocks == 0 || x.size() % blocks != 0) {
    throw DimensionError("project_consensus: vector size is not a multiple of the scenario count");
  }
  const Index n = x.size() / blocks;
  Vector mean = Vector::Zero(n);
  for (Index i = 0; i < blocks; ++i) {
    mean += p[static_cast<std::size_t>(i)] * x.segment(i * n, n);
  }
  return mean.replicate(blocks, 1);
}

ConvexSet ConvexSet::subspace_from_basis(const Matrix& basis) {
  if (basis.cols() == 0) {
    return subspace_from_projector(Matrix::Zero(basis.rows(), basis.rows()));
  }
  // Orthonormal basis of the range via thin QR.
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
  return subspace_from_projector(q * q.transpose());
}

ConvexSet ConvexSet::subspace_from_projector(Matrix projector) {
  if (projector.rows() != projector.cols()) {
    throw DimensionError("projector must be square");
  }
  ConvexSet set;
  set.kind_ = Kind::Subspace;
  set.project_ = [projector = std::move(projector)](const Vector& x) -> Vector {
    if (x.size() != projector.rows()) throw DimensionError("subspace: size mismatch");
    return projector * x;
  };
  return set;
}

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw DimensionError("box: bound size mismatch");
  if ((lower.array() > upper.array()).any()) {
    throw DimensionError("box: lower bound exceeds upper bound");
  }
  ConvexSet set;
  set.kind_ = Kind::Box;
  set.project_ = [lower = std::move(lower), upper = std::move(upper)](const Vector& x) -> Vector {
    if (x.size() != lower.size()) throw DimensionError("box: size mismatch");
    return x.cwiseMax(lower).cwiseMin(upper);
  };
  return set;
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (!(radius >= 0.0)) throw DimensionError("ball: radius must be nonnegative");
  ConvexSet set;
  set.kind_ = Kind::Ball;
  set.project_ = [center = std::move(center), radius](const Vector& x) -> Vector {
    if (x.size() != center.size()) throw DimensionError("ball: size mismatch");
    const Vector d = x - center;
    const double norm = d.norm();
    if (norm <= radius) return x;
    return center + (radius / norm) * d;
  };
  return set;
}

ConvexSet ConvexSet::consensus(std::vector<double> probabilities, Index block_dim) {
  validate_probabilities(probabilities);
  ConvexSet set;
  set.kind_ = Kind::Consensus;
  set.geometry_ = Geometry::scenario(probabilities, block_dim);
  set.block_dim_ = block_dim;
  set.probabilities_ = std::move(probabilities);
  set.project_ = [p = set.probabilities_, block_dim](const Vector& x) -> Vector {
    if (x.size() != static_cast<Index>(p.size()) * block_dim) {
      throw DimensionError("consensus: size mismatch");
    }
    return project_consensus(x, p);
  };
  return set;
}

ConvexSet ConvexSet::custom(std::function<Vector(const Vector&)> projector,
                            Geometry geometry, bool linear) {
  ConvexSet set;
  set.kind_ = Kind::Custom;
  set.linear_ = linear;
  set.geometry_ = std::move(geometry);
  set.project_ = std::move(projector);
  return set;
}

Vector ConvexSet::project(const Vector& x) const { return project_(x); }

double ConvexSet::squared_distance(const Vector& x) const {
  return geometry_.squared_norm(x - project(x));
}

double ConvexSet::distance(const Vector& x) const {
  return std::sqrt(squared_distance(x));
}

}  // namespace wcdrs
