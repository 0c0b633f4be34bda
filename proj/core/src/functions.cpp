#include "wcdrs/functions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wcdrs/convex_set.hpp"
#include "wcdrs/error.hpp"

namespace wcdrs {

namespace {

constexpr int kFixedPointMaxIter = 10000;
constexpr double kFixedPointTol = 1e-15;

Vector center_or_zero(const Vector& center, Index n) {
  if (center.size() == 0) return Vector::Zero(n);
  if (center.size() != n) throw DimensionError("center has wrong dimension");
  return center;
}

}  // namespace

Vector prox_smooth(const SmoothFn& f, double gamma, const Vector& s) {
  if (f.prox) return f.prox(gamma, s);
  if (gamma * f.lipschitz >= 1.0) {
    throw StepsizeError("prox_smooth: gamma * L must be below 1");
  }
  // u <- s - gamma grad(u) is a gamma*L contraction.
  Vector u = s;
  for (int it = 0; it < kFixedPointMaxIter; ++it) {
    Vector next = s - gamma * f.gradient(u);
    const double step = (next - u).lpNorm<Eigen::Infinity>();
    u = std::move(next);
    if (step <= kFixedPointTol * std::max(1.0, u.lpNorm<Eigen::Infinity>())) {
      break;
    }
  }
  return u;
}

double moreau_envelope(const ProxFn& f, double gamma, const Vector& v,
                       const Geometry& geometry) {
  if (gamma <= 0.0) throw StepsizeError("moreau_envelope: gamma must be positive");
  if (gamma * f.weak_convexity >= 1.0) {
    throw StepsizeError("moreau_envelope: gamma * rho must be below 1");
  }
  const Vector p = f.prox(gamma, v);
  return f.value(p) + geometry.squared_norm(p - v) / (2.0 * gamma);
}

Vector prox_absolute_linear(const Vector& c, double r, double gamma,
                            const Vector& x0) {
  if (c.size() != x0.size()) throw DimensionError("prox_absolute_linear: size mismatch");
  const double cc = c.squaredNorm();
  if (cc == 0.0) return x0;
  const double t = std::copysign(std::min(std::abs(r) / cc, gamma), r);
  return x0 - t * c;
}

SmoothFn zero_smooth() {
  SmoothFn f;
  f.value = [](const Vector&) { return 0.0; };
  f.gradient = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  f.lipschitz = 0.0;
  f.prox = [](double, const Vector& s) { return s; };
  return f;
}

SmoothFn quadratic_smooth(double curvature, Vector center, Geometry geometry) {
  SmoothFn f;
  f.value = [=](const Vector& x) {
    return 0.5 * curvature * geometry.squared_norm(x - center_or_zero(center, x.size()));
  };
  f.gradient = [=](const Vector& x) -> Vector {
    return curvature * (x - center_or_zero(center, x.size()));
  };
  f.lipschitz = std::abs(curvature);
  f.prox = [=](double gamma, const Vector& s) -> Vector {
    return (s + gamma * curvature * center_or_zero(center, s.size())) /
           (1.0 + gamma * curvature);
  };
  return f;
}

ProxFn zero_prox() {
  ProxFn f;
  f.value = [](const Vector&) { return 0.0; };
  f.prox = [](double, const Vector& v) { return v; };
  return f;
}

ProxFn quadratic_prox(double curvature, Vector center, Geometry geometry) {
  const SmoothFn q = quadratic_smooth(curvature, std::move(center), std::move(geometry));
  ProxFn f;
  f.value = q.value;
  f.prox = q.prox;
  f.weak_convexity = curvature < 0.0 ? -curvature : 0.0;
  return f;
}

ProxFn l1_prox(double scale) {
  ProxFn f;
  f.value = [scale](const Vector& x) { return scale * x.lpNorm<1>(); };
  f.prox = [scale](double gamma, const Vector& v) -> Vector {
    const double t = gamma * scale;
    return v.unaryExpr([t](double a) {
      return std::copysign(std::max(std::abs(a) - t, 0.0), a);
    });
  };
  return f;
}

ProxFn weakly_convex_abs(double rho) {
  ProxFn f;
  f.value = [rho](const Vector& x) {
    return x.lpNorm<1>() - 0.5 * rho * x.squaredNorm();
  };
  f.prox = [rho](double gamma, const Vector& v) -> Vector {
    if (gamma * rho >= 1.0) {
      throw StepsizeError("weakly_convex_abs: gamma * rho must be below 1");
    }
    const double scale = 1.0 / (1.0 - gamma * rho);
    return v.unaryExpr([gamma, scale](double a) {
      return scale * std::copysign(std::max(std::abs(a) - gamma, 0.0), a);
    });
  };
  f.weak_convexity = rho;
  return f;
}

ProxFn point_indicator(Vector p) {
  ProxFn f;
  f.value = [p](const Vector& x) {
    return x == p ? 0.0 : std::numeric_limits<double>::infinity();
  };
  f.prox = [p](double, const Vector&) { return p; };
  return f;
}

ProxFn set_indicator(const ConvexSet& set) {
  ProxFn f;
  f.value = [set](const Vector& x) {
    const Vector px = set.project(x);
    const double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
    return (px - x).lpNorm<Eigen::Infinity>() <= 1e-12 * scale
               ? 0.0
               : std::numeric_limits<double>::infinity();
  };
  f.prox = [set](double, const Vector& v) { return set.project(v); };
  return f;
}

}  // namespace wcdrs
