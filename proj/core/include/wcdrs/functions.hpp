#pragma once

#include <functional>

#include "wcdrs/geometry.hpp"
#include "wcdrs/types.hpp"

namespace wcdrs {

class ConvexSet;

/// An L-smooth function. `gradient` is taken with respect to the geometry the
/// function is used in. `prox` is optional: when empty, prox_smooth() solves
/// 0 = gamma * grad(u) + u - s by fixed-point iteration, which contracts for
/// gamma * lipschitz < 1.
struct SmoothFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz = 0.0;
  std::function<Vector(double, const Vector&)> prox;
};

/// A proper lsc, rho-weakly convex function with a prox oracle. For
/// gamma * weak_convexity < 1 the prox is single valued; otherwise the oracle
/// returns one deterministic element of the argmin.
struct ProxFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(double, const Vector&)> prox;
  double weak_convexity = 0.0;
};

/// prox_{gamma f}(s) for a smooth f, closed form when available.
Vector prox_smooth(const SmoothFn& f, double gamma, const Vector& s);

/// inf_p f(p) + |p - v|^2 / (2 gamma). Throws StepsizeError when
/// gamma * rho >= 1.
double moreau_envelope(const ProxFn& f, double gamma, const Vector& v,
                       const Geometry& geometry = {});

/// argmin_x |r + <c, x - x0>| + |x - x0|^2 / (2 gamma), i.e. x0 - t c with
/// t = sign(r) min(|r| / |c|^2, gamma). Returns x0 when c = 0.
Vector prox_absolute_linear(const Vector& c, double r, double gamma,
                            const Vector& x0);

// Smooth building blocks.
SmoothFn zero_smooth();
/// (curvature / 2) |x - center|^2 in `geometry`; an empty center is the origin.
SmoothFn quadratic_smooth(double curvature, Vector center = {},
                          Geometry geometry = {});

// Prox building blocks.
ProxFn zero_prox();
ProxFn quadratic_prox(double curvature, Vector center = {},
                      Geometry geometry = {});
/// scale * |x|_1.
ProxFn l1_prox(double scale = 1.0);
/// sum_j |x_j| - (rho / 2) x_j^2, which is rho-weakly convex.
ProxFn weakly_convex_abs(double rho);
/// Indicator of the single point p.
ProxFn point_indicator(Vector p);
/// Indicator of a closed convex set; prox is the projection.
ProxFn set_indicator(const ConvexSet& set);

}  // namespace wcdrs
