#include "tacnode/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "tacnode/errors.hpp"

namespace tacnode::quad {

QuadratureRule::QuadratureRule(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.size() != weights_.size()) throw DomainError("QuadratureRule: length mismatch");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i]) || !(weights_[i] > 0.0)) {
      throw DomainError("QuadratureRule: non-finite node or non-positive weight");
    }
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
      throw DomainError("QuadratureRule: nodes must be strictly increasing");
    }
  }
}

ContourRule::ContourRule(std::vector<cplx> nodes, std::vector<cplx> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.size() != weights_.size()) throw DomainError("ContourRule: length mismatch");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i].real()) || !std::isfinite(nodes_[i].imag()) ||
        !std::isfinite(weights_[i].real()) || !std::isfinite(weights_[i].imag())) {
      throw DomainError("ContourRule: non-finite entry");
    }
  }
}

double ContourRule::min_distance(const ContourRule& a, const ContourRule& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : a.nodes_)
    for (const auto& w : b.nodes_) best = std::min(best, std::abs(z - w));
  return best;
}

QuadratureRule gauss_legendre(int order, double lo, double hi) {
  if (order < 2) throw DomainError("gauss_legendre: order must be >= 2");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw DomainError("gauss_legendre: need finite lo < hi");
  }
  const auto n = static_cast<std::size_t>(order);
  std::vector<double> x(n), w(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  // Newton on P_n from the Tricomi initial guess; roots come out decreasing in cos.
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        const double kd = static_cast<double>(k);
        p0 = ((2.0 * kd - 1.0) * z * p1 - (kd - 1.0) * p2) / kd;
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      const double kd = static_cast<double>(k);
      p0 = ((2.0 * kd - 1.0) * z * p1 - (kd - 1.0) * p2) / kd;
    }
    dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = mid - half * z;
    x[n - 1 - i] = mid + half * z;
    w[i] = w[n - 1 - i] = half * weight;
  }
  if (n % 2 == 1) x[n / 2] = mid;
  return {std::move(x), std::move(w)};
}

QuadratureRule semi_infinite_rule(double origin, double decay_scale, int order,
                                  double cutoff_multiple) {
  if (!(decay_scale > 0.0) || !(cutoff_multiple > 0.0)) {
    throw DomainError("semi_infinite_rule: decay_scale and cutoff_multiple must be positive");
  }
  return gauss_legendre(order, origin, origin + cutoff_multiple * decay_scale);
}

ContourRule circle_contour(cplx center, double radius, int order) {
  if (order < 8) throw DomainError("circle_contour: order must be >= 8");
  if (!(radius > 0.0)) throw DomainError("circle_contour: radius must be positive");
  const auto n = static_cast<std::size_t>(order);
  std::vector<cplx> z(n), w(n);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx e = std::polar(1.0, step * static_cast<double>(k));
    z[k] = center + radius * e;
    w[k] = cplx(0.0, step * radius) * e;
  }
  return {std::move(z), std::move(w)};
}

ContourRule line_contour(double anchor, double half_height, int order, Tilt tilt) {
  if (order < 8) throw DomainError("line_contour: order must be >= 8");
  if (!(half_height > 0.0)) throw DomainError("line_contour: half_height must be positive");
  std::vector<cplx> z, w;
  if (tilt == Tilt::vertical) {
    const auto gl = gauss_legendre(order, -half_height, half_height);
    for (std::size_t k = 0; k < gl.size(); ++k) {
      z.emplace_back(anchor, gl.nodes()[k]);
      w.emplace_back(0.0, gl.weights()[k]);
    }
  } else {
    const auto gl = gauss_legendre(order, 0.0, half_height);
    const cplx down = std::polar(1.0, -std::numbers::pi / 3.0);
    const cplx up = std::polar(1.0, std::numbers::pi / 3.0);
    // Incoming ray, traversed from far away towards the anchor.
    for (std::size_t k = gl.size(); k-- > 0;) {
      z.push_back(anchor + gl.nodes()[k] * down);
      w.push_back(-gl.weights()[k] * down);
    }
    for (std::size_t k = 0; k < gl.size(); ++k) {
      z.push_back(anchor + gl.nodes()[k] * up);
      w.push_back(gl.weights()[k] * up);
    }
  }
  return {std::move(z), std::move(w)};
}

}  // namespace tacnode::quad
