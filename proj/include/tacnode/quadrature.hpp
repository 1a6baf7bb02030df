#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tacnode::quad {

using cplx = std::complex<double>;

/// Real quadrature rule: strictly increasing nodes, positive weights.
class QuadratureRule {
 public:
  QuadratureRule(std::vector<double> nodes, std::vector<double> weights);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Sum of w_i f(x_i).
  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
    return acc;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Discretized complex contour. Weights include the line element dz but not 1/(2 pi i).
class ContourRule {
 public:
  ContourRule(std::vector<cplx> nodes, std::vector<cplx> weights);

  std::span<const cplx> nodes() const noexcept { return nodes_; }
  std::span<const cplx> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  template <class F>
  cplx integrate(F&& f) const {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
    return acc;
  }

  /// Smallest |z - w| over node pairs of the two rules.
  static double min_distance(const ContourRule& a, const ContourRule& b);

 private:
  std::vector<cplx> nodes_;
  std::vector<cplx> weights_;
};

/// Gauss-Legendre rule with `order` nodes on [lo, hi].
QuadratureRule gauss_legendre(int order, double lo, double hi);

inline constexpr double kDefaultCutoffMultiple = 34.0;  // e^{-34} < 1e-14

/// Gauss-Legendre on [origin, origin + cutoff_multiple * decay_scale].
QuadratureRule semi_infinite_rule(double origin, double decay_scale, int order,
                                  double cutoff_multiple = kDefaultCutoffMultiple);

/// Counterclockwise periodic trapezoid rule on a circle.
ContourRule circle_contour(cplx center, double radius, int order);

enum class Tilt { vertical, wedge };

/// Upward contour through `anchor`: either the vertical segment
/// anchor + i[-H, H], or the wedge with rays at angles -pi/3 and pi/3.
/// The wedge uses `order` Gauss-Legendre nodes on each ray.
ContourRule line_contour(double anchor, double half_height, int order, Tilt tilt = Tilt::vertical);

}  // namespace tacnode::quad
