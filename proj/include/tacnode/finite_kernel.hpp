#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "tacnode/params.hpp"
#include "tacnode/quadrature.hpp"

namespace tacnode::finite {

using cplx = std::complex<double>;

inline constexpr int kMaxParticles = 256;
inline constexpr double kCollisionDistance = 1e-9;

struct FiniteOptions {
  int circle_order = 256;
  int line_order = 400;
  double gap_factor = 0.5;  // circle gap g = gap_factor * min(|a1|, a2) * max(n, m)^{-1/3}
  int nystrom_order = 100;
  double nystrom_cutoff = 40.0;
  bool determinant_ratio = false;  // scalar product via det(1 - M0 + C (B+beta)^T) / det(1 - M0) - 1
};

/// Two-time arguments (s, u) -> (t, v) of the finite kernel.
struct TimeArgs {
  double s, u, t, v;
};

enum class Ingredient { B, beta, C, M0 };

/// Complex value before the real part is taken; `imag` is the quadrature residue.
struct KernelValue {
  double value;
  double imag;
};

/// Circles D_{a1}, D_{a2} used by default.
quad::ContourRule default_circle(int index, const FiniteSystemConfig& cfg,
                                 const FiniteOptions& opts = {});
/// Upward contour through 0 for the w-integral of ingredient A at time t and position v.
quad::ContourRule default_line(int index, const FiniteSystemConfig& cfg, double t, double v,
                               quad::Tilt tilt = quad::Tilt::vertical,
                               const FiniteOptions& opts = {});

/// Double contour integral A^index_{s,u,t,v}: z on `z_contour` (around a_index),
/// w on `w_contour` (upward line). ContourCollisionError if they come within 1e-9.
cplx ingredient_A(int index, const FiniteSystemConfig& cfg, const TimeArgs& args,
                  const quad::ContourRule& z_contour, const quad::ContourRule& w_contour);
/// Same with default contours.
cplx ingredient_A(int index, const FiniteSystemConfig& cfg, const TimeArgs& args,
                  const FiniteOptions& opts = {});

/// B, beta (functions of (t,v)), C (function of (s,u)) at x, or M0 at (x, y); x, y >= 1.
cplx ingredient(int index, Ingredient which, const FiniteSystemConfig& cfg, const TimeArgs& args,
                double x, double y = 1.0, const FiniteOptions& opts = {});

/// The finite-n kernel L_{n,m} for one configuration. Holds the contours and the
/// Nystrom grid on (1, inf); evaluations are const and thread-safe.
class FiniteKernel {
 public:
  explicit FiniteKernel(const FiniteSystemConfig& cfg, const FiniteOptions& opts = {});

  const FiniteSystemConfig& config() const noexcept { return cfg_; }
  const FiniteOptions& options() const noexcept { return opts_; }

  /// L_{n,m}(s,u,t,v) with its imaginary residue.
  KernelValue eval(const TimeArgs& args) const;

  /// Matrix L(s, us[i]; t, vs[j]) in one pass, sharing all contour sums.
  Eigen::MatrixXcd block(double s, const std::vector<double>& us, double t,
                         const std::vector<double>& vs) const;

  /// det(1 - L)_{L^2((lo, hi))} at a single time t, `order` Gauss-Legendre nodes.
  KernelValue gap_probability(double t, double lo, double hi, int order = 30) const;

  /// Nystrom nodes x = 1 + h x~ on (1, inf).
  const quad::QuadratureRule& nystrom_rule() const noexcept { return x_rule_; }

  /// One index's contribution A + <B + beta, (1 - M0)^{-1} C>, before the d^{-2} factor.
  cplx side_term(int index, const TimeArgs& args) const;

  /// det(1 - M0^index) on the Nystrom grid.
  cplx m0_determinant(int index) const;

 private:
  struct Side;
  Eigen::MatrixXcd side_block(const Side& side, double s, const std::vector<double>& us,
                              double t, const std::vector<double>& vs) const;
  const Side& side(int index) const;

  FiniteSystemConfig cfg_;
  FiniteOptions opts_;
  quad::QuadratureRule x_rule_;
  std::shared_ptr<const Side> side1_, side2_;
};

/// L_{n,m}(s,u,t,v), real part.
double finite_kernel_eval(const FiniteSystemConfig& cfg, double s, double u, double t, double v,
                          int nystrom_order = 100);

/// d^2 L_{n, lambda n} at the scaled points, d = n^{-1/12}/sqrt(2).
double scaled_finite_kernel(int n, const TacnodeParams& params, const ScaledPoint& pt1,
                            const ScaledPoint& pt2, const FiniteOptions& opts = {});

struct ConvergenceRow {
  int n;
  double finite_value;
  double err;
};

struct ConvergenceReport {
  double limit_value;
  std::vector<ConvergenceRow> rows;      // ascending n
  std::optional<double> slope;           // log-log least squares; empty for one row
};

/// err(n) = |scaled_finite_kernel - full_kernel| for each n (sorted, deduplicated).
ConvergenceReport convergence_report(std::vector<int> n_list, const TacnodeParams& params,
                                     const ScaledPoint& pt1, const ScaledPoint& pt2,
                                     unsigned threads = 1, const FiniteOptions& opts = {});

/// Least-squares slope of log(err) against log(n); empty for fewer than two rows.
std::optional<double> loglog_slope(const std::vector<ConvergenceRow>& rows);

}  // namespace tacnode::finite
