#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "tacnode/fredholm.hpp"
#include "tacnode/params.hpp"
#include "tacnode/quadrature.hpp"

namespace tacnode {

/// One time slice of a gap event: no particle at `time` in (lo, hi).
class GapWindow {
 public:
  GapWindow(double time, double lo, double hi);
  double time() const noexcept { return time_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double time_, lo_, hi_;
};

struct KernelOptions {
  int resolvent_order = 140;      // nodes on (sigma_tilde, sigma_tilde + cutoff)
  double resolvent_cutoff = 40.0;
  int mu_order = 120;             // nodes for the mu-integrals on [0, mu_cutoff]
  double mu_cutoff = 40.0;
  unsigned threads = 1;
};

struct GapResult {
  double value;
  bool outside_unit_interval;  // raw value outside [-1e-6, 1 + 1e-6]
};

/// Supported envelope: |tau| <= 5, |xi| <= 15, lambda in [1/20, 20], |sigma| <= 6.
void check_envelope(const TacnodeParams& params, const ScaledPoint& pt);

/// The tacnode kernel for fixed (lambda, sigma). Both sides of the kernel,
/// (lambda, sigma) and its reflection, share sigma_tilde and therefore one
/// factorization of 1 - chi K_Ai chi. Per-point vectors are cached.
class TacnodeKernel {
 public:
  explicit TacnodeKernel(const TacnodeParams& params, const KernelOptions& opts = {});
  ~TacnodeKernel();
  TacnodeKernel(const TacnodeKernel&) = delete;
  TacnodeKernel& operator=(const TacnodeKernel&) = delete;

  const TacnodeParams& params() const noexcept { return params_; }
  double sigma_tilde() const noexcept { return sigma_tilde_; }

  /// Full kernel: -1(tau1<tau2) p + L_tac^{lambda,sigma} + lambda^{1/6} L_tac^{reflected}.
  double value(const ScaledPoint& p1, const ScaledPoint& p2) const;
  /// Same kernel assembled from the single-integral ingredients.
  double value_alt(const ScaledPoint& p1, const ScaledPoint& p2) const;

  /// L_tac^{side}(tau1, xi1, tau2, xi2). side is 0 for (lambda, sigma), 1 for the
  /// reflected parameters (1/lambda, lambda^{2/3} sigma); points are in that side's coordinates.
  double l_tac(int side, const ScaledPoint& p1, const ScaledPoint& p2) const;
  /// Resolvent (second) summand of l_tac only.
  double l_tac_interaction(int side, const ScaledPoint& p1, const ScaledPoint& p2) const;
  /// Single-integral counterpart of l_tac.
  double l_tac_alt(int side, const ScaledPoint& p1, const ScaledPoint& p2) const;

  /// det(1 - L)_{L^2(E)} with E the union of windows, `order` Gauss-Legendre nodes per window.
  GapResult gap_probability(const std::vector<GapWindow>& windows, int order = 40) const;

  const quad::QuadratureRule& resolvent_rule() const noexcept { return x_rule_; }
  const fredholm::FactorizedOperator& resolvent() const noexcept { return *resolvent_; }

 private:
  struct MuGrid;
  struct LeftData;
  struct RightData;

  std::unique_ptr<MuGrid> make_grid(quad::QuadratureRule rule) const;
  const MuGrid& mu_grid(bool wide) const;
  bool needs_wide(int side, const ScaledPoint& p) const;
  TacnodeParams side_params(int side) const;
  std::shared_ptr<const LeftData> left(int side, const ScaledPoint& p, bool wide) const;
  std::shared_ptr<const RightData> right(int side, const ScaledPoint& p, bool wide) const;
  double side_value(int side, const ScaledPoint& p1, const ScaledPoint& p2, bool alt) const;
  double assemble(const ScaledPoint& p1, const ScaledPoint& p2, bool alt) const;

  TacnodeParams params_;
  KernelOptions opts_;
  double sigma_tilde_;
  quad::QuadratureRule x_rule_;
  std::unique_ptr<fredholm::FactorizedOperator> resolvent_;

  std::unique_ptr<MuGrid> grid_;
  mutable std::once_flag wide_once_;
  mutable std::unique_ptr<MuGrid> wide_grid_;

  using Key = std::tuple<int, std::uint64_t, std::uint64_t, bool>;
  mutable std::shared_mutex cache_mutex_;
  mutable std::map<Key, std::shared_ptr<const LeftData>> left_cache_;
  mutable std::map<Key, std::shared_ptr<const RightData>> right_cache_;
};

double l_tac(const TacnodeParams& params, const ScaledPoint& p1, const ScaledPoint& p2);
double full_kernel(const TacnodeParams& params, const ScaledPoint& p1, const ScaledPoint& p2);
double full_kernel_alt(const TacnodeParams& params, const ScaledPoint& p1, const ScaledPoint& p2);
GapResult gap_probability(const TacnodeParams& params, const std::vector<GapWindow>& windows,
                          int order = 40);

}  // namespace tacnode
