#pragma once

// Parameters of the tacnode limit process and the exact scaling maps that
// connect the finite Brownian system to tacnode coordinates.

namespace tacnode {

/// (lambda, sigma): curvature ratio and interaction strength.
class TacnodeParams {
 public:
  TacnodeParams(double lambda, double sigma);

  double lambda() const noexcept { return lambda_; }
  double sigma() const noexcept { return sigma_; }

  friend bool operator==(const TacnodeParams&, const TacnodeParams&) = default;

 private:
  double lambda_;
  double sigma_;
};

/// A space-time point (tau, xi) in tacnode coordinates.
struct ScaledPoint {
  double tau = 0.0;
  double xi = 0.0;

  friend bool operator==(const ScaledPoint&, const ScaledPoint&) = default;
};

/// The pre-limit system: n paths a1 -> a1 and m paths a2 -> a2, plus the
/// free parameter d of the finite kernel.
class FiniteSystemConfig {
 public:
  FiniteSystemConfig(int n, int m, double a1, double a2, double d);

  /// Tacnode-scaled configuration for n and params. lambda*n must be an
  /// integer (to 1e-9); otherwise DomainError.
  static FiniteSystemConfig from_scaling(int n, const TacnodeParams& params);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  double a1() const noexcept { return a1_; }
  double a2() const noexcept { return a2_; }
  double a() const noexcept { return a2_ - a1_; }
  double d() const noexcept { return d_; }

  /// Same system with a different d.
  FiniteSystemConfig with_d(double d) const;

  /// Vertical reflection: n <-> m, a1 -> -a2, a2 -> -a1.
  FiniteSystemConfig reflected() const;

 private:
  int n_;
  int m_;
  double a1_;
  double a2_;
  double d_;
};

struct Endpoints {
  double a1;
  double a2;
  double a;
};

struct SpaceTime {
  double time;
  double space;
};

Endpoints scaled_endpoints(int n, const TacnodeParams& params);
SpaceTime scaled_spacetime(int n, const ScaledPoint& pt);
double d_param(int n);
double sigma_tilde(const TacnodeParams& params);

struct Reflected {
  TacnodeParams params;
  ScaledPoint point;
};

/// (lambda, sigma, tau, xi) -> (1/lambda, lambda^{2/3} sigma, lambda^{1/3} tau, -lambda^{1/6} xi).
Reflected reflect_params(const TacnodeParams& params, const ScaledPoint& pt);

/// Reflected parameters only.
TacnodeParams reflect(const TacnodeParams& params);

/// Point map of reflect_params for a fixed lambda.
ScaledPoint reflect_point(double lambda, const ScaledPoint& pt);

}  // namespace tacnode
