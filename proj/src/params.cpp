#include "tacnode/params.hpp"

#include <cmath>
#include <string>

#include "tacnode/errors.hpp"

namespace tacnode {

TacnodeParams::TacnodeParams(double lambda, double sigma) : lambda_(lambda), sigma_(sigma) {
  if (!std::isfinite(lambda) || !std::isfinite(sigma)) {
    throw DomainError("TacnodeParams: lambda and sigma must be finite");
  }
  if (lambda <= 0.0) {
    throw DomainError("TacnodeParams: lambda must be positive, got " + std::to_string(lambda));
  }
}

FiniteSystemConfig::FiniteSystemConfig(int n, int m, double a1, double a2, double d)
    : n_(n), m_(m), a1_(a1), a2_(a2), d_(d) {
  if (n < 1 || m < 1) throw DomainError("FiniteSystemConfig: n and m must be >= 1");
  if (!std::isfinite(a1) || !std::isfinite(a2) || !(a1 < a2)) {
    throw DomainError("FiniteSystemConfig: need finite a1 < a2");
  }
  if (!std::isfinite(d) || d <= 0.0) throw DomainError("FiniteSystemConfig: d must be positive");
}

FiniteSystemConfig FiniteSystemConfig::from_scaling(int n, const TacnodeParams& params) {
  const double lm = params.lambda() * n;
  const double rounded = std::round(lm);
  if (std::abs(lm - rounded) > 1e-9 * std::max(1.0, lm) || rounded < 1.0) {
    throw DomainError("FiniteSystemConfig: lambda*n = " + std::to_string(lm) +
                      " is not a positive integer");
  }
  const auto ends = scaled_endpoints(n, params);
  return {n, static_cast<int>(rounded), ends.a1, ends.a2, d_param(n)};
}

FiniteSystemConfig FiniteSystemConfig::with_d(double d) const { return {n_, m_, a1_, a2_, d}; }

FiniteSystemConfig FiniteSystemConfig::reflected() const { return {m_, n_, -a2_, -a1_, d_}; }

Endpoints scaled_endpoints(int n, const TacnodeParams& params) {
  if (n < 1) throw DomainError("scaled_endpoints: n must be >= 1");
  const double base = std::sqrt(static_cast<double>(n)) +
                      0.5 * params.sigma() * std::pow(static_cast<double>(n), -1.0 / 6.0);
  const double root_lambda = std::sqrt(params.lambda());
  return {-base, root_lambda * base, (1.0 + root_lambda) * base};
}

SpaceTime scaled_spacetime(int n, const ScaledPoint& pt) {
  if (n < 1) throw DomainError("scaled_spacetime: n must be >= 1");
  if (!std::isfinite(pt.tau) || !std::isfinite(pt.xi)) {
    throw DomainError("scaled_spacetime: non-finite point");
  }
  const double nd = static_cast<double>(n);
  const double time = 0.5 * (1.0 + pt.tau * std::cbrt(1.0 / nd));
  if (!(time > 0.0 && time < 1.0)) {
    throw DomainError("scaled_spacetime: time " + std::to_string(time) + " outside (0,1)");
  }
  return {time, 0.5 * pt.xi * std::pow(nd, -1.0 / 6.0)};
}

double d_param(int n) {
  if (n < 1) throw DomainError("d_param: n must be >= 1");
  return std::pow(static_cast<double>(n), -1.0 / 12.0) / std::sqrt(2.0);
}

double sigma_tilde(const TacnodeParams& params) {
  const double lambda = params.lambda();
  return std::pow(lambda, 1.0 / 6.0) * std::pow(1.0 + std::sqrt(lambda), 2.0 / 3.0) *
         params.sigma();
}

TacnodeParams reflect(const TacnodeParams& params) {
  const double lambda = params.lambda();
  return {1.0 / lambda, std::pow(lambda, 2.0 / 3.0) * params.sigma()};
}

ScaledPoint reflect_point(double lambda, const ScaledPoint& pt) {
  return {std::cbrt(lambda) * pt.tau, -std::pow(lambda, 1.0 / 6.0) * pt.xi};
}

Reflected reflect_params(const TacnodeParams& params, const ScaledPoint& pt) {
  return {reflect(params), reflect_point(params.lambda(), pt)};
}

}  // namespace tacnode
