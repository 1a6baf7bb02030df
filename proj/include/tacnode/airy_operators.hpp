#pragma once

#include <Eigen/Dense>
#include <span>

#include "tacnode/quadrature.hpp"

namespace tacnode::airy {

/// Default mu-rule for integrals over [0, inf): Gauss-Legendre, order 120 on [0, 40].
quad::QuadratureRule default_mu_rule();

/// mu-rule for integrands whose Airy arguments start at `min_arg`. Strongly negative
/// starts (oscillatory region) get cutoff 60 and a proportionally higher order.
/// EnvelopeError if min_arg < -15 - 1e-12.
quad::QuadratureRule mu_rule_for(double min_arg, int order = 120, double cutoff = 40.0);

/// K_Ai(x, y) = int_0^inf Ai(x+u) Ai(y+u) du by quadrature.
double airy_kernel(double x, double y, const quad::QuadratureRule& rule);

/// Closed form (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y), diagonal Ai'(x)^2 - x Ai(x)^2.
double airy_kernel_closed(double x, double y);

/// K_Ai^{(alpha,beta)}(x, y) = int_0^inf Ai^{(alpha)}(x+u) Ai^{(beta)}(y+u) du.
double airy_kernel_ext(double alpha, double beta, double x, double y,
                       const quad::QuadratureRule& rule);

/// Ai and Ai' tabulated on a node set, with the closed-form kernel matrix.
class AiryTable {
 public:
  explicit AiryTable(std::span<const double> nodes);

  const Eigen::VectorXd& ai() const noexcept { return ai_; }
  const Eigen::VectorXd& ai_prime() const noexcept { return aip_; }
  Eigen::MatrixXd kernel_matrix() const;

 private:
  Eigen::VectorXd x_;
  Eigen::VectorXd ai_;
  Eigen::VectorXd aip_;
};

enum class AuxKind { B, b, C, S };

/// Selects one of the auxiliary one-variable functions of the limit kernel.
/// sigma is only read by kind S.
struct AiryFunctionSpec {
  AuxKind kind;
  double lambda;
  double tau;
  double xi;
  double sigma = 0.0;
};

/// (1 + lambda^{-1/2})^{1/3}, the mu-stretch in B and S.
double stretch_inv(double lambda);
/// (1 + lambda^{1/2})^{1/3}, the x-stretch in b.
double stretch(double lambda);

/// B: int_0^inf Ai^{(tau)}(xi + stretch_inv mu) Ai(x + mu) dmu
/// b: lambda^{1/6} Ai^{(lambda^{1/3} tau)}(-lambda^{1/6} xi + stretch x)
/// C: b - B
/// S: Ai^{(tau)}(lambda^{-1/6}(lambda^{1/6} xi - lambda^{2/3} sigma) + stretch_inv x)
double eval_aux(const AiryFunctionSpec& spec, double x, const quad::QuadratureRule& mu_rule);

/// T(x, y) = Ai(x + y - sigma_tilde) on (sigma_tilde, inf)^2.
double t_kernel(double sigma_tilde, double x, double y);

}  // namespace tacnode::airy
