#include "tacnode/airy_operators.hpp"

#include <cmath>
#include <string>

#include "tacnode/errors.hpp"
#include "tacnode/special_functions.hpp"

namespace tacnode::airy {

using special::airy;
using special::airy_ext;
using special::airy_prime;

quad::QuadratureRule default_mu_rule() { return quad::gauss_legendre(120, 0.0, 40.0); }

quad::QuadratureRule mu_rule_for(double min_arg, int order, double cutoff) {
  if (!std::isfinite(min_arg) || min_arg < -15.0 - 1e-12) {
    throw EnvelopeError("airy operators: argument " + std::to_string(min_arg) +
                        " below the supported envelope (-15)");
  }
  if (min_arg < -5.0) {
    // Roughly 12 nodes per local Airy-product wavelength across the oscillatory stretch.
    const double extra = 12.0 * (-min_arg) * std::sqrt(-min_arg) / 3.14159;
    return quad::gauss_legendre(order + static_cast<int>(extra) * 2, 0.0,
                                std::max(cutoff, 60.0));
  }
  return quad::gauss_legendre(order, 0.0, cutoff);
}

double airy_kernel(double x, double y, const quad::QuadratureRule& rule) {
  return rule.integrate([&](double u) { return airy(x + u) * airy(y + u); });
}

double airy_kernel_closed(double x, double y) {
  const double ax = airy(x), ay = airy(y);
  const double px = airy_prime(x), py = airy_prime(y);
  const double diff = x - y;
  if (std::abs(diff) < 1e-3) {
    // Quotient cancels near the diagonal. K is even in diff about the midpoint m;
    // second-order term from int_m^inf Ai'^2 = -(m Ai'^2 - m^2 Ai^2)/3 - (2/3) Ai Ai'. Error O(diff^4).
    const double m = 0.5 * (x + y), h = 0.5 * diff;
    const double am = airy(m), pm = airy_prime(m);
    const double c2 = am * pm / 3.0 + 2.0 / 3.0 * (m * pm * pm - m * m * am * am);
    return pm * pm - m * am * am + h * h * c2;
  }
  return (ax * py - px * ay) / diff;
}

double airy_kernel_ext(double alpha, double beta, double x, double y,
                       const quad::QuadratureRule& rule) {
  return rule.integrate([&](double u) { return airy_ext(alpha, x + u) * airy_ext(beta, y + u); });
}

AiryTable::AiryTable(std::span<const double> nodes)
    : x_(static_cast<Eigen::Index>(nodes.size())),
      ai_(static_cast<Eigen::Index>(nodes.size())),
      aip_(static_cast<Eigen::Index>(nodes.size())) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    x_(k) = nodes[i];
    ai_(k) = airy(nodes[i]);
    aip_(k) = airy_prime(nodes[i]);
  }
}

Eigen::MatrixXd AiryTable::kernel_matrix() const {
  const auto n = x_.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = x_(i) - x_(j);
      if (i == j || std::abs(diff) < 1e-3) {
        k(i, j) = airy_kernel_closed(x_(i), x_(j));
      } else {
        k(i, j) = (ai_(i) * aip_(j) - aip_(i) * ai_(j)) / diff;
      }
    }
  }
  return k;
}

double stretch_inv(double lambda) { return std::cbrt(1.0 + 1.0 / std::sqrt(lambda)); }
double stretch(double lambda) { return std::cbrt(1.0 + std::sqrt(lambda)); }

namespace {

double eval_B(double lambda, double tau, double xi, double x, const quad::QuadratureRule& rule) {
  const double c = stretch_inv(lambda);
  return rule.integrate([&](double mu) { return airy_ext(tau, xi + c * mu) * airy(x + mu); });
}

double eval_b(double lambda, double tau, double xi, double x) {
  const double l6 = std::pow(lambda, 1.0 / 6.0);
  return l6 * airy_ext(std::cbrt(lambda) * tau, -l6 * xi + stretch(lambda) * x);
}

}  // namespace

double eval_aux(const AiryFunctionSpec& spec, double x, const quad::QuadratureRule& mu_rule) {
  if (!(spec.lambda > 0.0)) throw DomainError("eval_aux: lambda must be positive");
  switch (spec.kind) {
    case AuxKind::B:
      return eval_B(spec.lambda, spec.tau, spec.xi, x, mu_rule);
    case AuxKind::b:
      return eval_b(spec.lambda, spec.tau, spec.xi, x);
    case AuxKind::C:
      return eval_b(spec.lambda, spec.tau, spec.xi, x) -
             eval_B(spec.lambda, spec.tau, spec.xi, x, mu_rule);
    case AuxKind::S: {
      const double l = spec.lambda;
      const double shift = std::pow(l, -1.0 / 6.0) *
                           (std::pow(l, 1.0 / 6.0) * spec.xi - std::pow(l, 2.0 / 3.0) * spec.sigma);
      return airy_ext(spec.tau, shift + stretch_inv(l) * x);
    }
  }
  throw DomainError("eval_aux: unknown kind");
}

double t_kernel(double sigma_tilde, double x, double y) {
  if (x < sigma_tilde || y < sigma_tilde) {
    throw DomainError("t_kernel: arguments must be >= sigma_tilde");
  }
  return airy(x + y - sigma_tilde);
}

}  // namespace tacnode::airy
