#include "tacnode/fredholm.hpp"

#include <cmath>
#include <string>

#include "tacnode/airy_operators.hpp"
#include "tacnode/errors.hpp"

namespace tacnode::fredholm {

DiscretizedOperator::DiscretizedOperator(std::vector<double> nodes, std::vector<double> weights,
                                         Eigen::MatrixXd matrix)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  if (weights_.size() != nodes_.size() || matrix_.rows() != n || matrix_.cols() != n) {
    throw DomainError("DiscretizedOperator: dimension mismatch");
  }
  if (!matrix_.allFinite()) throw NumericError("DiscretizedOperator: non-finite entry");
}

DiscretizedOperator from_kernel_matrix(std::vector<double> nodes, std::vector<double> weights,
                                       const Eigen::MatrixXd& kernel_values) {
  const auto n = static_cast<Eigen::Index>(weights.size());
  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw(i) = std::sqrt(weights[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd m = sw.asDiagonal() * kernel_values * sw.asDiagonal();
  return {std::move(nodes), std::move(weights), std::move(m)};
}

DiscretizedOperator discretize(const Kernel& kernel, const quad::QuadratureRule& rule) {
  const auto n = static_cast<Eigen::Index>(rule.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = kernel(rule.nodes()[static_cast<std::size_t>(i)],
                              rule.nodes()[static_cast<std::size_t>(j)]);
      if (!std::isfinite(v)) throw NumericError("discretize: non-finite kernel value");
      k(i, j) = v;
    }
  }
  return from_kernel_matrix({rule.nodes().begin(), rule.nodes().end()},
                            {rule.weights().begin(), rule.weights().end()}, k);
}

FactorizedOperator::FactorizedOperator(const DiscretizedOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  sqrt_w_.reserve(op.size());
  for (double w : op.weights()) sqrt_w_.push_back(std::sqrt(w));
  if (n == 0) {
    det_ = 1.0;
    min_pivot_ = 1.0;
    return;
  }
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - op.matrix();
  lu_.compute(a);
  det_ = lu_.determinant();
  const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
  const double biggest = std::max(diag.maxCoeff(), a.cwiseAbs().maxCoeff());
  min_pivot_ = biggest > 0.0 ? diag.minCoeff() / biggest : 0.0;
  if (!std::isfinite(det_)) throw NumericError("FactorizedOperator: non-finite determinant");
}

Eigen::VectorXd FactorizedOperator::solve(const Eigen::VectorXd& rhs) const {
  const auto n = static_cast<Eigen::Index>(sqrt_w_.size());
  if (rhs.size() != n) throw DomainError("FactorizedOperator::solve: size mismatch");
  if (n == 0) return rhs;
  if (min_pivot_ < kSingularPivot) {
    throw SingularOperatorError("resolvent: I - K is singular (relative pivot " +
                                std::to_string(min_pivot_) + ")");
  }
  const Eigen::Map<const Eigen::VectorXd> sw(sqrt_w_.data(), n);
  Eigen::VectorXd z = lu_.solve(rhs.cwiseProduct(sw));
  return z.cwiseQuotient(sw);
}

double fredholm_det(const DiscretizedOperator& op) { return FactorizedOperator(op).determinant(); }

Eigen::VectorXd resolvent_apply(const DiscretizedOperator& op,
                                const std::function<double(double)>& rhs) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(op.size()));
  for (std::size_t i = 0; i < op.size(); ++i) f(static_cast<Eigen::Index>(i)) = rhs(op.nodes()[i]);
  return FactorizedOperator(op).solve(f);
}

double tracy_widom_f2(double s, const TracyWidomOptions& opts) {
  if (!std::isfinite(s) || s < -8.0 || s > 8.0) {
    throw EnvelopeError("tracy_widom_f2: s outside the supported envelope [-8, 8]");
  }
  const auto rule = quad::gauss_legendre(opts.order, s, s + opts.cutoff);
  const auto table = airy::AiryTable(rule.nodes());
  return fredholm_det(
      from_kernel_matrix({rule.nodes().begin(), rule.nodes().end()},
                         {rule.weights().begin(), rule.weights().end()}, table.kernel_matrix()));
}

}  // namespace tacnode::fredholm
