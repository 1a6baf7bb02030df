#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "tacnode/quadrature.hpp"

namespace tacnode::fredholm {

/// Nystrom image of an integral operator: entry (i,j) = sqrt(w_i) k(x_i,x_j) sqrt(w_j).
/// Nodes need not be sorted; a block operator over several windows concatenates them.
class DiscretizedOperator {
 public:
  DiscretizedOperator(std::vector<double> nodes, std::vector<double> weights,
                      Eigen::MatrixXd matrix);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Eigen::MatrixXd matrix_;
};

using Kernel = std::function<double(double, double)>;

/// NumericError if any kernel value is non-finite.
DiscretizedOperator discretize(const Kernel& kernel, const quad::QuadratureRule& rule);

/// Wraps a matrix of raw kernel values k(x_i, x_j) with the given weights.
DiscretizedOperator from_kernel_matrix(std::vector<double> nodes, std::vector<double> weights,
                                       const Eigen::MatrixXd& kernel_values);

inline constexpr double kSingularPivot = 1e-13;

/// LU factorization of I - K, computed once and shared by read-only solves.
class FactorizedOperator {
 public:
  explicit FactorizedOperator(const DiscretizedOperator& op);

  /// det(I - K).
  double determinant() const noexcept { return det_; }

  /// Nystrom solution z of (I - K) z = f given f on the nodes.
  /// SingularOperatorError if the smallest relative pivot is below kSingularPivot.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs_on_nodes) const;

  double min_relative_pivot() const noexcept { return min_pivot_; }

 private:
  std::vector<double> sqrt_w_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double det_ = 0.0;
  double min_pivot_ = 0.0;
};

/// det(I - K) by pivoted LU.
double fredholm_det(const DiscretizedOperator& op);

/// (I - K)^{-1} rhs on the nodes.
Eigen::VectorXd resolvent_apply(const DiscretizedOperator& op,
                                const std::function<double(double)>& rhs);

struct TracyWidomOptions {
  int order = 100;
  double cutoff = 16.0;
};

/// F2(s) = det(I - K_Ai) on L^2((s, s + cutoff)); EnvelopeError outside [-8, 8].
double tracy_widom_f2(double s, const TracyWidomOptions& opts = {});

}  // namespace tacnode::fredholm
