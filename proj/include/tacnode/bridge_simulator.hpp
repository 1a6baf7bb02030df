#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tacnode/params.hpp"

namespace tacnode::sim {

inline constexpr int kMaxPaths = 8;

/// Accepted samples on a uniform grid 0 = t_0 < ... < t_K = 1.
/// Paths 0..n-1 run a1 -> a1, paths n..n+m-1 run a2 -> a2.
class PathEnsemble {
 public:
  PathEnsemble(std::vector<double> time_grid, int n, int m, std::vector<double> values,
               std::size_t proposals);

  const std::vector<double>& time_grid() const noexcept { return time_grid_; }
  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int paths() const noexcept { return n_ + m_; }
  std::size_t samples() const noexcept { return samples_; }
  std::size_t proposals() const noexcept { return proposals_; }
  double acceptance_rate() const noexcept { return double(samples_) / double(proposals_); }

  double at(std::size_t sample, int path, std::size_t time_index) const {
    return values_[(sample * std::size_t(paths()) + std::size_t(path)) * time_grid_.size() +
                   time_index];
  }

 private:
  std::vector<double> time_grid_;
  int n_, m_;
  std::size_t samples_;
  std::vector<double> values_;
  std::size_t proposals_;
};

struct GapEstimate {
  double p_hat;
  double stderr_;
  std::size_t samples_accepted;
  std::size_t samples_proposed;
};

/// Exact samples of two non-colliding watermelons, conditioned on mutual non-collision
/// on [0,1]. Proposal k draws from its own substream of `seed`, and the first `count`
/// accepted proposals (by index) are returned, so the result does not depend on `threads`.
/// AcceptanceError if `max_proposals` proposals give fewer than `count` acceptances.
PathEnsemble sample_bridges(const FiniteSystemConfig& cfg, int grid_steps, std::size_t count,
                            std::uint64_t seed, std::size_t max_proposals, unsigned threads = 1);

/// Fraction of samples with no path in (lo, hi) at a grid time.
GapEstimate empirical_gap(const PathEnsemble& ensemble, double time, double lo, double hi);

/// Probability that independent proposals over one step are non-colliding, given the
/// grid values, relative to each group being non-colliding on its own (exposed for tests).
/// `from` and `to` hold all n+m positions. A null pointer on either side stands for the
/// coincident endpoints (a1 for group 1, a2 for group 2).
double segment_acceptance(int n, int m, double a1, double a2, const double* from,
                          const double* to, double dt);

}  // namespace tacnode::sim
