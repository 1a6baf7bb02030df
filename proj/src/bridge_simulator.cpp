#include "tacnode/bridge_simulator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tacnode/errors.hpp"
#include "tacnode/parallel.hpp"

namespace tacnode::sim {

namespace {

// SplitMix64; one instance per proposal, seeded from (seed, index).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed);
  const std::uint64_t base = mix();
  SplitMix64 mix2(base ^ (index * 0xD1B54A32D192ED03ULL));
  return mix2();
}

// Uniform-grid values (interior times only) of n non-colliding Brownian bridges a -> a:
// eigenvalues of a Hermitian matrix Brownian bridge, shifted by a.
void watermelon(int n, double a, int steps, SplitMix64& rng, double* out /* [path][k] */) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = 1.0 / steps;
  const double off = std::sqrt(0.5);
  std::vector<Eigen::MatrixXcd> w(std::size_t(steps) + 1, Eigen::MatrixXcd::Zero(n, n));
  for (int k = 1; k <= steps; ++k) {
    Eigen::MatrixXcd inc(n, n);
    for (int i = 0; i < n; ++i) {
      inc(i, i) = normal(rng);
      for (int j = i + 1; j < n; ++j) {
        const double re = off * normal(rng), im = off * normal(rng);
        inc(i, j) = {re, im};
        inc(j, i) = {re, -im};
      }
    }
    w[std::size_t(k)] = w[std::size_t(k) - 1] + std::sqrt(dt) * inc;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;
  for (int k = 1; k < steps; ++k) {
    const double t = k * dt;
    const Eigen::MatrixXcd bridge = w[std::size_t(k)] - t * w[std::size_t(steps)];
    eig.compute(bridge, Eigen::EigenvaluesOnly);
    for (int p = 0; p < n; ++p) out[p * (steps - 1) + (k - 1)] = a + eig.eigenvalues()[p];
  }
}

double det_ratio(const Eigen::MatrixXd& full, int n) {
  const int total = int(full.rows());
  const double d_all = full.partialPivLu().determinant();
  const double d1 = full.topLeftCorner(n, n).partialPivLu().determinant();
  const double d2 = full.bottomRightCorner(total - n, total - n).partialPivLu().determinant();
  if (!(d1 > 0.0) || !(d2 > 0.0) || !std::isfinite(d_all)) return 0.0;
  return std::clamp(d_all / (d1 * d2), 0.0, 1.0);
}

}  // namespace

PathEnsemble::PathEnsemble(std::vector<double> time_grid, int n, int m, std::vector<double> values,
                           std::size_t proposals)
    : time_grid_(std::move(time_grid)), n_(n), m_(m), values_(std::move(values)),
      proposals_(proposals) {
  const std::size_t per = std::size_t(n + m) * time_grid_.size();
  if (per == 0 || values_.size() % per != 0) throw DomainError("PathEnsemble: bad shape");
  samples_ = values_.size() / per;
  if (samples_ > proposals_) throw DomainError("PathEnsemble: more samples than proposals");
}

double segment_acceptance(int n, int m, double a1, double a2, const double* from,
                          const double* to, double dt) {
  const int total = n + m;
  auto group_start = [&](int j) { return j < n ? a1 : a2; };
  Eigen::MatrixXd e(total, total);
  if (from && to) {
    // Transition determinant normalized by its diagonal: exp(-((y_j-x_i)^2 - (y_i-x_i)^2)/(2 dt)).
    for (int i = 0; i < total; ++i)
      for (int j = 0; j < total; ++j) {
        const double dj = to[j] - from[i], di = to[i] - from[i];
        e(i, j) = std::exp(-(dj * dj - di * di) / (2.0 * dt));
      }
    return det_ratio(e, n);
  }
  const double* x = from ? from : to;
  if (!x) throw DomainError("segment_acceptance: at least one side must be given");
  // Coincident endpoints: row (g, p) is ((x_j - a_g)/sqrt(dt))^p phi(x_j - a_g),
  // column j normalized by phi(x_j - a_{g(j)}).
  const double sq = std::sqrt(dt);
  for (int r = 0; r < total; ++r) {
    const double ag = r < n ? a1 : a2;
    const int p = r < n ? r : r - n;
    for (int j = 0; j < total; ++j) {
      const double dg = x[j] - ag, dj = x[j] - group_start(j);
      e(r, j) = std::pow(dg / sq, p) * std::exp(-(dg * dg - dj * dj) / (2.0 * dt));
    }
  }
  return det_ratio(e, n);
}

PathEnsemble sample_bridges(const FiniteSystemConfig& cfg, int grid_steps, std::size_t count,
                            std::uint64_t seed, std::size_t max_proposals, unsigned threads) {
  const int n = cfg.n(), m = cfg.m(), total = n + m;
  if (total > kMaxPaths) {
    throw EnvelopeError("sample_bridges: n + m <= " + std::to_string(kMaxPaths) + " supported");
  }
  if (grid_steps < 2) throw DomainError("sample_bridges: grid_steps must be >= 2");
  if (count < 1) throw DomainError("sample_bridges: count must be >= 1");
  if (max_proposals < count) throw DomainError("sample_bridges: max_proposals < count");

  const int inner = grid_steps - 1;
  const double dt = 1.0 / grid_steps;
  const std::size_t nt = std::size_t(grid_steps) + 1;
  std::vector<double> grid(nt);
  for (std::size_t k = 0; k < nt; ++k) grid[k] = double(k) / grid_steps;
  grid.back() = 1.0;

  // One proposal: interior values [path][k] and whether it was accepted.
  auto propose = [&](std::uint64_t index, std::vector<double>& vals) {
    SplitMix64 rng(substream_seed(seed, index));
    vals.assign(std::size_t(total * inner), 0.0);
    watermelon(n, cfg.a1(), grid_steps, rng, vals.data());
    watermelon(m, cfg.a2(), grid_steps, rng, vals.data() + std::size_t(n * inner));
    std::vector<double> prev(static_cast<std::size_t>(total)), cur(static_cast<std::size_t>(total));
    double accept = 1.0;
    for (int k = 0; k < inner; ++k) {
      for (int p = 0; p < total; ++p) cur[std::size_t(p)] = vals[std::size_t(p * inner + k)];
      if (cur[std::size_t(n - 1)] >= cur[std::size_t(n)]) return false;
      accept *= k == 0 ? segment_acceptance(n, m, cfg.a1(), cfg.a2(), nullptr, cur.data(), dt)
                       : segment_acceptance(n, m, cfg.a1(), cfg.a2(), prev.data(), cur.data(), dt);
      std::swap(prev, cur);
    }
    accept *= segment_acceptance(n, m, cfg.a1(), cfg.a2(), prev.data(), nullptr, dt);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < accept;
  };

  std::vector<double> values;
  values.reserve(count * std::size_t(total) * nt);
  std::size_t accepted = 0, proposed = 0;
  const std::size_t batch = std::max<std::size_t>(1024, 64 * std::size_t(std::max(1u, threads)));
  std::vector<std::vector<double>> bvals(batch);
  std::vector<char> bok(batch);
  while (accepted < count && proposed < max_proposals) {
    const std::size_t size = std::min(batch, max_proposals - proposed);
    parallel_for(size, threads, [&](std::size_t i) { bok[i] = propose(proposed + i, bvals[i]); });
    for (std::size_t i = 0; i < size && accepted < count; ++i) {
      ++proposed;
      if (!bok[i]) continue;
      ++accepted;
      for (int p = 0; p < total; ++p) {
        const double end = p < n ? cfg.a1() : cfg.a2();
        values.push_back(end);
        for (int k = 0; k < inner; ++k) values.push_back(bvals[i][std::size_t(p * inner + k)]);
        values.push_back(end);
      }
    }
  }
  if (accepted < count) {
    const double rate = proposed ? double(accepted) / double(proposed) : 0.0;
    throw AcceptanceError("sample_bridges: " + std::to_string(accepted) + " of " +
                              std::to_string(count) + " samples after " +
                              std::to_string(proposed) + " proposals",
                          rate);
  }
  return PathEnsemble(std::move(grid), n, m, std::move(values), proposed);
}

GapEstimate empirical_gap(const PathEnsemble& ensemble, double time, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("empirical_gap: need lo < hi");
  const auto& grid = ensemble.time_grid();
  const auto it = std::find_if(grid.begin(), grid.end(),
                               [&](double g) { return std::abs(g - time) <= 1e-12; });
  if (it == grid.end()) throw DomainError("empirical_gap: time is not on the grid");
  const auto k = std::size_t(it - grid.begin());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < ensemble.samples(); ++s) {
    bool empty = true;
    for (int p = 0; p < ensemble.paths() && empty; ++p) {
      const double x = ensemble.at(s, p, k);
      empty = !(x > lo && x < hi);
    }
    hits += empty;
  }
  const double nacc = double(ensemble.samples());
  const double p = double(hits) / nacc;
  return {p, std::sqrt(p * (1.0 - p) / nacc), ensemble.samples(), ensemble.proposals()};
}

}  // namespace tacnode::sim
