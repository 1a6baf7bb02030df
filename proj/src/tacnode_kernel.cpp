#include "tacnode/tacnode_kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "tacnode/airy_operators.hpp"
#include "tacnode/errors.hpp"
#include "tacnode/parallel.hpp"
#include "tacnode/special_functions.hpp"

namespace tacnode {


using special::airy_ext;

namespace {

constexpr double kWideThreshold = -5.0;
constexpr double kMinArgument = -15.0;

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

}  // namespace

GapWindow::GapWindow(double time, double lo, double hi) : time_(time), lo_(lo), hi_(hi) {
  if (!std::isfinite(time) || !std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw DomainError("gap window needs finite time and lo < hi");
  }
}

void check_envelope(const TacnodeParams& params, const ScaledPoint& pt) {
  const double lam = params.lambda();
  if (!within(lam, 1.0 / 20.0 - 1e-12, 20.0 + 1e-12) || !within(params.sigma(), -6.0, 6.0)) {
    throw EnvelopeError("tacnode kernel: (lambda, sigma) outside [1/20, 20] x [-6, 6]");
  }
  if (!std::isfinite(pt.tau) || !std::isfinite(pt.xi) || std::abs(pt.tau) > 5.0 ||
      std::abs(pt.xi) > 15.0) {
    throw EnvelopeError("tacnode kernel: point outside |tau| <= 5, |xi| <= 15");
  }
}

struct TacnodeKernel::MuGrid {
  quad::QuadratureRule rule;
  Eigen::MatrixXd ai_xm;  // Ai(x_i + mu_k), x on the resolvent rule
  Eigen::VectorXd weights;
};

// Everything l_tac needs from the first point: the mu-vector of the extended kernel
// and the resolvent applied to B and to C = b - B.
struct TacnodeKernel::LeftData {
  Eigen::VectorXd ext;
  Eigen::VectorXd rb;
  Eigen::VectorXd rc;
};

struct TacnodeKernel::RightData {
  Eigen::VectorXd ext;
  Eigen::VectorXd b_minus_big_b;
  Eigen::VectorXd b;
};

std::unique_ptr<TacnodeKernel::MuGrid> TacnodeKernel::make_grid(quad::QuadratureRule rule) const {
  auto g = std::make_unique<MuGrid>(MuGrid{std::move(rule), {}, {}});
  const auto xs = x_rule_.nodes();
  const auto mus = g->rule.nodes();
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const auto nm = static_cast<Eigen::Index>(mus.size());
  g->ai_xm.resize(nx, nm);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index k = 0; k < nm; ++k) g->ai_xm(i, k) = special::airy(xs[i] + mus[k]);
  g->weights = Eigen::Map<const Eigen::VectorXd>(g->rule.weights().data(), nm);
  return g;
}

TacnodeKernel::TacnodeKernel(const TacnodeParams& params, const KernelOptions& opts)
    : params_(params),
      opts_(opts),
      sigma_tilde_(tacnode::sigma_tilde(params)),
      x_rule_(quad::gauss_legendre(opts.resolvent_order, tacnode::sigma_tilde(params),
                                   tacnode::sigma_tilde(params) + opts.resolvent_cutoff)) {
  check_envelope(params, {0.0, 0.0});
  if (sigma_tilde_ < kMinArgument) {
    throw EnvelopeError("tacnode kernel: sigma_tilde below -15");
  }
  std::vector<double> nodes(x_rule_.nodes().begin(), x_rule_.nodes().end());
  std::vector<double> weights(x_rule_.weights().begin(), x_rule_.weights().end());
  const Eigen::MatrixXd k = airy::AiryTable(nodes).kernel_matrix();
  resolvent_ = std::make_unique<fredholm::FactorizedOperator>(
      fredholm::from_kernel_matrix(std::move(nodes), std::move(weights), k));
  if (resolvent_->min_relative_pivot() < fredholm::kSingularPivot) {
    throw SingularOperatorError("tacnode kernel: 1 - K_Ai is numerically singular at sigma_tilde " +
                                std::to_string(sigma_tilde_));
  }
  grid_ = make_grid(airy::mu_rule_for(0.0, opts.mu_order, opts.mu_cutoff));
}

TacnodeKernel::~TacnodeKernel() = default;

const TacnodeKernel::MuGrid& TacnodeKernel::mu_grid(bool wide) const {
  if (!wide) return *grid_;
  std::call_once(wide_once_, [this] {
    wide_grid_ = make_grid(airy::mu_rule_for(kMinArgument, opts_.mu_order, opts_.mu_cutoff));
  });
  return *wide_grid_;
}

TacnodeParams TacnodeKernel::side_params(int side) const {
  return side == 0 ? params_ : reflect(params_);
}

bool TacnodeKernel::needs_wide(int side, const ScaledPoint& p) const {
  const double shifted = side_params(side).sigma() + p.xi;
  if (shifted < kMinArgument) {
    throw EnvelopeError("tacnode kernel: shifted Airy argument " + std::to_string(shifted) +
                        " below -15");
  }
  return shifted < kWideThreshold || sigma_tilde_ < kWideThreshold;
}

std::shared_ptr<const TacnodeKernel::LeftData> TacnodeKernel::left(int side, const ScaledPoint& p,
                                                                   bool wide) const {
  const Key key{side, std::bit_cast<std::uint64_t>(p.tau), std::bit_cast<std::uint64_t>(p.xi),
                wide};
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = left_cache_.find(key); it != left_cache_.end()) return it->second;
  }
  const TacnodeParams sp = side_params(side);
  const double lam = sp.lambda();
  const double xi = sp.sigma() + p.xi;
  const double tau = -p.tau;
  const MuGrid& g = mu_grid(wide);
  const auto mus = g.rule.nodes();
  const auto xs = x_rule_.nodes();
  const double c = airy::stretch_inv(lam);

  auto data = std::make_shared<LeftData>();
  const auto nm = static_cast<Eigen::Index>(mus.size());
  data->ext.resize(nm);
  Eigen::VectorXd gb(nm);
  for (Eigen::Index k = 0; k < nm; ++k) {
    data->ext[k] = airy_ext(tau, xi + mus[k]);
    gb[k] = g.weights[k] * airy_ext(tau, xi + c * mus[k]);
  }
  const Eigen::VectorXd big_b = g.ai_xm * gb;
  const double l6 = std::pow(lam, 1.0 / 6.0), l3 = std::cbrt(lam), st = airy::stretch(lam);
  Eigen::VectorXd small_b(big_b.size());
  for (Eigen::Index i = 0; i < small_b.size(); ++i)
    small_b[i] = l6 * airy_ext(l3 * tau, -l6 * xi + st * xs[i]);
  data->rb = resolvent_->solve(big_b);
  data->rc = resolvent_->solve(small_b - big_b);

  std::unique_lock lock(cache_mutex_);
  return left_cache_.emplace(key, std::move(data)).first->second;
}

std::shared_ptr<const TacnodeKernel::RightData> TacnodeKernel::right(int side,
                                                                     const ScaledPoint& p,
                                                                     bool wide) const {
  const Key key{side, std::bit_cast<std::uint64_t>(p.tau), std::bit_cast<std::uint64_t>(p.xi),
                wide};
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = right_cache_.find(key); it != right_cache_.end()) return it->second;
  }
  const TacnodeParams sp = side_params(side);
  const double lam = sp.lambda();
  const double xi = sp.sigma() + p.xi;
  const double tau = p.tau;
  const MuGrid& g = mu_grid(wide);
  const auto mus = g.rule.nodes();
  const auto xs = x_rule_.nodes();
  const double c = airy::stretch_inv(lam);

  auto data = std::make_shared<RightData>();
  const auto nm = static_cast<Eigen::Index>(mus.size());
  data->ext.resize(nm);
  Eigen::VectorXd gb(nm);
  for (Eigen::Index k = 0; k < nm; ++k) {
    data->ext[k] = g.weights[k] * airy_ext(tau, xi + mus[k]);
    gb[k] = g.weights[k] * airy_ext(tau, xi + c * mus[k]);
  }
  const Eigen::VectorXd big_b = g.ai_xm * gb;
  const double l6 = std::pow(lam, 1.0 / 6.0), l3 = std::cbrt(lam), st = airy::stretch(lam);
  data->b.resize(big_b.size());
  for (Eigen::Index i = 0; i < big_b.size(); ++i)
    data->b[i] = l6 * airy_ext(l3 * tau, -l6 * xi + st * xs[i]) * x_rule_.weights()[i];
  // Both stored vectors carry the resolvent-rule weights.
  data->b_minus_big_b = data->b;
  for (Eigen::Index i = 0; i < big_b.size(); ++i)
    data->b_minus_big_b[i] = x_rule_.weights()[i] * big_b[i] - data->b[i];

  std::unique_lock lock(cache_mutex_);
  return right_cache_.emplace(key, std::move(data)).first->second;
}

double TacnodeKernel::side_value(int side, const ScaledPoint& p1, const ScaledPoint& p2,
                                 bool alt) const {
  const bool wide = needs_wide(side, p1) || needs_wide(side, p2);
  const auto l = left(side, p1, wide);
  const auto r = right(side, p2, wide);
  const double c = airy::stretch_inv(side_params(side).lambda());
  if (alt) return c * l->rc.dot(r->b);
  return l->ext.dot(r->ext) + c * r->b_minus_big_b.dot(l->rb);
}

double TacnodeKernel::l_tac(int side, const ScaledPoint& p1, const ScaledPoint& p2) const {
  return side_value(side, p1, p2, false);
}

double TacnodeKernel::l_tac_alt(int side, const ScaledPoint& p1, const ScaledPoint& p2) const {
  return side_value(side, p1, p2, true);
}

double TacnodeKernel::l_tac_interaction(int side, const ScaledPoint& p1,
                                        const ScaledPoint& p2) const {
  const bool wide = needs_wide(side, p1) || needs_wide(side, p2);
  const auto l = left(side, p1, wide);
  const auto r = right(side, p2, wide);
  return airy::stretch_inv(side_params(side).lambda()) * r->b_minus_big_b.dot(l->rb);
}

double TacnodeKernel::assemble(const ScaledPoint& p1, const ScaledPoint& p2, bool alt) const {
  check_envelope(params_, p1);
  check_envelope(params_, p2);
  const double lam = params_.lambda();
  const double gauss =
      p1.tau < p2.tau ? special::gauss_kernel(p2.tau - p1.tau, p1.xi, p2.xi) : 0.0;
  const ScaledPoint q1 = reflect_point(lam, p1), q2 = reflect_point(lam, p2);
  return -gauss + side_value(0, p1, p2, alt) +
         std::pow(lam, 1.0 / 6.0) * side_value(1, q1, q2, alt);
}

double TacnodeKernel::value(const ScaledPoint& p1, const ScaledPoint& p2) const {
  return assemble(p1, p2, false);
}

double TacnodeKernel::value_alt(const ScaledPoint& p1, const ScaledPoint& p2) const {
  return assemble(p1, p2, true);
}

GapResult TacnodeKernel::gap_probability(const std::vector<GapWindow>& windows, int order) const {
  if (order < 2) throw DomainError("gap probability: order must be at least 2");
  if (windows.empty()) return {1.0, false};
  std::vector<GapWindow> w = windows;
  std::stable_sort(w.begin(), w.end(), [](const GapWindow& a, const GapWindow& b) {
    return a.time() < b.time() || (a.time() == b.time() && a.lo() < b.lo());
  });
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i].time() == w[i - 1].time()) {
      if (w[i].lo() < w[i - 1].hi())
        throw DomainError("gap probability: overlapping windows at equal time");
    } else {
      ++distinct;
    }
  }
  if (distinct > 4) throw EnvelopeError("gap probability: at most 4 distinct times supported");

  std::vector<ScaledPoint> pts;
  std::vector<double> nodes, weights;
  for (const auto& win : w) {
    const auto rule = quad::gauss_legendre(order, win.lo(), win.hi());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      pts.push_back({win.time(), rule.nodes()[i]});
      check_envelope(params_, pts.back());
      nodes.push_back(rule.nodes()[i]);
      weights.push_back(rule.weights()[i]);
    }
  }
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  // Row-parallel; every entry is computed independently of the schedule.
  parallel_for(static_cast<std::size_t>(n), opts_.threads, [&](std::size_t i) {
    for (Eigen::Index j = 0; j < n; ++j)
      k(static_cast<Eigen::Index>(i), j) = value(pts[i], pts[static_cast<std::size_t>(j)]);
  });
  if (!k.allFinite()) throw NumericError("gap probability: non-finite kernel entry");
  const double det = fredholm::fredholm_det(
      fredholm::from_kernel_matrix(std::move(nodes), std::move(weights), k));
  return {det, det < -1e-6 || det > 1.0 + 1e-6};
}

double l_tac(const TacnodeParams& params, const ScaledPoint& p1, const ScaledPoint& p2) {
  return TacnodeKernel(params).l_tac(0, p1, p2);
}

double full_kernel(const TacnodeParams& params, const ScaledPoint& p1, const ScaledPoint& p2) {
  return TacnodeKernel(params).value(p1, p2);
}

double full_kernel_alt(const TacnodeParams& params, const ScaledPoint& p1,
                       const ScaledPoint& p2) {
  return TacnodeKernel(params).value_alt(p1, p2);
}

GapResult gap_probability(const TacnodeParams& params, const std::vector<GapWindow>& windows,
                          int order) {
  return TacnodeKernel(params).gap_probability(windows, order);
}

}  // namespace tacnode
