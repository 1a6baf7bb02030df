#include "tacnode/finite_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tacnode/errors.hpp"
#include "tacnode/parallel.hpp"
#include "tacnode/special_functions.hpp"
#include "tacnode/tacnode_kernel.hpp"

namespace tacnode::finite {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLineDrop = 45.0;  // e^{-45} relative to the integrand at the anchor

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

void check_config(const FiniteSystemConfig& cfg) {
  if (cfg.n() > kMaxParticles || cfg.m() > kMaxParticles) {
    throw EnvelopeError("finite kernel: n, m <= " + std::to_string(kMaxParticles) + " supported");
  }
  if (!(cfg.a1() < 0.0 && cfg.a2() > 0.0)) {
    throw DomainError("finite kernel: requires a1 < 0 < a2 so that iR separates the circles");
  }
}

void check_time(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("finite kernel: times must lie in (0,1)");
}

// Roles of the two indices: index 1 integrates z around a1, index 2 around a2.
struct Roles {
  double aa, bb;
  double big_n, big_m;
  double sg;
};

Roles roles(int index, const FiniteSystemConfig& cfg) {
  if (index == 1) return {cfg.a1(), cfg.a2(), double(cfg.n()), double(cfg.m()), 1.0};
  if (index == 2) return {cfg.a2(), cfg.a1(), double(cfg.m()), double(cfg.n()), -1.0};
  throw DomainError("finite kernel: index must be 1 or 2");
}

cplx safe_exp(cplx x) {
  const cplx e = std::exp(x);
  if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) {
    throw NumericError("finite kernel: integrand overflow");
  }
  return e;
}

// log of the z-integrand of A and C (without the weight).
cplx log_z(const Roles& r, double s, double u, cplx z) {
  return -r.big_n * std::log(1.0 - z / r.aa) - s * z * z / (2.0 * (1.0 - s)) - r.aa * z +
         u * z / (1.0 - s);
}

// log of the w-integrand of A and B on the upward line.
cplx log_w(const Roles& r, double t, double v, cplx w) {
  return r.big_n * std::log(1.0 - w / r.aa) + t * w * w / (2.0 * (1.0 - t)) + r.aa * w -
         v * w / (1.0 - t);
}

// log of the beta integrand (without the x-dependent factor).
cplx log_beta(const Roles& r, double t, double v, cplx w) {
  return r.big_m * std::log(1.0 - w / r.bb) + t * w * w / (2.0 * (1.0 - t)) + r.aa * w -
         v * w / (1.0 - t);
}

double default_half_height(double t) {
  return std::max(20.0, 10.0 / std::sqrt(t / (2.0 * (1.0 - t))));
}

// Smallest radius along `dir` past which the integrand stays kLineDrop below its anchor value.
template <class LogF>
double adaptive_extent(LogF&& logf, cplx dir) {
  const double f0 = logf(cplx{0.0, 0.0}).real();
  double r = 1.0;
  while (logf(r * dir).real() > f0 - kLineDrop) {
    r *= 1.2;
    if (r > 1e5) throw NumericError("finite kernel: line integrand does not decay");
  }
  return r;
}

quad::ContourRule line_for(double extent, double t, int order, quad::Tilt tilt) {
  return quad::line_contour(0.0, std::max(extent, tilt == quad::Tilt::vertical
                                                      ? default_half_height(t)
                                                      : 0.0),
                            order, tilt);
}

Vec as_vec(std::span<const cplx> s) {
  return Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
}

void check_separated(const quad::ContourRule& a, const quad::ContourRule& b) {
  if (quad::ContourRule::min_distance(a, b) < kCollisionDistance) {
    throw ContourCollisionError("finite kernel: contours closer than 1e-9");
  }
}

// 1/(w_l - z_k), rows over z.
Mat cauchy(const Vec& z, const Vec& w) {
  Mat h(z.size(), w.size());
  for (Eigen::Index k = 0; k < z.size(); ++k)
    for (Eigen::Index l = 0; l < w.size(); ++l) h(k, l) = 1.0 / (w[l] - z[k]);
  return h;
}

}  // namespace

quad::ContourRule default_circle(int index, const FiniteSystemConfig& cfg,
                                 const FiniteOptions& opts) {
  check_config(cfg);
  const Roles r = roles(index, cfg);
  const double big = std::max(cfg.n(), cfg.m());
  const double gap =
      opts.gap_factor * std::min(-cfg.a1(), cfg.a2()) * std::pow(big, -1.0 / 3.0);
  return quad::circle_contour(r.aa, std::abs(r.aa) - gap, opts.circle_order);
}

quad::ContourRule default_line(int index, const FiniteSystemConfig& cfg, double t, double v,
                               quad::Tilt tilt, const FiniteOptions& opts) {
  check_config(cfg);
  check_time(t);
  const Roles r = roles(index, cfg);
  const cplx dir = tilt == quad::Tilt::vertical ? kI : std::polar(1.0, std::numbers::pi / 3.0);
  const double ext = adaptive_extent([&](cplx w) { return log_w(r, t, v, w); }, dir);
  return line_for(ext, t, opts.line_order, tilt);
}

cplx ingredient_A(int index, const FiniteSystemConfig& cfg, const TimeArgs& args,
                  const quad::ContourRule& z_contour, const quad::ContourRule& w_contour) {
  check_config(cfg);
  check_time(args.s);
  check_time(args.t);
  check_separated(z_contour, w_contour);
  const Roles r = roles(index, cfg);
  const Vec z = as_vec(z_contour.nodes()), w = as_vec(w_contour.nodes());
  Vec zv(z.size()), wv(w.size());
  for (Eigen::Index k = 0; k < z.size(); ++k)
    zv[k] = safe_exp(log_z(r, args.s, args.u, z[k])) * z_contour.weights()[k];
  for (Eigen::Index l = 0; l < w.size(); ++l)
    wv[l] = safe_exp(log_w(r, args.t, args.v, w[l])) * w_contour.weights()[l];
  const cplx sum = zv.transpose() * cauchy(z, w) * wv;
  const double d = cfg.d();
  return d * d / ((kI * kTwoPi) * (kI * kTwoPi) * std::sqrt((1.0 - args.s) * (1.0 - args.t))) *
         sum;
}

cplx ingredient_A(int index, const FiniteSystemConfig& cfg, const TimeArgs& args,
                  const FiniteOptions& opts) {
  return ingredient_A(index, cfg, args, default_circle(index, cfg, opts),
                      default_line(index, cfg, args.t, args.v, quad::Tilt::vertical, opts));
}

// Per-index data independent of the time arguments.
struct FiniteKernel::Side {
  Roles r;
  quad::ContourRule dz, dw;
  Vec z{}, w2{};
  Vec zb{};    // (1-z/aa)^{-N} (1-z/bb)^{M} dz
  Vec wc{};    // (1-w/aa)^{N} (1-w/bb)^{-M} dw
  Mat ez{};    // e^{sg a x_i z_k}
  Mat ew{};    // e^{-sg a x_i w_l}
  Mat hc{};    // 1/(w_l - z_k) between the circles
  Mat m0{};    // M0(x_i, x_j)
  Eigen::PartialPivLU<Mat> lu{};  // of 1 - M0 diag(w_x)
  cplx det{};
};

FiniteKernel::FiniteKernel(const FiniteSystemConfig& cfg, const FiniteOptions& opts)
    : cfg_(cfg),
      opts_(opts),
      x_rule_([&] {
        check_config(cfg);
        if (opts.nystrom_order < 30) throw DomainError("finite kernel: nystrom_order >= 30");
        const double lam = double(cfg.m()) / double(cfg.n());
        const double h = std::pow(double(cfg.n()), -2.0 / 3.0) * std::pow(lam, -1.0 / 6.0) *
                         std::pow(1.0 + std::sqrt(lam), -2.0 / 3.0);
        const auto base = quad::gauss_legendre(opts.nystrom_order, 0.0, opts.nystrom_cutoff);
        std::vector<double> xs, ws;
        for (std::size_t i = 0; i < base.size(); ++i) {
          xs.push_back(1.0 + h * base.nodes()[i]);
          ws.push_back(h * base.weights()[i]);
        }
        return quad::QuadratureRule(std::move(xs), std::move(ws));
      }()) {
  const auto nx = static_cast<Eigen::Index>(x_rule_.size());
  const Eigen::VectorXd xs = Eigen::Map<const Eigen::VectorXd>(x_rule_.nodes().data(), nx);
  const Eigen::VectorXd wx = Eigen::Map<const Eigen::VectorXd>(x_rule_.weights().data(), nx);
  const double a = cfg.a();
  for (int index : {1, 2}) {
    std::shared_ptr<Side> sd(new Side{roles(index, cfg), default_circle(index, cfg, opts),
                                      default_circle(index == 1 ? 2 : 1, cfg, opts)});
    check_separated(sd->dz, sd->dw);
    sd->z = as_vec(sd->dz.nodes());
    sd->w2 = as_vec(sd->dw.nodes());
    const Roles& r = sd->r;
    sd->zb.resize(sd->z.size());
    for (Eigen::Index k = 0; k < sd->z.size(); ++k) {
      const cplx z = sd->z[k];
      sd->zb[k] = safe_exp(-r.big_n * std::log(1.0 - z / r.aa) + r.big_m * std::log(1.0 - z / r.bb)) *
                  sd->dz.weights()[k];
    }
    sd->wc.resize(sd->w2.size());
    for (Eigen::Index l = 0; l < sd->w2.size(); ++l) {
      const cplx w = sd->w2[l];
      sd->wc[l] = safe_exp(r.big_n * std::log(1.0 - w / r.aa) - r.big_m * std::log(1.0 - w / r.bb)) *
                  sd->dw.weights()[l];
    }
    sd->ez.resize(nx, sd->z.size());
    sd->ew.resize(nx, sd->w2.size());
    for (Eigen::Index i = 0; i < nx; ++i) {
      for (Eigen::Index k = 0; k < sd->z.size(); ++k) sd->ez(i, k) = std::exp(r.sg * a * xs[i] * sd->z[k]);
      for (Eigen::Index l = 0; l < sd->w2.size(); ++l) sd->ew(i, l) = std::exp(-r.sg * a * xs[i] * sd->w2[l]);
    }
    sd->hc = cauchy(sd->z, sd->w2);
    // M0 carries 1/(z - w) = -hc.
    const cplx coef = r.sg * a / ((kI * kTwoPi) * (kI * kTwoPi));
    sd->m0 = -coef * (sd->ez * sd->zb.asDiagonal()) * sd->hc *
             (sd->wc.asDiagonal() * sd->ew.transpose());
    // M0 must have decayed by the end of the grid, otherwise (1 - M0) is truncated
    // and the determinant (a non-intersection probability) is not resolved.
    const double m0_max = sd->m0.cwiseAbs().maxCoeff();
    const double m0_edge = std::max(sd->m0.row(nx - 1).cwiseAbs().maxCoeff(),
                                    sd->m0.col(nx - 1).cwiseAbs().maxCoeff());
    if (!(m0_edge <= 1e-6 * m0_max)) {
      throw EnvelopeError("finite kernel: M0 not decayed at the Nystrom cutoff (edge/max = " +
                          std::to_string(m0_edge / m0_max) + "); groups too close for this grid");
    }
    const Mat op = Mat::Identity(nx, nx) - sd->m0 * wx.cast<cplx>().asDiagonal();
    sd->lu.compute(op);
    sd->det = sd->lu.determinant();
    if (!(sd->det.real() > 1e-12)) {
      throw SingularOperatorError("finite kernel: det(1 - M0) <= 1e-12 (index " +
                                  std::to_string(index) + ")");
    }
    (index == 1 ? side1_ : side2_) = std::move(sd);
  }
}

const FiniteKernel::Side& FiniteKernel::side(int index) const {
  if (index == 1) return *side1_;
  if (index == 2) return *side2_;
  throw DomainError("finite kernel: index must be 1 or 2");
}

cplx FiniteKernel::m0_determinant(int index) const { return side(index).det; }

Mat FiniteKernel::side_block(const Side& sd, double s, const std::vector<double>& us, double t,
                             const std::vector<double>& vs) const {
  const Roles& r = sd.r;
  const double a = cfg_.a(), d = cfg_.d();
  const auto nx = static_cast<Eigen::Index>(x_rule_.size());
  const auto nu = static_cast<Eigen::Index>(us.size());
  const auto nv = static_cast<Eigen::Index>(vs.size());
  const cplx tpi2 = (kI * kTwoPi) * (kI * kTwoPi);

  // Shared upward lines: the tallest extent needed by any v.
  double ext_a = 0.0, ext_b = 0.0;
  for (double v : vs) {
    ext_a = std::max(ext_a, adaptive_extent([&](cplx w) { return log_w(r, t, v, w); }, kI));
    ext_b = std::max(ext_b, adaptive_extent([&](cplx w) { return log_beta(r, t, v, w); }, kI));
  }
  const auto line_a = line_for(ext_a, t, opts_.line_order, quad::Tilt::vertical);
  const auto line_b = line_for(ext_b, t, opts_.line_order, quad::Tilt::vertical);
  check_separated(sd.dz, line_a);
  const Vec wl = as_vec(line_a.nodes()), wb = as_vec(line_b.nodes());

  Mat zv(sd.z.size(), nu);
  for (Eigen::Index i = 0; i < nu; ++i)
    for (Eigen::Index k = 0; k < sd.z.size(); ++k)
      zv(k, i) = safe_exp(log_z(r, s, us[i], sd.z[k])) * sd.dz.weights()[k];
  Mat wv(wl.size(), nv), bv(wb.size(), nv);
  for (Eigen::Index j = 0; j < nv; ++j) {
    for (Eigen::Index l = 0; l < wl.size(); ++l)
      wv(l, j) = safe_exp(log_w(r, t, vs[j], wl[l])) * line_a.weights()[l];
    for (Eigen::Index l = 0; l < wb.size(); ++l)
      bv(l, j) = safe_exp(log_beta(r, t, vs[j], wb[l])) * line_b.weights()[l];
  }

  const Mat hl = cauchy(sd.z, wl);  // 1/(w_l - z_k)
  const Mat a_mat = (d * d / (tpi2 * std::sqrt((1.0 - s) * (1.0 - t)))) * (zv.transpose() * hl * wv);

  // B uses 1/(z - w) = -hl; beta is a single integral along its own line.
  const Eigen::VectorXd xs = Eigen::Map<const Eigen::VectorXd>(x_rule_.nodes().data(), nx);
  Mat eb(nx, wb.size());
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index l = 0; l < wb.size(); ++l) eb(i, l) = std::exp(r.sg * a * xs[i] * wb[l]);
  const double ra = std::sqrt(a);
  const Mat b_mat = (-d * ra / (tpi2 * std::sqrt(1.0 - t))) * (sd.ez * sd.zb.asDiagonal() * (hl * wv));
  const Mat beta_mat = (d * ra / (kI * kTwoPi * std::sqrt(1.0 - t))) * (eb * bv);
  // C: index 1 uses 1/(w - z), index 2 the opposite orientation; both are sg * hc.
  const Mat c_mat = (r.sg * d * ra / (tpi2 * std::sqrt(1.0 - s))) *
                    (sd.ew * sd.wc.asDiagonal() * (sd.hc.transpose() * zv));

  const Eigen::VectorXcd wx =
      Eigen::Map<const Eigen::VectorXd>(x_rule_.weights().data(), nx).cast<cplx>();
  const Mat f = wx.asDiagonal() * (b_mat + beta_mat);  // nx x nv

  if (!opts_.determinant_ratio) {
    const Mat rc = sd.lu.solve(c_mat);  // nx x nu
    return a_mat + rc.transpose() * f;
  }
  // <f, (1 - K)^{-1} c> = det(1 - K + c f^T) / det(1 - K) - 1.
  const Mat op = Mat::Identity(nx, nx) - sd.m0 * wx.asDiagonal();
  Mat out = a_mat;
  for (Eigen::Index i = 0; i < nu; ++i)
    for (Eigen::Index j = 0; j < nv; ++j) {
      const Mat pert = op + c_mat.col(i) * f.col(j).transpose();
      out(i, j) += pert.partialPivLu().determinant() / sd.det - 1.0;
    }
  return out;
}

Eigen::MatrixXcd FiniteKernel::block(double s, const std::vector<double>& us, double t,
                                     const std::vector<double>& vs) const {
  check_time(s);
  check_time(t);
  const double d2 = cfg_.d() * cfg_.d();
  Mat out = (side_block(*side1_, s, us, t, vs) + side_block(*side2_, s, us, t, vs)) / d2;
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j)
      out(Eigen::Index(i), Eigen::Index(j)) -= special::brownian_q(s, us[i], t, vs[j]);
  if (!out.allFinite()) throw NumericError("finite kernel: non-finite kernel value");
  return out;
}

cplx FiniteKernel::side_term(int index, const TimeArgs& args) const {
  check_time(args.s);
  check_time(args.t);
  return side_block(side(index), args.s, {args.u}, args.t, {args.v})(0, 0);
}

KernelValue FiniteKernel::eval(const TimeArgs& args) const {
  const cplx v = block(args.s, {args.u}, args.t, {args.v})(0, 0);
  return {v.real(), v.imag()};
}

KernelValue FiniteKernel::gap_probability(double t, double lo, double hi, int order) const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("finite gap: need finite lo < hi");
  }
  if (order < 2) throw DomainError("finite gap: order must be at least 2");
  const auto rule = quad::gauss_legendre(order, lo, hi);
  const std::vector<double> xs(rule.nodes().begin(), rule.nodes().end());
  const Mat k = block(t, xs, t, xs);
  Eigen::VectorXcd sw(order);
  for (int i = 0; i < order; ++i) sw[i] = std::sqrt(rule.weights()[std::size_t(i)]);
  const Mat op = Mat::Identity(order, order) - sw.asDiagonal() * k * sw.asDiagonal();
  const cplx det = op.partialPivLu().determinant();
  return {det.real(), det.imag()};
}

cplx ingredient(int index, Ingredient which, const FiniteSystemConfig& cfg, const TimeArgs& args,
                double x, double y, const FiniteOptions& opts) {
  check_config(cfg);
  if (!(x >= 1.0) || !(y >= 1.0)) throw DomainError("finite ingredient: x, y must be >= 1");
  const Roles r = roles(index, cfg);
  const double a = cfg.a(), d = cfg.d(), ra = std::sqrt(a);
  const cplx tpi2 = (kI * kTwoPi) * (kI * kTwoPi);
  const auto dz = default_circle(index, cfg, opts);
  const auto dw = default_circle(index == 1 ? 2 : 1, cfg, opts);
  check_separated(dz, dw);
  const Vec z = as_vec(dz.nodes()), w2 = as_vec(dw.nodes());
  auto zb = [&](Eigen::Index k) {
    return safe_exp(-r.big_n * std::log(1.0 - z[k] / r.aa) + r.big_m * std::log(1.0 - z[k] / r.bb)) *
           dz.weights()[k];
  };
  auto wc = [&](Eigen::Index l) {
    return safe_exp(r.big_n * std::log(1.0 - w2[l] / r.aa) - r.big_m * std::log(1.0 - w2[l] / r.bb)) *
           dw.weights()[l];
  };
  switch (which) {
    case Ingredient::B: {
      check_time(args.t);
      const auto line = default_line(index, cfg, args.t, args.v, quad::Tilt::vertical, opts);
      check_separated(dz, line);
      cplx acc = 0.0;
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        cplx g = 0.0;
        for (std::size_t l = 0; l < line.size(); ++l) {
          const cplx w = line.nodes()[l];
          g += safe_exp(log_w(r, args.t, args.v, w)) * line.weights()[l] / (z[k] - w);
        }
        acc += std::exp(r.sg * a * x * z[k]) * zb(k) * g;
      }
      return d * ra / (tpi2 * std::sqrt(1.0 - args.t)) * acc;
    }
    case Ingredient::beta: {
      check_time(args.t);
      const double ext = adaptive_extent([&](cplx w) { return log_beta(r, args.t, args.v, w); }, kI);
      const auto line = line_for(ext, args.t, opts.line_order, quad::Tilt::vertical);
      const cplx acc = line.integrate([&](cplx w) {
        return safe_exp(log_beta(r, args.t, args.v, w) + r.sg * a * x * w);
      });
      return d * ra / (kI * kTwoPi * std::sqrt(1.0 - args.t)) * acc;
    }
    case Ingredient::C: {
      check_time(args.s);
      cplx acc = 0.0;
      for (Eigen::Index l = 0; l < w2.size(); ++l) {
        cplx inner = 0.0;
        for (Eigen::Index k = 0; k < z.size(); ++k)
          inner += safe_exp(log_z(r, args.s, args.u, z[k])) * dz.weights()[k] / (w2[l] - z[k]);
        acc += std::exp(-r.sg * a * x * w2[l]) * wc(l) * inner;
      }
      return r.sg * d * ra / (tpi2 * std::sqrt(1.0 - args.s)) * acc;
    }
    case Ingredient::M0: {
      cplx acc = 0.0;
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        cplx inner = 0.0;
        for (Eigen::Index l = 0; l < w2.size(); ++l)
          inner += wc(l) * std::exp(-r.sg * a * w2[l] * y) / (z[k] - w2[l]);
        acc += std::exp(r.sg * a * x * z[k]) * zb(k) * inner;
      }
      return r.sg * a / tpi2 * acc;
    }
  }
  throw DomainError("finite ingredient: unknown kind");
}

double finite_kernel_eval(const FiniteSystemConfig& cfg, double s, double u, double t, double v,
                          int nystrom_order) {
  FiniteOptions opts;
  opts.nystrom_order = nystrom_order;
  return FiniteKernel(cfg, opts).eval({s, u, t, v}).value;
}

double scaled_finite_kernel(int n, const TacnodeParams& params, const ScaledPoint& pt1,
                            const ScaledPoint& pt2, const FiniteOptions& opts) {
  const auto cfg = FiniteSystemConfig::from_scaling(n, params);
  const auto p1 = scaled_spacetime(n, pt1), p2 = scaled_spacetime(n, pt2);
  const double d = cfg.d();
  return d * d * FiniteKernel(cfg, opts).eval({p1.time, p1.space, p2.time, p2.space}).value;
}

std::optional<double> loglog_slope(const std::vector<ConvergenceRow>& rows) {
  if (rows.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : rows) {
    if (!(row.err > 0.0)) return std::nullopt;
    const double lx = std::log(double(row.n)), ly = std::log(row.err);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = double(rows.size());
  const double denom = k * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (k * sxy - sx * sy) / denom;
}

ConvergenceReport convergence_report(std::vector<int> n_list, const TacnodeParams& params,
                                     const ScaledPoint& pt1, const ScaledPoint& pt2,
                                     unsigned threads, const FiniteOptions& opts) {
  if (n_list.empty()) throw DomainError("convergence report: empty n list");
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  for (int n : n_list) FiniteSystemConfig::from_scaling(n, params);

  ConvergenceReport report;
  report.limit_value = full_kernel(params, pt1, pt2);
  report.rows.resize(n_list.size());
  parallel_for(n_list.size(), threads, [&](std::size_t i) {
    const double v = scaled_finite_kernel(n_list[i], params, pt1, pt2, opts);
    report.rows[i] = {n_list[i], v, std::abs(v - report.limit_value)};
  });
  report.slope = loglog_slope(report.rows);
  return report;
}

}  // namespace tacnode::finite
