#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tacnode/airy_operators.hpp"
#include "tacnode/errors.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/params.hpp"
#include "tacnode/special_functions.hpp"

using namespace tacnode;
using namespace tacnode::airy;

namespace {

const auto mu = default_mu_rule();

double s_fun(double lambda, double sigma, double tau, double xi, double x) {
  return eval_aux({AuxKind::S, lambda, tau, xi, sigma}, x, mu);
}

// <f, g> on (st, st + 40) with a 200-point rule.
template <class F, class G>
double inner(double st, F&& f, G&& g) {
  const auto r = quad::gauss_legendre(200, st, st + 40);
  return r.integrate([&](double x) { return f(x) * g(x); });
}

}  // namespace

TEST_CASE("airy kernel") {
  CHECK(airy_kernel(0, 1, mu) == doctest::Approx(airy_kernel(1, 0, mu)).epsilon(1e-15));
  const double ap0 = oracle::ai_prime(0);
  CHECK(std::abs(airy_kernel(0, 0, mu) - ap0 * ap0) < 1e-12);
  // Ai'(0)^2 = 0.0669875 (a tabulated 0.065730 does not match the diagonal identity).
  CHECK(airy_kernel(0, 0, mu) == doctest::Approx(0.0669875).epsilon(1e-6));
  CHECK(airy_kernel(5, 5, mu) < 1e-8);
  for (double x : {4.0, 6.0, 10.0}) CHECK(std::abs(airy_kernel_closed(x, x)) <= std::exp(-x));
  for (double x : {-3.0, 0.0, 1.5})
    for (double y : {-2.0, 0.5, 3.0})
      CHECK(std::abs(airy_kernel(x, y, mu) - airy_kernel_closed(x, y)) < 1e-12);
  // Near-diagonal points avoid cancellation in the quotient.
  for (double h : {1e-9, 5e-8, 2e-7, 1e-5, 9e-4, 2e-3})
    CHECK(std::abs(airy_kernel_closed(1.0, 1.0 + h) - airy_kernel(1.0, 1.0 + h, mu)) < 1e-12);
}

TEST_CASE("extended airy kernel") {
  CHECK(std::abs(airy_kernel_ext(0, 0, 0.3, -0.2, mu) - airy_kernel(0.3, -0.2, mu)) < 1e-12);
  CHECK(airy_kernel_ext(0.5, -0.3, 0, 1, mu) ==
        doctest::Approx(airy_kernel_ext(-0.3, 0.5, 1, 0, mu)).epsilon(1e-14));
  const double riemann = oracle::midpoint(
      [](double u) { return special::airy_ext(-1, u) * special::airy_ext(1, u); }, 0, 30, 10000);
  const double k = airy_kernel_ext(-1, 1, 0, 0, mu);
  CHECK(std::isfinite(k));
  CHECK(std::abs(k - riemann) < 1e-6);
  // Order doubling.
  CHECK(std::abs(k - airy_kernel_ext(-1, 1, 0, 0, quad::gauss_legendre(240, 0, 40))) < 1e-10);
}

TEST_CASE("auxiliary functions") {
  const double c = eval_aux({AuxKind::C, 2, 0.5, 0.1}, 1, mu);
  const double b = eval_aux({AuxKind::b, 2, 0.5, 0.1}, 1, mu);
  const double bb = eval_aux({AuxKind::B, 2, 0.5, 0.1}, 1, mu);
  CHECK(std::abs(c - (b - bb)) < 1e-12);

  // S against b of the reflected parameters.
  const double lam = 2, sig = 0.3, tau = 0.4, xi = -0.2, x = 1;
  const double s = s_fun(lam, sig, tau, xi, x);
  const double rhs = std::pow(lam, 1.0 / 6) *
                     eval_aux({AuxKind::b, 1 / lam, std::cbrt(lam) * tau,
                               std::pow(lam, 2.0 / 3) * sig - std::pow(lam, 1.0 / 6) * xi},
                              x, mu);
  CHECK(std::abs(s - rhs) < 1e-12);

  CHECK(std::abs(eval_aux({AuxKind::b, 1, 0, 0}, 0, mu) - 0.3550281) < 1e-7);

  // B by brute force.
  const double cinv = stretch_inv(2);
  const double brute = oracle::midpoint(
      [&](double m) { return special::airy_ext(0.5, 0.1 + cinv * m) * special::airy(1 + m); }, 0,
      30, 20000);
  CHECK(std::abs(bb - brute) < 1e-8);
  CHECK_THROWS(eval_aux({AuxKind::B, -1, 0, 0}, 0, mu));
}

TEST_CASE("T kernel") {
  CHECK(t_kernel(0, 0, 0) == doctest::Approx(0.3550281).epsilon(1e-7));
  CHECK(t_kernel(0.5, 0.5, 0.5) == special::airy(0.5));
  CHECK(t_kernel(0.5, 1, 2) == t_kernel(0.5, 2, 1));
  CHECK_THROWS_AS(t_kernel(1, 0.5, 2), DomainError);

  for (double st : {-1.0, 0.0, 2.0}) {
    const auto r = quad::gauss_legendre(100, st, st + 40);
    const auto t = fredholm::discretize([&](double x, double y) { return t_kernel(st, x, y); }, r);
    const auto k = fredholm::discretize([](double x, double y) { return airy_kernel_closed(x, y); }, r);
    CHECK((t.matrix() * t.matrix() - k.matrix()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("scalar-product identities") {
  // K^{(-t1,t2)}(s+x1, s+x2) = c^- <S_{-t1,x1}, S_{t2,x2}> and the reflected counterpart.
  for (double lam : {0.5, 2.0})
    for (double sig : {-0.5, 0.5})
      for (double tau : {-0.5, 0.5})
        for (double xi : {-1.0, 1.0}) {
          const double t1 = tau, t2 = -0.5 * tau, x1 = xi, x2 = 0.3 - xi;
          const double st = sigma_tilde(TacnodeParams(lam, sig));
          const double lhs = airy_kernel_ext(-t1, t2, sig + x1, sig + x2, mu);
          const double rhs =
              stretch_inv(lam) * inner(st, [&](double x) { return s_fun(lam, sig, -t1, x1, x); },
                                       [&](double x) { return s_fun(lam, sig, t2, x2, x); });
          CHECK(std::abs(lhs - rhs) <= 1e-7);

          const double l3 = std::cbrt(lam), l6 = std::pow(lam, 1.0 / 6), s2 = std::pow(lam, 2.0 / 3) * sig;
          const double lhs2 = airy_kernel_ext(-l3 * t1, l3 * t2, s2 - l6 * x1, s2 - l6 * x2, mu);
          const double rhs2 =
              stretch(lam) * inner(st, [&](double x) { return s_fun(1 / lam, s2, -l3 * t1, -l6 * x1, x); },
                                   [&](double x) { return s_fun(1 / lam, s2, l3 * t2, -l6 * x2, x); });
          CHECK(std::abs(lhs2 - rhs2) <= 1e-7);
        }
}

TEST_CASE("mu rule envelope") {
  CHECK(mu_rule_for(-3).size() == mu.size());
  CHECK(mu_rule_for(-10).size() > mu.size());
  CHECK_THROWS_AS(mu_rule_for(-16), EnvelopeError);
}

TEST_CASE("C as reflected S minus T S") {
  const double lam = 2, sig = 0.3, tau = 0.4, xi = -0.2;
  const double st = sigma_tilde(TacnodeParams(lam, sig));
  const double l3 = std::cbrt(lam), l6 = std::pow(lam, 1.0 / 6), s2 = std::pow(lam, 2.0 / 3) * sig;
  for (double x : {st, st + 0.5, st + 2}) {
    const double c = eval_aux({AuxKind::C, lam, tau, sig + xi}, x, mu);
    const double ts = inner(st, [&](double y) { return t_kernel(st, x, y); },
                            [&](double y) { return s_fun(lam, sig, tau, xi, y); });
    CHECK(std::abs(c - (l6 * s_fun(1 / lam, s2, l3 * tau, -l6 * xi, x) - ts)) < 1e-8);
  }
}
