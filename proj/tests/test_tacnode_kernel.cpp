#include <doctest.h>

#include <cmath>

#include "tacnode/errors.hpp"
#include "tacnode/params.hpp"
#include "tacnode/tacnode_kernel.hpp"

using namespace tacnode;

TEST_CASE("kernel: reference values and order doubling") {
  const TacnodeParams p(1, 0);
  const double v = full_kernel(p, {0, 0}, {0, 0});
  CHECK(std::abs(v - 0.11414980962851909) < 1e-9);

  KernelOptions hi;
  hi.resolvent_order = 280;
  hi.mu_order = 240;
  for (auto [lam, sig] : {std::pair{1.0, 0.0}, {2.0, 0.5}, {0.5, -0.5}}) {
    TacnodeKernel k1(TacnodeParams(lam, sig)), k2(TacnodeParams(lam, sig), hi);
    const ScaledPoint a{0.3, -0.2}, b{-0.1, 0.4};
    CHECK(std::abs(k1.value(a, b) - k2.value(a, b)) < 1e-8);
    CHECK(std::abs(k1.value(b, a) - k2.value(b, a)) < 1e-8);
  }
}

TEST_CASE("kernel: alternative assembly agrees") {
  for (auto [lam, sig] : {std::pair{1.0, 0.0}, {2.0, 0.5}, {0.5, -0.5}, {5.0, 1.0}}) {
    TacnodeKernel k(TacnodeParams(lam, sig));
    for (double t1 : {-0.5, 0.2})
      for (double x2 : {-1.0, 0.7}) {
        const ScaledPoint a{t1, 0.3}, b{0.1, x2};
        CHECK(std::abs(k.value(a, b) - k.value_alt(a, b)) < 1e-7);
      }
  }
}

TEST_CASE("kernel: interaction term fades for large sigma") {
  const ScaledPoint a{0.1, 0.2}, b{0.3, -0.1};
  TacnodeKernel k0(TacnodeParams(1, 0)), k4(TacnodeParams(1, 4));
  CHECK(std::abs(k4.l_tac_interaction(0, a, b)) < std::abs(k0.l_tac_interaction(0, a, b)));
  CHECK(std::abs(k4.l_tac_interaction(0, a, b)) < 1e-4);
}

TEST_CASE("kernel: symmetric case is even in space") {
  TacnodeKernel k(TacnodeParams(1, 0.3));
  const ScaledPoint a{0, 0.7}, b{-0.2, 0.0};
  CHECK(std::abs(k.value(a, b) - k.value({0, -0.7}, {-0.2, -0.0})) < 1e-8);
  const ScaledPoint c{-0.3, 0.5}, d{0.4, -1.1};
  CHECK(std::abs(k.value(c, d) - k.value({-0.3, -0.5}, {0.4, 1.1})) < 1e-8);
}

TEST_CASE("kernel: reflection covariance") {
  const TacnodeParams p(2, 0.2);
  const double l6 = std::pow(2.0, 1.0 / 6);
  TacnodeKernel k(p), kr(reflect(p));
  for (auto [a, b] : {std::pair{ScaledPoint{0.1, 0.3}, ScaledPoint{0.1, -0.4}},
                      {ScaledPoint{0.4, -0.2}, ScaledPoint{-0.3, 0.5}},
                      {ScaledPoint{-0.3, 0.2}, ScaledPoint{0.2, 0.6}}}) {
    const double lhs = k.value(a, b);
    const double rhs = l6 * kr.value(reflect_point(2, a), reflect_point(2, b));
    CHECK(std::abs(lhs - rhs) < 1e-7);
  }
}

TEST_CASE("kernel: Gaussian term only for increasing times") {
  TacnodeKernel k(TacnodeParams(1, 0));
  const ScaledPoint a{0.2, 0.1}, b{0.2, -0.3};
  const double tac = k.l_tac(0, a, b) + k.l_tac(1, reflect_point(1, a), reflect_point(1, b));
  CHECK(std::abs(k.value(a, b) - tac) < 1e-14);
  const ScaledPoint c{0.5, -0.3};
  const double tac2 = k.l_tac(0, a, c) + k.l_tac(1, reflect_point(1, a), reflect_point(1, c));
  CHECK(k.value(a, c) < tac2);  // a Gaussian density is subtracted
}

TEST_CASE("kernel: envelope") {
  CHECK_THROWS_AS(full_kernel(TacnodeParams(30, 0), {0, 0}, {0, 0}), EnvelopeError);
  CHECK_THROWS_AS(full_kernel(TacnodeParams(1, 7), {0, 0}, {0, 0}), EnvelopeError);
  CHECK_THROWS_AS(full_kernel(TacnodeParams(1, 0), {6, 0}, {0, 0}), EnvelopeError);
  CHECK_THROWS_AS(full_kernel(TacnodeParams(1, 0), {0, 16}, {0, 0}), EnvelopeError);
  CHECK_THROWS_AS(GapWindow(0, 1, 1), DomainError);
  CHECK_THROWS_AS(GapWindow(0, 2, 1), DomainError);
}

TEST_CASE("gap probability") {
  TacnodeKernel k(TacnodeParams(1, 0));
  CHECK(k.gap_probability({}).value == 1.0);
  const double g1 = k.gap_probability({GapWindow(0, -0.5, 0.5)}, 30).value;
  const double g2 = k.gap_probability({GapWindow(0, -1, 1)}, 30).value;
  const double g3 = k.gap_probability({GapWindow(0, -1, 1), GapWindow(0.5, -1, 1)}, 30).value;
  CHECK(g1 > g2);
  CHECK(g2 > g3);
  CHECK(g3 > 0);
  CHECK(std::abs(g2 - 0.6727) < 1e-4);
  CHECK(std::abs(g2 - k.gap_probability({GapWindow(0, -1, 1)}, 60).value) < 1e-6);
  // Window order does not matter.
  const double g3r = k.gap_probability({GapWindow(0.5, -1, 1), GapWindow(0, -1, 1)}, 30).value;
  CHECK(std::abs(g3 - g3r) < 1e-12);
  CHECK_THROWS_AS(k.gap_probability({GapWindow(0, -1, 1), GapWindow(0, 0, 2)}), DomainError);
}

TEST_CASE("kernel: thread count does not change results") {
  KernelOptions o1, o4;
  o4.threads = 4;
  TacnodeKernel k1(TacnodeParams(2, 0.5), o1), k4(TacnodeParams(2, 0.5), o4);
  const std::vector<GapWindow> w{GapWindow(-0.2, -1, 0.5), GapWindow(0.3, -0.5, 1)};
  CHECK(k1.gap_probability(w, 20).value == k4.gap_probability(w, 20).value);
  CHECK(k1.value({0.1, 0.2}, {0.3, 0.4}) == k4.value({0.1, 0.2}, {0.3, 0.4}));
}
