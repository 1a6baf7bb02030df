#include "tacnode/special_functions.hpp"

#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "tacnode/errors.hpp"

namespace tacnode::special {
namespace {

// Beyond this Ai(x) < 1e-300 and Boost would raise an underflow.
constexpr double kUnderflowArg = 104.0;

void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) throw DomainError(std::string(who) + ": non-finite argument");
}

// log Ai(z) + zeta for z > kUnderflowArg, zeta = (2/3) z^{3/2}, from the large-argument
// expansion; zeta > 700 there, so four correction terms are below double precision.
double log_airy_large_plus_zeta(double z) {
  const double zeta = (2.0 / 3.0) * z * std::sqrt(z);
  double u = 1.0, term = 1.0, series = 1.0;
  for (int k = 1; k <= 4; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    term = -term / zeta;
    series += u * term;
  }
  return -std::log(2.0 * std::sqrt(std::numbers::pi)) - 0.25 * std::log(z) + std::log(series);
}

}  // namespace

double airy(double x) {
  require_finite(x, "airy");
  if (x > kUnderflowArg) return 0.0;
  return boost::math::airy_ai(x);
}

double airy_prime(double x) {
  require_finite(x, "airy_prime");
  if (x > kUnderflowArg) return -0.0;
  return boost::math::airy_ai_prime(x);
}

double airy_ext(double s, double x) {
  require_finite(s, "airy_ext");
  require_finite(x, "airy_ext");
  const double arg = s * s + x;
  double prefactor = (2.0 / 3.0) * s * s * s + x * s;
  double log_ai = 0.0, sign = 1.0;
  if (arg > kUnderflowArg) {
    const double r = std::sqrt(arg);
    // For s > 0, (2/3)s^3 + xs - (2/3)r^3 = -x^2 (s + 2r) / (3 (s + r)^2) without cancellation.
    prefactor = s > 0.0 ? -x * x * (s + 2.0 * r) / (3.0 * (s + r) * (s + r))
                        : prefactor - (2.0 / 3.0) * arg * r;
    log_ai = log_airy_large_plus_zeta(arg);
  } else {
    const double ai = airy(arg);
    if (ai == 0.0) return 0.0;
    log_ai = std::log(std::abs(ai));
    sign = ai < 0.0 ? -1.0 : 1.0;
  }
  const double log_mag = prefactor + log_ai;
  if (log_mag > std::log(std::numeric_limits<double>::max())) {
    throw RangeError("airy_ext: exponent overflow");
  }
  return sign * std::exp(log_mag);
}

double gauss_kernel(double t, double x, double y) {
  if (!(t > 0.0)) throw DomainError("gauss_kernel: t must be positive");
  const double diff = y - x;
  return std::exp(-diff * diff / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

double brownian_q(double s, double u, double t, double v) {
  if (!(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0)) {
    throw DomainError("brownian_q: times must lie in (0,1)");
  }
  if (s >= t) return 0.0;
  const double dt = t - s;
  const double expo = -(u - v) * (u - v) / (2.0 * dt) + u * u / (2.0 * (1.0 - s)) -
                      v * v / (2.0 * (1.0 - t));
  return std::exp(expo) / std::sqrt(2.0 * std::numbers::pi * dt);
}

}  // namespace tacnode::special
