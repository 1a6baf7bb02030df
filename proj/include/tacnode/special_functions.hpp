#pragma once

namespace tacnode::special {

/// Airy function Ai(x). Underflows smoothly to 0 for large positive x.
double airy(double x);

/// Derivative Ai'(x).
double airy_prime(double x);

/// Extended Airy function Ai^{(s)}(x) = exp(2/3 s^3 + x s) Ai(s^2 + x),
/// evaluated in log space. RangeError if the result overflows.
double airy_ext(double s, double x);

/// Heat kernel p(t; x, y) = (4 pi t)^{-1/2} exp(-(y-x)^2 / (4t)).
double gauss_kernel(double t, double x, double y);

/// Conjugated Brownian kernel q(s,u,t,v); zero unless s < t.
double brownian_q(double s, double u, double t, double v);

}  // namespace tacnode::special
