#pragma once

namespace delaydecay {

// Standard normal cdf, accurate over the full double range including far tails.
double std_normal_cdf(double x);

// log of the standard normal cdf; usable far into the left tail where the cdf
// itself underflows (e.g. x = -1e4).
double log_std_normal_cdf(double x);

// Standard normal density.
double std_normal_pdf(double x);

// pdf(x) / cdf(x), the inverse Mills ratio, stable for large negative x.
double normal_cdf_ratio(double x);

namespace detail {

// Rational Chebyshev approximations for the error function family.
// mode 0: erf(x), mode 1: erfc(x), mode 2: exp(x^2) * erfc(x).
double erf_core(double x, int mode);

} // namespace detail

} // namespace delaydecay
