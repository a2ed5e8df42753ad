#include "ldpr/normal.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

#include "ldpr/errors.hpp"

namespace ldpr {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double log_normal_sf(double z) {
  if (z < 0.0) return std::log1p(-0.5 * std::erfc(-z / kSqrt2));
  if (z < 25.0) return std::log(0.5 * std::erfc(z / kSqrt2));
  // Mills-ratio asymptotic series; erfc underflows not far beyond here.
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * z * z - std::log(z) - kLogSqrt2Pi + std::log(series);
}

double log_normal_cdf(double z) { return log_normal_sf(-z); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal quantile needs p in (0, 1)");
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double lower_truncated_std_quantile(double lower, double u) {
  if (lower <= 0.0) {
    // Lower-tail form for small u, upper-tail form otherwise, so the
    // argument never rounds to 1.
    if (u <= 0.5) {
      const double lo = normal_cdf(lower);
      return normal_quantile(lo + u * (1.0 - lo));
    }
    return -normal_quantile((1.0 - u) * normal_sf(lower));
  }
  const double log_tail = log_normal_sf(lower);
  if (log_tail > -700.0) {
    // Upper-tail form: Q(z) = (1 - u) Q(lower).
    return -normal_quantile((1.0 - u) * std::exp(log_tail));
  }
  // Beyond double range the conditional law is lower + Exp(lower) to first order.
  return lower - std::log1p(-u) / lower;
}

double truncnormal_cdf(double mu, double sigma, double x) {
  if (x <= 0.0) return 0.0;
  const double lower = -mu / sigma;
  const double z = (x - mu) / sigma;
  if (lower > 0.0) {
    return -std::expm1(log_normal_sf(z) - log_normal_sf(lower));
  }
  return (normal_cdf(z) - normal_cdf(lower)) / normal_sf(lower);
}

double truncnormal_quantile(double mu, double sigma, double u) {
  return mu + sigma * lower_truncated_std_quantile(-mu / sigma, u);
}

double truncnormal_mean(double mu, double sigma) {
  const double lower = -mu / sigma;
  const double hazard = std::exp(-0.5 * lower * lower - kLogSqrt2Pi - log_normal_sf(lower));
  return mu + sigma * hazard;
}

}  // namespace ldpr
