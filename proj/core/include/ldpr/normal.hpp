#pragma once

// Standard-normal helpers shared by the scoring, EMOS and sampling code.
// Tail quantities are computed in log space so that truncation points far
// in the tail (acceptance probabilities below 1e-15) stay finite.

namespace ldpr {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double z);
double normal_cdf(double z);
// Upper tail 1 - Phi(z), accurate for large z.
double normal_sf(double z);
double log_normal_sf(double z);
double log_normal_cdf(double z);
// Phi^{-1}(p) for p in (0, 1).
double normal_quantile(double p);

// Standard normal restricted to [lower, inf): the u-quantile of the
// conditional law. Accurate on both sides of zero.
double lower_truncated_std_quantile(double lower, double u);

// Normal(mu, sigma^2) truncated below at zero.
double truncnormal_cdf(double mu, double sigma, double x);
double truncnormal_quantile(double mu, double sigma, double u);
double truncnormal_mean(double mu, double sigma);

}  // namespace ldpr
