#pragma once

// Independent reference implementations used to check the library.

#include <Eigen/Core>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace ldpr::oracle {

inline double phi_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }
inline double phi_sf(double z) { return boost::math::cdf(boost::math::complement(boost::math::normal(), z)); }

// Adaptive bisection with an absolute error target; relative targets stall
// on segments whose integral is negligible.
template <class F>
double integrate_segment(F& f, double a, double b, double abs_tol, int depth) {
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &error);
  if (error <= abs_tol || depth == 0) return v;
  const double m = 0.5 * (a + b);
  return integrate_segment(f, a, m, 0.5 * abs_tol, depth - 1) + integrate_segment(f, m, b, 0.5 * abs_tol, depth - 1);
}

// Integral of f over [min, max] of the points, split at every point.
template <class F>
double integrate(F f, std::vector<double> points) {
  std::sort(points.begin(), points.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    total += integrate_segment(f, points[i], points[i + 1], 1e-12, 30);
  }
  return total;
}

// CRPS integral of a CDF F: int (F(t) - 1{t >= y})^2 dt over [lo, hi].
template <class Cdf>
double crps_integral(Cdf cdf, double y, double lo, double hi, std::vector<double> breaks) {
  auto f = [&](double t) {
    const double d = cdf(t) - (t >= y ? 1.0 : 0.0);
    return d * d;
  };
  breaks.push_back(lo);
  breaks.push_back(hi);
  breaks.push_back(std::clamp(y, lo, hi));
  std::vector<double> inside;
  for (double b : breaks) inside.push_back(std::clamp(b, lo, hi));
  return integrate(f, inside);
}

inline double crps_normal_quadrature(double mu, double sigma, double y) {
  auto cdf = [&](double t) { return phi_cdf((t - mu) / sigma); };
  const double lo = std::min(mu, y) - 40.0 * sigma;
  const double hi = std::max(mu, y) + 40.0 * sigma;
  return crps_integral(cdf, y, lo, hi, {mu - 3 * sigma, mu, mu + 3 * sigma});
}

inline double crps_truncnormal_quadrature(double mu, double sigma, double y) {
  const double a = -mu / sigma;
  const double mass = phi_sf(a);
  auto cdf = [&](double t) {
    if (t < 0.0) return 0.0;
    return (mass - phi_sf((t - mu) / sigma)) / mass;
  };
  // Scale of the truncated law: sigma, or sigma^2 / |mu| deep in the lower tail.
  const double spread = mu < 0.0 ? std::min(sigma, sigma * sigma / -mu) : sigma;
  const double centre = std::max(mu, 0.0);
  const double hi = std::max(centre, y) + 40.0 * sigma;
  return crps_integral(cdf, y, 0.0, hi,
                       {spread, 3 * spread, 10 * spread, centre - 3 * sigma, centre, centre + 3 * sigma});
}

// Number of points dominated coordinatewise by point n (including itself).
inline Eigen::VectorXd prerank_multivariate(const Eigen::MatrixXd& z) {
  Eigen::VectorXd out(z.rows());
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    int count = 0;
    for (Eigen::Index v = 0; v < z.rows(); ++v) {
      bool below = true;
      for (Eigen::Index l = 0; l < z.cols(); ++l) below = below && z(v, l) <= z(n, l);
      count += below ? 1 : 0;
    }
    out[n] = count;
  }
  return out;
}

inline Eigen::VectorXd prerank_average(const Eigen::MatrixXd& z) {
  Eigen::VectorXd out(z.rows());
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    long count = 0;
    for (Eigen::Index l = 0; l < z.cols(); ++l) {
      for (Eigen::Index v = 0; v < z.rows(); ++v) count += z(v, l) <= z(n, l) ? 1 : 0;
    }
    out[n] = static_cast<double>(count) / static_cast<double>(z.cols());
  }
  return out;
}

// Unordered pairs {i, j}, i != j, whose per-margin range contains point n.
inline Eigen::VectorXd prerank_banddepth(const Eigen::MatrixXd& z) {
  Eigen::VectorXd out(z.rows());
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    long count = 0;
    for (Eigen::Index l = 0; l < z.cols(); ++l) {
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < z.rows(); ++j) {
          const double lo = std::min(z(i, l), z(j, l));
          const double hi = std::max(z(i, l), z(j, l));
          count += (lo <= z(n, l) && z(n, l) <= hi) ? 1 : 0;
        }
      }
    }
    out[n] = static_cast<double>(count) / static_cast<double>(z.cols());
  }
  return out;
}

// Analytic P(a <= X1 <= b) for the first coordinate of the zero-truncated law.
inline double truncated_marginal_prob(double mu, double sigma, double a, double b) {
  const double lo = std::max(a, 0.0);
  if (!(b > lo)) return 0.0;
  const double mass = phi_sf(-mu / sigma);
  return (phi_sf((lo - mu) / sigma) - phi_sf((b - mu) / sigma)) / mass;
}

}  // namespace ldpr::oracle
