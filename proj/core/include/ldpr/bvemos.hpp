#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldpr/core.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/optimize.hpp"
#include "ldpr/rng.hpp"

namespace ldpr {

// Joint (wind speed, temperature) model: a bivariate normal with location
// A + sum_m B_m x_m and scale C + D S D', first coordinate truncated below at
// zero. S is the ensemble covariance with denominator M - 1.
struct BivariateEmosParams {
  Eigen::Vector2d A = Eigen::Vector2d::Zero();
  std::vector<Eigen::Matrix2d> B;  // one per member; identical when exchangeable
  Eigen::Matrix2d C = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  bool exchangeable = true;
};

struct BivariatePredictive {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();

  // Probability mass of the untruncated law on the support (first coordinate >= 0).
  double acceptance() const;
};

inline constexpr double kScaleFloor = 1e-8;

// Sample covariance of an M x 2 member matrix.
Eigen::Matrix2d ensemble_cov(const Eigen::MatrixXd& members);

struct BivariateTrainingPoint {
  Eigen::MatrixXd members;  // M x 2, columns (wind, temperature)
  Eigen::Vector2d observation = Eigen::Vector2d::Zero();
};

struct BivariateFitOptions {
  std::size_t min_training = 10;
  NelderMeadOptions optimizer{10000, 1e-8, 3};
  double scale_floor = kScaleFloor;
};

struct BivariateFit {
  BivariateEmosParams params;
  bool converged = false;
  std::size_t iterations = 0;
  double mean_logscore = 0.0;
  std::vector<double> trace;
};

class BivariateFitError : public Error {
 public:
  BivariateFitError(const std::string& what, BivariateFit best)
      : Error(what), best_(std::move(best)) {}
  const BivariateFit& best() const { return best_; }

 private:
  BivariateFit best_;
};

// Minimum mean log-score estimation; C = G G' with G lower triangular.
BivariateFit fit_bivariate_emos(std::span<const BivariateTrainingPoint> training, bool exchangeable,
                                const BivariateFitOptions& options = {});

BivariatePredictive predict_bivariate(const BivariateEmosParams& params,
                                      const Eigen::MatrixXd& members,
                                      double scale_floor = kScaleFloor);

// Thrown when the acceptance probability is below the configured threshold;
// callers fall back to the Gibbs sampler.
class RejectionRefused : public SamplingError {
 public:
  explicit RejectionRefused(double acceptance);
  double acceptance() const { return acceptance_; }

 private:
  double acceptance_;
};

// N x 2 draws: untruncated bivariate normal proposals kept when the first
// coordinate is non-negative.
Eigen::MatrixXd sample_rejection(const BivariatePredictive& dist, std::size_t n, Rng& rng,
                                 double min_acceptance = 1e-3);

// Alternating conditional draws; the first coordinate from a normal truncated
// below at zero, the second from an untruncated normal.
Eigen::MatrixXd sample_gibbs(const BivariatePredictive& dist, std::size_t n, Rng& rng,
                             std::size_t burn_in = 100, std::size_t thinning = 1);

struct BivariateSamplerOptions {
  double min_acceptance = 1e-3;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
};

// Rejection sampling, falling back to Gibbs when acceptance is too low.
Eigen::MatrixXd sample_truncated(const BivariatePredictive& dist, std::size_t n, Rng& rng,
                                 const BivariateSamplerOptions& options = {});

struct BivariateParamRecord {
  Date date{};
  std::string station;
  BivariateEmosParams params;
};

// date,station,param,row,col,value (1-based row/col)
void write_bivariate_params_csv(std::span<const BivariateParamRecord> records, std::ostream& out);

}  // namespace ldpr
