#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ldpr/core.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/optimize.hpp"
#include "ldpr/rng.hpp"

namespace ldpr {

enum class UnivariateFamily { Normal, TruncatedNormal };

std::string_view to_string(UnivariateFamily family);

// Predictive law N(a + sum_m b_m x_m, c + d s^2), optionally truncated below
// at zero, where s^2 is the ensemble variance with denominator M.
struct UnivariateEmosParams {
  double a = 0.0;
  Eigen::VectorXd b;  // one coefficient per member; all equal when exchangeable
  double c = 1.0;
  double d = 0.0;
  UnivariateFamily family = UnivariateFamily::Normal;
  bool exchangeable = true;
};

// For the truncated family location/scale are the pre-truncation parameters.
struct UnivariatePredictive {
  UnivariateFamily family = UnivariateFamily::Normal;
  double location = 0.0;
  double scale = 1.0;
};

double cdf(const UnivariatePredictive& dist, double x);
double quantile(const UnivariatePredictive& dist, double u);
double crps(const UnivariatePredictive& dist, double y);

struct UnivariateTrainingPoint {
  Eigen::VectorXd members;
  double observation = 0.0;
};

struct UnivariateFitOptions {
  std::size_t min_training = 10;
  NelderMeadOptions optimizer{};
  // Restrict regression coefficients to b_m >= 0.
  bool nonnegative_b = false;
};

struct UnivariateFit {
  UnivariateEmosParams params;
  bool converged = false;
  std::size_t iterations = 0;
  double mean_crps = 0.0;
  std::vector<double> trace;  // mean training CRPS after each iteration
};

class UnivariateFitError : public Error {
 public:
  UnivariateFitError(const std::string& what, UnivariateFit best)
      : Error(what), best_(std::move(best)) {}
  const UnivariateFit& best() const { return best_; }

 private:
  UnivariateFit best_;
};

// Minimum mean-CRPS estimation over the training set with c = g^2, d = h^2.
UnivariateFit fit_univariate_emos(std::span<const UnivariateTrainingPoint> training,
                                  UnivariateFamily family, bool exchangeable,
                                  const UnivariateFitOptions& options = {});

UnivariatePredictive predict(const UnivariateEmosParams& params,
                             const Eigen::Ref<const Eigen::VectorXd>& members);

// Equally spaced quantiles F^{-1}(i / (N + 1)), ascending.
std::vector<double> sample_q(const UnivariatePredictive& dist, std::size_t n);
// Inverse-CDF transforms of N uniforms from rng.
std::vector<double> sample_r(const UnivariatePredictive& dist, std::size_t n, Rng& rng);

struct UnivariateParamRecord {
  Date date{};
  MarginIndex margin;
  UnivariateEmosParams params;
};

// date,station,variable,param,value
void write_univariate_params_csv(std::span<const UnivariateParamRecord> records, std::ostream& out);

}  // namespace ldpr
