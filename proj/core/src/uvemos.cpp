#include "ldpr/uvemos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ldpr/dataset_io.hpp"
#include "ldpr/normal.hpp"
#include "ldpr/scoring.hpp"

namespace ldpr {

std::string_view to_string(UnivariateFamily family) {
  return family == UnivariateFamily::Normal ? "normal" : "truncated_normal";
}

double cdf(const UnivariatePredictive& dist, double x) {
  if (dist.family == UnivariateFamily::Normal) {
    return normal_cdf((x - dist.location) / dist.scale);
  }
  return truncnormal_cdf(dist.location, dist.scale, x);
}

double quantile(const UnivariatePredictive& dist, double u) {
  if (dist.family == UnivariateFamily::Normal) {
    return dist.location + dist.scale * normal_quantile(u);
  }
  return truncnormal_quantile(dist.location, dist.scale, u);
}

double crps(const UnivariatePredictive& dist, double y) {
  return dist.family == UnivariateFamily::Normal ? crps_normal(dist.location, dist.scale, y)
                                                 : crps_truncnormal(dist.location, dist.scale, y);
}

namespace {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // denominator M
};

// Statistics from the sorted members so they do not depend on member order.
Summary summarize(const Eigen::VectorXd& members) {
  std::vector<double> v(members.data(), members.data() + members.size());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(v.size())};
}

struct Layout {
  bool exchangeable;
  bool nonnegative_b;
  Eigen::Index members;

  Eigen::Index size() const { return exchangeable ? 4 : members + 3; }

  UnivariateEmosParams decode(const Eigen::VectorXd& theta, UnivariateFamily family) const {
    UnivariateEmosParams p;
    p.family = family;
    p.exchangeable = exchangeable;
    p.a = theta[0];
    if (exchangeable) {
      const double total = nonnegative_b ? theta[1] * theta[1] : theta[1];
      p.b = Eigen::VectorXd::Constant(members, total / static_cast<double>(members));
    } else {
      p.b = theta.segment(1, members);
      if (nonnegative_b) p.b = p.b.array().square().matrix();
    }
    const Eigen::Index k = size();
    p.c = theta[k - 2] * theta[k - 2];
    p.d = theta[k - 1] * theta[k - 1];
    return p;
  }
};

}  // namespace

UnivariateFit fit_univariate_emos(std::span<const UnivariateTrainingPoint> training,
                                  UnivariateFamily family, bool exchangeable,
                                  const UnivariateFitOptions& options) {
  if (training.size() < std::max<std::size_t>(options.min_training, 1)) {
    throw InsufficientTrainingError(training.size(), options.min_training);
  }
  const Eigen::Index m = training.front().members.size();
  if (m < 1) throw ParameterError("univariate EMOS: empty ensemble");

  std::vector<Summary> stats;
  stats.reserve(training.size());
  bool constant_obs = true;
  bool constant_members = true;
  for (const auto& pt : training) {
    if (pt.members.size() != m) throw ParameterError("univariate EMOS: ensemble size varies");
    if (!pt.members.allFinite() || !std::isfinite(pt.observation)) {
      throw ParameterError("univariate EMOS: non-finite training data");
    }
    if (family == UnivariateFamily::TruncatedNormal && pt.observation < 0.0) {
      throw ParameterError("univariate EMOS: negative observation for truncated family");
    }
    stats.push_back(summarize(pt.members));
    constant_obs = constant_obs && pt.observation == training.front().observation;
    constant_members = constant_members && stats.back().variance == 0.0;
  }
  if (constant_obs && constant_members) {
    throw DegenerateFitError("univariate EMOS: constant observations and constant ensembles");
  }

  const auto n = static_cast<double>(training.size());
  double resid_mean = 0.0;
  for (std::size_t i = 0; i < training.size(); ++i) resid_mean += training[i].observation - stats[i].mean;
  resid_mean /= n;
  double resid_var = 0.0;
  for (std::size_t i = 0; i < training.size(); ++i) {
    const double r = training[i].observation - stats[i].mean - resid_mean;
    resid_var += r * r;
  }
  resid_var = std::max(resid_var / (n - 1.0), 1e-6);
  const double resid_sd = std::sqrt(resid_var);

  const Layout layout{exchangeable, options.nonnegative_b, m};
  Eigen::VectorXd start(layout.size());
  Eigen::VectorXd step(layout.size());
  start[0] = 0.0;
  step[0] = std::max(0.5 * resid_sd, 0.1);
  if (exchangeable) {
    start[1] = 1.0;
    step[1] = 0.1;
  } else {
    const double b0 = 1.0 / static_cast<double>(m);
    const double coef = options.nonnegative_b ? std::sqrt(b0) : b0;
    start.segment(1, m).setConstant(coef);
    step.segment(1, m).setConstant(0.1 * std::abs(coef));
  }
  const Eigen::Index k = layout.size();
  start[k - 2] = resid_sd;
  step[k - 2] = 0.3 * resid_sd;
  start[k - 1] = 1.0;
  step[k - 1] = 0.3;

  auto objective = [&](const Eigen::VectorXd& theta) {
    const UnivariateEmosParams p = layout.decode(theta, family);
    const double total_b = p.b.sum();
    double sum = 0.0;
    for (std::size_t i = 0; i < training.size(); ++i) {
      const double mu = exchangeable ? p.a + total_b * stats[i].mean : p.a + p.b.dot(training[i].members);
      const double var = p.c + p.d * stats[i].variance;
      if (!(var > 0.0)) return std::numeric_limits<double>::infinity();
      const double sigma = std::sqrt(var);
      sum += family == UnivariateFamily::Normal ? crps_normal(mu, sigma, training[i].observation)
                                                : crps_truncnormal(mu, sigma, training[i].observation);
    }
    return sum / n;
  };

  const OptimResult opt = nelder_mead(objective, start, step, options.optimizer);
  UnivariateFit fit;
  fit.params = layout.decode(opt.x, family);
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.mean_crps = opt.value;
  fit.trace = opt.trace;
  if (!opt.converged) {
    throw UnivariateFitError("univariate EMOS: optimizer did not converge", std::move(fit));
  }
  return fit;
}

UnivariatePredictive predict(const UnivariateEmosParams& params,
                             const Eigen::Ref<const Eigen::VectorXd>& members) {
  if (members.size() != params.b.size()) {
    throw ParameterError("univariate EMOS: member count differs from the fit");
  }
  const double mean = members.mean();
  const double s2 = (members.array() - mean).square().sum() / static_cast<double>(members.size());
  const double var = params.c + params.d * s2;
  if (!(var > 0.0)) throw DegeneratePredictiveError("univariate EMOS: predictive variance is zero");
  return {params.family, params.a + params.b.dot(members), std::sqrt(var)};
}

std::vector<double> sample_q(const UnivariatePredictive& dist, std::size_t n) {
  if (n < 1) throw ParameterError("sample size must be positive");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = quantile(dist, static_cast<double>(i + 1) / static_cast<double>(n + 1));
  }
  return out;
}

std::vector<double> sample_r(const UnivariatePredictive& dist, std::size_t n, Rng& rng) {
  if (n < 1) throw ParameterError("sample size must be positive");
  std::vector<double> out(n);
  for (double& x : out) x = quantile(dist, rng.uniform());
  if (dist.family == UnivariateFamily::TruncatedNormal) {
    for (double& x : out) x = std::max(x, 0.0);
  }
  return out;
}

void write_univariate_params_csv(std::span<const UnivariateParamRecord> records, std::ostream& out) {
  out << "date,station,variable,param,value\n";
  for (const auto& r : records) {
    const std::string prefix =
        format_date(r.date) + ',' + r.margin.station + ',' + std::string(to_string(r.margin.variable)) + ',';
    out << prefix << "a," << format_number(r.params.a) << '\n';
    if (r.params.exchangeable) {
      out << prefix << "b," << format_number(r.params.b.size() ? r.params.b[0] : 0.0) << '\n';
    } else {
      for (Eigen::Index m = 0; m < r.params.b.size(); ++m) {
        out << prefix << "b_" << (m + 1) << ',' << format_number(r.params.b[m]) << '\n';
      }
    }
    out << prefix << "c," << format_number(r.params.c) << '\n';
    out << prefix << "d," << format_number(r.params.d) << '\n';
  }
}

}  // namespace ldpr
