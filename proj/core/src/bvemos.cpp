#include "ldpr/bvemos.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ldpr/dataset_io.hpp"
#include "ldpr/normal.hpp"
#include "ldpr/scoring.hpp"

namespace ldpr {

double BivariatePredictive::acceptance() const { return normal_cdf(mu[0] / std::sqrt(sigma(0, 0))); }

Eigen::Matrix2d ensemble_cov(const Eigen::MatrixXd& members) {
  if (members.cols() != 2) throw ParameterError("ensemble_cov: expected two columns");
  if (members.rows() < 2) throw ParameterError("ensemble_cov: at least two members required");
  const Eigen::RowVector2d mean = members.colwise().mean();
  const Eigen::MatrixXd centered = members.rowwise() - mean;
  Eigen::Matrix2d s = centered.transpose() * centered / static_cast<double>(members.rows() - 1);
  s(1, 0) = s(0, 1);
  return s;
}

namespace {

struct Summary {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
};

// Rows sorted lexicographically first, so the statistics are bitwise
// independent of member order.
Summary summarize(const Eigen::MatrixXd& members) {
  const Eigen::Index m = members.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (members(a, 0) != members(b, 0)) return members(a, 0) < members(b, 0);
    return members(a, 1) < members(b, 1);
  });
  Eigen::MatrixXd sorted(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) sorted.row(i) = members.row(order[static_cast<std::size_t>(i)]);
  return {sorted.colwise().mean().transpose(), ensemble_cov(sorted)};
}

struct Layout {
  bool exchangeable;
  Eigen::Index members;

  Eigen::Index b_count() const { return exchangeable ? 4 : 4 * members; }
  Eigen::Index size() const { return 2 + b_count() + 3 + 4; }

  BivariateEmosParams decode(const Eigen::VectorXd& t) const {
    BivariateEmosParams p;
    p.exchangeable = exchangeable;
    p.A = t.segment<2>(0);
    Eigen::Index k = 2;
    if (exchangeable) {
      // Optimized as the total coefficient M * B.
      Eigen::Matrix2d total;
      total << t[k], t[k + 1], t[k + 2], t[k + 3];
      p.B.assign(static_cast<std::size_t>(members), total / static_cast<double>(members));
      k += 4;
    } else {
      for (Eigen::Index m = 0; m < members; ++m, k += 4) {
        Eigen::Matrix2d b;
        b << t[k], t[k + 1], t[k + 2], t[k + 3];
        p.B.push_back(b);
      }
    }
    Eigen::Matrix2d g;
    g << t[k], 0.0, t[k + 1], t[k + 2];
    p.C = g * g.transpose();
    k += 3;
    p.D << t[k], t[k + 1], t[k + 2], t[k + 3];
    return p;
  }
};

Eigen::Vector2d location(const BivariateEmosParams& p, const Eigen::MatrixXd& members) {
  Eigen::Vector2d mu = p.A;
  for (Eigen::Index m = 0; m < members.rows(); ++m) {
    mu += p.B[static_cast<std::size_t>(m)] * members.row(m).transpose();
  }
  return mu;
}

// -log density of the truncated law; +inf when the scale is not positive definite.
double logscore_unchecked(const Eigen::Vector2d& mu, const Eigen::Matrix2d& s, const Eigen::Vector2d& y) {
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(0, 1);
  if (!(s(0, 0) > 0.0) || !(det > 0.0)) return std::numeric_limits<double>::infinity();
  const double d1 = y[0] - mu[0];
  const double d2 = y[1] - mu[1];
  const double quad = (s(1, 1) * d1 * d1 - 2.0 * s(0, 1) * d1 * d2 + s(0, 0) * d2 * d2) / det;
  return 2.0 * kLogSqrt2Pi + 0.5 * std::log(det) + 0.5 * quad + log_normal_cdf(mu[0] / std::sqrt(s(0, 0)));
}

}  // namespace

BivariateFit fit_bivariate_emos(std::span<const BivariateTrainingPoint> training, bool exchangeable,
                                const BivariateFitOptions& options) {
  if (training.size() < std::max<std::size_t>(options.min_training, 2)) {
    throw InsufficientTrainingError(training.size(), options.min_training);
  }
  const Eigen::Index m = training.front().members.rows();
  if (m < 2) throw ParameterError("bivariate EMOS: at least two members required");

  std::vector<Summary> stats;
  stats.reserve(training.size());
  for (const auto& pt : training) {
    if (pt.members.rows() != m || pt.members.cols() != 2) {
      throw ParameterError("bivariate EMOS: member matrices must all be M x 2");
    }
    if (!pt.members.allFinite() || !pt.observation.allFinite()) {
      throw ParameterError("bivariate EMOS: non-finite training data");
    }
    if (pt.observation[0] < 0.0) throw ParameterError("bivariate EMOS: negative wind observation");
    stats.push_back(summarize(pt.members));
  }

  const auto n = static_cast<double>(training.size());
  Eigen::Vector2d resid_mean = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < training.size(); ++i) resid_mean += training[i].observation - stats[i].mean;
  resid_mean /= n;
  Eigen::Matrix2d resid_cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < training.size(); ++i) {
    const Eigen::Vector2d r = training[i].observation - stats[i].mean - resid_mean;
    resid_cov += r * r.transpose();
  }
  resid_cov /= (n - 1.0);
  resid_cov += 1e-6 * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d g0 = Eigen::LLT<Eigen::Matrix2d>(resid_cov).matrixL();

  const Layout layout{exchangeable, m};
  Eigen::VectorXd start = Eigen::VectorXd::Zero(layout.size());
  Eigen::VectorXd step = Eigen::VectorXd::Constant(layout.size(), 0.1);
  step[0] = std::max(0.5 * std::sqrt(resid_cov(0, 0)), 0.1);
  step[1] = std::max(0.5 * std::sqrt(resid_cov(1, 1)), 0.1);
  Eigen::Index k = 2;
  if (exchangeable) {
    start[k] = 1.0;
    start[k + 3] = 1.0;
    k += 4;
  } else {
    const double b0 = 1.0 / static_cast<double>(m);
    for (Eigen::Index i = 0; i < m; ++i, k += 4) {
      start[k] = b0;
      start[k + 3] = b0;
      step.segment(k, 4).setConstant(0.1 * b0);
    }
  }
  start[k] = g0(0, 0);
  start[k + 1] = g0(1, 0);
  start[k + 2] = g0(1, 1);
  step[k] = 0.3 * g0(0, 0);
  step[k + 1] = 0.3 * std::max(std::abs(g0(1, 0)), 0.5 * g0(1, 1));
  step[k + 2] = 0.3 * g0(1, 1);
  step.segment(k + 3, 4).setConstant(0.5);

  const Eigen::Matrix2d floor = options.scale_floor * Eigen::Matrix2d::Identity();
  auto objective = [&](const Eigen::VectorXd& theta) {
    const BivariateEmosParams p = layout.decode(theta);
    const Eigen::Matrix2d total_b = p.B.front() * static_cast<double>(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < training.size(); ++i) {
      const Eigen::Vector2d mu =
          exchangeable ? Eigen::Vector2d(p.A + total_b * stats[i].mean) : location(p, training[i].members);
      const Eigen::Matrix2d sigma = p.C + p.D * stats[i].cov * p.D.transpose() + floor;
      sum += logscore_unchecked(mu, sigma, training[i].observation);
    }
    return sum / n;
  };

  OptimResult opt = nelder_mead(objective, start, step, options.optimizer);
  if (opt.converged) {
    // D S D' is nearly unchanged when the sign of D's second column flips, so
    // the likelihood has two close modes. Search from the mirrored one too.
    Eigen::VectorXd mirrored = opt.x;
    const Eigen::Index d = layout.size() - 4;  // D stored row-major: d11, d12, d21, d22
    mirrored[d + 1] = -mirrored[d + 1];
    mirrored[d + 3] = -mirrored[d + 3];
    const OptimResult alt = nelder_mead(objective, mirrored, step, options.optimizer);
    std::vector<double> trace = std::move(opt.trace);
    for (double v : alt.trace) trace.push_back(std::min(trace.back(), v));
    const std::size_t iterations = opt.iterations + alt.iterations;
    if (alt.converged && alt.value < opt.value) opt = alt;
    opt.trace = std::move(trace);
    opt.iterations = iterations;
  }
  BivariateFit fit;
  fit.params = layout.decode(opt.x);
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.mean_logscore = opt.value;
  fit.trace = opt.trace;
  if (!std::isfinite(opt.value)) {
    throw DegenerateFitError("bivariate EMOS: fitted scale matrix is singular");
  }
  if (!opt.converged) {
    throw BivariateFitError("bivariate EMOS: optimizer did not converge", std::move(fit));
  }
  return fit;
}

BivariatePredictive predict_bivariate(const BivariateEmosParams& params, const Eigen::MatrixXd& members,
                                      double scale_floor) {
  if (members.cols() != 2 || static_cast<std::size_t>(members.rows()) != params.B.size()) {
    throw ParameterError("bivariate EMOS: member matrix does not match the fit");
  }
  BivariatePredictive out;
  out.mu = location(params, members);
  const Eigen::Matrix2d s = ensemble_cov(members);
  Eigen::Matrix2d sigma = params.C + params.D * s * params.D.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  sigma += scale_floor * Eigen::Matrix2d::Identity();
  const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
  if (!(sigma(0, 0) > 0.0) || !(det > 0.0) || !sigma.allFinite()) {
    throw DegeneratePredictiveError("bivariate EMOS: predictive scale is not positive definite");
  }
  out.sigma = sigma;
  return out;
}

RejectionRefused::RejectionRefused(double acceptance)
    : SamplingError("rejection sampling refused: acceptance probability " + format_number(acceptance)),
      acceptance_(acceptance) {}

Eigen::MatrixXd sample_rejection(const BivariatePredictive& dist, std::size_t n, Rng& rng,
                                 double min_acceptance) {
  if (n < 1) throw ParameterError("sample size must be positive");
  const double p = dist.acceptance();
  if (p < min_acceptance) throw RejectionRefused(p);
  const Eigen::Matrix2d chol = Eigen::LLT<Eigen::Matrix2d>(dist.sigma).matrixL();
  const auto max_attempts = static_cast<std::size_t>(100.0 * static_cast<double>(n) / p) + 1000;

  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 2);
  std::size_t kept = 0;
  for (std::size_t attempt = 0; kept < n; ++attempt) {
    if (attempt >= max_attempts) throw SamplingError("rejection sampling exhausted its attempt budget");
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double x1 = dist.mu[0] + chol(0, 0) * z1;
    if (x1 < 0.0) continue;
    const double x2 = dist.mu[1] + chol(1, 0) * z1 + chol(1, 1) * z2;
    out(static_cast<Eigen::Index>(kept), 0) = x1;
    out(static_cast<Eigen::Index>(kept), 1) = x2;
    ++kept;
  }
  return out;
}

Eigen::MatrixXd sample_gibbs(const BivariatePredictive& dist, std::size_t n, Rng& rng,
                             std::size_t burn_in, std::size_t thinning) {
  if (n < 1) throw ParameterError("sample size must be positive");
  if (thinning < 1) throw ParameterError("thinning must be at least one");
  const double s11 = dist.sigma(0, 0);
  const double s22 = dist.sigma(1, 1);
  const double s12 = dist.sigma(0, 1);
  const double det = s11 * s22 - s12 * s12;
  if (!(s11 > 0.0) || !(det > 0.0)) throw ParameterError("Gibbs sampler: scale not positive definite");

  const double slope1 = s12 / s22;  // E[x1 | x2]
  const double sd1 = std::sqrt(det / s22);
  const double slope2 = s12 / s11;  // E[x2 | x1]
  const double sd2 = std::sqrt(det / s11);

  double x1 = truncnormal_mean(dist.mu[0], std::sqrt(s11));
  double x2 = dist.mu[1] + slope2 * (x1 - dist.mu[0]);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 2);
  const std::size_t total = burn_in + n * thinning;
  std::size_t kept = 0;
  for (std::size_t it = 1; it <= total; ++it) {
    const double m1 = dist.mu[0] + slope1 * (x2 - dist.mu[1]);
    x1 = std::max(truncnormal_quantile(m1, sd1, rng.uniform()), 0.0);
    const double m2 = dist.mu[1] + slope2 * (x1 - dist.mu[0]);
    x2 = m2 + sd2 * rng.normal();
    if (it > burn_in && (it - burn_in) % thinning == 0) {
      out(static_cast<Eigen::Index>(kept), 0) = x1;
      out(static_cast<Eigen::Index>(kept), 1) = x2;
      ++kept;
    }
  }
  return out;
}

Eigen::MatrixXd sample_truncated(const BivariatePredictive& dist, std::size_t n, Rng& rng,
                                 const BivariateSamplerOptions& options) {
  try {
    return sample_rejection(dist, n, rng, options.min_acceptance);
  } catch (const RejectionRefused&) {
    return sample_gibbs(dist, n, rng, options.burn_in, options.thinning);
  }
}

void write_bivariate_params_csv(std::span<const BivariateParamRecord> records, std::ostream& out) {
  out << "date,station,param,row,col,value\n";
  auto matrix = [&](const std::string& prefix, const std::string& name, const auto& mat) {
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        out << prefix << name << ',' << (r + 1) << ',' << (c + 1) << ',' << format_number(mat(r, c)) << '\n';
      }
    }
  };
  for (const auto& rec : records) {
    const std::string prefix = format_date(rec.date) + ',' + rec.station + ',';
    matrix(prefix, "A", rec.params.A);
    if (rec.params.exchangeable) {
      matrix(prefix, "B", rec.params.B.front());
    } else {
      for (std::size_t m = 0; m < rec.params.B.size(); ++m) {
        matrix(prefix, "B_" + std::to_string(m + 1), rec.params.B[m]);
      }
    }
    matrix(prefix, "C", rec.params.C);
    matrix(prefix, "D", rec.params.D);
  }
}

}  // namespace ldpr
