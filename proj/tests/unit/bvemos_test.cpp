#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

#include "emos_truth.hpp"
#include "ldpr/bvemos.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/normal.hpp"
#include "ldpr/scoring.hpp"
#include "oracles.hpp"

namespace ldpr {
namespace {

Eigen::Matrix2d mat(double a, double b, double c, double d) { return (Eigen::Matrix2d() << a, b, c, d).finished(); }

BivariateEmosParams plug_in(Eigen::Index M) {
  BivariateEmosParams p;
  p.B.assign(static_cast<std::size_t>(M), Eigen::Matrix2d::Identity() / static_cast<double>(M));
  return p;
}

TEST(EnsembleCov, Examples) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 2, 2;
  EXPECT_TRUE(ensemble_cov(x).isApprox(mat(2, 2, 2, 2)));
  EXPECT_THROW(ensemble_cov(Eigen::MatrixXd::Zero(1, 2)), ParameterError);
  EXPECT_THROW(ensemble_cov(Eigen::MatrixXd::Zero(3, 3)), ParameterError);
}

TEST(PredictBivariate, Examples) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 4, 2, 5, 6, 3;
  auto p = plug_in(3);
  BivariatePredictive d = predict_bivariate(p, x);
  EXPECT_TRUE(d.mu.isApprox(Eigen::Vector2d(3, 4)));
  EXPECT_TRUE(d.sigma.isApprox(Eigen::Matrix2d::Identity(), 1e-7));

  Eigen::MatrixXd flat(3, 2);
  flat << 1, 1, 1, 1, 1, 1;
  p.C = mat(2, 0.5, 0.5, 1);
  p.D = Eigen::Matrix2d::Identity();
  EXPECT_NEAR((predict_bivariate(p, flat).sigma - p.C).norm(), 0.0, 2e-8);

  p.C.setZero();
  d = predict_bivariate(p, x);
  EXPECT_NEAR((d.sigma - ensemble_cov(x)).norm(), 0.0, 2e-8);
  EXPECT_EQ(d.sigma(0, 1), d.sigma(1, 0));

  p.C = mat(1, 2, 2, 1);
  EXPECT_THROW(predict_bivariate(p, flat), DegeneratePredictiveError);
}

TEST(Acceptance, IsNormalCdf) {
  BivariatePredictive d{Eigen::Vector2d(-4, 0), Eigen::Matrix2d::Identity()};
  EXPECT_NEAR(d.acceptance(), 3.167e-5, 1e-8);
  d.mu[0] = 1.0;
  d.sigma(0, 0) = 4.0;
  EXPECT_NEAR(d.acceptance(), normal_cdf(0.5), 1e-15);
}

TEST(SampleRejection, MeanAndSupport) {
  Rng rng(1);
  const BivariatePredictive d{Eigen::Vector2d(5, 0), Eigen::Matrix2d::Identity()};
  const Eigen::MatrixXd s = sample_rejection(d, 100000, rng);
  ASSERT_EQ(s.rows(), 100000);
  EXPECT_GE(s.col(0).minCoeff(), 0.0);
  EXPECT_NEAR(s.col(0).mean(), 5.0, 0.02);
  EXPECT_NEAR(s.col(1).mean(), 0.0, 0.02);

  Rng a(9), b(9);
  EXPECT_EQ(sample_rejection(d, 10, a), sample_rejection(d, 10, b));
}

TEST(SampleRejection, RefusesLowAcceptance) {
  Rng rng(1);
  const BivariatePredictive d{Eigen::Vector2d(-4, 0), Eigen::Matrix2d::Identity()};
  try {
    sample_rejection(d, 10, rng);
    FAIL() << "expected RejectionRefused";
  } catch (const RejectionRefused& e) {
    EXPECT_NEAR(e.acceptance(), 3.167e-5, 1e-8);
  }
  const Eigen::MatrixXd s = sample_truncated(d, 1000, rng);
  EXPECT_GE(s.col(0).minCoeff(), 0.0);
}

TEST(SampleGibbs, DiagonalIndependence) {
  Rng rng(2);
  const BivariatePredictive d{Eigen::Vector2d(0.5, -1.0), mat(1, 0, 0, 4)};
  const Eigen::MatrixXd s = sample_gibbs(d, 100000, rng);
  EXPECT_GE(s.col(0).minCoeff(), 0.0);
  // Thinned-out autocorrelation is zero under diagonality, so the plain standard error applies.
  EXPECT_NEAR(s.col(1).mean(), -1.0, 4.0 * 2.0 / std::sqrt(100000.0));
  const double cross = ((s.col(0).array() - s.col(0).mean()) * (s.col(1).array() - s.col(1).mean())).mean();
  EXPECT_NEAR(cross, 0.0, 0.03);
}

TEST(SampleGibbs, AgreesWithRejection) {
  Rng rng(3);
  const BivariatePredictive d{Eigen::Vector2d(2, 0), mat(1, 0.5, 0.5, 1)};
  const Eigen::MatrixXd r = sample_rejection(d, 100000, rng);
  const Eigen::MatrixXd g = sample_gibbs(d, 100000, rng);
  EXPECT_NEAR(r.col(0).mean(), g.col(0).mean(), 0.03);
  EXPECT_NEAR(r.col(1).mean(), g.col(1).mean(), 0.03);
  const auto cov = [](const Eigen::MatrixXd& x) { return ensemble_cov(x); };
  EXPECT_LT((cov(r) - cov(g)).norm(), 0.05);
  Rng a(4), b(4);
  EXPECT_EQ(sample_gibbs(d, 50, a, 10, 2), sample_gibbs(d, 50, b, 10, 2));
}

TEST(SampleGibbs, ThinningAndErrors) {
  Rng rng(5);
  const BivariatePredictive d{Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()};
  EXPECT_EQ(sample_gibbs(d, 7, rng, 0, 3).rows(), 7);
  EXPECT_THROW(sample_gibbs(d, 7, rng, 0, 0), ParameterError);
  EXPECT_THROW(sample_gibbs(d, 0, rng), ParameterError);
  EXPECT_THROW(sample_rejection(d, 0, rng), ParameterError);
}

TEST(SampleRejection, MarginalIntervalProbabilities) {
  Rng rng(6);
  const BivariatePredictive d{Eigen::Vector2d(0.7, 1.0), mat(2, -0.6, -0.6, 1)};
  const std::size_t n = 100000;
  const Eigen::MatrixXd s = sample_rejection(d, n, rng);
  const double mu = d.mu[0], sd = std::sqrt(d.sigma(0, 0));
  for (auto [a, b] : {std::pair{0.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}, {2.0, 10.0}}) {
    const double p = oracle::truncated_marginal_prob(mu, sd, a, b);
    const double hat = (s.col(0).array() >= a && s.col(0).array() < b).cast<double>().mean();
    EXPECT_LE(std::abs(hat - p), 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)) + 1e-12) << a << ' ' << b;
  }
}

TEST(BivariateFit, BeatsNaivePlugIn) {
  Rng rng(7);
  const truth::BivariateTruth t;
  const auto set = truth::bivariate_training(t, 100, 10, rng);
  const BivariateFit fit = fit_bivariate_emos(set.points, true);
  EXPECT_TRUE(fit.converged);
  ASSERT_EQ(fit.params.B.size(), 10u);
  for (const auto& b : fit.params.B) EXPECT_EQ(b, fit.params.B[0]);

  auto naive = plug_in(10);
  naive.D = Eigen::Matrix2d::Identity();
  double naive_score = 0.0, fit_score = 0.0;
  for (const auto& p : set.points) {
    const auto nd = predict_bivariate(naive, p.members);
    const auto fd = predict_bivariate(fit.params, p.members);
    naive_score += logscore_bivariate_truncnormal(nd.mu, nd.sigma, p.observation);
    const double ls = logscore_bivariate_truncnormal(fd.mu, fd.sigma, p.observation);
    EXPECT_TRUE(std::isfinite(ls));
    fit_score += ls;
  }
  EXPECT_LE(fit_score, naive_score);
  EXPECT_NEAR(fit_score / 100.0, fit.mean_logscore, 1e-9);
  for (std::size_t i = 1; i < fit.trace.size(); ++i) EXPECT_LE(fit.trace[i], fit.trace[i - 1]);
}

TEST(BivariateFit, RecoversTruth) {
  Rng rng(8);
  const truth::BivariateTruth t;
  const auto set = truth::bivariate_training(t, 500, 20, rng);
  const BivariateFit fit = fit_bivariate_emos(set.points, true);
  EXPECT_LT(truth::bivariate_error(fit.params, t), 0.1);
  // The fitted model must score at least as well as the generating one.
  BivariateEmosParams tp;
  tp.A = t.A;
  tp.B.assign(20, t.B_total / 20.0);
  tp.C = t.C;
  tp.D = t.D;
  double truth_score = 0.0;
  for (const auto& p : set.points) {
    const auto d = predict_bivariate(tp, p.members);
    truth_score += logscore_bivariate_truncnormal(d.mu, d.sigma, p.observation) / 500.0;
  }
  EXPECT_LE(fit.mean_logscore, truth_score);
}

TEST(BivariateFit, PermutationInvariant) {
  Rng rng(9);
  auto set = truth::bivariate_training(truth::BivariateTruth{}, 40, 6, rng);
  const BivariateFit a = fit_bivariate_emos(set.points, true);
  for (auto& p : set.points) p.members = p.members.colwise().reverse().eval();
  const BivariateFit b = fit_bivariate_emos(set.points, true);
  EXPECT_EQ(a.params.A, b.params.A);
  EXPECT_EQ(a.params.C, b.params.C);
  EXPECT_EQ(a.params.D, b.params.D);
}

TEST(BivariateFit, NonExchangeableAndErrors) {
  Rng rng(10);
  const auto set = truth::bivariate_training(truth::BivariateTruth{}, 60, 3, rng);
  BivariateFitOptions opt;
  opt.optimizer.max_iterations = 20000;
  try {
    const BivariateFit fit = fit_bivariate_emos(set.points, false, opt);
    EXPECT_EQ(fit.params.B.size(), 3u);
    EXPECT_FALSE(fit.params.exchangeable);
  } catch (const BivariateFitError& e) {
    FAIL() << e.what();
  }
  const std::span<const BivariateTrainingPoint> few(set.points.data(), 5);
  EXPECT_THROW(fit_bivariate_emos(few, true), InsufficientTrainingError);
  BivariateFitOptions tight;
  tight.optimizer.max_iterations = 3;
  tight.optimizer.max_restarts = 0;
  EXPECT_THROW(fit_bivariate_emos(set.points, true, tight), BivariateFitError);
}

TEST(BivariateParams, CsvDump) {
  BivariateEmosParams p;
  p.A = Eigen::Vector2d(1, 2);
  p.B.assign(2, Eigen::Matrix2d::Identity() * 0.5);
  p.C = mat(1, 0, 0, 1);
  p.D = mat(0, 0, 0, 0);
  const std::vector<BivariateParamRecord> recs{{parse_date("2011-02-03"), "st", p}};
  std::ostringstream out;
  write_bivariate_params_csv(recs, out);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "date,station,param,row,col,value");
  EXPECT_NE(s.find("2011-02-03,st,A,1,1,1\n2011-02-03,st,A,2,1,2\n"), std::string::npos);
  EXPECT_NE(s.find("2011-02-03,st,D,2,2,0\n"), std::string::npos);
}

}  // namespace
}  // namespace ldpr
