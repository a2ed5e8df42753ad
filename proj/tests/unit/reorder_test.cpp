#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/reorder.hpp"
#include "ldpr/scoring.hpp"

namespace ldpr {
namespace {

using Row = std::vector<double>;

std::multiset<Row> rows(const Eigen::MatrixXd& m) {
  std::multiset<Row> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Row r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    out.insert(r);
  }
  return out;
}

Eigen::MatrixXd random_points(Rng& rng, Eigen::Index n, Eigen::Index l) {
  Eigen::MatrixXd m(n, l);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < l; ++j) m(i, j) = rng.normal();
  return m;
}

TEST(ReorderUnivariate, Examples) {
  Rng rng(1);
  const std::vector<double> sample{10, 20, 30};
  EXPECT_EQ(reorder_univariate(sample, std::vector<double>{0.2, 0.1, 0.3}, rng), (std::vector<double>{20, 10, 30}));
  EXPECT_EQ(reorder_univariate(std::vector<double>{3, 1, 2}, std::vector<double>{1, 2, 3}, rng),
            (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(reorder_univariate(sample, std::vector<double>{1, 2}, rng), ParameterError);
}

TEST(ReorderUnivariate, PreservesMultiset) {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<double> s(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(5));
      t[i] = static_cast<double>(rng.below(5));
    }
    auto out = reorder_univariate(s, t, rng);
    std::sort(out.begin(), out.end());
    std::sort(s.begin(), s.end());
    EXPECT_EQ(out, s);
  }
}

TEST(ReorderCase, ExampleFromRanks) {
  Rng rng(3);
  Eigen::MatrixXd tmpl(2, 2), sample(2, 2);
  tmpl << 5, 5, 1, 1;      // template ranks (2, 1)
  sample << 9, 9, 0, 0;    // row A has rank 2, row B rank 1
  const Eigen::MatrixXd out = reorder_case(sample, tmpl, {Prerank::Multivariate}, rng);
  EXPECT_EQ(out, sample);
  tmpl << 1, 1, 5, 5;
  EXPECT_EQ(reorder_case(sample, tmpl, {Prerank::Multivariate}, rng), sample.colwise().reverse().eval());
}

TEST(ReorderCase, SelfTemplateIsIdentity) {
  Rng rng(4);
  for (auto p : {Prerank::Multivariate, Prerank::Average, Prerank::SignedEuclidean, Prerank::BandDepth}) {
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::MatrixXd s = random_points(rng, 8, 2);
      const Eigen::VectorXd ch = characteristics(s, {p});
      std::vector<double> v(ch.data(), ch.data() + ch.size());
      std::sort(v.begin(), v.end());
      if (std::adjacent_find(v.begin(), v.end()) != v.end()) continue;
      EXPECT_EQ(reorder_case(s, s, {p}, rng), s);
    }
  }
}

TEST(ReorderCase, SingleColumnMatchesUnivariate) {
  for (int rep = 0; rep < 100; ++rep) {
    Rng data(100 + static_cast<std::uint64_t>(rep));
    const Eigen::MatrixXd s = random_points(data, 9, 1);
    const Eigen::MatrixXd t = random_points(data, 9, 1);
    for (auto p : {Prerank::Multivariate, Prerank::BandDepth, Prerank::SignedEuclidean}) {
      Rng a(1), b(1);
      const Eigen::MatrixXd out = reorder_case(s, t, {p}, a);
      const auto uni = reorder_univariate(std::span(s.data(), 9), std::span(t.data(), 9), b);
      EXPECT_EQ(std::vector<double>(out.data(), out.data() + 9), uni);
    }
  }
}

bool tie_free(const Eigen::VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) == s.end();
}

TEST(ReorderCase, RankConformity) {
  Rng rng(5);
  int checked = 0;
  for (int rep = 0; rep < 600; ++rep) {
    const Eigen::MatrixXd s = random_points(rng, 6, 2);
    const Eigen::MatrixXd t = random_points(rng, 6, 2);
    const RankingKind kind{rep % 3 == 0 ? Prerank::Average : rep % 3 == 1 ? Prerank::BandDepth : Prerank::SignedEuclidean};
    const Eigen::MatrixXd out = reorder_case(s, t, kind, rng);
    EXPECT_EQ(rows(out), rows(s));
    if (!tie_free(characteristics(s, kind)) || !tie_free(characteristics(t, kind))) continue;
    ++checked;
    Rng unused(0);
    const auto tau = rank_characteristics(characteristics(t, kind), unused);
    const auto got = rank_characteristics(characteristics(out, kind), unused);
    EXPECT_EQ(got, tau);
  }
  EXPECT_GE(checked, 50);
}

TEST(ReorderCase, ShapeErrors) {
  Rng rng(6);
  EXPECT_THROW(reorder_case(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 1), {}, rng), ParameterError);
  EXPECT_THROW(reorder_case(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(2, 2), {}, rng), ParameterError);
}

TEST(ReorderCase, ScalingOnlyAffectsCharacteristics) {
  Rng rng(7);
  const Eigen::MatrixXd s = random_points(rng, 6, 2);
  const Eigen::MatrixXd t = random_points(rng, 6, 2);
  const CaseScaling scaling{Eigen::Vector2d(0.1, -0.2), Eigen::Vector2d(2.0, 0.5)};
  Rng a(8);
  const Eigen::MatrixXd out = reorder_case(s, t, {Prerank::SignedEuclidean}, a, &scaling);
  EXPECT_EQ(rows(out), rows(s));
}

TEST(Templates, Ecc) {
  Rng rng(9);
  Dataset ds = fixture::random_dataset(fixture::pair_catalog(), 1, 50, rng);
  std::vector<std::string> warnings;
  const WarningSink sink = [&](std::string_view m) { warnings.emplace_back(m); };
  const DependenceTemplate t = build_template_ecc(ds[0].forecast, sink);
  EXPECT_EQ(t.points, ds[0].forecast.members);
  EXPECT_EQ(t.source, TemplateSource::EccRawEnsemble);
  EXPECT_TRUE(warnings.empty());
  EnsembleForecast ne = ds[0].forecast;
  ne.exchangeable = false;
  build_template_ecc(ne, sink);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(to_string(TemplateSource::EccRawEnsemble), "ecc");
}

TEST(Templates, Schaake) {
  Rng data(10);
  Dataset ds = fixture::random_dataset(fixture::pair_catalog(), 30, 2, data);
  std::vector<Observation> history;
  for (const auto& inst : ds.instances()) history.push_back(inst.observation);

  Rng a(1), b(1);
  const DependenceTemplate t = build_template_schaake(history, 12, a);
  const DependenceTemplate u = build_template_schaake(history, 12, b);
  EXPECT_EQ(t.dates, u.dates);
  EXPECT_EQ(t.points, u.points);
  EXPECT_EQ(t.source, TemplateSource::SchaakeHistorical);
  ASSERT_EQ(t.points.rows(), 12);
  EXPECT_EQ(std::set<Date>(t.dates.begin(), t.dates.end()).size(), 12u);
  for (std::size_t i = 0; i < t.dates.size(); ++i) {
    const auto it = std::find_if(history.begin(), history.end(), [&](const Observation& o) { return o.valid_date == t.dates[i]; });
    ASSERT_NE(it, history.end());
    EXPECT_EQ(t.points.row(static_cast<Eigen::Index>(i)).transpose(), it->values);
  }

  const DependenceTemplate all = build_template_schaake(history, 30, a);
  EXPECT_EQ(std::set<Date>(all.dates.begin(), all.dates.end()).size(), 30u);
  EXPECT_THROW(build_template_schaake(history, 31, a), InsufficientHistoryError);
}

TEST(SamplingSchemeNames, RoundTrip) {
  EXPECT_EQ(parse_sampling_scheme("Q"), SamplingScheme::Q);
  EXPECT_EQ(parse_sampling_scheme(to_string(SamplingScheme::R)), SamplingScheme::R);
  EXPECT_THROW(parse_sampling_scheme("x"), ParameterError);
}

struct Pipeline {
  CatalogPtr cat = fixture::catalog({{Variable::WindSpeed, "a", 24}, {Variable::Temperature, "a", 24},
                                     {Variable::WindSpeed, "b", 24}, {Variable::Temperature, "b", 24}});
  Dataset ds;
  Pipeline() {
    Rng rng(11);
    ds = fixture::random_dataset(cat, 1, 20, rng);
  }
  const EnsembleForecast& raw() const { return ds[0].forecast; }

  static UnivariateEmosParams uv(bool truncated, Eigen::Index M) {
    UnivariateEmosParams p;
    p.b = Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M));
    p.c = 0.5;
    p.d = 1.0;
    p.family = truncated ? UnivariateFamily::TruncatedNormal : UnivariateFamily::Normal;
    return p;
  }
  static BivariateEmosParams bv(Eigen::Index M) {
    BivariateEmosParams p;
    p.B.assign(static_cast<std::size_t>(M), Eigen::Matrix2d::Identity() / static_cast<double>(M));
    p.C << 0.5, 0.2, 0.2, 0.5;
    p.D = Eigen::Matrix2d::Identity();
    return p;
  }
  std::vector<CaseModel> models(const CasePartition& part) const {
    std::vector<CaseModel> out;
    for (const Case& c : part.cases) {
      if (c.kind == PostprocessorKind::BivariateTruncatedNormal) {
        out.emplace_back(bv(20));
      } else {
        out.emplace_back(uv(c.kind == PostprocessorKind::UnivariateTruncatedNormal, 20));
      }
    }
    return out;
  }
};

TEST(LdpReorder, AllUnivariateEccMatchesComposition) {
  Pipeline p;
  const CasePlan plan{univariate_partition(*p.cat), {Prerank::Multivariate}, SamplingScheme::R, 20};
  const auto fitted = p.models(plan.partition);
  const DependenceTemplate t = build_template_ecc(p.raw());
  Rng rng(12);
  const EnsembleForecast out = ldp_reorder(p.raw(), plan, t, fitted, rng);

  Rng again(12);
  const std::uint64_t base = again.next();
  for (std::size_t c = 0; c < plan.partition.cases.size(); ++c) {
    const std::size_t l = plan.partition.cases[c].margins[0];
    const auto& params = std::get<UnivariateEmosParams>(fitted[c]);
    Rng s = Rng::substream(base, {c, 0});
    Rng r = Rng::substream(base, {c, 1});
    const auto draws = sample_r(predict(params, p.raw().members.col(static_cast<Eigen::Index>(l))), 20, s);
    const Eigen::VectorXd tcol = t.points.col(static_cast<Eigen::Index>(l));
    const auto want = reorder_univariate(draws, std::span(tcol.data(), 20), r);
    const Eigen::VectorXd got = out.members.col(static_cast<Eigen::Index>(l));
    EXPECT_EQ(std::vector<double>(got.data(), got.data() + 20), want) << "case " << c;
  }
}

TEST(LdpReorder, BivariateCasesPreserveMarginsAndRanks) {
  Pipeline p;
  const CasePlan plan{bivariate_partition(*p.cat), {Prerank::Multivariate}, SamplingScheme::R, 20};
  ASSERT_EQ(plan.partition.cases.size(), 2u);
  const auto fitted = p.models(plan.partition);
  const DependenceTemplate t = build_template_ecc(p.raw());
  Rng a(13), b(13);
  const EnsembleForecast out = ldp_reorder(p.raw(), plan, t, fitted, a);
  const Eigen::MatrixXd draws = draw_samples(p.raw(), plan, fitted, b);
  for (const Case& c : plan.partition.cases) {
    Eigen::MatrixXd got(20, 2), drawn(20, 2), tmpl(20, 2);
    for (int j = 0; j < 2; ++j) {
      got.col(j) = out.members.col(static_cast<Eigen::Index>(c.margins[static_cast<std::size_t>(j)]));
      drawn.col(j) = draws.col(static_cast<Eigen::Index>(c.margins[static_cast<std::size_t>(j)]));
      tmpl.col(j) = t.points.col(static_cast<Eigen::Index>(c.margins[static_cast<std::size_t>(j)]));
    }
    EXPECT_EQ(rows(got), rows(drawn));
    EXPECT_GE(got.col(0).minCoeff(), 0.0);
  }
  Rng c(13);
  EXPECT_EQ(ldp_reorder(p.raw(), plan, t, fitted, c).members, out.members);
}

TEST(LdpReorder, SingleCaseScoresEqualUnordered) {
  CatalogPtr cat = fixture::pair_catalog();
  Rng data(14);
  Dataset ds = fixture::random_dataset(cat, 1, 15, data);
  CasePartition part;
  part.cases.push_back({{0, 1}, PostprocessorKind::BivariateTruncatedNormal});
  const CasePlan plan{part, {Prerank::Average}, SamplingScheme::R, 15};
  const std::vector<CaseModel> fitted{Pipeline::bv(15)};
  Rng a(15), b(15);
  const EnsembleForecast out = ldp_reorder(ds[0].forecast, plan, build_template_ecc(ds[0].forecast), fitted, a);
  const Eigen::MatrixXd unordered = draw_samples(ds[0].forecast, plan, fitted, b);
  EXPECT_EQ(rows(out.members), rows(unordered));
  const VerificationRecord r1{out.members, ds[0].observation.values, cat};
  const VerificationRecord r2{unordered, ds[0].observation.values, cat};
  EXPECT_NEAR(energy_score(r1), energy_score(r2), 1e-12);
  EXPECT_NEAR(variogram_score_05(r1), variogram_score_05(r2), 1e-12);
}

TEST(LdpReorder, Errors) {
  Pipeline p;
  CasePlan plan{bivariate_partition(*p.cat), {Prerank::Multivariate}, SamplingScheme::Q, 20};
  auto fitted = p.models(plan.partition);
  const DependenceTemplate t = build_template_ecc(p.raw());
  Rng rng(16);
  EXPECT_THROW(ldp_reorder(p.raw(), plan, t, fitted, rng), ParameterError);
  plan.sampling = SamplingScheme::R;
  fitted.pop_back();
  EXPECT_THROW(ldp_reorder(p.raw(), plan, t, fitted, rng), ConfigError);
  fitted = p.models(plan.partition);
  std::swap(fitted[0], fitted[1]);
  fitted[0] = Pipeline::uv(true, 20);
  EXPECT_THROW(ldp_reorder(p.raw(), plan, t, fitted, rng), ConfigError);
  fitted = p.models(plan.partition);
  plan.n = 10;
  EXPECT_THROW(ldp_reorder(p.raw(), plan, t, fitted, rng), ParameterError);

  // Scheme Q is fine for an all-univariate plan.
  const CasePlan q{univariate_partition(*p.cat), {Prerank::Multivariate}, SamplingScheme::Q, 20};
  EXPECT_NO_THROW(ldp_reorder(p.raw(), q, t, p.models(q.partition), rng));
}

}  // namespace
}  // namespace ldpr
