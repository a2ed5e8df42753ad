#include "ldpr/reorder.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <string>

#include "ldpr/errors.hpp"

namespace ldpr {

std::string_view to_string(TemplateSource source) {
  return source == TemplateSource::EccRawEnsemble ? "ecc" : "schaake";
}

std::string_view to_string(SamplingScheme scheme) { return scheme == SamplingScheme::Q ? "Q" : "R"; }

SamplingScheme parse_sampling_scheme(std::string_view name) {
  if (name == "Q" || name == "q") return SamplingScheme::Q;
  if (name == "R" || name == "r") return SamplingScheme::R;
  throw ParameterError("unknown sampling scheme '" + std::string(name) + "'");
}

void default_warning_sink(std::string_view message) { std::clog << "warning: " << message << '\n'; }

DependenceTemplate build_template_ecc(const EnsembleForecast& raw, const WarningSink& warn) {
  if (!raw.exchangeable && warn) {
    warn("ECC template built from an ensemble whose members are not exchangeable");
  }
  return {raw.members, TemplateSource::EccRawEnsemble, {}};
}

DependenceTemplate build_template_schaake(std::span<const Observation> history, std::size_t n, Rng& rng) {
  if (n < 1) throw ParameterError("Schaake template size must be positive");
  if (history.size() < n) {
    throw InsufficientHistoryError("Schaake template needs " + std::to_string(n) +
                                   " historical observations, have " + std::to_string(history.size()));
  }
  // Partial Fisher-Yates: the first n slots are a uniform draw without replacement.
  std::vector<std::size_t> pick(history.size());
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);

  const Eigen::Index cols = history.front().values.size();
  DependenceTemplate t;
  t.source = TemplateSource::SchaakeHistorical;
  t.points.resize(static_cast<Eigen::Index>(n), cols);
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& obs = history[pick[i]];
    if (obs.values.size() != cols) throw ParameterError("historical observations differ in length");
    if (!obs.values.allFinite()) throw ParameterError("historical observation has missing values");
    t.points.row(static_cast<Eigen::Index>(i)) = obs.values.transpose();
    t.dates.push_back(obs.valid_date);
  }
  return t;
}

std::vector<double> reorder_univariate(std::span<const double> sample, std::span<const double> template_margin,
                                       Rng& rng) {
  if (sample.size() != template_margin.size()) {
    throw ParameterError("reorder: sample and template lengths differ");
  }
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const Eigen::VectorXd values =
      Eigen::Map<const Eigen::VectorXd>(template_margin.data(), static_cast<Eigen::Index>(template_margin.size()));
  const std::vector<std::size_t> ranks = rank_characteristics(values, rng);
  std::vector<double> out(sorted.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sorted[ranks[i] - 1];
  return out;
}

namespace {

Eigen::VectorXd case_characteristics(const Eigen::MatrixXd& points, const RankingKind& ranking,
                                     const CaseScaling* scaling) {
  if (points.cols() == 1) return points.col(0);
  if (scaling == nullptr) return characteristics(points, ranking);
  const Eigen::MatrixXd scaled =
      (points.rowwise() - scaling->mean.transpose()).array().rowwise() / scaling->stddev.transpose().array();
  return characteristics(scaled, ranking);
}

}  // namespace

Eigen::MatrixXd reorder_case(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& template_case,
                             const RankingKind& ranking, Rng& rng, const CaseScaling* scaling) {
  if (sample.rows() != template_case.rows() || sample.cols() != template_case.cols()) {
    throw ParameterError("reorder: sample and template shapes differ");
  }
  if (sample.rows() < 1 || sample.cols() < 1) throw ParameterError("reorder: empty case");
  if (scaling != nullptr &&
      (scaling->mean.size() != sample.cols() || scaling->stddev.size() != sample.cols())) {
    throw ParameterError("reorder: scaling does not match the case width");
  }
  const auto tau = rank_characteristics(case_characteristics(template_case, ranking, scaling), rng);
  const auto tau_sample = rank_characteristics(case_characteristics(sample, ranking, scaling), rng);

  std::vector<Eigen::Index> row_of_rank(tau_sample.size());
  for (std::size_t i = 0; i < tau_sample.size(); ++i) row_of_rank[tau_sample[i] - 1] = static_cast<Eigen::Index>(i);

  Eigen::MatrixXd out(sample.rows(), sample.cols());
  for (std::size_t n = 0; n < tau.size(); ++n) {
    out.row(static_cast<Eigen::Index>(n)) = sample.row(row_of_rank[tau[n] - 1]);
  }
  return out;
}

void validate(const CasePlan& plan, const MarginCatalog& catalog) {
  validate(plan.partition, catalog);
  if (plan.n < 1) throw ParameterError("case plan: output ensemble size must be positive");
  if (plan.sampling == SamplingScheme::Q) {
    for (const Case& c : plan.partition.cases) {
      if (c.margins.size() > 1) {
        throw ParameterError("case plan: scheme Q is only defined for univariate cases");
      }
    }
  }
}

namespace {

Eigen::MatrixXd columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

std::string case_name(const Case& c, const MarginCatalog& catalog) {
  std::string name;
  for (std::size_t j : c.margins) {
    if (!name.empty()) name += '+';
    name += describe(catalog[j]);
  }
  return name;
}

Eigen::MatrixXd draw_case(const EnsembleForecast& raw, const Case& c, const CaseModel& model,
                          const CasePlan& plan, Rng& rng, const ReorderOptions& options) {
  const MarginCatalog& catalog = *raw.catalog;
  const Eigen::MatrixXd members = columns(raw.members, c.margins);
  const bool bivariate = c.kind == PostprocessorKind::BivariateTruncatedNormal;
  if (bivariate != std::holds_alternative<BivariateEmosParams>(model)) {
    throw ConfigError("fitted model does not match case " + case_name(c, catalog));
  }
  try {
    if (bivariate) {
      const BivariatePredictive dist = predict_bivariate(std::get<BivariateEmosParams>(model), members);
      return sample_truncated(dist, plan.n, rng, options.sampler);
    }
    const auto& params = std::get<UnivariateEmosParams>(model);
    const bool truncated = c.kind == PostprocessorKind::UnivariateTruncatedNormal;
    if (truncated != (params.family == UnivariateFamily::TruncatedNormal)) {
      throw ConfigError("fitted family does not match case " + case_name(c, catalog));
    }
    const UnivariatePredictive dist = predict(params, members.col(0));
    const std::vector<double> draws =
        plan.sampling == SamplingScheme::Q ? sample_q(dist, plan.n) : sample_r(dist, plan.n, rng);
    return Eigen::Map<const Eigen::VectorXd>(draws.data(), static_cast<Eigen::Index>(draws.size()));
  } catch (const SamplingError& e) {
    throw SamplingError("case " + case_name(c, catalog) + ": " + e.what());
  }
}

void check_inputs(const EnsembleForecast& raw, const CasePlan& plan, std::span<const CaseModel> fitted) {
  if (!raw.catalog) throw ParameterError("raw forecast has no catalog");
  validate(plan, *raw.catalog);
  if (fitted.size() != plan.partition.cases.size()) {
    throw ConfigError("expected fitted parameters for " + std::to_string(plan.partition.cases.size()) +
                      " cases, got " + std::to_string(fitted.size()));
  }
}

}  // namespace

Eigen::MatrixXd draw_samples(const EnsembleForecast& raw, const CasePlan& plan,
                             std::span<const CaseModel> fitted, Rng& rng, const ReorderOptions& options) {
  check_inputs(raw, plan, fitted);
  const std::uint64_t base = rng.next();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(plan.n), raw.members.cols());
  for (std::size_t ci = 0; ci < plan.partition.cases.size(); ++ci) {
    const Case& c = plan.partition.cases[ci];
    Rng sampling = Rng::substream(base, {ci, 0});
    const Eigen::MatrixXd draws = draw_case(raw, c, fitted[ci], plan, sampling, options);
    for (std::size_t j = 0; j < c.margins.size(); ++j) {
      out.col(static_cast<Eigen::Index>(c.margins[j])) = draws.col(static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

EnsembleForecast ldp_reorder(const EnsembleForecast& raw, const CasePlan& plan,
                             const DependenceTemplate& dependence, std::span<const CaseModel> fitted,
                             Rng& rng, const ReorderOptions& options) {
  check_inputs(raw, plan, fitted);
  if (static_cast<std::size_t>(dependence.points.rows()) != plan.n ||
      dependence.points.cols() != raw.members.cols()) {
    throw ParameterError("dependence template must be N x L");
  }
  if (dependence.source == TemplateSource::EccRawEnsemble && dependence.points.rows() != raw.members.rows()) {
    throw ParameterError("ECC template requires N equal to the raw ensemble size");
  }
  if (!dependence.points.allFinite()) throw ParameterError("dependence template has non-finite values");
  const bool scale = options.climatology != nullptr && plan.ranking.prerank == Prerank::SignedEuclidean;
  if (scale && options.climatology->mean.size() != raw.members.cols()) {
    throw ParameterError("climatology does not match the forecast catalog");
  }

  const std::uint64_t base = rng.next();
  EnsembleForecast out;
  out.valid_date = raw.valid_date;
  out.catalog = raw.catalog;
  out.exchangeable = true;
  out.members.resize(static_cast<Eigen::Index>(plan.n), raw.members.cols());
  for (std::size_t ci = 0; ci < plan.partition.cases.size(); ++ci) {
    const Case& c = plan.partition.cases[ci];
    Rng sampling = Rng::substream(base, {ci, 0});
    Rng ranking = Rng::substream(base, {ci, 1});
    const Eigen::MatrixXd draws = draw_case(raw, c, fitted[ci], plan, sampling, options);
    CaseScaling scaling;
    if (scale) {
      scaling.mean.resize(static_cast<Eigen::Index>(c.margins.size()));
      scaling.stddev.resize(static_cast<Eigen::Index>(c.margins.size()));
      for (std::size_t j = 0; j < c.margins.size(); ++j) {
        scaling.mean[static_cast<Eigen::Index>(j)] = options.climatology->mean[static_cast<Eigen::Index>(c.margins[j])];
        scaling.stddev[static_cast<Eigen::Index>(j)] = options.climatology->stddev[static_cast<Eigen::Index>(c.margins[j])];
      }
    }
    const Eigen::MatrixXd ordered =
        reorder_case(draws, columns(dependence.points, c.margins), plan.ranking, ranking, scale ? &scaling : nullptr);
    for (std::size_t j = 0; j < c.margins.size(); ++j) {
      out.members.col(static_cast<Eigen::Index>(c.margins[j])) = ordered.col(static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

}  // namespace ldpr
