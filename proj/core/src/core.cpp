#include "ldpr/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "ldpr/errors.hpp"

namespace ldpr {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParameterError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParameterError("invalid ISO-8601 date '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), "year");
  const int m = parse_int(text.substr(5, 2), "month");
  const int d = parse_int(text.substr(8, 2), "day");
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParameterError("invalid calendar date '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::WindSpeed:
      return "wind_speed";
    case Variable::Temperature:
      return "temperature";
  }
  return "unknown";
}

Variable parse_variable(std::string_view name) {
  if (name == "wind_speed") return Variable::WindSpeed;
  if (name == "temperature") return Variable::Temperature;
  throw ParameterError("unknown variable '" + std::string(name) + "'");
}

bool is_nonnegative(Variable v) { return v == Variable::WindSpeed; }

std::string describe(const MarginIndex& m) {
  return m.station + "/" + std::string(to_string(m.variable)) + "/+" +
         std::to_string(m.lead_hours) + "h";
}

MarginCatalog::MarginCatalog(std::vector<MarginIndex> margins) : margins_(std::move(margins)) {
  for (std::size_t i = 0; i < margins_.size(); ++i) {
    if (margins_[i].lead_hours < 0) {
      throw SchemaError("negative lead time for margin " + describe(margins_[i]));
    }
    if (!lookup_.emplace(margins_[i], i).second) {
      throw SchemaError("duplicate margin " + describe(margins_[i]));
    }
  }
}

std::size_t MarginCatalog::index_of(const MarginIndex& m) const {
  auto it = lookup_.find(m);
  if (it == lookup_.end()) throw LookupError("unknown margin " + describe(m));
  return it->second;
}

bool MarginCatalog::contains(const MarginIndex& m) const { return lookup_.count(m) != 0; }

std::vector<std::string> MarginCatalog::stations() const {
  std::vector<std::string> out;
  for (const auto& m : margins_) {
    if (std::find(out.begin(), out.end(), m.station) == out.end()) out.push_back(m.station);
  }
  return out;
}

void validate(const EnsembleForecast& forecast) {
  if (!forecast.catalog) throw SchemaError("forecast without margin catalog");
  if (forecast.members.rows() < 2) throw SchemaError("ensemble needs at least two members");
  if (forecast.members.cols() < 1 ||
      static_cast<std::size_t>(forecast.members.cols()) != forecast.catalog->size()) {
    throw SchemaError("forecast width does not match the margin catalog");
  }
  for (Eigen::Index l = 0; l < forecast.members.cols(); ++l) {
    const MarginIndex& margin = (*forecast.catalog)[static_cast<std::size_t>(l)];
    for (Eigen::Index m = 0; m < forecast.members.rows(); ++m) {
      const double v = forecast.members(m, l);
      if (!std::isfinite(v)) {
        throw SchemaError("non-finite forecast value for " + describe(margin) + " on " +
                          format_date(forecast.valid_date));
      }
      if (is_nonnegative(margin.variable) && v < 0.0) {
        throw SchemaError("negative forecast value for " + describe(margin) + " on " +
                          format_date(forecast.valid_date));
      }
    }
  }
}

void validate(const Observation& observation, const MarginCatalog& catalog) {
  if (static_cast<std::size_t>(observation.values.size()) != catalog.size()) {
    throw SchemaError("observation length does not match the margin catalog");
  }
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    const double v = observation.values[static_cast<Eigen::Index>(l)];
    if (!std::isfinite(v)) {
      throw SchemaError("non-finite observation for " + describe(catalog[l]) + " on " +
                        format_date(observation.valid_date));
    }
    if (is_nonnegative(catalog[l].variable) && v < 0.0) {
      throw SchemaError("negative observation for " + describe(catalog[l]) + " on " +
                        format_date(observation.valid_date));
    }
  }
}

Dataset::Dataset(CatalogPtr catalog, std::vector<Instance> instances)
    : catalog_(std::move(catalog)), instances_(std::move(instances)) {
  if (!catalog_) throw SchemaError("dataset without margin catalog");
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const Instance& inst = instances_[i];
    if (inst.forecast.catalog != catalog_ && !(*inst.forecast.catalog == *catalog_)) {
      throw SchemaError("instance " + format_date(inst.forecast.valid_date) +
                        " uses a different margin catalog");
    }
    if (inst.forecast.valid_date != inst.observation.valid_date) {
      throw SchemaError("forecast and observation dates differ");
    }
    if (i > 0 && !(instances_[i - 1].forecast.valid_date < inst.forecast.valid_date)) {
      throw SchemaError("instance dates must be strictly increasing");
    }
    if (i > 0 && inst.forecast.members.rows() != instances_[0].forecast.members.rows()) {
      throw SchemaError("inconsistent ensemble size on " + format_date(inst.forecast.valid_date));
    }
    validate(inst.forecast);
    validate(inst.observation, *catalog_);
  }
}

Eigen::Index Dataset::member_count() const {
  return instances_.empty() ? 0 : instances_.front().forecast.members.rows();
}

Climatology fit_climatology(const Dataset& dataset, std::size_t count) {
  if (dataset.empty()) throw EmptyDatasetError("climatology of an empty dataset");
  const std::size_t n = (count == 0 || count > dataset.size()) ? dataset.size() : count;
  std::vector<Observation> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) obs.push_back(dataset[i].observation);
  return fit_climatology(dataset.catalog(), obs);
}

Climatology fit_climatology(const CatalogPtr& catalog, std::span<const Observation> observations) {
  if (observations.empty()) throw EmptyDatasetError("climatology of an empty dataset");
  const std::size_t n = observations.size();
  if (n < 2) throw DegenerateClimatologyError("climatology needs at least two observations");
  const auto L = static_cast<Eigen::Index>(catalog->size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(L);
  for (const auto& o : observations) mean += o.values;
  mean /= static_cast<double>(n);

  Eigen::VectorXd ss = Eigen::VectorXd::Zero(L);
  for (const auto& o : observations) ss += (o.values - mean).array().square().matrix();
  Eigen::VectorXd sd = (ss / static_cast<double>(n - 1)).array().sqrt().matrix();
  for (Eigen::Index l = 0; l < L; ++l) {
    if (!(sd[l] > 0.0)) {
      throw DegenerateClimatologyError("zero observed variance for margin " +
                                       describe((*catalog)[static_cast<std::size_t>(l)]));
    }
  }
  return Climatology{catalog, std::move(mean), std::move(sd)};
}

double standardize(double value, const MarginIndex& margin, const Climatology& clim) {
  const auto l = static_cast<Eigen::Index>(clim.catalog->index_of(margin));
  return (value - clim.mean[l]) / clim.stddev[l];
}

double destandardize(double value, const MarginIndex& margin, const Climatology& clim) {
  const auto l = static_cast<Eigen::Index>(clim.catalog->index_of(margin));
  return value * clim.stddev[l] + clim.mean[l];
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& values, const Climatology& clim) {
  if (values.cols() != clim.mean.size()) {
    throw ParameterError("standardize_columns: width does not match climatology");
  }
  return ((values.rowwise() - clim.mean.transpose()).array().rowwise() /
          clim.stddev.transpose().array())
      .matrix();
}

Eigen::VectorXd standardize_vector(const Eigen::VectorXd& values, const Climatology& clim) {
  if (values.size() != clim.mean.size()) {
    throw ParameterError("standardize_vector: length does not match climatology");
  }
  return ((values - clim.mean).array() / clim.stddev.array()).matrix();
}

std::span<const Instance> training_window(const Dataset& dataset, Date target_date,
                                          std::size_t window_days) {
  if (window_days < 1) throw ParameterError("training window must be at least one instance");
  const auto& inst = dataset.instances();
  auto end = std::lower_bound(inst.begin(), inst.end(), target_date,
                              [](const Instance& i, Date d) { return i.forecast.valid_date < d; });
  const auto available = static_cast<std::size_t>(end - inst.begin());
  if (available < window_days) throw InsufficientTrainingError(available, window_days);
  return {inst.data() + (available - window_days), window_days};
}

std::string_view to_string(PostprocessorKind kind) {
  switch (kind) {
    case PostprocessorKind::UnivariateNormal:
      return "univariate-normal";
    case PostprocessorKind::UnivariateTruncatedNormal:
      return "univariate-truncated-normal";
    case PostprocessorKind::BivariateTruncatedNormal:
      return "bivariate-truncated-normal";
  }
  return "unknown";
}

void validate(const CasePartition& partition, const MarginCatalog& catalog) {
  std::vector<int> seen(catalog.size(), 0);
  std::size_t total = 0;
  for (const Case& c : partition.cases) {
    const bool bivariate = c.kind == PostprocessorKind::BivariateTruncatedNormal;
    if (bivariate && c.margins.size() != 2) {
      throw ParameterError("bivariate case must have exactly two margins");
    }
    if (!bivariate && c.margins.size() != 1) {
      throw ParameterError("univariate case must have exactly one margin");
    }
    for (std::size_t idx : c.margins) {
      if (idx >= catalog.size()) throw ParameterError("case margin index out of range");
      if (seen[idx]++) throw ParameterError("margin " + describe(catalog[idx]) + " in two cases");
    }
    total += c.margins.size();
    if (bivariate && (catalog[c.margins[0]].variable != Variable::WindSpeed ||
                      catalog[c.margins[1]].variable != Variable::Temperature)) {
      throw ParameterError("bivariate case must list (wind_speed, temperature)");
    }
    if (c.kind == PostprocessorKind::UnivariateTruncatedNormal &&
        !is_nonnegative(catalog[c.margins[0]].variable)) {
      throw ParameterError("truncated-normal case on a signed variable " +
                           describe(catalog[c.margins[0]]));
    }
  }
  if (total != catalog.size()) throw ParameterError("cases do not cover every margin");
}

CasePartition univariate_partition(const MarginCatalog& catalog) {
  CasePartition p;
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    p.cases.push_back({{l},
                       is_nonnegative(catalog[l].variable) ? PostprocessorKind::UnivariateTruncatedNormal
                                                           : PostprocessorKind::UnivariateNormal});
  }
  return p;
}

CasePartition bivariate_partition(const MarginCatalog& catalog) {
  CasePartition p;
  std::vector<bool> used(catalog.size(), false);
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    if (used[l] || catalog[l].variable != Variable::WindSpeed) continue;
    MarginIndex partner = catalog[l];
    partner.variable = Variable::Temperature;
    if (!catalog.contains(partner)) continue;
    const std::size_t t = catalog.index_of(partner);
    used[l] = used[t] = true;
    p.cases.push_back({{l, t}, PostprocessorKind::BivariateTruncatedNormal});
  }
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    if (used[l]) continue;
    p.cases.push_back({{l},
                       is_nonnegative(catalog[l].variable) ? PostprocessorKind::UnivariateTruncatedNormal
                                                           : PostprocessorKind::UnivariateNormal});
  }
  return p;
}

}  // namespace ldpr
