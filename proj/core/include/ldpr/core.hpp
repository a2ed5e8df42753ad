#pragma once

#include <Eigen/Core>
#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ldpr {

using Date = std::chrono::sys_days;

Date parse_date(std::string_view text);
std::string format_date(Date date);

enum class Variable { WindSpeed, Temperature };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view name);
// Quantities that cannot be negative (and are truncated at zero when modelled).
bool is_nonnegative(Variable v);

struct MarginIndex {
  Variable variable = Variable::Temperature;
  std::string station;
  int lead_hours = 0;

  // Canonical margin order: station, then variable, then lead time. Putting
  // wind before temperature makes each station's block (wind, temperature).
  auto operator<=>(const MarginIndex& other) const {
    if (auto c = station <=> other.station; c != 0) return c;
    if (auto c = variable <=> other.variable; c != 0) return c;
    return lead_hours <=> other.lead_hours;
  }
  bool operator==(const MarginIndex&) const = default;
};

std::string describe(const MarginIndex& m);

// Ordered list of margins with O(log L) lookup. Shared (immutable) between
// every forecast and observation of a dataset.
class MarginCatalog {
 public:
  MarginCatalog() = default;
  explicit MarginCatalog(std::vector<MarginIndex> margins);

  std::size_t size() const { return margins_.size(); }
  const MarginIndex& operator[](std::size_t i) const { return margins_[i]; }
  const std::vector<MarginIndex>& margins() const { return margins_; }
  // Throws LookupError for unknown margins.
  std::size_t index_of(const MarginIndex& m) const;
  bool contains(const MarginIndex& m) const;
  std::vector<std::string> stations() const;

  bool operator==(const MarginCatalog& other) const { return margins_ == other.margins_; }

 private:
  std::vector<MarginIndex> margins_;
  std::map<MarginIndex, std::size_t> lookup_;
};

using CatalogPtr = std::shared_ptr<const MarginCatalog>;

struct EnsembleForecast {
  Date valid_date{};
  Eigen::MatrixXd members;  // M x L, columns follow the catalog
  CatalogPtr catalog;
  bool exchangeable = true;

  Eigen::Index member_count() const { return members.rows(); }
  Eigen::Index margin_count() const { return members.cols(); }
};

struct Observation {
  Date valid_date{};
  Eigen::VectorXd values;  // length L, aligned with the catalog
};

// Throw SchemaError when an invariant is violated.
void validate(const EnsembleForecast& forecast);
void validate(const Observation& observation, const MarginCatalog& catalog);

struct Instance {
  EnsembleForecast forecast;
  Observation observation;
};

class Dataset {
 public:
  Dataset() = default;
  // Validates date order, catalog sharing and the per-instance invariants.
  Dataset(CatalogPtr catalog, std::vector<Instance> instances);

  const CatalogPtr& catalog() const { return catalog_; }
  const std::vector<Instance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }
  Eigen::Index member_count() const;

 private:
  CatalogPtr catalog_;
  std::vector<Instance> instances_;
};

struct Climatology {
  CatalogPtr catalog;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

// Per-margin sample mean and standard deviation (n - 1 denominator) over the
// observations of the first `count` instances (all when count is zero).
Climatology fit_climatology(const Dataset& dataset, std::size_t count = 0);
Climatology fit_climatology(const CatalogPtr& catalog, std::span<const Observation> observations);

double standardize(double value, const MarginIndex& margin, const Climatology& clim);
double destandardize(double value, const MarginIndex& margin, const Climatology& clim);
// Column-wise standardization of an N x L matrix aligned with clim.catalog.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& values, const Climatology& clim);
Eigen::VectorXd standardize_vector(const Eigen::VectorXd& values, const Climatology& clim);

// The most recent `window_days` instances strictly before `target_date`.
// Missing calendar days do not count against the window.
std::span<const Instance> training_window(const Dataset& dataset, Date target_date,
                                          std::size_t window_days);

enum class PostprocessorKind { UnivariateNormal, UnivariateTruncatedNormal, BivariateTruncatedNormal };

std::string_view to_string(PostprocessorKind kind);

struct Case {
  std::vector<std::size_t> margins;  // catalog indices; (wind, temperature) for bivariate
  PostprocessorKind kind = PostprocessorKind::UnivariateNormal;
};

struct CasePartition {
  std::vector<Case> cases;
};

// Throws ParameterError unless the cases are disjoint, cover the catalog and
// bivariate cases list a wind margin followed by a temperature margin.
void validate(const CasePartition& partition, const MarginCatalog& catalog);

// One univariate case per margin: truncated normal for non-negative
// variables, normal otherwise.
CasePartition univariate_partition(const MarginCatalog& catalog);

// One bivariate (wind, temperature) case per (station, lead time); margins
// that cannot be paired fall back to univariate cases.
CasePartition bivariate_partition(const MarginCatalog& catalog);

}  // namespace ldpr
