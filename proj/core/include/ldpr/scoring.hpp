#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldpr/core.hpp"
#include "ldpr/rng.hpp"

namespace ldpr {

// Closed-form CRPS of N(mu, sigma^2).
double crps_normal(double mu, double sigma, double y);
// Closed-form CRPS of N(mu, sigma^2) truncated below at zero; y >= 0.
double crps_truncnormal(double mu, double sigma, double y);
// CRPS of an ensemble (empirical distribution): mean |x - y| minus half the
// mean absolute member difference.
double crps_ensemble(std::span<const double> members, double y);

// -log density of the bivariate normal with the first coordinate truncated
// below at zero.
double logscore_bivariate_truncnormal(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma,
                                      const Eigen::Vector2d& y);

struct VerificationRecord {
  Eigen::MatrixXd ensemble;  // N x L
  Eigen::VectorXd observation;
  CatalogPtr catalog;  // optional
};

void validate(const VerificationRecord& record);

double energy_score(const VerificationRecord& record);
// Unweighted variogram score of order 0.5 over all ordered margin pairs.
double variogram_score_05(const VerificationRecord& record);

enum class HistogramKind { Multivariate, BandDepth, Average };

std::string_view to_string(HistogramKind kind);
HistogramKind parse_histogram_kind(std::string_view name);
inline constexpr HistogramKind kHistogramKinds[] = {HistogramKind::Multivariate,
                                                    HistogramKind::BandDepth,
                                                    HistogramKind::Average};

// Rank (1..N+1) of the observation among the pooled ensemble-plus-observation
// characteristics; ties are broken at random.
std::size_t observation_rank(const VerificationRecord& record, HistogramKind kind, Rng& rng);

struct RankHistogram {
  HistogramKind kind = HistogramKind::Multivariate;
  std::vector<std::size_t> counts;  // counts[r - 1] for rank r
  std::size_t total = 0;

  RankHistogram() = default;
  RankHistogram(HistogramKind k, std::size_t members) : kind(k), counts(members + 1, 0) {}

  void add(std::size_t rank);
  // Adds another histogram's counts; shapes and kinds must agree.
  void merge(const RankHistogram& other);
};

// Each record's rank uses its own stream derived from one draw of `rng`, so
// splitting the records into batches and merging gives identical counts.
RankHistogram accumulate_histogram(std::span<const VerificationRecord> records,
                                   HistogramKind kind, Rng& rng);

// Sum over ranks of |relative frequency - 1/(N+1)|.
double reliability_index(const RankHistogram& hist);

// kind,rank,count
void write_histogram_csv(const RankHistogram& hist, std::ostream& out, bool header = true);
RankHistogram read_histogram_csv(std::istream& in, const std::string& source_name);

struct ScoreEntry {
  std::string ensemble_name;
  std::string metric;
  double value = 0.0;
};

// ensemble_name,metric,value
void write_score_report(std::span<const ScoreEntry> entries, std::ostream& out);
std::vector<ScoreEntry> read_score_report(std::istream& in, const std::string& source_name);

}  // namespace ldpr
