#include "ldpr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "ldpr/dataset_io.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/normal.hpp"
#include "ldpr/ranking.hpp"

namespace ldpr {

double crps_normal(double mu, double sigma, double y) {
  if (!(sigma > 0.0)) throw ParameterError("crps_normal: sigma must be positive");
  const double z = (y - mu) / sigma;
  return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - 1.0 / kSqrtPi);
}

double crps_truncnormal(double mu, double sigma, double y) {
  if (!(sigma > 0.0)) throw ParameterError("crps_truncnormal: sigma must be positive");
  if (y < 0.0) throw ParameterError("crps_truncnormal: observation must be non-negative");
  // Standardized form with lower truncation point a = -mu/sigma and the tail
  // mass Q(a) = Phi(mu/sigma). All ratios are taken in log space:
  //   crps/sigma = z (1 - 2 Q(z)/Q(a)) + 2 phi(z)/Q(a) - Q(sqrt2 a) / (sqrt(pi) Q(a)^2)
  const double a = -mu / sigma;
  const double z = (y - mu) / sigma;
  const double log_mass = log_normal_sf(a);
  const double tail_ratio = std::exp(log_normal_sf(z) - log_mass);
  const double density_ratio = std::exp(-0.5 * z * z - kLogSqrt2Pi - log_mass);
  const double self_term = std::exp(log_normal_sf(kSqrt2 * a) - 2.0 * log_mass) / kSqrtPi;
  return sigma * (z * (1.0 - 2.0 * tail_ratio) + 2.0 * density_ratio - self_term);
}

double crps_ensemble(std::span<const double> members, double y) {
  if (members.empty()) throw ParameterError("crps_ensemble: empty ensemble");
  const auto n = static_cast<double>(members.size());
  double abs_error = 0.0;
  for (double x : members) abs_error += std::abs(x - y);
  double spread = 0.0;
  for (double a : members) {
    for (double b : members) spread += std::abs(a - b);
  }
  return abs_error / n - spread / (2.0 * n * n);
}

double logscore_bivariate_truncnormal(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma,
                                      const Eigen::Vector2d& y) {
  const double s11 = sigma(0, 0);
  const double s22 = sigma(1, 1);
  const double s12 = sigma(0, 1);
  if (std::abs(s12 - sigma(1, 0)) > 1e-12 * (1.0 + std::abs(s12))) {
    throw ParameterError("logscore: scale matrix is not symmetric");
  }
  const double det = s11 * s22 - s12 * s12;
  if (!(s11 > 0.0) || !(det > 0.0)) {
    throw ParameterError("logscore: scale matrix is not positive definite");
  }
  if (y[0] < 0.0) throw ParameterError("logscore: truncated coordinate below zero");
  const double d1 = y[0] - mu[0];
  const double d2 = y[1] - mu[1];
  const double quad = (s22 * d1 * d1 - 2.0 * s12 * d1 * d2 + s11 * d2 * d2) / det;
  const double log_density = -2.0 * kLogSqrt2Pi - 0.5 * std::log(det) - 0.5 * quad;
  return -log_density + log_normal_cdf(mu[0] / std::sqrt(s11));
}

void validate(const VerificationRecord& record) {
  if (record.ensemble.rows() < 1) throw ParameterError("verification record without members");
  if (record.ensemble.cols() < 1 || record.ensemble.cols() != record.observation.size()) {
    throw ParameterError("verification record: ensemble and observation dimensions differ");
  }
  if (record.catalog && record.catalog->size() != static_cast<std::size_t>(record.observation.size())) {
    throw ParameterError("verification record: catalog size differs from dimension");
  }
  if (!record.ensemble.allFinite() || !record.observation.allFinite()) {
    throw ParameterError("verification record contains non-finite values");
  }
}

double energy_score(const VerificationRecord& record) {
  validate(record);
  const Eigen::MatrixXd& x = record.ensemble;
  if (x.cols() == 1) {
    return crps_ensemble(std::span<const double>(x.data(), static_cast<std::size_t>(x.rows())),
                         record.observation[0]);
  }
  const Eigen::Index n = x.rows();
  double abs_error = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    abs_error += (x.row(i).transpose() - record.observation).norm();
  }
  double spread = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) spread += (x.row(i) - x.row(j)).norm();
  }
  const auto nn = static_cast<double>(n);
  return abs_error / nn - spread / (nn * nn);
}

double variogram_score_05(const VerificationRecord& record) {
  validate(record);
  const Eigen::MatrixXd& x = record.ensemble;
  const Eigen::VectorXd& y = record.observation;
  const Eigen::Index dims = x.cols();
  const auto n = static_cast<double>(x.rows());
  double score = 0.0;
  for (Eigen::Index l = 0; l < dims; ++l) {
    for (Eigen::Index k = l + 1; k < dims; ++k) {
      const double observed = std::sqrt(std::abs(y[l] - y[k]));
      const double expected = (x.col(l) - x.col(k)).array().abs().sqrt().sum() / n;
      const double diff = observed - expected;
      // (l, k) and (k, l) contribute equally.
      score += 2.0 * diff * diff;
    }
  }
  return score;
}

std::string_view to_string(HistogramKind kind) {
  switch (kind) {
    case HistogramKind::Multivariate:
      return "multivariate";
    case HistogramKind::BandDepth:
      return "band_depth";
    case HistogramKind::Average:
      return "average";
  }
  return "unknown";
}

HistogramKind parse_histogram_kind(std::string_view name) {
  if (name == "multivariate") return HistogramKind::Multivariate;
  if (name == "band_depth") return HistogramKind::BandDepth;
  if (name == "average") return HistogramKind::Average;
  throw ParameterError("unknown histogram kind '" + std::string(name) + "'");
}

std::size_t observation_rank(const VerificationRecord& record, HistogramKind kind, Rng& rng) {
  validate(record);
  const Eigen::Index n = record.ensemble.rows();
  Eigen::MatrixXd pooled(n + 1, record.ensemble.cols());
  pooled.topRows(n) = record.ensemble;
  pooled.row(n) = record.observation.transpose();

  Eigen::VectorXd chars;
  switch (kind) {
    case HistogramKind::Multivariate:
      chars = prerank_multivariate(pooled);
      break;
    case HistogramKind::BandDepth:
      chars = prerank_banddepth(pooled);
      break;
    case HistogramKind::Average:
      chars = prerank_average(pooled);
      break;
  }
  return rank_characteristics(chars, rng)[static_cast<std::size_t>(n)];
}

void RankHistogram::add(std::size_t rank) {
  if (rank < 1 || rank > counts.size()) throw ParameterError("rank outside histogram range");
  ++counts[rank - 1];
  ++total;
}

void RankHistogram::merge(const RankHistogram& other) {
  if (other.kind != kind || other.counts.size() != counts.size()) {
    throw AggregationError("cannot merge histograms of different kind or ensemble size");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
}

RankHistogram accumulate_histogram(std::span<const VerificationRecord> records,
                                   HistogramKind kind, Rng& rng) {
  if (records.empty()) throw AggregationError("no records to aggregate");
  const Eigen::Index n = records.front().ensemble.rows();
  const Eigen::Index dims = records.front().ensemble.cols();
  RankHistogram hist(kind, static_cast<std::size_t>(n));
  const std::uint64_t base = rng.next();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].ensemble.rows() != n || records[i].ensemble.cols() != dims) {
      throw AggregationError("records differ in ensemble size or dimension");
    }
    Rng stream = Rng::substream(base, {i});
    hist.add(observation_rank(records[i], kind, stream));
  }
  return hist;
}

double reliability_index(const RankHistogram& hist) {
  if (hist.total == 0 || hist.counts.empty()) throw ParameterError("empty rank histogram");
  const double uniform = 1.0 / static_cast<double>(hist.counts.size());
  double delta = 0.0;
  for (std::size_t c : hist.counts) {
    delta += std::abs(static_cast<double>(c) / static_cast<double>(hist.total) - uniform);
  }
  return delta;
}

void write_histogram_csv(const RankHistogram& hist, std::ostream& out, bool header) {
  if (header) out << "kind,rank,count\n";
  for (std::size_t r = 0; r < hist.counts.size(); ++r) {
    out << to_string(hist.kind) << ',' << (r + 1) << ',' << hist.counts[r] << '\n';
  }
}

RankHistogram read_histogram_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "kind,rank,count") {
    throw ParseError(source_name, 1, "expected header 'kind,rank,count'");
  }
  RankHistogram hist;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw ParseError(source_name, line_no, "expected 3 fields");
    try {
      const HistogramKind kind = parse_histogram_kind(f[0]);
      const auto rank = static_cast<std::size_t>(parse_number(f[1]));
      const auto count = static_cast<std::size_t>(parse_number(f[2]));
      if (first) hist.kind = kind;
      if (kind != hist.kind || rank != hist.counts.size() + 1) {
        throw ParameterError("ranks must be consecutive within one kind");
      }
      first = false;
      hist.counts.push_back(count);
      hist.total += count;
    } catch (const ParameterError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return hist;
}

void write_score_report(std::span<const ScoreEntry> entries, std::ostream& out) {
  out << "ensemble_name,metric,value\n";
  for (const ScoreEntry& e : entries) {
    out << e.ensemble_name << ',' << e.metric << ',' << format_number(e.value) << '\n';
  }
}

std::vector<ScoreEntry> read_score_report(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "ensemble_name,metric,value") {
    throw ParseError(source_name, 1, "expected header 'ensemble_name,metric,value'");
  }
  std::vector<ScoreEntry> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw ParseError(source_name, line_no, "expected 3 fields");
    try {
      out.push_back({std::string(f[0]), std::string(f[1]), parse_number(f[2])});
    } catch (const ParameterError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return out;
}

}  // namespace ldpr
