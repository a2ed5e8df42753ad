#include "ldpr/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "ldpr/dataset_io.hpp"
#include "ldpr/errors.hpp"

namespace ldpr {

std::string_view to_string(Prerank p) {
  switch (p) {
    case Prerank::Multivariate:
      return "multivariate";
    case Prerank::Average:
      return "average";
    case Prerank::SignedEuclidean:
      return "sen";
    case Prerank::BandDepth:
      return "band_depth";
  }
  return "unknown";
}

Prerank parse_prerank(std::string_view name) {
  if (name == "multivariate" || name == "bivpr") return Prerank::Multivariate;
  if (name == "average" || name == "avpr") return Prerank::Average;
  if (name == "sen") return Prerank::SignedEuclidean;
  if (name == "band_depth") return Prerank::BandDepth;
  throw ParameterError("unknown pre-rank '" + std::string(name) + "'");
}

Eigen::VectorXd prerank_multivariate(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      count += (points.row(j).array() <= points.row(i).array()).all() ? 1 : 0;
    }
    out[i] = count;
  }
  return out;
}

namespace {

// For one column: number of entries <= and < each entry.
void column_counts(const Eigen::MatrixXd& points, Eigen::Index col, std::vector<double>& sorted,
                   std::vector<long>& at_most, std::vector<long>& below) {
  const Eigen::Index n = points.rows();
  sorted.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = points(i, col);
  std::sort(sorted.begin(), sorted.end());
  at_most.resize(static_cast<std::size_t>(n));
  below.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = points(i, col);
    at_most[static_cast<std::size_t>(i)] = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    below[static_cast<std::size_t>(i)] = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
  }
}

}  // namespace

Eigen::VectorXd prerank_average(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dims = points.cols();
  std::vector<long> total(static_cast<std::size_t>(n), 0);
  std::vector<double> sorted;
  std::vector<long> at_most, below;
  for (Eigen::Index l = 0; l < dims; ++l) {
    column_counts(points, l, sorted, at_most, below);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += at_most[i];
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = static_cast<double>(total[static_cast<std::size_t>(i)]) / static_cast<double>(dims);
  }
  return out;
}

Eigen::VectorXd prerank_sen(const Eigen::MatrixXd& points, std::size_t wind_column,
                            std::size_t temperature_column) {
  const auto w = static_cast<Eigen::Index>(wind_column);
  const auto t = static_cast<Eigen::Index>(temperature_column);
  if (w >= points.cols() || t >= points.cols() || w == t) {
    throw ParameterError("signed Euclidean norm needs distinct wind and temperature columns");
  }
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double zw = points(i, w);
    const double zt = points(i, t);
    const double sign = zt >= 0.0 ? 1.0 : -1.0;
    out[i] = sign * std::sqrt(zw * zw + zt * zt);
  }
  return out;
}

Eigen::VectorXd prerank_banddepth(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ParameterError("band depth needs at least two points");
  const Eigen::Index dims = points.cols();
  const auto pairs = [](long k) { return k * (k - 1) / 2; };
  std::vector<long> total(static_cast<std::size_t>(n), 0);
  std::vector<double> sorted;
  std::vector<long> at_most, below;
  for (Eigen::Index l = 0; l < dims; ++l) {
    column_counts(points, l, sorted, at_most, below);
    for (std::size_t i = 0; i < total.size(); ++i) {
      // A pair fails to bracket a value only if both members lie strictly on
      // the same side of it.
      const long greater = static_cast<long>(n) - at_most[i];
      total[i] += pairs(static_cast<long>(n)) - pairs(greater) - pairs(below[i]);
    }
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = static_cast<double>(total[static_cast<std::size_t>(i)]) / static_cast<double>(dims);
  }
  return out;
}

Eigen::VectorXd characteristics(const Eigen::MatrixXd& points, const RankingKind& kind) {
  switch (kind.prerank) {
    case Prerank::Multivariate:
      return prerank_multivariate(points);
    case Prerank::Average:
      return prerank_average(points);
    case Prerank::SignedEuclidean:
      return prerank_sen(points, kind.wind_column, kind.temperature_column);
    case Prerank::BandDepth:
      return prerank_banddepth(points);
  }
  throw ParameterError("unknown pre-rank kind");
}

std::vector<std::size_t> rank_characteristics(const Eigen::VectorXd& values, Rng& rng) {
  const auto n = static_cast<std::size_t>(values.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[static_cast<Eigen::Index>(i)])) {
      throw ParameterError("non-finite characteristic at index " + std::to_string(i));
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[static_cast<Eigen::Index>(a)] < values[static_cast<Eigen::Index>(b)];
  });

  std::vector<std::size_t> ranks(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    const double v = values[static_cast<Eigen::Index>(order[start])];
    while (stop < n && values[static_cast<Eigen::Index>(order[stop])] == v) ++stop;
    for (std::size_t i = stop - start; i > 1; --i) {
      std::swap(order[start + i - 1], order[start + rng.below(i)]);
    }
    start = stop;
  }
  for (std::size_t pos = 0; pos < n; ++pos) ranks[order[pos]] = pos + 1;
  return ranks;
}

RankResult rank_points(const Eigen::MatrixXd& points, const RankingKind& kind, Rng& rng) {
  RankResult r;
  r.characteristics = characteristics(points, kind);
  r.permutation = rank_characteristics(r.characteristics, rng);
  return r;
}

void write_rank_debug_csv(const RankResult& result, std::ostream& out) {
  out << "index,characteristic,rank\n";
  for (std::size_t i = 0; i < result.permutation.size(); ++i) {
    out << (i + 1) << ',' << format_number(result.characteristics[static_cast<Eigen::Index>(i)])
        << ',' << result.permutation[i] << '\n';
  }
}

}  // namespace ldpr
