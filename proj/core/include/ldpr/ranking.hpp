#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "ldpr/rng.hpp"

namespace ldpr {

// Scalar characteristic that induces a ranking of multivariate points.
enum class Prerank {
  Multivariate,     // number of points dominated coordinatewise (incl. itself)
  Average,          // mean of the per-margin ranks
  SignedEuclidean,  // sign(temperature) * Euclidean norm; bivariate only
  BandDepth,        // mean count of bracketing point pairs per margin
};

std::string_view to_string(Prerank p);
// Accepts multivariate|average|sen|band_depth.
Prerank parse_prerank(std::string_view name);

struct RankingKind {
  Prerank prerank = Prerank::Multivariate;
  // Columns used by the signed Euclidean norm.
  std::size_t wind_column = 0;
  std::size_t temperature_column = 1;
};

// All pre-rank functions take an N x L matrix of points (one point per row)
// and are scale-free, except prerank_sen which should see standardized data.
Eigen::VectorXd prerank_multivariate(const Eigen::MatrixXd& points);
Eigen::VectorXd prerank_average(const Eigen::MatrixXd& points);
Eigen::VectorXd prerank_sen(const Eigen::MatrixXd& points, std::size_t wind_column,
                            std::size_t temperature_column);
Eigen::VectorXd prerank_banddepth(const Eigen::MatrixXd& points);

Eigen::VectorXd characteristics(const Eigen::MatrixXd& points, const RankingKind& kind);

// 1-based ranks of the characteristics under the usual ordering. Each block
// of tied values receives its ranks in an order drawn by one Fisher-Yates
// shuffle from `rng`; the rng is untouched when there are no ties.
std::vector<std::size_t> rank_characteristics(const Eigen::VectorXd& values, Rng& rng);

struct RankResult {
  Eigen::VectorXd characteristics;
  std::vector<std::size_t> permutation;
};

RankResult rank_points(const Eigen::MatrixXd& points, const RankingKind& kind, Rng& rng);

// index,characteristic,rank (1-based index) for inspecting a ranking.
void write_rank_debug_csv(const RankResult& result, std::ostream& out);

}  // namespace ldpr
