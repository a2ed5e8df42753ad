#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ldpr/bvemos.hpp"
#include "ldpr/core.hpp"
#include "ldpr/ranking.hpp"
#include "ldpr/rng.hpp"
#include "ldpr/uvemos.hpp"

namespace ldpr {

enum class TemplateSource { EccRawEnsemble, SchaakeHistorical };
std::string_view to_string(TemplateSource source);

struct DependenceTemplate {
  Eigen::MatrixXd points;  // N x L, columns follow the catalog
  TemplateSource source = TemplateSource::EccRawEnsemble;
  std::vector<Date> dates;  // historical dates, Schaake only
};

using WarningSink = std::function<void(std::string_view)>;

// Writes the message to std::clog.
void default_warning_sink(std::string_view message);

// The raw members verbatim. Warns when the members are not exchangeable.
DependenceTemplate build_template_ecc(const EnsembleForecast& raw,
                                      const WarningSink& warn = default_warning_sink);

// N distinct historical observation vectors drawn uniformly without replacement.
DependenceTemplate build_template_schaake(std::span<const Observation> history, std::size_t n, Rng& rng);

// Sorted sample rearranged to follow the rank pattern of the template; ties in
// the template are broken at random.
std::vector<double> reorder_univariate(std::span<const double> sample, std::span<const double> template_margin,
                                       Rng& rng);

// Per-column affine transform applied before computing characteristics.
struct CaseScaling {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

// Row n of the result is the sample row whose sample rank equals the template
// rank of row n. Template ranks are drawn from rng before sample ranks.
// Single-column cases rank by value whatever the pre-rank.
Eigen::MatrixXd reorder_case(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& template_case,
                             const RankingKind& ranking, Rng& rng, const CaseScaling* scaling = nullptr);

enum class SamplingScheme { Q, R };
std::string_view to_string(SamplingScheme scheme);
SamplingScheme parse_sampling_scheme(std::string_view name);

struct CasePlan {
  CasePartition partition;
  RankingKind ranking;  // within-case columns; (0, 1) for bivariate cases
  SamplingScheme sampling = SamplingScheme::R;
  std::size_t n = 0;  // output ensemble size
};

// Rejects scheme Q when any case is multivariate.
void validate(const CasePlan& plan, const MarginCatalog& catalog);

using CaseModel = std::variant<UnivariateEmosParams, BivariateEmosParams>;

struct ReorderOptions {
  // Used to standardize template and sample before signed Euclidean ranking.
  const Climatology* climatology = nullptr;
  BivariateSamplerOptions sampler{};
};

// Unordered N x L sample: each case's draws placed by draw index. Uses the
// same per-case streams as ldp_reorder, so both see identical draws.
Eigen::MatrixXd draw_samples(const EnsembleForecast& raw, const CasePlan& plan,
                             std::span<const CaseModel> fitted, Rng& rng,
                             const ReorderOptions& options = {});

// Postprocess every case, impose the template's within-case rank structure and
// aggregate the cases member by member. Consumes one draw of rng; case c uses
// the streams (base, c, 0) for sampling and (base, c, 1) for ranking.
EnsembleForecast ldp_reorder(const EnsembleForecast& raw, const CasePlan& plan,
                             const DependenceTemplate& dependence, std::span<const CaseModel> fitted,
                             Rng& rng, const ReorderOptions& options = {});

}  // namespace ldpr
