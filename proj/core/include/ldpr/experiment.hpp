#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldpr/config.hpp"
#include "ldpr/core.hpp"
#include "ldpr/dataset_io.hpp"
#include "ldpr/reorder.hpp"
#include "ldpr/scoring.hpp"

namespace ldpr {

// Dataset named by the config: read from files or generated from the
// synthetic spec (seeded by the synthetic seed, else the master seed).
Dataset load_dataset(const ExperimentConfig& config);

// Indices of the dates scored by an experiment: every date with a full
// training window, truncated to config.test_days when that is non-zero.
std::vector<std::size_t> test_indices(const Dataset& dataset, const ExperimentConfig& config);

Climatology scoring_climatology(const Dataset& dataset, const ExperimentConfig& config);

// Postprocessor parameters for one test date.
struct DateModels {
  CasePartition univariate;
  CasePartition bivariate;
  std::vector<CaseModel> univariate_models;
  std::vector<CaseModel> bivariate_models;
};

// Fits every case on the sliding window before dataset[index]. Throws the
// fitting routines' errors unchanged.
DateModels fit_date(const Dataset& dataset, std::size_t index, const ExperimentConfig& config);

std::vector<UnivariateParamRecord> univariate_records(const DateModels& models, const Dataset& dataset,
                                                      std::size_t index);
std::vector<BivariateParamRecord> bivariate_records(const DateModels& models, const Dataset& dataset,
                                                    std::size_t index);

// Names used in reports, e.g. emos_ecc_r or bivariate_emos_ss_avpr.
std::string ensemble_name(PostprocessMethod method, TemplateSource source, Prerank ranking,
                          SamplingScheme sampling = SamplingScheme::R);

// One postprocessed ensemble for dataset[index] using the config's
// [postprocess] choices and the streams of repetition `repetition`.
NamedEnsemble postprocess_date(const Dataset& dataset, std::size_t index, const DateModels& models,
                               const ExperimentConfig& config, std::size_t repetition = 0);

struct EnsembleSummary {
  std::string name;
  double mean_es = 0.0;
  double mean_vs = 0.0;
  std::size_t records = 0;
  std::vector<RankHistogram> histograms;  // one per kHistogramKinds entry
};

struct SkippedDate {
  Date date{};
  std::string reason;
};

struct ExperimentResult {
  std::vector<EnsembleSummary> ensembles;
  std::vector<SkippedDate> skipped;
  std::size_t scored_dates = 0;
  std::size_t repetitions = 0;
};

// Fits, postprocesses and scores every test date. Dates are processed by
// config.threads workers; results are reduced in date order so the output
// does not depend on scheduling. Skipped dates are reported on `log` when
// it is non-null.
ExperimentResult run_experiment(const Dataset& dataset, const ExperimentConfig& config,
                                std::ostream* log = nullptr);

// Scores ensembles read from an ensemble CSV against observations,
// standardized with the climatology of every observation given. Each
// (ensemble, date) pair is one record; dates without an observation are
// skipped.
ExperimentResult verify_ensembles(std::span<const NamedEnsemble> ensembles, const ObservationSet& observations,
                                  std::uint64_t seed);

// scores.csv, reliability.csv, histogram_<name>.csv and skipped_dates.csv.
void write_experiment_reports(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace ldpr
