#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ldpr/bvemos.hpp"
#include "ldpr/ranking.hpp"
#include "ldpr/reorder.hpp"
#include "ldpr/synth.hpp"
#include "ldpr/uvemos.hpp"

namespace ldpr {

enum class DataSource { Files, Synthetic };
enum class ClimatologyScope { Full, Training };

// Postprocessed ensemble produced by the postprocess subcommand.
enum class PostprocessMethod { EmosReordered, BivariateUnordered, BivariateReordered };
std::string_view to_string(PostprocessMethod method);
PostprocessMethod parse_postprocess_method(std::string_view name);

struct FitSettings {
  UnivariateFitOptions univariate{};
  BivariateFitOptions bivariate{};
  BivariateSamplerOptions sampler{};
};

struct ExperimentConfig {
  // [data]
  DataSource source = DataSource::Synthetic;
  std::filesystem::path forecasts;
  std::filesystem::path observations;
  bool exchangeable = true;
  // [synthetic]
  SyntheticSpec synthetic{};
  std::optional<std::uint64_t> synthetic_seed;  // defaults to the master seed
  // [experiment]
  std::size_t window_days = 50;
  std::size_t repetitions = 200;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "results";
  TemplateSource template_source = TemplateSource::EccRawEnsemble;
  std::vector<Prerank> rankings{Prerank::Multivariate, Prerank::Average, Prerank::SignedEuclidean};
  ClimatologyScope climatology = ClimatologyScope::Full;
  std::size_t test_days = 0;  // 0 scores every date with a full window
  std::size_t ensemble_size = 0;  // 0 means the raw ensemble size
  std::size_t threads = 1;
  // [postprocess]
  PostprocessMethod method = PostprocessMethod::BivariateReordered;
  Prerank ranking = Prerank::Multivariate;
  SamplingScheme sampling = SamplingScheme::R;
  // [fit]
  FitSettings fit{};
};

// Throws ConfigError when a value is out of range.
void validate(const ExperimentConfig& config);

// INI-style text: [section] headers, key = value lines, ';' or '#' comments.
// Unknown sections or keys are rejected. Relative data paths are resolved
// against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::string& source_name,
                              const std::filesystem::path& base_dir = {});
// Throws ConfigError naming the path when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& file);

}  // namespace ldpr
