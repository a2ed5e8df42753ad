#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldpr/core.hpp"

namespace ldpr {

// Forecast CSV:    date,station,variable,lead_hours,member,value
// Observation CSV: date,station,variable,lead_hours,value
// Ensemble CSV:    ensemble_name,date,station,variable,lead_hours,member,value
inline constexpr std::string_view kForecastHeader = "date,station,variable,lead_hours,member,value";
inline constexpr std::string_view kObservationHeader = "date,station,variable,lead_hours,value";
inline constexpr std::string_view kEnsembleHeader =
    "ensemble_name,date,station,variable,lead_hours,member,value";

struct IngestOptions {
  bool exchangeable = true;
};

struct IngestResult {
  Dataset dataset;
  // Dates present in either file that lacked a complete forecast or observation.
  std::size_t dropped_dates = 0;
};

IngestResult ingest_dataset(const std::filesystem::path& forecast_file,
                            const std::filesystem::path& observation_file,
                            const IngestOptions& options = {});
IngestResult ingest_dataset(std::istream& forecasts, std::istream& observations,
                            const IngestOptions& options = {},
                            const std::string& forecast_name = "forecasts",
                            const std::string& observation_name = "observations");

struct ObservationSet {
  CatalogPtr catalog;
  std::vector<Observation> observations;  // dates ascending, complete dates only
  std::size_t dropped_dates = 0;
};

ObservationSet read_observation_csv(std::istream& in, const std::string& source_name);
ObservationSet read_observation_csv(const std::filesystem::path& file);

// Canonical serialization: dates ascending, margins in catalog order,
// members ascending, shortest round-trip decimal values.
void write_forecast_csv(const Dataset& dataset, std::ostream& out);
void write_observation_csv(const Dataset& dataset, std::ostream& out);

struct NamedEnsemble {
  std::string name;
  EnsembleForecast forecast;
};

void write_ensemble_csv(std::span<const NamedEnsemble> ensembles, std::ostream& out,
                        bool header = true);
// Groups rows by (ensemble_name, date). The catalog is the sorted union of
// margins in the file; every group must be complete.
std::vector<NamedEnsemble> read_ensemble_csv(std::istream& in, const std::string& source_name);

// Shortest decimal string that parses back to the same double.
std::string format_number(double value);
double parse_number(std::string_view text);
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace ldpr
