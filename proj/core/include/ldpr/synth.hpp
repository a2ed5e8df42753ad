#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "ldpr/core.hpp"
#include "ldpr/rng.hpp"

namespace ldpr {

// Synthetic (wind speed, temperature) forecasts for J stations at one lead
// time. Margins follow the catalog order: station-major, wind before
// temperature.
//
// Each day draws a predictable signal c ~ N(seasonal mean, S R S). The
// observation is c + e_0 and member m is c + bias + dispersion * e_m, where
// the e are independent N(0, E R E) draws. Wind values are floored at zero.
// Dispersion 1 with zero bias gives a calibrated ensemble.
struct SyntheticSpec {
  std::size_t stations = 3;
  std::size_t days = 1100;
  std::size_t members = 50;
  int lead_hours = 24;
  Date start = parse_date("2003-01-01");
  Eigen::MatrixXd correlation;  // 2J x 2J; empty means default_correlation(J)
  Eigen::VectorXd bias;         // length 2J; empty means zero
  double dispersion = 1.0;
  double seasonal_amplitude = 8.0;

  double wind_mean = 5.0;
  double wind_signal_sd = 1.5;
  double wind_error_sd = 1.0;
  double temperature_mean = 10.0;
  double temperature_signal_sd = 3.0;
  double temperature_error_sd = 1.5;
  bool exchangeable = true;
};

struct CorrelationDefaults {
  double temperature_temperature = 0.9;  // between stations
  double wind_wind = 0.7;                // between stations
  double wind_temperature_same = -0.3;   // within a station
  double wind_temperature_cross = -0.25; // across stations
};

Eigen::MatrixXd default_correlation(std::size_t stations, const CorrelationDefaults& values = {});

// Throws ParameterError for an invalid spec (correlation not symmetric
// positive definite with unit diagonal, non-positive dispersion, ...).
void validate(const SyntheticSpec& spec);

std::string synthetic_station_name(std::size_t index);

Dataset synth_generate(const SyntheticSpec& spec, Rng& rng);

}  // namespace ldpr
