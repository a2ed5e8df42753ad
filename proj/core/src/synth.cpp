#include "ldpr/synth.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "ldpr/errors.hpp"

namespace ldpr {

Eigen::MatrixXd default_correlation(std::size_t stations, const CorrelationDefaults& values) {
  const auto L = static_cast<Eigen::Index>(2 * stations);
  Eigen::MatrixXd r(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) {
      const bool same_station = i / 2 == j / 2;
      const bool wind_i = i % 2 == 0;
      const bool wind_j = j % 2 == 0;
      if (i == j) {
        r(i, j) = 1.0;
      } else if (wind_i != wind_j) {
        r(i, j) = same_station ? values.wind_temperature_same : values.wind_temperature_cross;
      } else {
        r(i, j) = wind_i ? values.wind_wind : values.temperature_temperature;
      }
    }
  }
  return r;
}

namespace {

Eigen::MatrixXd effective_correlation(const SyntheticSpec& spec) {
  return spec.correlation.size() == 0 ? default_correlation(spec.stations) : spec.correlation;
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.stations < 1) throw ParameterError("synthetic spec: need at least one station");
  if (spec.days < 2) throw ParameterError("synthetic spec: need at least two days");
  if (spec.members < 2) throw ParameterError("synthetic spec: need at least two members");
  if (spec.lead_hours < 0) throw ParameterError("synthetic spec: negative lead time");
  if (!(spec.dispersion > 0.0)) throw ParameterError("synthetic spec: dispersion factor must be positive");
  for (double sd : {spec.wind_signal_sd, spec.wind_error_sd, spec.temperature_signal_sd, spec.temperature_error_sd}) {
    if (!(sd > 0.0)) throw ParameterError("synthetic spec: standard deviations must be positive");
  }
  const auto L = static_cast<Eigen::Index>(2 * spec.stations);
  if (spec.bias.size() != 0 && spec.bias.size() != L) {
    throw ParameterError("synthetic spec: bias must have one entry per margin");
  }
  const Eigen::MatrixXd r = effective_correlation(spec);
  if (r.rows() != L || r.cols() != L) throw ParameterError("synthetic spec: correlation must be 2J x 2J");
  if (!r.allFinite() || !r.isApprox(r.transpose(), 0.0)) {
    throw ParameterError("synthetic spec: correlation matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < L; ++i) {
    if (r(i, i) != 1.0) throw ParameterError("synthetic spec: correlation diagonal must be one");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw ParameterError("synthetic spec: correlation matrix is not positive definite");
  }
}

std::string synthetic_station_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "st%02zu", index + 1);
  return buf;
}

Dataset synth_generate(const SyntheticSpec& spec, Rng& rng) {
  validate(spec);
  const std::size_t J = spec.stations;
  const auto L = static_cast<Eigen::Index>(2 * J);
  const auto M = static_cast<Eigen::Index>(spec.members);

  std::vector<MarginIndex> margins;
  for (std::size_t j = 0; j < J; ++j) {
    margins.push_back({Variable::WindSpeed, synthetic_station_name(j), spec.lead_hours});
    margins.push_back({Variable::Temperature, synthetic_station_name(j), spec.lead_hours});
  }
  auto catalog = std::make_shared<const MarginCatalog>(margins);

  Eigen::VectorXd signal_sd(L), error_sd(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const bool wind = l % 2 == 0;
    signal_sd[l] = wind ? spec.wind_signal_sd : spec.temperature_signal_sd;
    error_sd[l] = wind ? spec.wind_error_sd : spec.temperature_error_sd;
  }
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(effective_correlation(spec)).matrixL();
  const Eigen::VectorXd bias = spec.bias.size() == 0 ? Eigen::VectorXd::Zero(L) : spec.bias;

  auto correlated = [&](const Eigen::VectorXd& sd) {
    Eigen::VectorXd z(L);
    for (Eigen::Index l = 0; l < L; ++l) z[l] = rng.normal();
    return Eigen::VectorXd((chol * z).cwiseProduct(sd));
  };
  auto floor_wind = [&](Eigen::VectorXd v) {
    for (Eigen::Index l = 0; l < L; l += 2) v[l] = std::max(v[l], 0.0);
    return v;
  };

  std::vector<Instance> instances;
  instances.reserve(spec.days);
  for (std::size_t day = 0; day < spec.days; ++day) {
    const Date date = spec.start + std::chrono::days(static_cast<int>(day));
    const double season = spec.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(day) / 365.25);
    Eigen::VectorXd mean(L);
    for (Eigen::Index l = 0; l < L; ++l) {
      mean[l] = l % 2 == 0 ? spec.wind_mean : spec.temperature_mean + season;
    }
    const Eigen::VectorXd signal = mean + correlated(signal_sd);

    Instance inst;
    inst.observation.valid_date = date;
    inst.observation.values = floor_wind(signal + correlated(error_sd));
    inst.forecast.valid_date = date;
    inst.forecast.catalog = catalog;
    inst.forecast.exchangeable = spec.exchangeable;
    inst.forecast.members.resize(M, L);
    for (Eigen::Index m = 0; m < M; ++m) {
      inst.forecast.members.row(m) = floor_wind(signal + bias + spec.dispersion * correlated(error_sd)).transpose();
    }
    instances.push_back(std::move(inst));
  }
  return Dataset(catalog, std::move(instances));
}

}  // namespace ldpr
