#include "ldpr/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "ldpr/dataset_io.hpp"
#include "ldpr/errors.hpp"

namespace ldpr {

std::string_view to_string(PostprocessMethod method) {
  switch (method) {
    case PostprocessMethod::EmosReordered:
      return "emos_reordered";
    case PostprocessMethod::BivariateUnordered:
      return "bivariate_unordered";
    case PostprocessMethod::BivariateReordered:
      return "bivariate_reordered";
  }
  return "?";
}

PostprocessMethod parse_postprocess_method(std::string_view name) {
  if (name == "emos_reordered") return PostprocessMethod::EmosReordered;
  if (name == "bivariate_unordered") return PostprocessMethod::BivariateUnordered;
  if (name == "bivariate_reordered") return PostprocessMethod::BivariateReordered;
  throw ParameterError("unknown postprocess method '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.window_days < 10) throw ConfigError("window_days must be at least 10");
  if (c.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (c.rankings.empty()) throw ConfigError("at least one ranking is required");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.source == DataSource::Files && (c.forecasts.empty() || c.observations.empty())) {
    throw ConfigError("file data source needs forecasts and observations paths");
  }
  if (c.fit.univariate.min_training > c.window_days || c.fit.bivariate.min_training > c.window_days) {
    throw ConfigError("min_training exceeds window_days");
  }
  if (c.sampling == SamplingScheme::Q && c.method != PostprocessMethod::EmosReordered) {
    throw ConfigError("sampling scheme Q is only available for univariate postprocessing");
  }
  try {
    if (c.source == DataSource::Synthetic) validate(c.synthetic);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

using Section = boost::property_tree::ptree;

class Reader {
 public:
  Reader(const std::string& source, const std::string& section, const Section& tree)
      : source_(source), section_(section), tree_(tree) {
    for (const auto& [key, value] : tree_) {
      if (!value.empty()) throw ConfigError(source_ + ": nested key in [" + section_ + "]");
      remaining_.insert(key);
    }
  }

  std::optional<std::string> raw(const std::string& key) {
    auto it = tree_.find(key);
    if (it == tree_.not_found()) return std::nullopt;
    remaining_.erase(key);
    return it->second.data();
  }

  template <class F>
  void with(const std::string& key, F&& assign) {
    auto text = raw(key);
    if (!text) return;
    try {
      assign(*text);
    } catch (const Error& e) {
      throw ConfigError(source_ + ": [" + section_ + "] " + key + ": " + e.what());
    }
  }

  void get(const std::string& key, std::string& out) { with(key, [&](const std::string& v) { out = v; }); }
  void get(const std::string& key, double& out) { with(key, [&](const std::string& v) { out = parse_number(v); }); }
  void get(const std::string& key, bool& out) { with(key, [&](const std::string& v) { out = parse_bool(v); }); }
  void get(const std::string& key, int& out) {
    with(key, [&](const std::string& v) { out = static_cast<int>(parse_unsigned(v)); });
  }
  void get(const std::string& key, std::size_t& out) {
    with(key, [&](const std::string& v) { out = static_cast<std::size_t>(parse_unsigned(v)); });
  }

  void finish() const {
    if (!remaining_.empty()) {
      throw ConfigError(source_ + ": unknown key '" + *remaining_.begin() + "' in [" + section_ + "]");
    }
  }

  static std::uint64_t parse_unsigned(std::string_view v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
      throw ParameterError("expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
  }

  static bool parse_bool(std::string_view v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ParameterError("expected a boolean, got '" + std::string(v) + "'");
  }

 private:
  std::string source_;
  std::string section_;
  const Section& tree_;
  std::set<std::string> remaining_;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto field : split_csv_line(text)) {
    std::string item(field);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  const auto items = split_list(text);
  Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_number(items[i]);
  return v;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source_name,
                              const std::filesystem::path& base_dir) {
  Section root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig c;
  static const std::set<std::string> known{"data", "synthetic", "experiment", "postprocess", "fit"};
  for (const auto& [name, section] : root) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError(source_name + ": key '" + name + "' outside a section");
    }
    if (!known.count(name)) throw ConfigError(source_name + ": unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) -> const Section& {
    static const Section empty;
    auto it = root.find(name);
    return it == root.not_found() ? empty : it->second;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  {
    Reader r(source_name, "data", section("data"));
    r.with("source", [&](const std::string& v) {
      if (v == "synthetic") {
        c.source = DataSource::Synthetic;
      } else if (v == "files") {
        c.source = DataSource::Files;
      } else {
        throw ParameterError("expected synthetic or files, got '" + v + "'");
      }
    });
    r.with("forecasts", [&](const std::string& v) { c.forecasts = resolve(v); });
    r.with("observations", [&](const std::string& v) { c.observations = resolve(v); });
    r.get("exchangeable", c.exchangeable);
    r.finish();
  }
  {
    Reader r(source_name, "synthetic", section("synthetic"));
    SyntheticSpec& s = c.synthetic;
    r.get("stations", s.stations);
    r.get("days", s.days);
    r.get("members", s.members);
    r.get("lead_hours", s.lead_hours);
    r.with("start", [&](const std::string& v) { s.start = parse_date(v); });
    r.get("dispersion", s.dispersion);
    r.get("seasonal_amplitude", s.seasonal_amplitude);
    r.get("wind_mean", s.wind_mean);
    r.get("wind_signal_sd", s.wind_signal_sd);
    r.get("wind_error_sd", s.wind_error_sd);
    r.get("temperature_mean", s.temperature_mean);
    r.get("temperature_signal_sd", s.temperature_signal_sd);
    r.get("temperature_error_sd", s.temperature_error_sd);
    r.with("seed", [&](const std::string& v) { c.synthetic_seed = Reader::parse_unsigned(v); });

    double wind_bias = 0.0, temperature_bias = 0.0;
    bool scalar_bias = false;
    r.with("wind_bias", [&](const std::string& v) { wind_bias = parse_number(v); scalar_bias = true; });
    r.with("temperature_bias", [&](const std::string& v) { temperature_bias = parse_number(v); scalar_bias = true; });
    r.with("bias", [&](const std::string& v) {
      if (scalar_bias) throw ParameterError("give either bias or wind_bias/temperature_bias");
      s.bias = parse_vector(v);
    });
    if (scalar_bias) {
      s.bias.resize(static_cast<Eigen::Index>(2 * s.stations));
      for (Eigen::Index l = 0; l < s.bias.size(); ++l) s.bias[l] = l % 2 == 0 ? wind_bias : temperature_bias;
    }

    CorrelationDefaults corr;
    bool scalar_corr = false;
    auto corr_key = [&](const std::string& key, double& field) {
      r.with(key, [&](const std::string& v) { field = parse_number(v); scalar_corr = true; });
    };
    corr_key("temperature_temperature_correlation", corr.temperature_temperature);
    corr_key("wind_wind_correlation", corr.wind_wind);
    corr_key("wind_temperature_correlation", corr.wind_temperature_same);
    corr_key("cross_station_wind_temperature_correlation", corr.wind_temperature_cross);
    r.with("correlation", [&](const std::string& v) {
      if (scalar_corr) throw ParameterError("give either a full correlation matrix or the scalar correlations");
      const Eigen::VectorXd flat = parse_vector(v);
      const auto L = static_cast<Eigen::Index>(2 * s.stations);
      if (flat.size() != L * L) throw ParameterError("correlation needs (2 * stations)^2 entries, row-major");
      s.correlation = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data(), L, L);
    });
    if (scalar_corr) s.correlation = default_correlation(s.stations, corr);
    r.finish();
  }
  {
    Reader r(source_name, "experiment", section("experiment"));
    r.get("window_days", c.window_days);
    r.get("repetitions", c.repetitions);
    r.with("seed", [&](const std::string& v) { c.seed = Reader::parse_unsigned(v); });
    r.with("output_dir", [&](const std::string& v) { c.output_dir = v; });
    r.with("template", [&](const std::string& v) {
      if (v == "ecc") {
        c.template_source = TemplateSource::EccRawEnsemble;
      } else if (v == "schaake") {
        c.template_source = TemplateSource::SchaakeHistorical;
      } else {
        throw ParameterError("expected ecc or schaake, got '" + v + "'");
      }
    });
    r.with("rankings", [&](const std::string& v) {
      c.rankings.clear();
      for (const auto& item : split_list(v)) c.rankings.push_back(parse_prerank(item));
    });
    r.with("climatology", [&](const std::string& v) {
      if (v == "full") {
        c.climatology = ClimatologyScope::Full;
      } else if (v == "training") {
        c.climatology = ClimatologyScope::Training;
      } else {
        throw ParameterError("expected full or training, got '" + v + "'");
      }
    });
    r.get("test_days", c.test_days);
    r.get("ensemble_size", c.ensemble_size);
    r.get("threads", c.threads);
    r.finish();
  }
  {
    Reader r(source_name, "postprocess", section("postprocess"));
    r.with("method", [&](const std::string& v) { c.method = parse_postprocess_method(v); });
    r.with("ranking", [&](const std::string& v) { c.ranking = parse_prerank(v); });
    r.with("sampling", [&](const std::string& v) { c.sampling = parse_sampling_scheme(v); });
    r.finish();
  }
  {
    Reader r(source_name, "fit", section("fit"));
    r.get("min_training", c.fit.univariate.min_training);
    c.fit.bivariate.min_training = c.fit.univariate.min_training;
    r.get("max_iterations", c.fit.univariate.optimizer.max_iterations);
    r.get("bivariate_max_iterations", c.fit.bivariate.optimizer.max_iterations);
    r.get("tolerance", c.fit.univariate.optimizer.tolerance);
    c.fit.bivariate.optimizer.tolerance = c.fit.univariate.optimizer.tolerance;
    r.get("max_restarts", c.fit.univariate.optimizer.max_restarts);
    c.fit.bivariate.optimizer.max_restarts = c.fit.univariate.optimizer.max_restarts;
    r.get("nonnegative_b", c.fit.univariate.nonnegative_b);
    r.get("min_acceptance", c.fit.sampler.min_acceptance);
    r.get("burn_in", c.fit.sampler.burn_in);
    r.get("thinning", c.fit.sampler.thinning);
    r.finish();
  }
  c.synthetic.exchangeable = c.exchangeable;
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  return parse_config(in, file.string(), file.parent_path());
}

}  // namespace ldpr
