#include "ldpr/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <optional>
#include <ostream>

#include "ldpr/config.hpp"
#include "ldpr/dataset_io.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/experiment.hpp"

namespace ldpr {

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out_dir;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "Configuration file");
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "Master seed (overrides the config)");
  app->add_option("--out-dir", c.out_dir, "Output directory (overrides the config)");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig config = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (c.threads) config.threads = *c.threads;
  if (!c.out_dir.empty()) config.output_dir = c.out_dir;
  validate(config);
  return config;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::size_t> selected_dates(const Dataset& ds, const ExperimentConfig& config,
                                        const std::string& date) {
  std::vector<std::size_t> all = test_indices(ds, config);
  if (date.empty()) return all;
  const Date wanted = parse_date(date);
  for (std::size_t i : all) {
    if (ds[i].forecast.valid_date == wanted) return {i};
  }
  throw LookupError("date " + date + " is not a test date with a full training window");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-dimensional postprocessing and reordering of weather ensembles", "ldpr"};
  app.require_subcommand(1);

  Common synth_opts, fit_opts, post_opts, verify_opts, exp_opts;
  std::string fit_date_text, post_date_text, post_output, ensembles_file, observations_file;
  std::size_t repetition = 0;
  std::optional<std::size_t> repetitions, test_days;

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset (forecasts.csv, observations.csv)");
  add_common(synth, synth_opts, false);

  auto* fit = app.add_subcommand("fit", "Write fitted postprocessor parameters for test dates");
  add_common(fit, fit_opts, true);
  fit->add_option("--date", fit_date_text, "Single test date (YYYY-MM-DD)");

  auto* post = app.add_subcommand("postprocess", "Write a postprocessed-ensemble CSV");
  add_common(post, post_opts, true);
  post->add_option("--date", post_date_text, "Single test date (YYYY-MM-DD)");
  post->add_option("--output", post_output, "Output file (default <out-dir>/postprocessed.csv)");
  post->add_option("--repetition", repetition, "Repetition index selecting the random streams");

  auto* verify = app.add_subcommand("verify", "Score an ensemble CSV against observations");
  add_common(verify, verify_opts, false);
  verify->add_option("--ensembles", ensembles_file, "Ensemble CSV")->required();
  verify->add_option("--observations", observations_file, "Observation CSV")->required();

  auto* exp = app.add_subcommand("experiment", "Run the full comparison experiment");
  add_common(exp, exp_opts, true);
  exp->add_option("--threads", exp_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  exp->add_option("--repetitions", repetitions, "Samples per test date")->check(CLI::PositiveNumber);
  exp->add_option("--test-days", test_days, "Score only the first N test dates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (*synth) {
      const ExperimentConfig config = load(synth_opts);
      if (config.source != DataSource::Synthetic) throw ConfigError("synth needs a synthetic data source");
      const Dataset ds = load_dataset(config);
      auto f = open_output(config.output_dir / "forecasts.csv");
      write_forecast_csv(ds, f);
      auto o = open_output(config.output_dir / "observations.csv");
      write_observation_csv(ds, o);
      out << "wrote " << ds.size() << " dates to " << config.output_dir.string() << '\n';
    } else if (*fit) {
      const ExperimentConfig config = load(fit_opts);
      const Dataset ds = load_dataset(config);
      std::vector<UnivariateParamRecord> uni;
      std::vector<BivariateParamRecord> biv;
      for (std::size_t i : selected_dates(ds, config, fit_date_text)) {
        const DateModels models = fit_date(ds, i, config);
        for (auto& r : univariate_records(models, ds, i)) uni.push_back(std::move(r));
        for (auto& r : bivariate_records(models, ds, i)) biv.push_back(std::move(r));
      }
      auto u = open_output(config.output_dir / "univariate_params.csv");
      write_univariate_params_csv(uni, u);
      auto b = open_output(config.output_dir / "bivariate_params.csv");
      write_bivariate_params_csv(biv, b);
      out << "wrote parameters for " << uni.size() << " margin fits and " << biv.size() << " station fits\n";
    } else if (*post) {
      const ExperimentConfig config = load(post_opts);
      const Dataset ds = load_dataset(config);
      std::vector<NamedEnsemble> ensembles;
      for (std::size_t i : selected_dates(ds, config, post_date_text)) {
        const DateModels models = fit_date(ds, i, config);
        ensembles.push_back(postprocess_date(ds, i, models, config, repetition));
      }
      const std::filesystem::path path =
          post_output.empty() ? config.output_dir / "postprocessed.csv" : std::filesystem::path(post_output);
      auto f = open_output(path);
      write_ensemble_csv(ensembles, f);
      out << "wrote " << ensembles.size() << " postprocessed forecasts to " << path.string() << '\n';
    } else if (*verify) {
      const ExperimentConfig config = load(verify_opts);
      std::ifstream in(ensembles_file);
      if (!in) throw Error("cannot open ensemble file " + ensembles_file);
      const auto ensembles = read_ensemble_csv(in, ensembles_file);
      const ObservationSet obs = read_observation_csv(std::filesystem::path(observations_file));
      const ExperimentResult result = verify_ensembles(ensembles, obs, config.seed);
      write_experiment_reports(result, config.output_dir);
      out << "scored " << result.ensembles.size() << " ensembles on " << result.scored_dates << " dates\n";
    } else if (*exp) {
      ExperimentConfig config = load(exp_opts);
      if (repetitions) config.repetitions = *repetitions;
      if (test_days) config.test_days = *test_days;
      const Dataset ds = load_dataset(config);
      const ExperimentResult result = run_experiment(ds, config, &err);
      write_experiment_reports(result, config.output_dir);
      out << "scored " << result.scored_dates << " dates (" << result.skipped.size() << " skipped) into "
          << config.output_dir.string() << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace ldpr
