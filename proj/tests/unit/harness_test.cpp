#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ldpr/cli.hpp"
#include "ldpr/config.hpp"
#include "ldpr/dataset_io.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/experiment.hpp"
#include "ldpr/synth.hpp"

namespace ldpr {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ldpr_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "ldpr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.stations = 2;
  s.days = 80;
  s.members = 12;
  return s;
}

TEST(Synth, Deterministic) {
  Rng a(5), b(5);
  const Dataset x = synth_generate(small_spec(), a);
  const Dataset y = synth_generate(small_spec(), b);
  std::ostringstream fx, fy, ox, oy;
  write_forecast_csv(x, fx);
  write_forecast_csv(y, fy);
  write_observation_csv(x, ox);
  write_observation_csv(y, oy);
  EXPECT_EQ(fx.str(), fy.str());
  EXPECT_EQ(ox.str(), oy.str());
  ASSERT_EQ(x.size(), 80u);
  EXPECT_EQ(x.catalog()->size(), 4u);
  EXPECT_EQ((*x.catalog())[0].variable, Variable::WindSpeed);
  EXPECT_EQ((*x.catalog())[0].station, synthetic_station_name(0));
  EXPECT_EQ(synthetic_station_name(0), "st01");
  for (const auto& inst : x.instances()) {
    EXPECT_GE(inst.observation.values[0], 0.0);
    EXPECT_GE(inst.forecast.members.col(2).minCoeff(), 0.0);
  }
}

RankHistogram raw_histogram(const Dataset& ds, HistogramKind kind, Rng& rng) {
  std::vector<VerificationRecord> recs;
  const Climatology clim = fit_climatology(ds);
  for (const auto& inst : ds.instances()) {
    recs.push_back({standardize_columns(inst.forecast.members, clim),
                    standardize_vector(inst.observation.values, clim), ds.catalog()});
  }
  return accumulate_histogram(recs, kind, rng);
}

TEST(Synth, CalibratedAndUnderdispersed) {
  SyntheticSpec spec = small_spec();
  spec.days = 2000;
  spec.members = 50;
  Rng rng(6);
  const Dataset calibrated = synth_generate(spec, rng);
  spec.dispersion = 0.4;
  const Dataset narrow = synth_generate(spec, rng);
  const double good = reliability_index(raw_histogram(calibrated, HistogramKind::Multivariate, rng));
  const double bad = reliability_index(raw_histogram(narrow, HistogramKind::Multivariate, rng));
  EXPECT_LT(good, 0.2);
  EXPECT_GT(bad, 0.4);
}

TEST(Synth, SpecValidation) {
  SyntheticSpec s = small_spec();
  s.dispersion = 0.0;
  EXPECT_THROW(validate(s), ParameterError);
  s = small_spec();
  s.correlation = Eigen::MatrixXd::Constant(4, 4, 1.5);
  s.correlation.diagonal().setOnes();
  EXPECT_THROW(validate(s), ParameterError);
  s.correlation = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(validate(s), ParameterError);
  const Eigen::MatrixXd r = default_correlation(3);
  EXPECT_EQ(r.rows(), 6);
  EXPECT_EQ(r, r.transpose());
  EXPECT_EQ(r(1, 3), 0.9);
  EXPECT_EQ(r(0, 2), 0.7);
  EXPECT_EQ(r(0, 1), -0.3);
  EXPECT_EQ(r(0, 3), -0.25);
}

TEST(Config, Parse) {
  std::istringstream in(
      "; comment\n"
      "[data]\nsource = files\nforecasts = f.csv\nobservations = /abs/o.csv\n"
      "[experiment]\nwindow_days = 30\nrepetitions = 4\nseed = 9\ntemplate = schaake\n"
      "rankings = multivariate, sen\nclimatology = training\nthreads = 2\n"
      "[postprocess]\nmethod = emos_reordered\nsampling = Q\n"
      "[fit]\nmax_iterations = 700\nnonnegative_b = true\n");
  const ExperimentConfig c = parse_config(in, "t.ini", "/base");
  EXPECT_EQ(c.source, DataSource::Files);
  EXPECT_EQ(c.forecasts, fs::path("/base/f.csv"));
  EXPECT_EQ(c.observations, fs::path("/abs/o.csv"));
  EXPECT_EQ(c.window_days, 30u);
  EXPECT_EQ(c.repetitions, 4u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.template_source, TemplateSource::SchaakeHistorical);
  EXPECT_EQ(c.rankings, (std::vector<Prerank>{Prerank::Multivariate, Prerank::SignedEuclidean}));
  EXPECT_EQ(c.climatology, ClimatologyScope::Training);
  EXPECT_EQ(c.threads, 2u);
  EXPECT_EQ(c.method, PostprocessMethod::EmosReordered);
  EXPECT_EQ(c.sampling, SamplingScheme::Q);
  EXPECT_EQ(c.fit.univariate.optimizer.max_iterations, 700u);
  EXPECT_TRUE(c.fit.univariate.nonnegative_b);
}

TEST(Config, SyntheticSection) {
  std::istringstream in("[synthetic]\nstations = 2\ndispersion = 0.5\nwind_bias = 0.5\ntemperature_bias = -1\nseed = 3\n");
  const ExperimentConfig c = parse_config(in, "s.ini");
  EXPECT_EQ(c.synthetic.stations, 2u);
  EXPECT_EQ(c.synthetic.dispersion, 0.5);
  ASSERT_EQ(c.synthetic.bias.size(), 4);
  EXPECT_EQ(c.synthetic.bias[0], 0.5);
  EXPECT_EQ(c.synthetic.bias[3], -1.0);
  EXPECT_EQ(c.synthetic_seed, std::optional<std::uint64_t>(3));
}

TEST(Config, Errors) {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in, "bad.ini"), ConfigError) << text;
  };
  bad("[nope]\nx = 1\n");
  bad("[experiment]\nunknown = 1\n");
  bad("[experiment]\nwindow_days = 5\n");
  bad("[experiment]\nrepetitions = 0\n");
  bad("[experiment]\nwindow_days = many\n");
  bad("[experiment]\ntemplate = other\n");
  bad("[data]\nsource = files\n");
  try {
    load_config("/definitely/missing.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/definitely/missing.ini"), std::string::npos);
  }
}

TEST(Cli, ExitCodes) {
  std::string out, err;
  EXPECT_EQ(cli({}, &out, &err), 1);
  EXPECT_EQ(cli({"bogus"}, &out, &err), 1);
  EXPECT_EQ(cli({"experiment", "--nope"}, &out, &err), 1);
  EXPECT_FALSE(err.empty());
  EXPECT_EQ(cli({"experiment", "--config", "/no/such/file.ini"}, &out, &err), 2);
  EXPECT_NE(err.find("/no/such/file.ini"), std::string::npos);
}

std::string small_config(const fs::path& out_dir, std::size_t threads) {
  return "[synthetic]\nstations = 2\ndays = 70\nmembers = 10\ndispersion = 0.5\nwind_bias = 0.5\n"
         "[experiment]\nwindow_days = 30\nrepetitions = 2\ntest_days = 6\nthreads = " +
         std::to_string(threads) + "\noutput_dir = " + out_dir.string() + "\n";
}

TEST(Experiment, DeterministicAcrossThreads) {
  const fs::path dir = scratch("threads");
  write_file(dir / "one.ini", small_config(dir / "one", 1));
  write_file(dir / "two.ini", small_config(dir / "two", 3));
  ASSERT_EQ(cli({"experiment", "--config", (dir / "one.ini").string(), "--seed", "7"}), 0);
  ASSERT_EQ(cli({"experiment", "--config", (dir / "two.ini").string(), "--seed", "7"}), 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "one")) {
    const fs::path other = dir / "two" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_GE(files, 4u);
  const std::string scores = slurp(dir / "one" / "scores.csv");
  EXPECT_EQ(scores.rfind("ensemble_name,metric,value\n", 0), 0u);
  for (const char* name : {"raw", "emos_ecc_r", "bivariate_emos_unordered", "bivariate_emos_ecc_bivpr",
                           "bivariate_emos_ecc_avpr", "bivariate_emos_ecc_sen"}) {
    EXPECT_NE(scores.find(std::string(name) + ",energy_score,"), std::string::npos) << name;
  }
}

TEST(Experiment, ReportsRoundTrip) {
  ExperimentConfig config;
  config.synthetic = small_spec();
  config.synthetic.days = 60;
  config.window_days = 30;
  config.repetitions = 1;
  config.test_days = 3;
  const Dataset ds = load_dataset(config);
  const ExperimentResult result = run_experiment(ds, config);
  EXPECT_EQ(result.scored_dates, 3u);
  const fs::path dir = scratch("roundtrip");
  write_experiment_reports(result, dir);
  std::ifstream scores(dir / "scores.csv");
  const auto entries = read_score_report(scores, "scores.csv");
  ASSERT_FALSE(entries.empty());
  for (const auto& s : result.ensembles) {
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const ScoreEntry& e) {
      return e.ensemble_name == s.name && e.metric == "energy_score";
    });
    ASSERT_NE(it, entries.end());
    EXPECT_EQ(it->value, s.mean_es);
    std::ifstream h(dir / ("histogram_" + s.name + ".csv"));
    ASSERT_TRUE(h) << s.name;
  }
  std::ostringstream h;
  write_histogram_csv(result.ensembles[0].histograms[0], h);
  std::istringstream back(h.str());
  const RankHistogram r = read_histogram_csv(back, "h");
  EXPECT_EQ(r.counts, result.ensembles[0].histograms[0].counts);
}

TEST(Experiment, PairedRecords) {
  ExperimentConfig config;
  config.synthetic = small_spec();
  config.synthetic.days = 45;
  config.window_days = 40;
  config.repetitions = 3;
  const ExperimentResult result = run_experiment(load_dataset(config), config);
  for (const auto& e : result.ensembles) {
    EXPECT_EQ(e.records, result.ensembles[0].records) << e.name;
  }
  EXPECT_EQ(result.ensembles[1].records, result.scored_dates * 3);
}

TEST(Experiment, NoTestDatesIsAnError) {
  ExperimentConfig config;
  config.synthetic = small_spec();
  config.synthetic.days = 20;
  config.window_days = 30;
  EXPECT_THROW(run_experiment(load_dataset(config), config), ExperimentError);
}

TEST(Cli, SynthThenExperimentOnFiles) {
  const fs::path dir = scratch("files");
  write_file(dir / "synth.ini", "[synthetic]\nstations = 1\ndays = 45\nmembers = 8\n");
  ASSERT_EQ(cli({"synth", "--config", (dir / "synth.ini").string(), "--out-dir", (dir / "data").string()}), 0);
  ASSERT_TRUE(fs::exists(dir / "data" / "forecasts.csv"));
  write_file(dir / "files.ini",
             "[data]\nsource = files\nforecasts = data/forecasts.csv\nobservations = data/observations.csv\n"
             "[experiment]\nwindow_days = 30\nrepetitions = 1\ntest_days = 4\n");
  std::string out, err;
  ASSERT_EQ(cli({"experiment", "--config", (dir / "files.ini").string(), "--out-dir", (dir / "res").string()}, &out,
                &err),
            0)
      << err;
  EXPECT_TRUE(fs::exists(dir / "res" / "reliability.csv"));

  ASSERT_EQ(cli({"fit", "--config", (dir / "files.ini").string(), "--out-dir", (dir / "fit").string()}, &out, &err), 0)
      << err;
  EXPECT_EQ(slurp(dir / "fit" / "bivariate_params.csv").rfind("date,station,param,row,col,value\n", 0), 0u);

  ASSERT_EQ(cli({"postprocess", "--config", (dir / "files.ini").string(), "--out-dir", (dir / "pp").string()}, &out,
                &err),
            0)
      << err;
  ASSERT_EQ(cli({"verify", "--config", (dir / "files.ini").string(), "--ensembles",
                 (dir / "pp" / "postprocessed.csv").string(), "--observations",
                 (dir / "data" / "observations.csv").string(), "--out-dir", (dir / "ver").string()},
                &out, &err),
            0)
      << err;
  EXPECT_NE(slurp(dir / "ver" / "scores.csv").find("bivariate_emos_ecc_bivpr,energy_score,"), std::string::npos);
}

}  // namespace
}  // namespace ldpr
