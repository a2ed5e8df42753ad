#include "ldpr/experiment.hpp"

#include <atomic>
#include <map>
#include <set>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "ldpr/dataset_io.hpp"
#include "ldpr/errors.hpp"
#include "ldpr/synth.hpp"

namespace ldpr {

namespace {

// Stream keys below the per-date key space.
enum StreamKey : std::uint64_t { kUnivariateStream = 1, kBivariateStream, kTemplateStream, kRankStream };
constexpr std::uint64_t kSyntheticStream = 0x5e7d;

std::uint64_t date_key(Date d) { return static_cast<std::uint64_t>(d.time_since_epoch().count()); }

std::string_view template_tag(TemplateSource source) {
  return source == TemplateSource::EccRawEnsemble ? "ecc" : "ss";
}

std::string_view ranking_tag(Prerank p) {
  switch (p) {
    case Prerank::Multivariate:
      return "bivpr";
    case Prerank::Average:
      return "avpr";
    case Prerank::SignedEuclidean:
      return "sen";
    case Prerank::BandDepth:
      return "bdpr";
  }
  return "?";
}

std::size_t output_size(const Dataset& dataset, const ExperimentConfig& config) {
  const auto m = static_cast<std::size_t>(dataset.member_count());
  if (config.template_source == TemplateSource::EccRawEnsemble) {
    if (config.ensemble_size != 0 && config.ensemble_size != m) {
      throw ConfigError("the ECC template requires ensemble_size equal to the raw ensemble size");
    }
    return m;
  }
  return config.ensemble_size == 0 ? m : config.ensemble_size;
}

DependenceTemplate make_template(const Dataset& dataset, std::size_t index, const ExperimentConfig& config,
                                 std::size_t n, std::size_t repetition) {
  const Instance& inst = dataset[index];
  if (config.template_source == TemplateSource::EccRawEnsemble) {
    return build_template_ecc(inst.forecast);
  }
  std::vector<Observation> history;
  history.reserve(index);
  for (std::size_t i = 0; i < index; ++i) history.push_back(dataset[i].observation);
  Rng rng = Rng::substream(config.seed, {date_key(inst.forecast.valid_date), repetition, kTemplateStream});
  return build_template_schaake(history, n, rng);
}

CasePlan make_plan(const CasePartition& partition, Prerank ranking, SamplingScheme sampling, std::size_t n) {
  CasePlan plan;
  plan.partition = partition;
  plan.ranking.prerank = ranking;
  plan.sampling = sampling;
  plan.n = n;
  return plan;
}

std::vector<CaseModel> fit_cases(std::span<const Instance> window, const CasePartition& partition,
                                 const std::vector<CaseModel>* univariate_by_margin,
                                 const ExperimentConfig& config) {
  const bool exchangeable = window.front().forecast.exchangeable;
  std::vector<CaseModel> models;
  models.reserve(partition.cases.size());
  for (const Case& c : partition.cases) {
    if (c.kind == PostprocessorKind::BivariateTruncatedNormal) {
      const auto w = static_cast<Eigen::Index>(c.margins[0]);
      const auto t = static_cast<Eigen::Index>(c.margins[1]);
      std::vector<BivariateTrainingPoint> points(window.size());
      for (std::size_t i = 0; i < window.size(); ++i) {
        const auto& members = window[i].forecast.members;
        points[i].members.resize(members.rows(), 2);
        points[i].members.col(0) = members.col(w);
        points[i].members.col(1) = members.col(t);
        points[i].observation = {window[i].observation.values[w], window[i].observation.values[t]};
      }
      models.emplace_back(fit_bivariate_emos(points, exchangeable, config.fit.bivariate).params);
      continue;
    }
    if (univariate_by_margin != nullptr) {
      models.push_back((*univariate_by_margin)[c.margins[0]]);
      continue;
    }
    const auto l = static_cast<Eigen::Index>(c.margins[0]);
    std::vector<UnivariateTrainingPoint> points(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
      points[i].members = window[i].forecast.members.col(l);
      points[i].observation = window[i].observation.values[l];
    }
    const UnivariateFamily family = c.kind == PostprocessorKind::UnivariateTruncatedNormal
                                        ? UnivariateFamily::TruncatedNormal
                                        : UnivariateFamily::Normal;
    models.emplace_back(fit_univariate_emos(points, family, exchangeable, config.fit.univariate).params);
  }
  return models;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& config) {
  if (config.source == DataSource::Files) {
    IngestOptions options;
    options.exchangeable = config.exchangeable;
    return ingest_dataset(config.forecasts, config.observations, options).dataset;
  }
  Rng rng = Rng::substream(config.synthetic_seed.value_or(config.seed), {kSyntheticStream});
  return synth_generate(config.synthetic, rng);
}

std::vector<std::size_t> test_indices(const Dataset& dataset, const ExperimentConfig& config) {
  std::vector<std::size_t> out;
  for (std::size_t i = config.window_days; i < dataset.size(); ++i) {
    if (config.test_days != 0 && out.size() == config.test_days) break;
    out.push_back(i);
  }
  return out;
}

Climatology scoring_climatology(const Dataset& dataset, const ExperimentConfig& config) {
  return fit_climatology(dataset, config.climatology == ClimatologyScope::Full ? 0 : config.window_days);
}

DateModels fit_date(const Dataset& dataset, std::size_t index, const ExperimentConfig& config) {
  const MarginCatalog& catalog = *dataset.catalog();
  const auto window = training_window(dataset, dataset[index].forecast.valid_date, config.window_days);
  if (window.size() < config.window_days) {
    throw InsufficientTrainingError(window.size(), config.window_days);
  }
  DateModels out;
  out.univariate = univariate_partition(catalog);
  out.bivariate = bivariate_partition(catalog);
  out.univariate_models = fit_cases(window, out.univariate, nullptr, config);
  // univariate_partition has exactly one case per margin, in catalog order.
  out.bivariate_models = fit_cases(window, out.bivariate, &out.univariate_models, config);
  return out;
}

std::vector<UnivariateParamRecord> univariate_records(const DateModels& models, const Dataset& dataset,
                                                      std::size_t index) {
  std::vector<UnivariateParamRecord> out;
  const MarginCatalog& catalog = *dataset.catalog();
  for (std::size_t c = 0; c < models.univariate.cases.size(); ++c) {
    out.push_back({dataset[index].forecast.valid_date, catalog[models.univariate.cases[c].margins[0]],
                   std::get<UnivariateEmosParams>(models.univariate_models[c])});
  }
  return out;
}

std::vector<BivariateParamRecord> bivariate_records(const DateModels& models, const Dataset& dataset,
                                                    std::size_t index) {
  std::vector<BivariateParamRecord> out;
  const MarginCatalog& catalog = *dataset.catalog();
  for (std::size_t c = 0; c < models.bivariate.cases.size(); ++c) {
    if (const auto* p = std::get_if<BivariateEmosParams>(&models.bivariate_models[c])) {
      out.push_back({dataset[index].forecast.valid_date, catalog[models.bivariate.cases[c].margins[0]].station, *p});
    }
  }
  return out;
}

std::string ensemble_name(PostprocessMethod method, TemplateSource source, Prerank ranking,
                          SamplingScheme sampling) {
  switch (method) {
    case PostprocessMethod::EmosReordered:
      return "emos_" + std::string(template_tag(source)) + "_" + (sampling == SamplingScheme::Q ? "q" : "r");
    case PostprocessMethod::BivariateUnordered:
      return "bivariate_emos_unordered";
    case PostprocessMethod::BivariateReordered:
      return "bivariate_emos_" + std::string(template_tag(source)) + "_" + std::string(ranking_tag(ranking));
  }
  return "?";
}

namespace {

struct Postprocessor {
  const Dataset& dataset;
  const ExperimentConfig& config;
  const Climatology* climatology;
  std::size_t n;

  std::uint64_t key(std::size_t index) const { return date_key(dataset[index].forecast.valid_date); }

  ReorderOptions options() const {
    ReorderOptions o;
    o.climatology = climatology;
    o.sampler = config.fit.sampler;
    return o;
  }

  Eigen::MatrixXd emos(std::size_t index, const DateModels& m, const DependenceTemplate& t, std::size_t rep,
                       SamplingScheme sampling) const {
    Rng rng = Rng::substream(config.seed, {key(index), rep, kUnivariateStream});
    const CasePlan plan = make_plan(m.univariate, Prerank::Multivariate, sampling, n);
    return ldp_reorder(dataset[index].forecast, plan, t, m.univariate_models, rng, options()).members;
  }

  Eigen::MatrixXd unordered(std::size_t index, const DateModels& m, std::size_t rep) const {
    Rng rng = Rng::substream(config.seed, {key(index), rep, kBivariateStream});
    const CasePlan plan = make_plan(m.bivariate, Prerank::Multivariate, SamplingScheme::R, n);
    return draw_samples(dataset[index].forecast, plan, m.bivariate_models, rng, options());
  }

  Eigen::MatrixXd bivariate(std::size_t index, const DateModels& m, const DependenceTemplate& t, std::size_t rep,
                            Prerank ranking) const {
    Rng rng = Rng::substream(config.seed, {key(index), rep, kBivariateStream});
    const CasePlan plan = make_plan(m.bivariate, ranking, SamplingScheme::R, n);
    return ldp_reorder(dataset[index].forecast, plan, t, m.bivariate_models, rng, options()).members;
  }
};

}  // namespace

NamedEnsemble postprocess_date(const Dataset& dataset, std::size_t index, const DateModels& models,
                               const ExperimentConfig& config, std::size_t repetition) {
  const Climatology clim = scoring_climatology(dataset, config);
  const Postprocessor pp{dataset, config, &clim, output_size(dataset, config)};
  NamedEnsemble out;
  out.name = ensemble_name(config.method, config.template_source, config.ranking, config.sampling);
  out.forecast.valid_date = dataset[index].forecast.valid_date;
  out.forecast.catalog = dataset.catalog();
  if (config.method == PostprocessMethod::BivariateUnordered) {
    out.forecast.members = pp.unordered(index, models, repetition);
    return out;
  }
  const DependenceTemplate t = make_template(dataset, index, config, pp.n, repetition);
  out.forecast.members = config.method == PostprocessMethod::EmosReordered
                             ? pp.emos(index, models, t, repetition, config.sampling)
                             : pp.bivariate(index, models, t, repetition, config.ranking);
  return out;
}

namespace {

struct Partial {
  double es = 0.0;
  double vs = 0.0;
  std::size_t records = 0;
  std::vector<RankHistogram> histograms;
};

struct DateOutcome {
  bool skipped = false;
  std::string reason;
  std::vector<Partial> ensembles;
};

}  // namespace

ExperimentResult run_experiment(const Dataset& dataset, const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const std::vector<std::size_t> indices = test_indices(dataset, config);
  if (indices.empty()) {
    throw ExperimentError("no date has a full training window of " + std::to_string(config.window_days) + " days");
  }
  const Climatology clim = scoring_climatology(dataset, config);
  const Postprocessor pp{dataset, config, &clim, output_size(dataset, config)};
  const auto m = static_cast<std::size_t>(dataset.member_count());

  std::vector<std::string> names{"raw",
                                 ensemble_name(PostprocessMethod::EmosReordered, config.template_source,
                                               Prerank::Multivariate),
                                 ensemble_name(PostprocessMethod::BivariateUnordered, config.template_source,
                                               Prerank::Multivariate)};
  for (Prerank p : config.rankings) {
    names.push_back(ensemble_name(PostprocessMethod::BivariateReordered, config.template_source, p));
  }

  auto empty_partials = [&] {
    std::vector<Partial> out(names.size());
    for (std::size_t e = 0; e < names.size(); ++e) {
      for (HistogramKind kind : kHistogramKinds) out[e].histograms.emplace_back(kind, e == 0 ? m : pp.n);
    }
    return out;
  };

  auto process = [&](std::size_t index) {
    DateOutcome outcome;
    outcome.ensembles = empty_partials();
    const Instance& inst = dataset[index];
    const Eigen::VectorXd obs = standardize_vector(inst.observation.values, clim);
    try {
      const DateModels models = fit_date(dataset, index, config);
      for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        const DependenceTemplate t = make_template(dataset, index, config, pp.n, rep);
        std::vector<Eigen::MatrixXd> ensembles;
        ensembles.reserve(names.size());
        ensembles.push_back(inst.forecast.members);
        ensembles.push_back(pp.emos(index, models, t, rep, SamplingScheme::R));
        ensembles.push_back(pp.unordered(index, models, rep));
        for (Prerank p : config.rankings) ensembles.push_back(pp.bivariate(index, models, t, rep, p));

        for (std::size_t e = 0; e < ensembles.size(); ++e) {
          VerificationRecord record{standardize_columns(ensembles[e], clim), obs, dataset.catalog()};
          Partial& part = outcome.ensembles[e];
          part.es += energy_score(record);
          part.vs += variogram_score_05(record);
          ++part.records;
          Rng rng = Rng::substream(config.seed, {date_key(inst.forecast.valid_date), rep, kRankStream, e});
          for (RankHistogram& h : part.histograms) h.add(observation_rank(record, h.kind, rng));
        }
      }
    } catch (const Error& e) {
      outcome.skipped = true;
      outcome.reason = e.what();
      outcome.ensembles = empty_partials();
    }
    return outcome;
  };

  std::vector<DateOutcome> outcomes(indices.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < indices.size(); k = next++) {
      try {
        outcomes[k] = process(indices[k]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = indices.size();
      }
    }
  };
  const std::size_t workers = std::min(config.threads, indices.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.repetitions = config.repetitions;
  std::vector<Partial> totals = empty_partials();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const DateOutcome& o = outcomes[k];
    if (o.skipped) {
      result.skipped.push_back({dataset[indices[k]].forecast.valid_date, o.reason});
      if (log != nullptr) {
        *log << "skipped " << format_date(dataset[indices[k]].forecast.valid_date) << ": " << o.reason << '\n';
      }
      continue;
    }
    ++result.scored_dates;
    for (std::size_t e = 0; e < totals.size(); ++e) {
      totals[e].es += o.ensembles[e].es;
      totals[e].vs += o.ensembles[e].vs;
      totals[e].records += o.ensembles[e].records;
      for (std::size_t h = 0; h < totals[e].histograms.size(); ++h) {
        totals[e].histograms[h].merge(o.ensembles[e].histograms[h]);
      }
    }
  }
  if (result.scored_dates == 0) throw ExperimentError("every test date was skipped");

  for (std::size_t e = 0; e < totals.size(); ++e) {
    EnsembleSummary s;
    s.name = names[e];
    s.records = totals[e].records;
    s.mean_es = totals[e].es / static_cast<double>(s.records);
    s.mean_vs = totals[e].vs / static_cast<double>(s.records);
    s.histograms = std::move(totals[e].histograms);
    result.ensembles.push_back(std::move(s));
  }
  return result;
}

ExperimentResult verify_ensembles(std::span<const NamedEnsemble> ensembles, const ObservationSet& observations,
                                  std::uint64_t seed) {
  const Climatology clim = fit_climatology(observations.catalog, observations.observations);
  std::map<Date, const Observation*> by_date;
  for (const auto& o : observations.observations) by_date[o.valid_date] = &o;

  ExperimentResult result;
  result.repetitions = 1;
  std::map<std::string, std::size_t> slot;
  std::vector<Partial> totals;
  std::set<Date> dates;
  for (const NamedEnsemble& ne : ensembles) {
    auto oit = by_date.find(ne.forecast.valid_date);
    if (oit == by_date.end()) {
      result.skipped.push_back({ne.forecast.valid_date, ne.name + ": no observation"});
      continue;
    }
    // Align the ensemble's columns with the observation catalog.
    const MarginCatalog& ecat = *ne.forecast.catalog;
    if (ecat.size() != observations.catalog->size()) {
      throw SchemaError(ne.name + ": ensemble margins differ from the observation margins");
    }
    Eigen::MatrixXd members(ne.forecast.members.rows(), ne.forecast.members.cols());
    for (std::size_t l = 0; l < ecat.size(); ++l) {
      members.col(static_cast<Eigen::Index>(observations.catalog->index_of(ecat[l]))) =
          ne.forecast.members.col(static_cast<Eigen::Index>(l));
    }
    auto [it, inserted] = slot.emplace(ne.name, totals.size());
    if (inserted) {
      Partial p;
      for (HistogramKind kind : kHistogramKinds) p.histograms.emplace_back(kind, static_cast<std::size_t>(members.rows()));
      totals.push_back(std::move(p));
      result.ensembles.push_back({ne.name, 0.0, 0.0, 0, {}});
    }
    Partial& part = totals[it->second];
    VerificationRecord record{standardize_columns(members, clim), standardize_vector(oit->second->values, clim),
                              observations.catalog};
    part.es += energy_score(record);
    part.vs += variogram_score_05(record);
    ++part.records;
    Rng rng = Rng::substream(seed, {date_key(ne.forecast.valid_date), it->second, kRankStream});
    for (RankHistogram& h : part.histograms) h.add(observation_rank(record, h.kind, rng));
    dates.insert(ne.forecast.valid_date);
  }
  if (totals.empty()) throw ExperimentError("no ensemble could be matched with an observation");
  for (std::size_t e = 0; e < totals.size(); ++e) {
    EnsembleSummary& s = result.ensembles[e];
    s.records = totals[e].records;
    s.mean_es = totals[e].es / static_cast<double>(s.records);
    s.mean_vs = totals[e].vs / static_cast<double>(s.records);
    s.histograms = std::move(totals[e].histograms);
  }
  result.scored_dates = dates.size();
  return result;
}

namespace {

std::ofstream open_report(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_experiment_reports(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<ScoreEntry> scores, reliability;
  for (const auto& s : result.ensembles) {
    scores.push_back({s.name, "energy_score", s.mean_es});
    scores.push_back({s.name, "variogram_score_0.5", s.mean_vs});
    scores.push_back({s.name, "records", static_cast<double>(s.records)});
    for (const auto& h : s.histograms) {
      reliability.push_back({s.name, "delta_" + std::string(to_string(h.kind)), reliability_index(h)});
    }
    auto out = open_report(dir / ("histogram_" + s.name + ".csv"));
    bool header = true;
    for (const auto& h : s.histograms) {
      write_histogram_csv(h, out, header);
      header = false;
    }
  }
  {
    auto out = open_report(dir / "scores.csv");
    write_score_report(scores, out);
  }
  {
    auto out = open_report(dir / "reliability.csv");
    write_score_report(reliability, out);
  }
  auto out = open_report(dir / "skipped_dates.csv");
  out << "date,reason\n";
  for (const auto& s : result.skipped) {
    std::string reason = s.reason;
    for (char& ch : reason) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << format_date(s.date) << ',' << reason << '\n';
  }
}

}  // namespace ldpr
