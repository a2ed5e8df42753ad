#include "ldpr/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "ldpr/errors.hpp"

namespace ldpr {

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw ParameterError("cannot format number");
  return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParameterError("invalid number '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) throw ParameterError("non-finite number '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

namespace {

int parse_nonnegative_int(std::string_view text, const char* what) {
  int value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty() || value < 0) {
    throw ParameterError(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

struct Row {
  Date date;
  MarginIndex margin;
  int member = 0;
  double value = 0.0;
  std::size_t line = 0;
};

// Reads every data row; `with_member` selects the forecast layout.
template <class Visitor>
void read_rows(std::istream& in, const std::string& name, std::string_view header,
               bool with_member, bool with_name, Visitor&& visit) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  ++line_no;
  if (line != header) {
    throw ParseError(name, line_no, "expected header '" + std::string(header) + "'");
  }
  const std::size_t expected = (with_member ? 6 : 5) + (with_name ? 1 : 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected) {
      throw ParseError(name, line_no,
                       "expected " + std::to_string(expected) + " fields, got " +
                           std::to_string(fields.size()));
    }
    std::size_t f = 0;
    std::string ensemble_name;
    Row row;
    row.line = line_no;
    try {
      if (with_name) ensemble_name = std::string(fields[f++]);
      row.date = parse_date(fields[f++]);
      row.margin.station = std::string(fields[f++]);
      if (row.margin.station.empty()) throw ParameterError("empty station");
      row.margin.variable = parse_variable(fields[f++]);
      row.margin.lead_hours = parse_nonnegative_int(fields[f++], "lead_hours");
      if (with_member) {
        row.member = parse_nonnegative_int(fields[f++], "member");
        if (row.member < 1) throw ParameterError("member index must start at 1");
      }
      row.value = parse_number(fields[f++]);
    } catch (const ParameterError& e) {
      throw ParseError(name, line_no, e.what());
    }
    if (is_nonnegative(row.margin.variable) && row.value < 0.0) {
      throw SchemaError(name + ":" + std::to_string(line_no) + ": negative value " +
                        format_number(row.value) + " for margin " + describe(row.margin));
    }
    visit(ensemble_name, row);
  }
}

using MemberMap = std::map<int, double>;
using ForecastTable = std::map<Date, std::map<MarginIndex, MemberMap>>;
using ObservationTable = std::map<Date, std::map<MarginIndex, double>>;

void read_forecasts(std::istream& in, const std::string& name, ForecastTable& table) {
  read_rows(in, name, kForecastHeader, true, false, [&](const std::string&, const Row& row) {
    auto& members = table[row.date][row.margin];
    if (!members.emplace(row.member, row.value).second) {
      throw ParseError(name, row.line, "duplicate row for " + describe(row.margin) + " member " +
                                           std::to_string(row.member));
    }
  });
}

void read_observations(std::istream& in, const std::string& name, ObservationTable& table) {
  read_rows(in, name, kObservationHeader, false, false, [&](const std::string&, const Row& row) {
    if (!table[row.date].emplace(row.margin, row.value).second) {
      throw ParseError(name, row.line, "duplicate observation for " + describe(row.margin));
    }
  });
}

// Member count of one date, or throws when margins disagree.
int member_count(const std::map<MarginIndex, MemberMap>& margins, Date date,
                 const std::string& name) {
  int count = -1;
  for (const auto& [margin, members] : margins) {
    const int m = static_cast<int>(members.size());
    if (members.rbegin()->first != m) {
      throw SchemaError(name + ": member indices of " + describe(margin) + " on " +
                        format_date(date) + " are not 1.." + std::to_string(m));
    }
    if (count >= 0 && m != count) {
      throw SchemaError(name + ": inconsistent member count on " + format_date(date) + " (" +
                        std::to_string(count) + " vs " + std::to_string(m) + " for " +
                        describe(margin) + ")");
    }
    count = m;
  }
  return count;
}

Eigen::MatrixXd to_matrix(const std::map<MarginIndex, MemberMap>& margins,
                          const MarginCatalog& catalog, int m) {
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(catalog.size()));
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    const MemberMap& members = margins.at(catalog[l]);
    for (const auto& [idx, value] : members) {
      out(idx - 1, static_cast<Eigen::Index>(l)) = value;
    }
  }
  return out;
}

}  // namespace

IngestResult ingest_dataset(std::istream& forecasts, std::istream& observations,
                            const IngestOptions& options, const std::string& forecast_name,
                            const std::string& observation_name) {
  ForecastTable ftable;
  ObservationTable otable;
  read_forecasts(forecasts, forecast_name, ftable);
  read_observations(observations, observation_name, otable);

  std::set<MarginIndex> margin_set;
  std::set<Date> all_dates;
  for (const auto& [date, margins] : ftable) {
    all_dates.insert(date);
    for (const auto& entry : margins) margin_set.insert(entry.first);
  }
  for (const auto& [date, margins] : otable) {
    all_dates.insert(date);
    for (const auto& entry : margins) margin_set.insert(entry.first);
  }
  auto catalog = std::make_shared<const MarginCatalog>(
      std::vector<MarginIndex>(margin_set.begin(), margin_set.end()));

  std::vector<Instance> instances;
  std::size_t dropped = 0;
  int ensemble_size = -1;
  for (Date date : all_dates) {
    auto fit = ftable.find(date);
    auto oit = otable.find(date);
    if (fit == ftable.end() || oit == otable.end() || fit->second.size() != catalog->size() ||
        oit->second.size() != catalog->size()) {
      ++dropped;
      continue;
    }
    const int m = member_count(fit->second, date, forecast_name);
    if (ensemble_size >= 0 && m != ensemble_size) {
      throw SchemaError(forecast_name + ": inconsistent member count on " + format_date(date) +
                        " (" + std::to_string(m) + " vs " + std::to_string(ensemble_size) + ")");
    }
    ensemble_size = m;

    Instance inst;
    inst.forecast.valid_date = date;
    inst.forecast.catalog = catalog;
    inst.forecast.exchangeable = options.exchangeable;
    inst.forecast.members = to_matrix(fit->second, *catalog, m);
    inst.observation.valid_date = date;
    inst.observation.values.resize(static_cast<Eigen::Index>(catalog->size()));
    for (std::size_t l = 0; l < catalog->size(); ++l) {
      inst.observation.values[static_cast<Eigen::Index>(l)] = oit->second.at((*catalog)[l]);
    }
    instances.push_back(std::move(inst));
  }
  if (instances.empty()) {
    throw EmptyDatasetError("no date has both a complete forecast and a complete observation");
  }
  return IngestResult{Dataset(catalog, std::move(instances)), dropped};
}

IngestResult ingest_dataset(const std::filesystem::path& forecast_file,
                            const std::filesystem::path& observation_file,
                            const IngestOptions& options) {
  std::ifstream f(forecast_file);
  if (!f) throw Error("cannot open forecast file " + forecast_file.string());
  std::ifstream o(observation_file);
  if (!o) throw Error("cannot open observation file " + observation_file.string());
  return ingest_dataset(f, o, options, forecast_file.string(), observation_file.string());
}

ObservationSet read_observation_csv(std::istream& in, const std::string& source_name) {
  ObservationTable table;
  read_observations(in, source_name, table);
  std::set<MarginIndex> margin_set;
  for (const auto& [date, margins] : table) {
    for (const auto& entry : margins) margin_set.insert(entry.first);
  }
  ObservationSet out;
  out.catalog = std::make_shared<const MarginCatalog>(
      std::vector<MarginIndex>(margin_set.begin(), margin_set.end()));
  for (const auto& [date, margins] : table) {
    if (margins.size() != out.catalog->size()) {
      ++out.dropped_dates;
      continue;
    }
    Observation obs;
    obs.valid_date = date;
    obs.values.resize(static_cast<Eigen::Index>(out.catalog->size()));
    for (std::size_t l = 0; l < out.catalog->size(); ++l) {
      obs.values[static_cast<Eigen::Index>(l)] = margins.at((*out.catalog)[l]);
    }
    out.observations.push_back(std::move(obs));
  }
  if (out.observations.empty()) throw EmptyDatasetError(source_name + ": no complete observation date");
  return out;
}

ObservationSet read_observation_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open observation file " + file.string());
  return read_observation_csv(in, file.string());
}

namespace {

void write_margin_prefix(std::ostream& out, Date date, const MarginIndex& m) {
  out << format_date(date) << ',' << m.station << ',' << to_string(m.variable) << ','
      << m.lead_hours << ',';
}

}  // namespace

void write_forecast_csv(const Dataset& dataset, std::ostream& out) {
  out << kForecastHeader << '\n';
  const MarginCatalog& catalog = *dataset.catalog();
  for (const Instance& inst : dataset.instances()) {
    const auto& x = inst.forecast.members;
    for (std::size_t l = 0; l < catalog.size(); ++l) {
      for (Eigen::Index m = 0; m < x.rows(); ++m) {
        write_margin_prefix(out, inst.forecast.valid_date, catalog[l]);
        out << (m + 1) << ',' << format_number(x(m, static_cast<Eigen::Index>(l))) << '\n';
      }
    }
  }
}

void write_observation_csv(const Dataset& dataset, std::ostream& out) {
  out << kObservationHeader << '\n';
  const MarginCatalog& catalog = *dataset.catalog();
  for (const Instance& inst : dataset.instances()) {
    for (std::size_t l = 0; l < catalog.size(); ++l) {
      write_margin_prefix(out, inst.observation.valid_date, catalog[l]);
      out << format_number(inst.observation.values[static_cast<Eigen::Index>(l)]) << '\n';
    }
  }
}

void write_ensemble_csv(std::span<const NamedEnsemble> ensembles, std::ostream& out,
                        bool header) {
  if (header) out << kEnsembleHeader << '\n';
  for (const NamedEnsemble& e : ensembles) {
    const MarginCatalog& catalog = *e.forecast.catalog;
    const auto& x = e.forecast.members;
    for (std::size_t l = 0; l < catalog.size(); ++l) {
      for (Eigen::Index m = 0; m < x.rows(); ++m) {
        out << e.name << ',';
        write_margin_prefix(out, e.forecast.valid_date, catalog[l]);
        out << (m + 1) << ',' << format_number(x(m, static_cast<Eigen::Index>(l))) << '\n';
      }
    }
  }
}

std::vector<NamedEnsemble> read_ensemble_csv(std::istream& in, const std::string& source_name) {
  std::map<std::pair<std::string, Date>, std::map<MarginIndex, MemberMap>> groups;
  std::set<MarginIndex> margin_set;
  read_rows(in, source_name, kEnsembleHeader, true, true, [&](const std::string& name, const Row& row) {
    if (name.empty()) throw ParseError(source_name, row.line, "empty ensemble_name");
    margin_set.insert(row.margin);
    if (!groups[{name, row.date}][row.margin].emplace(row.member, row.value).second) {
      throw ParseError(source_name, row.line, "duplicate row");
    }
  });
  auto catalog = std::make_shared<const MarginCatalog>(
      std::vector<MarginIndex>(margin_set.begin(), margin_set.end()));
  std::vector<NamedEnsemble> out;
  for (const auto& [key, margins] : groups) {
    if (margins.size() != catalog->size()) {
      throw SchemaError(source_name + ": ensemble '" + key.first + "' on " +
                        format_date(key.second) + " misses margins");
    }
    const int m = member_count(margins, key.second, source_name);
    NamedEnsemble e;
    e.name = key.first;
    e.forecast.valid_date = key.second;
    e.forecast.catalog = catalog;
    e.forecast.members = to_matrix(margins, *catalog, m);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace ldpr
