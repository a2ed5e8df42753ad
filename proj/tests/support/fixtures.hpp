#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "ldpr/core.hpp"
#include "ldpr/rng.hpp"

namespace ldpr::fixture {

inline CatalogPtr catalog(std::vector<MarginIndex> margins) {
  return std::make_shared<const MarginCatalog>(std::move(margins));
}

// One temperature margin at station "a".
inline CatalogPtr temperature_catalog() { return catalog({{Variable::Temperature, "a", 24}}); }

// (wind, temperature) at one station.
inline CatalogPtr pair_catalog() {
  return catalog({{Variable::WindSpeed, "a", 24}, {Variable::Temperature, "a", 24}});
}

// `days` consecutive instances from 2020-01-01 with M random members around
// observation values drawn from rng. Wind columns stay non-negative.
inline Dataset random_dataset(const CatalogPtr& cat, std::size_t days, Eigen::Index members, Rng& rng) {
  std::vector<Instance> instances;
  const Date start = parse_date("2020-01-01");
  const auto L = static_cast<Eigen::Index>(cat->size());
  for (std::size_t d = 0; d < days; ++d) {
    Instance inst;
    inst.forecast.valid_date = inst.observation.valid_date = start + std::chrono::days(static_cast<int>(d));
    inst.forecast.catalog = cat;
    inst.forecast.members.resize(members, L);
    inst.observation.values.resize(L);
    for (Eigen::Index l = 0; l < L; ++l) {
      const bool wind = (*cat)[static_cast<std::size_t>(l)].variable == Variable::WindSpeed;
      const double centre = wind ? 5.0 : 10.0;
      inst.observation.values[l] = std::max(0.0, centre + rng.normal());
      for (Eigen::Index m = 0; m < members; ++m) {
        inst.forecast.members(m, l) = std::max(0.0, centre + rng.normal());
      }
    }
    instances.push_back(std::move(inst));
  }
  return Dataset(cat, std::move(instances));
}

}  // namespace ldpr::fixture
