#include "hhlab/catalog.hpp"

#include "hhlab/error.hpp"

namespace hhlab {

const std::vector<CatalogEntry>& list_paper_ics() {
  static const std::vector<CatalogEntry> entries = {
      {"n3-periodic-0.25", 3, 0.25, {0, 0, -0.21341508, 0.17656123, 0}, true},
      {"n3-quasi-0.75", 3, 0.75, {0, 0, 0.15, 0.479322, 0}, true},
      {"n3-chaotic-0.99", 3, 0.99, {0, 0, 0.1, 0.520545, 0.23}, true},
      {"n4-periodic-0.25", 4, 0.25, {0, 0, 0, 0.32666587, 0.13523834}, true},
      {"n4-quasi-0.75", 4, 0.75, {0, 0, -0.4, 0.234521, -0.4}, true},
      {"n4-chaotic-0.99", 4, 0.99, {0, 0, -0.3, 0.640312, 0}, true},
      // Gamma_0 ∩ Gamma_2 at 3/4 of the critical energy.
      {"n3-periodic-0.75", 3, 0.75, {0, 0, -0.1854050870866648, 0.4597565457699354, 0}, false},
      {"n3-chaotic-0.75", 3, 0.75, {0, 0, -0.1, 0.38643671323171835, 0.3}, false},
      {"n3-quasi-0.25", 3, 0.25, {0, 0, 0.1, 0.25298221281347035, 0.1}, false},
  };
  return entries;
}

const CatalogEntry& find_paper_ic(std::string_view key) {
  for (const auto& e : list_paper_ics())
    if (e.key == key) return e;
  std::string valid;
  for (const auto& e : list_paper_ics()) valid += (valid.empty() ? "" : ", ") + e.key;
  throw Error(ErrorKind::UnknownKey, "unknown initial-condition key '" + std::string(key) +
                                         "'; valid keys: " + valid);
}

}  // namespace hhlab
