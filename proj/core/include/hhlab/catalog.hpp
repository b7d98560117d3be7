#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hhlab/system.hpp"

namespace hhlab {

struct CatalogEntry {
  std::string key;  // n{N}-{periodic,quasi,chaotic}-{energy fraction}
  int order = 3;
  double energy_fraction = 0.0;  // of the critical energy
  State state;
  bool published = true;  // false for ICs derived here (symmetry lines, Lyapunov scans)
};

// Named initial conditions (m = omega = 1).
const std::vector<CatalogEntry>& list_paper_ics();

// Throws Error(UnknownKey) listing the valid keys.
const CatalogEntry& find_paper_ic(std::string_view key);

}  // namespace hhlab
