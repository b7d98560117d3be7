#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hhlab/integrator.hpp"

namespace hhlab {

// {m, omega, N, dt, E, initial_state: {t, x, y, px, py}}
nlohmann::json trajectory_metadata(const Trajectory& trajectory);

// {m, omega, N} plus the energy the data belongs to.
nlohmann::json params_metadata(const SystemParams& p, double energy);

// CSV with header `t,x,y,px,py`; `stride` keeps every stride-th sample.
std::string trajectory_csv(const Trajectory& trajectory, std::size_t stride = 1);

void write_trajectory(const std::filesystem::path& csv_path, const Trajectory& trajectory,
                      std::size_t stride = 1);

// Reads a CSV written by write_trajectory and its `.json` sidecar (same stem).
Trajectory read_trajectory(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& data_path);

}  // namespace hhlab
