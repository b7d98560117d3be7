#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hhlab/system.hpp"

namespace hhlab::app {

inline constexpr const char* kTasks[] = {"simulate", "poincare", "lyapmap", "symmetry",
                                         "sindy",    "dtc-scan", "relation", "ics"};

// One experiment. JSON config keys match the long flag names (with '-' -> '_').
struct ExperimentConfig {
  std::string task;
  SystemParams params;
  std::optional<double> energy;
  std::optional<double> energy_frac;
  std::vector<std::array<double, 4>> ics;  // explicit (x, y, px, py)
  std::vector<std::string> ic_keys;        // catalog keys; "paper" selects every entry for N
  std::string grid;                        // "70-random" or "50x50"
  std::uint64_t seed = 1;
  double dt = 1e-3;
  double t_end = 1000.0;
  double escape_radius = 10.0;
  std::size_t workers = 0;  // 0: available parallelism
  std::filesystem::path out = "out";
  std::size_t stride = 1;
  // sindy, dtc-scan, relation
  int degree = 0;  // 0 means N
  double threshold = 0.05;
  double duration = 150.0;
  std::vector<double> dts;  // optional Delta C sweep for dtc-scan
  // symmetry
  int steps = 1;
  // lyapmap
  double renorm_interval = 1.0;
};

// Thrown for configuration problems; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Applies keys of a JSON config object on top of `config`. Unknown keys are errors.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

// Throws ConfigError.
void validate(const ExperimentConfig& config);
double resolve_energy(const ExperimentConfig& config);

// "x,y,px,py" -> array. Throws ConfigError.
std::array<double, 4> parse_state(const std::string& text);

// Runs the task and writes its artifacts, manifest.json and warnings.csv into
// config.out. Returns an exit code; errors are reported as one line on `err`.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace hhlab::app
