#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "app.hpp"
#include "hhlab/text.hpp"

namespace {

using hhlab::app::ExperimentConfig;

// Values from the command line; only flags that were actually given override the
// defaults and the --config file.
struct Raw {
  int n = 3;
  double mass = 1.0;
  double omega = 1.0;
  double energy = 0.0;
  double energy_frac = 0.0;
  double dt = 1e-3;
  double t_end = 1000.0;
  double escape_radius = 10.0;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t workers = 0;
  std::string config;
  std::vector<std::string> ics;
  std::vector<std::string> ic_sets;
  std::string grid;
  std::size_t stride = 1;
  int degree = 0;
  double threshold = 0.05;
  double duration = 150.0;
  std::vector<double> dts;
  int steps = 1;
  double renorm_interval = 1.0;
};

using Setter = std::function<void(ExperimentConfig&)>;

struct Binding {
  CLI::Option* option;
  Setter apply;
};

void add_options(CLI::App* sub, Raw& r, std::vector<Binding>& bind) {
  auto opt = [&](CLI::Option* o, Setter s) { bind.push_back({o, std::move(s)}); };
  opt(sub->add_option("--n", r.n, "Order N of the anharmonic term"),
      [&r](ExperimentConfig& c) { c.params.order = r.n; });
  opt(sub->add_option("--mass", r.mass, "Mass m"), [&r](ExperimentConfig& c) { c.params.mass = r.mass; });
  opt(sub->add_option("--omega", r.omega, "Harmonic frequency omega"),
      [&r](ExperimentConfig& c) { c.params.omega = r.omega; });
  auto* e = sub->add_option("--energy", r.energy, "Absolute energy E");
  auto* ef = sub->add_option("--energy-frac", r.energy_frac, "Energy as a fraction of the critical energy");
  e->excludes(ef);
  opt(e, [&r](ExperimentConfig& c) {
    c.energy = r.energy;
    c.energy_frac.reset();
  });
  opt(ef, [&r](ExperimentConfig& c) {
    c.energy_frac = r.energy_frac;
    c.energy.reset();
  });
  opt(sub->add_option("--dt", r.dt, "Sampling step"), [&r](ExperimentConfig& c) { c.dt = r.dt; });
  opt(sub->add_option("--t-end", r.t_end, "Integration length"),
      [&r](ExperimentConfig& c) { c.t_end = r.t_end; });
  opt(sub->add_option("--escape-radius", r.escape_radius, "Stop once |x| or |y| exceeds this"),
      [&r](ExperimentConfig& c) { c.escape_radius = r.escape_radius; });
  opt(sub->add_option("--seed", r.seed, "Seed for random section points"),
      [&r](ExperimentConfig& c) { c.seed = r.seed; });
  opt(sub->add_option("--out", r.out, "Output directory"), [&r](ExperimentConfig& c) { c.out = r.out; });
  opt(sub->add_option("--workers", r.workers, "Worker threads (0: available parallelism)"),
      [&r](ExperimentConfig& c) { c.workers = r.workers; });
  opt(sub->add_option("--ic", r.ics, "Initial condition x,y,px,py (repeatable)")->take_all(),
      [&r](ExperimentConfig& c) {
        c.ics.clear();
        for (const auto& s : r.ics) c.ics.push_back(hhlab::app::parse_state(s));
      });
  opt(sub->add_option("--ic-set", r.ic_sets, "Catalog key, or 'paper' for every entry of this N"),
      [&r](ExperimentConfig& c) { c.ic_keys = r.ic_sets; });
  opt(sub->add_option("--grid", r.grid, "Section grid: 70-random or 50x50"),
      [&r](ExperimentConfig& c) { c.grid = r.grid; });
  opt(sub->add_option("--stride", r.stride, "Keep every stride-th trajectory sample"),
      [&r](ExperimentConfig& c) { c.stride = r.stride; });
  opt(sub->add_option("--degree", r.degree, "Library degree (default N)"),
      [&r](ExperimentConfig& c) { c.degree = r.degree; });
  opt(sub->add_option("--threshold", r.threshold, "Sparsity threshold"),
      [&r](ExperimentConfig& c) { c.threshold = r.threshold; });
  opt(sub->add_option("--duration", r.duration, "Length of the training trajectory"),
      [&r](ExperimentConfig& c) { c.duration = r.duration; });
  opt(sub->add_option("--dts", r.dts, "Comma-separated steps for a coefficient-error sweep")
          ->delimiter(','),
      [&r](ExperimentConfig& c) { c.dts = r.dts; });
  opt(sub->add_option("--steps", r.steps, "Applications of the return map for Gamma_2k"),
      [&r](ExperimentConfig& c) { c.steps = r.steps; });
  opt(sub->add_option("--renorm-interval", r.renorm_interval, "Tangent renormalization interval"),
      [&r](ExperimentConfig& c) { c.renorm_interval = r.renorm_interval; });
  sub->add_option("--config", r.config, "JSON config; explicit flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Henon-Heiles experiments"};
  app.set_version_flag("--version", hhlab::app::version());
  app.require_subcommand(1);

  Raw raw;
  std::vector<Binding> bindings;
  const std::vector<std::pair<std::string, std::string>> tasks = {
      {"simulate", "Integrate orbits and classify their spectra"},
      {"poincare", "Poincare section x = 0, px > 0"},
      {"lyapmap", "Largest Lyapunov exponent over the section plane"},
      {"symmetry", "Symmetry lines and symmetric periodic orbits"},
      {"sindy", "Sparse regression of the equations of motion"},
      {"dtc-scan", "Critical sampling step for spurious terms"},
      {"relation", "Linear relation implied by spurious terms"},
      {"ics", "List the catalog of named initial conditions"},
  };
  for (const auto& [name, help] : tasks) add_options(app.add_subcommand(name, help), raw, bindings);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? hhlab::app::kExitOk : hhlab::app::kExitValidation;
  }

  ExperimentConfig config;
  try {
    if (!raw.config.empty())
      hhlab::app::apply_json(config, nlohmann::json::parse(hhlab::read_text_file(raw.config)));
    for (const auto& b : bindings)
      if (b.option->count() > 0) b.apply(config);
  } catch (const std::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return hhlab::app::kExitValidation;
  }
  config.task = app.get_subcommands().front()->get_name();
  return hhlab::app::run(config, std::cout, std::cerr);
}
