#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <ostream>
#include <sstream>

#include "hhlab/catalog.hpp"
#include "hhlab/diagnostics.hpp"
#include "hhlab/error.hpp"
#include "hhlab/parallel.hpp"
#include "hhlab/sindy.hpp"
#include "hhlab/symmetry.hpp"
#include "hhlab/text.hpp"
#include "hhlab/trajectory_io.hpp"

namespace hhlab::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Collects every file written for one run so the manifest can list them.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void warn(const std::string& item, const std::string& category, const std::string& message) {
    warnings_ += csv_field(item) + "," + csv_field(category) + "," + csv_field(message) + "\n";
  }

  void finish(const ExperimentConfig& config, std::optional<double> energy, const std::string& error) {
    write("warnings.csv", "item,category,message\n" + warnings_);
    json m;
    m["tool"] = "hhlab";
    m["version"] = version();
    m["task"] = config.task;
    m["seed"] = config.seed;
    m["config"] = to_json(config);
    m["energy"] = energy ? json(*energy) : json(nullptr);
    m["status"] = error.empty() ? "ok" : "failed";
    if (!error.empty()) m["error"] = error;
    std::vector<std::string> files = files_;
    files.push_back("manifest.json");
    std::sort(files.begin(), files.end());
    m["files"] = files;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m["timestamp"] = stamp;
    write_text_file(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::string warnings_;
};

struct NamedState {
  std::string name;
  State state;
};

std::string category_of(ErrorKind kind) { return std::string(to_string(kind)); }

bool is_validation(ErrorKind kind) {
  return kind == ErrorKind::InvalidArgument || kind == ErrorKind::UnknownKey ||
         kind == ErrorKind::OffShell || kind == ErrorKind::LibraryTooSmall;
}

std::vector<NamedState> resolve_ics(const ExperimentConfig& config) {
  std::vector<NamedState> out;
  for (std::size_t k = 0; k < config.ics.size(); ++k) {
    const auto& s = config.ics[k];
    out.push_back({"ic" + std::to_string(k), {0.0, s[0], s[1], s[2], s[3]}});
  }
  for (const auto& key : config.ic_keys) {
    if (key == "paper") {
      for (const auto& e : list_paper_ics()) {
        if (e.order != config.params.order) continue;
        if (config.energy_frac && std::abs(e.energy_fraction - *config.energy_frac) > 1e-9) continue;
        out.push_back({e.key, e.state});
      }
      continue;
    }
    const CatalogEntry& e = find_paper_ic(key);
    if (e.order != config.params.order)
      throw ConfigError("initial condition '" + key + "' belongs to N=" + std::to_string(e.order) +
                        " but --n is " + std::to_string(config.params.order));
    out.push_back({e.key, e.state});
  }
  if (!config.ic_keys.empty() && (config.params.mass != 1.0 || config.params.omega != 1.0))
    throw ConfigError("catalog initial conditions assume mass = omega = 1");
  return out;
}

std::vector<NamedState> require_ics(const ExperimentConfig& config) {
  auto ics = resolve_ics(config);
  if (ics.empty()) throw ConfigError(config.task + " needs --ic or --ic-set");
  return ics;
}

IntegrationOptions integration_options(const ExperimentConfig& config, int substeps = 1) {
  IntegrationOptions o;
  o.escape_radius = config.escape_radius;
  o.substeps = substeps;
  return o;
}

struct GridRequest {
  bool random = false;
  std::size_t count = 0;  // random
  std::size_t ny = 0;
  std::size_t npy = 0;
};

GridRequest parse_grid(const std::string& text) {
  GridRequest g;
  auto to_size = [&](const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v == 0) throw ConfigError("malformed --grid '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  const auto dash = text.find('-');
  if (dash != std::string::npos && text.substr(dash + 1) == "random") {
    g.random = true;
    g.count = to_size(text.substr(0, dash));
    return g;
  }
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("--grid must look like 70-random or 50x50");
  g.ny = to_size(text.substr(0, x));
  g.npy = to_size(text.substr(x + 1));
  return g;
}

std::vector<NamedState> section_grid_states(const ExperimentConfig& config, double energy,
                                            const GridRequest& g, Artifacts& art) {
  const auto box = diagnostics::section_bounds(config.params, energy, std::max<std::size_t>(g.ny, 1),
                                               std::max<std::size_t>(g.npy, 1));
  std::vector<std::pair<double, double>> points;
  if (g.random) {
    points = diagnostics::random_section_points(config.params, energy, box, g.count, config.seed);
  } else {
    for (std::size_t i = 0; i < g.ny; ++i)
      for (std::size_t j = 0; j < g.npy; ++j) points.emplace_back(box.y_at(i), box.py_at(j));
  }
  std::vector<NamedState> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    try {
      out.push_back({"grid" + std::to_string(k),
                     diagnostics::lift_section_point(config.params, energy, points[k].first,
                                                     points[k].second, +1)});
    } catch (const Error&) {
      if (g.random) throw;
      art.warn("grid" + std::to_string(k), "off_shell", "grid cell outside the accessible region");
    }
  }
  return out;
}

json state_json(const State& s) { return {{"x", s.x}, {"y", s.y}, {"px", s.px}, {"py", s.py}}; }

// ---------------------------------------------------------------------------

void task_simulate(const ExperimentConfig& config, Artifacts& art, std::ostream& out) {
  const auto ics = require_ics(config);
  std::string spectrum = "orbit,classification,fundamental,peaks,occupancy\n";
  for (const auto& ic : ics) {
    Trajectory tr;
    try {
      tr = integrate(config.params, ic.state, config.t_end, config.dt, integration_options(config));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Unbounded && e.kind() != ErrorKind::NonFinite) throw;
      art.warn(ic.name, category_of(e.kind()), e.what());
      continue;
    }
    const std::string name = "trajectory_" + ic.name + ".csv";
    art.write(name, trajectory_csv(tr, config.stride));
    json meta = trajectory_metadata(tr);
    meta["stride"] = config.stride;
    art.write_json("trajectory_" + ic.name + ".json", meta);
    if (tr.size() >= 1024) {
      const auto rep = diagnostics::classify_spectrum(tr);
      spectrum += ic.name + "," + std::string(to_string(rep.classification)) + "," +
                  format_double(rep.fundamental) + "," + std::to_string(rep.peak_frequencies.size()) +
                  "," + format_double(rep.occupancy) + "\n";
      out << ic.name << ": " << tr.size() << " samples, spectrum " << to_string(rep.classification) << "\n";
    } else {
      art.warn(ic.name, "too_short", "fewer than 1024 samples; spectrum skipped");
      out << ic.name << ": " << tr.size() << " samples\n";
    }
  }
  art.write("spectrum.csv", spectrum);
}

void task_poincare(const ExperimentConfig& config, std::optional<double> energy, Artifacts& art,
                   std::ostream& out) {
  std::vector<NamedState> ics = resolve_ics(config);
  if (!config.grid.empty()) {
    if (!energy) throw ConfigError("--grid needs --energy or --energy-frac");
    const auto more = section_grid_states(config, *energy, parse_grid(config.grid), art);
    ics.insert(ics.end(), more.begin(), more.end());
  }
  if (ics.empty()) throw ConfigError("poincare needs --ic, --ic-set or --grid");
  std::vector<State> states;
  for (const auto& ic : ics) states.push_back(ic.state);
  diagnostics::SectionOptions opts;
  opts.integration = integration_options(config);
  opts.workers = config.workers;
  const auto set = diagnostics::poincare_section(config.params, states, config.t_end, config.dt, opts);

  std::string csv = "orbit_id,t,y,py\n";
  json orbits = json::array();
  std::size_t total = 0;
  for (const auto& o : set.orbits) {
    for (const auto& pt : o.points)
      csv += std::to_string(o.orbit_id) + "," + format_double(pt.t) + "," + format_double(pt.y) +
             "," + format_double(pt.py) + "\n";
    total += o.points.size();
    if (o.status != diagnostics::OrbitStatus::Ok)
      art.warn(ics[o.orbit_id].name, std::string(to_string(o.status)), o.message);
    orbits.push_back({{"orbit_id", o.orbit_id},
                      {"name", ics[o.orbit_id].name},
                      {"initial_state", state_json(o.initial)},
                      {"energy", o.energy},
                      {"status", to_string(o.status)},
                      {"crossings", o.points.size()}});
  }
  art.write("section.csv", csv);
  json meta = params_metadata(config.params, energy.value_or(set.energy));
  meta["dt"] = config.dt;
  meta["t_max"] = config.t_end;
  meta["orientation"] = "+px";
  meta["orbits"] = orbits;
  art.write_json("section.json", meta);
  out << ics.size() << " orbits, " << total << " crossings\n";
}

void task_lyapmap(const ExperimentConfig& config, double energy, Artifacts& art, std::ostream& out) {
  const GridRequest g = parse_grid(config.grid.empty() ? "50x50" : config.grid);
  diagnostics::LyapunovOptions opts;
  opts.renorm_interval = config.renorm_interval;
  opts.integration = integration_options(config);
  std::string csv = "y,py,lambda,status\n";
  json meta = params_metadata(config.params, energy);
  meta["t_total"] = config.t_end;
  meta["dt"] = config.dt;
  meta["renorm_interval"] = config.renorm_interval;
  std::size_t escaped = 0;
  auto row = [&](double y, double py, double lambda, diagnostics::CellStatus st) {
    csv += format_double(y) + "," + format_double(py) + "," + format_double(lambda) + "," +
           std::string(to_string(st)) + "\n";
    if (st == diagnostics::CellStatus::Escaped || st == diagnostics::CellStatus::NonFinite) {
      ++escaped;
      art.warn("(" + format_double(y) + " " + format_double(py) + ")", std::string(to_string(st)),
               "orbit failed during the Lyapunov run");
    }
  };
  if (g.random) {
    const auto box = diagnostics::section_bounds(config.params, energy, 1, 1);
    const auto points = diagnostics::random_section_points(config.params, energy, box, g.count, config.seed);
    const auto scatter = diagnostics::lyapunov_scatter(config.params, energy, points, config.t_end,
                                                       config.dt, opts, config.workers);
    for (const auto& s : scatter) row(s.y, s.py, s.lambda, s.status);
    meta["mode"] = "random";
    meta["count"] = g.count;
    meta["seed"] = config.seed;
  } else {
    const auto grid = diagnostics::section_bounds(config.params, energy, g.ny, g.npy);
    const auto map = diagnostics::lyapunov_map(config.params, energy, grid, config.t_end, config.dt,
                                               opts, config.workers);
    for (std::size_t i = 0; i < grid.ny; ++i)
      for (std::size_t j = 0; j < grid.npy; ++j) {
        const auto c = map.index(i, j);
        row(grid.y_at(i), grid.py_at(j), map.values[c], map.status[c]);
      }
    meta["mode"] = "grid";
    meta["grid"] = {{"y_min", grid.y_min}, {"y_max", grid.y_max}, {"py_min", grid.py_min},
                    {"py_max", grid.py_max}, {"ny", grid.ny},     {"npy", grid.npy}};
  }
  art.write("lyapmap.csv", csv);
  art.write_json("lyapmap.json", meta);
  out << "lyapunov map written" << (escaped ? " (" + std::to_string(escaped) + " failed cells)" : "")
      << "\n";
}

void task_symmetry(const ExperimentConfig& config, double energy, Artifacts& art, std::ostream& out) {
  symmetry::SymmetryOptions opts;
  opts.dt = config.dt;
  opts.integration = integration_options(config);
  opts.workers = config.workers;
  const auto g0 = symmetry::gamma0(config.params, energy, opts);
  art.write("gamma0.csv", symmetry::symmetry_line_csv(g0));
  const auto g = symmetry::advance_line(config.params, energy, g0, config.steps, opts);
  for (const auto& msg : g.log) art.warn("gamma" + std::to_string(g.index), "no_return", msg);
  art.write("gamma" + std::to_string(g.index) + ".csv", symmetry::symmetry_line_csv(g));
  std::vector<symmetry::PeriodicIc> ics;
  try {
    ics = symmetry::periodic_ics(config.params, energy, opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoIntersections) throw;
    art.warn("periodic_ics", category_of(e.kind()), e.what());
  }
  json j = params_metadata(config.params, energy);
  j["involution"] = symmetry::involution_for(config.params).kind == symmetry::InvolutionKind::MomentumTime
                        ? "momentum-time"
                        : "coordinate-time";
  j["periodic_ics"] = symmetry::periodic_ics_json(ics);
  art.write_json("periodic_ics.json", j);
  out << ics.size() << " periodic initial conditions on Gamma_0 ∩ Gamma_2\n";
}

sindy::StlsqOptions stlsq_options(const ExperimentConfig& config) {
  sindy::StlsqOptions o;
  o.threshold = config.threshold;
  return o;
}

sindy::DataOptions data_options(const ExperimentConfig& config) {
  sindy::DataOptions d;
  d.duration = config.duration;
  d.integration = integration_options(config);
  return d;
}

int degree_of(const ExperimentConfig& config) {
  return config.degree > 0 ? config.degree : config.params.order;
}

void task_sindy(const ExperimentConfig& config, Artifacts& art, std::ostream& out) {
  const auto exact = sindy::exact_model(config.params, degree_of(config));
  for (const auto& ic : require_ics(config)) {
    const auto model = sindy::reconstruct_from_ic(config.params, ic.state, config.dt, degree_of(config),
                                                  stlsq_options(config), data_options(config));
    const auto diff = sindy::model_diff(model, exact);
    art.write_json("model_" + ic.name + ".json", sindy::model_json(model));
    art.write("model_diff_" + ic.name + ".csv", sindy::model_diff_csv(diff));
    out << ic.name << ": " << (diff.clean() ? "exact support" : "spurious terms") << ", max |dC| "
        << format_double(diff.max_abs_delta_c()) << "\n";
  }
}

void task_dtc(const ExperimentConfig& config, Artifacts& art, std::ostream& out) {
  sindy::DtcOptions opts;
  opts.degree = degree_of(config);
  opts.stlsq = stlsq_options(config);
  opts.data = data_options(config);
  opts.workers = config.workers;
  std::string table = "orbit,dt_c,zero,status\n";
  std::string probes = "orbit,dt,dirty\n";
  for (const auto& ic : require_ics(config)) {
    try {
      const auto r = sindy::find_dtc(config.params, ic.state, opts);
      table += ic.name + "," + format_double(r.dt_c) + "," + (r.zero ? "true" : "false") + ",ok\n";
      for (const auto& p : r.probes)
        probes += ic.name + "," + format_double(p.dt) + "," + (p.dirty ? "true" : "false") + "\n";
      out << ic.name << ": dt_c = " << (r.zero ? "0 (dirty at every step)" : format_double(r.dt_c)) << "\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AllClean && e.kind() != ErrorKind::Unbounded &&
          e.kind() != ErrorKind::NonFinite)
        throw;
      table += ic.name + ",,," + category_of(e.kind()) + "\n";
      art.warn(ic.name, category_of(e.kind()), e.what());
      out << ic.name << ": " << category_of(e.kind()) << "\n";
    }
    if (!config.dts.empty())
      art.write("sweep_" + ic.name + ".csv",
                sindy::sweep_csv(sindy::delta_c_sweep(config.params, ic.state, config.dts, opts)));
  }
  art.write("dtc.csv", table);
  art.write("dtc_probes.csv", probes);
}

void task_relation(const ExperimentConfig& config, Artifacts& art, std::ostream& out) {
  const auto exact = sindy::exact_model(config.params, degree_of(config));
  for (const auto& ic : require_ics(config)) {
    const auto model = sindy::reconstruct_from_ic(config.params, ic.state, config.dt, degree_of(config),
                                                  stlsq_options(config), data_options(config));
    const auto diff = sindy::model_diff(model, exact);
    art.write_json("model_" + ic.name + ".json", sindy::model_json(model));
    art.write("model_diff_" + ic.name + ".csv", sindy::model_diff_csv(diff));

    // The source orbit, sampled every 0.01 time units.
    const double sample = 1e-2;
    const auto tr = integrate(config.params, ic.state, config.duration, sample,
                              integration_options(config, sindy::substeps_for(sample, 1e-3)));
    const auto series = sindy::extra_term_series(model, exact, tr);
    std::string csv = "t,xdot,ydot,pxdot,pydot\n";
    double max_extra = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
      csv += format_double(tr[k].t);
      for (int c = 0; c < 4; ++c) csv += "," + format_double(series[k][c]);
      csv += "\n";
      max_extra = std::max(max_extra, series[k].cwiseAbs().maxCoeff());
    }
    art.write("extra_terms_" + ic.name + ".csv", csv);

    const auto rel = sindy::periodic_relation(diff, tr);
    json terms = json::array();
    for (const auto& t : rel.terms)
      terms.push_back({{"equation", sindy::kEquationNames[static_cast<std::size_t>(t.equation)]},
                       {"monomial", t.monomial.name()},
                       {"difference", t.reconstructed - t.exact}});
    art.write_json("relation_" + ic.name + ".json", {{"slope", rel.slope},
                                                     {"residual", rel.residual},
                                                     {"fitted_slope", rel.fitted_slope},
                                                     {"max_abs_extra", max_extra},
                                                     {"terms", terms}});
    out << ic.name << ": y = " << format_double(rel.slope) << " x (trajectory fit "
        << format_double(rel.fitted_slope) << "), max |S_extra| " << format_double(max_extra) << "\n";
  }
}

void task_ics(Artifacts& art, std::ostream& out) {
  json arr = json::array();
  for (const auto& e : list_paper_ics()) {
    arr.push_back({{"key", e.key},
                   {"N", e.order},
                   {"energy_fraction", e.energy_fraction},
                   {"state", {e.state.x, e.state.y, e.state.px, e.state.py}},
                   {"source", e.published ? "published" : "derived"}});
    out << e.key << " " << format_double(e.state.x) << "," << format_double(e.state.y) << ","
        << format_double(e.state.px) << "," << format_double(e.state.py) << "\n";
  }
  art.write_json("ics.json", arr);
}

std::vector<double> number_list(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(std::string(key) + " must be a number or a list");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

}  // namespace

std::string version() { return HHLAB_VERSION; }

std::array<double, 4> parse_state(const std::string& text) {
  std::array<double, 4> s{};
  std::stringstream in(text);
  std::string cell;
  std::size_t n = 0;
  while (std::getline(in, cell, ',')) {
    if (n == 4) throw ConfigError("initial condition needs 4 values, got more: '" + text + "'");
    std::size_t pos = 0;
    try {
      s[n] = std::stod(cell, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    while (pos < cell.size() && cell[pos] == ' ') ++pos;
    if (pos != cell.size()) throw ConfigError("malformed number '" + cell + "' in initial condition");
    ++n;
  }
  if (n != 4) throw ConfigError("initial condition needs 4 values x,y,px,py: '" + text + "'");
  return s;
}

void apply_json(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "task") c.task = v.get<std::string>();
      else if (key == "n") c.params.order = v.get<int>();
      else if (key == "mass") c.params.mass = v.get<double>();
      else if (key == "omega") c.params.omega = v.get<double>();
      else if (key == "energy") c.energy = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "energy_frac")
        c.energy_frac = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "ic") {
        c.ics.clear();
        auto add = [&](const json& x) {
          if (x.is_string()) c.ics.push_back(parse_state(x.get<std::string>()));
          else c.ics.push_back(x.get<std::array<double, 4>>());
        };
        if (v.is_array() && !v.empty() && (v[0].is_array() || v[0].is_string()))
          for (const auto& x : v) add(x);
        else add(v);
      } else if (key == "ic_set") {
        c.ic_keys = v.is_string() ? std::vector<std::string>{v.get<std::string>()}
                                  : v.get<std::vector<std::string>>();
      } else if (key == "grid") c.grid = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "dt") c.dt = v.get<double>();
      else if (key == "t_end") c.t_end = v.get<double>();
      else if (key == "escape_radius") c.escape_radius = v.get<double>();
      else if (key == "workers") c.workers = v.get<std::size_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "stride") c.stride = v.get<std::size_t>();
      else if (key == "degree") c.degree = v.get<int>();
      else if (key == "threshold") c.threshold = v.get<double>();
      else if (key == "duration") c.duration = v.get<double>();
      else if (key == "dts") c.dts = number_list(v, "dts");
      else if (key == "steps") c.steps = v.get<int>();
      else if (key == "renorm_interval") c.renorm_interval = v.get<double>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json ics = json::array();
  for (const auto& s : c.ics) ics.push_back(s);
  json j = {{"task", c.task},
            {"n", c.params.order},
            {"mass", c.params.mass},
            {"omega", c.params.omega},
            {"energy", c.energy ? json(*c.energy) : json(nullptr)},
            {"energy_frac", c.energy_frac ? json(*c.energy_frac) : json(nullptr)},
            {"ic", ics},
            {"ic_set", c.ic_keys},
            {"grid", c.grid},
            {"seed", c.seed},
            {"dt", c.dt},
            {"t_end", c.t_end},
            {"escape_radius", c.escape_radius},
            {"workers", c.workers},
            {"out", c.out.string()},
            {"stride", c.stride},
            {"degree", c.degree},
            {"threshold", c.threshold},
            {"duration", c.duration},
            {"dts", c.dts},
            {"steps", c.steps},
            {"renorm_interval", c.renorm_interval}};
  return j;
}

void validate(const ExperimentConfig& c) {
  if (std::find(std::begin(kTasks), std::end(kTasks), c.task) == std::end(kTasks))
    throw ConfigError("unknown task '" + c.task + "'");
  if (!(c.params.mass > 0.0) || !(c.params.omega > 0.0) || c.params.order < 1)
    throw ConfigError("need mass > 0, omega > 0 and N >= 1");
  if (c.energy && c.energy_frac) throw ConfigError("give either --energy or --energy-frac, not both");
  if (c.energy_frac && !(*c.energy_frac > 0.0 && *c.energy_frac <= 1.0))
    throw ConfigError("--energy-frac must lie in (0, 1]");
  if (c.energy_frac && c.params.order <= 2)
    throw ConfigError("--energy-frac needs N >= 3 (no critical energy below that)");
  if (c.energy && !std::isfinite(*c.energy)) throw ConfigError("--energy must be finite");
  if (!(c.dt > 0.0)) throw ConfigError("--dt must be positive");
  if (!(c.t_end > 0.0)) throw ConfigError("--t-end must be positive");
  if (!(c.escape_radius > 0.0)) throw ConfigError("escape radius must be positive");
  if (c.stride < 1) throw ConfigError("--stride must be >= 1");
  if (c.degree < 0) throw ConfigError("--degree must be >= 1 (or 0 for N)");
  if (!(c.threshold >= 0.0)) throw ConfigError("--threshold must be non-negative");
  if (!(c.duration > 0.0)) throw ConfigError("--duration must be positive");
  if (c.steps < 1) throw ConfigError("--steps must be >= 1");
  if (!(c.renorm_interval > 0.0)) throw ConfigError("--renorm-interval must be positive");
  for (double d : c.dts)
    if (!(d > 0.0)) throw ConfigError("--dts entries must be positive");
  if (!c.grid.empty()) parse_grid(c.grid);
}

double resolve_energy(const ExperimentConfig& c) {
  if (c.energy) return *c.energy;
  if (c.energy_frac) return *c.energy_frac * critical_energy(c.params);
  throw ConfigError(c.task + " needs --energy or --energy-frac");
}

int run(const ExperimentConfig& requested, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = requested;
  if (config.workers == 0) config.workers = default_workers();
  try {
    validate(config);
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    return kExitValidation;
  }
  Artifacts art(config.out);
  std::optional<double> energy;
  if (config.energy || config.energy_frac) energy = resolve_energy(config);

  int code = kExitOk;
  std::string failure;
  try {
    const std::string& t = config.task;
    if (t == "simulate") task_simulate(config, art, out);
    else if (t == "poincare") task_poincare(config, energy, art, out);
    else if (t == "lyapmap") task_lyapmap(config, resolve_energy(config), art, out);
    else if (t == "symmetry") task_symmetry(config, resolve_energy(config), art, out);
    else if (t == "sindy") task_sindy(config, art, out);
    else if (t == "dtc-scan") task_dtc(config, art, out);
    else if (t == "relation") task_relation(config, art, out);
    else if (t == "ics") task_ics(art, out);
  } catch (const ConfigError& e) {
    failure = "config: " + std::string(e.what());
    code = kExitValidation;
  } catch (const Error& e) {
    failure = category_of(e.kind()) + ": " + e.what();
    code = is_validation(e.kind()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    failure = std::string("internal: ") + e.what();
    code = kExitRuntime;
  }
  try {
    art.finish(config, energy, failure);
  } catch (const std::exception& e) {
    if (failure.empty()) failure = std::string("io: ") + e.what();
    code = kExitRuntime;
  }
  if (!failure.empty()) err << "error: " << failure << "\n";
  return code;
}

}  // namespace hhlab::app
