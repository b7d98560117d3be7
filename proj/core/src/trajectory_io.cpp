#include "hhlab/trajectory_io.hpp"

#include <charconv>
#include <sstream>
#include <string_view>
#include <vector>

#include "hhlab/error.hpp"
#include "hhlab/text.hpp"

namespace hhlab {
namespace {

std::vector<double> parse_row(std::string_view line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::string_view cell =
        line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
      throw Error(ErrorKind::Io, "malformed number '" + std::string(cell) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

nlohmann::json params_metadata(const SystemParams& p, double energy) {
  return {{"m", p.mass}, {"omega", p.omega}, {"N", p.order}, {"E", energy}};
}

nlohmann::json trajectory_metadata(const Trajectory& trajectory) {
  nlohmann::json j = params_metadata(trajectory.params, trajectory.energy);
  j["dt"] = trajectory.dt;
  if (!trajectory.states.empty()) {
    const State& s = trajectory.states.front();
    j["initial_state"] = {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"px", s.px}, {"py", s.py}};
  }
  return j;
}

std::string trajectory_csv(const Trajectory& trajectory, std::size_t stride) {
  if (stride == 0) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
  std::string out = "t,x,y,px,py\n";
  out.reserve(out.size() + trajectory.size() / stride * 100);
  for (std::size_t k = 0; k < trajectory.size(); k += stride) {
    const State& s = trajectory.states[k];
    out += format_double(s.t);
    for (double v : {s.x, s.y, s.px, s.py}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& data_path) {
  std::filesystem::path p = data_path;
  p.replace_extension(".json");
  return p;
}

void write_trajectory(const std::filesystem::path& csv_path, const Trajectory& trajectory,
                      std::size_t stride) {
  write_text_file(csv_path, trajectory_csv(trajectory, stride));
  nlohmann::json meta = trajectory_metadata(trajectory);
  meta["stride"] = stride;
  write_text_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

Trajectory read_trajectory(const std::filesystem::path& csv_path) {
  const auto meta = nlohmann::json::parse(read_text_file(sidecar_path(csv_path)));
  Trajectory traj;
  traj.params.mass = meta.at("m").get<double>();
  traj.params.omega = meta.at("omega").get<double>();
  traj.params.order = meta.at("N").get<int>();
  traj.params.validate();
  traj.dt = meta.at("dt").get<double>() * meta.value("stride", 1);
  traj.energy = meta.at("E").get<double>();

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,px,py")
    throw Error(ErrorKind::Io, csv_path.string() + ": expected header t,x,y,px,py");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = parse_row(line);
    if (row.size() != 5) throw Error(ErrorKind::Io, csv_path.string() + ": expected 5 columns");
    traj.states.push_back({row[0], row[1], row[2], row[3], row[4]});
  }
  if (traj.states.size() < 2) throw Error(ErrorKind::TooShort, "trajectory needs >= 2 samples");
  return traj;
}

}  // namespace hhlab
