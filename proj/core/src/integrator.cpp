#include "hhlab/integrator.hpp"

#include <cmath>
#include <string>

#include "hhlab/error.hpp"

namespace hhlab {
namespace {

void check_step_args(double t_end, double dt, const IntegrationOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw Error(ErrorKind::InvalidArgument, "t_end must be non-negative");
  if (options.substeps < 1)
    throw Error(ErrorKind::InvalidArgument, "substeps must be >= 1");
  if (!(options.escape_radius > 0.0))
    throw Error(ErrorKind::InvalidArgument, "escape radius must be positive");
}

void check_state(const Vec4& z, double t, double radius) {
  if (!z.allFinite())
    throw Error(ErrorKind::NonFinite, "non-finite state at t=" + std::to_string(t));
  if (std::abs(z[0]) > radius || std::abs(z[1]) > radius)
    throw Error(ErrorKind::Unbounded, "orbit left the escape radius at t=" + std::to_string(t));
}

}  // namespace

std::size_t sample_count(double t_end, double dt) {
  return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
}

Vec4 rk4_step(const SystemParams& p, const Vec4& z, double h) {
  const Vec4 k1 = rhs(p, z);
  const Vec4 k2 = rhs(p, Vec4(z + 0.5 * h * k1));
  const Vec4 k3 = rhs(p, Vec4(z + 0.5 * h * k2));
  const Vec4 k4 = rhs(p, Vec4(z + h * k3));
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void rk4_tangent_step(const SystemParams& p, Vec4& z, Vec4& v, double h) {
  const Vec4 z1 = z;
  const Vec4 k1 = rhs(p, z1);
  const Vec4 l1 = jacobian(p, z1) * v;
  const Vec4 z2 = z + 0.5 * h * k1;
  const Vec4 k2 = rhs(p, z2);
  const Vec4 l2 = jacobian(p, z2) * Vec4(v + 0.5 * h * l1);
  const Vec4 z3 = z + 0.5 * h * k2;
  const Vec4 k3 = rhs(p, z3);
  const Vec4 l3 = jacobian(p, z3) * Vec4(v + 0.5 * h * l2);
  const Vec4 z4 = z + h * k3;
  const Vec4 k4 = rhs(p, z4);
  const Vec4 l4 = jacobian(p, z4) * Vec4(v + h * l3);
  z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  v += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

void rk4_variational_step(const SystemParams& p, Vec4& z, Mat4& phi, double h) {
  const Vec4 z1 = z;
  const Vec4 k1 = rhs(p, z1);
  const Mat4 l1 = jacobian(p, z1) * phi;
  const Vec4 z2 = z + 0.5 * h * k1;
  const Vec4 k2 = rhs(p, z2);
  const Mat4 l2 = jacobian(p, z2) * (phi + 0.5 * h * l1);
  const Vec4 z3 = z + 0.5 * h * k2;
  const Vec4 k3 = rhs(p, z3);
  const Mat4 l3 = jacobian(p, z3) * (phi + 0.5 * h * l2);
  const Vec4 z4 = z + h * k3;
  const Vec4 k4 = rhs(p, z4);
  const Mat4 l4 = jacobian(p, z4) * (phi + h * l3);
  z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  phi += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

void propagate(const SystemParams& p, const State& start, double t_end, double dt,
               const IntegrationOptions& options,
               const std::function<bool(const State&)>& on_sample) {
  p.validate();
  check_step_args(t_end, dt, options);
  const std::size_t n = sample_count(t_end, dt);
  const double h = dt / options.substeps;
  Vec4 z = to_vec(start);
  check_state(z, start.t, options.escape_radius);
  if (!on_sample(start)) return;
  for (std::size_t k = 1; k < n; ++k) {
    for (int s = 0; s < options.substeps; ++s) z = rk4_step(p, z, h);
    const double t = start.t + static_cast<double>(k) * dt;
    check_state(z, t, options.escape_radius);
    if (!on_sample(from_vec(t, z))) return;
  }
}

Trajectory integrate(const SystemParams& p, const State& start, double t_end, double dt,
                     const IntegrationOptions& options) {
  check_step_args(t_end, dt, options);
  if (!(t_end > 0.0) || sample_count(t_end, dt) < 2)
    throw Error(ErrorKind::InvalidArgument, "a trajectory needs t_end >= dt > 0");
  Trajectory traj;
  traj.params = p;
  traj.dt = dt;
  traj.energy = total_energy(p, start);
  traj.states.reserve(sample_count(t_end, dt));
  propagate(p, start, t_end, dt, options, [&](const State& s) {
    traj.states.push_back(s);
    return true;
  });
  return traj;
}

void propagate_variational(const SystemParams& p, const State& start, double t_end, double dt,
                           const IntegrationOptions& options,
                           const std::function<bool(const TangentFrame&)>& on_frame) {
  p.validate();
  check_step_args(t_end, dt, options);
  const std::size_t n = sample_count(t_end, dt);
  const double h = dt / options.substeps;
  Vec4 z = to_vec(start);
  Mat4 phi = Mat4::Identity();
  check_state(z, start.t, options.escape_radius);
  if (!on_frame(TangentFrame{start, phi})) return;
  for (std::size_t k = 1; k < n; ++k) {
    for (int s = 0; s < options.substeps; ++s) rk4_variational_step(p, z, phi, h);
    const double t = start.t + static_cast<double>(k) * dt;
    check_state(z, t, options.escape_radius);
    if (!phi.allFinite()) throw Error(ErrorKind::NonFinite, "fundamental matrix overflowed");
    if (!on_frame(TangentFrame{from_vec(t, z), phi})) return;
  }
}

std::vector<TangentFrame> integrate_variational(const SystemParams& p, const State& start,
                                                double t_end, double dt,
                                                const IntegrationOptions& options) {
  check_step_args(t_end, dt, options);
  std::vector<TangentFrame> frames;
  frames.reserve(sample_count(t_end, dt));
  propagate_variational(p, start, t_end, dt, options, [&](const TangentFrame& f) {
    frames.push_back(f);
    return true;
  });
  return frames;
}

SystemParams rescale_params(const SystemParams& p, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  SystemParams q = p;
  q.mass = p.mass * std::pow(alpha, -(p.order + 2));
  q.omega = p.omega * std::pow(alpha, p.order);
  return q;
}

State rescale_state(const SystemParams& p, const State& s, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const double time_scale = std::pow(alpha, -p.order);
  return {s.t * time_scale, alpha * s.x, alpha * s.y, s.px / alpha, s.py / alpha};
}

std::pair<SystemParams, Trajectory> rescale(const SystemParams& p, const Trajectory& trajectory,
                                            double alpha) {
  const SystemParams q = rescale_params(p, alpha);
  Trajectory out;
  out.params = q;
  out.dt = trajectory.dt * std::pow(alpha, -p.order);
  out.energy = trajectory.energy * std::pow(alpha, p.order);
  out.states.reserve(trajectory.size());
  for (const State& s : trajectory.states) out.states.push_back(rescale_state(p, s, alpha));
  return {q, std::move(out)};
}

}  // namespace hhlab
