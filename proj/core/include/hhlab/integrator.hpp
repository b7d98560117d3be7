#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "hhlab/system.hpp"

namespace hhlab {

struct IntegrationOptions {
  // Integration stops with Error(Unbounded) once |x| or |y| exceeds this.
  double escape_radius = 10.0;
  // Internal RK4 steps per output sample; samples stay exactly dt apart.
  int substeps = 1;
};

// Uniformly sampled orbit; states[k].t == states[0].t + k * dt.
struct Trajectory {
  SystemParams params;
  double dt = 0.0;
  double energy = 0.0;  // total energy of states.front()
  std::vector<State> states;

  std::size_t size() const { return states.size(); }
  const State& operator[](std::size_t k) const { return states[k]; }
};

// Fundamental matrix of the linearized flow along the orbit, Phi(t0) = I.
struct TangentFrame {
  State state;
  Mat4 phi = Mat4::Identity();
};

// Number of samples floor(t_end/dt) + 1, tolerant to round-off in t_end/dt.
std::size_t sample_count(double t_end, double dt);

// One classical fourth-order Runge-Kutta step of length h.
Vec4 rk4_step(const SystemParams& p, const Vec4& z, double h);

// Joint RK4 step of the orbit and one tangent vector v (v' = J(z) v).
void rk4_tangent_step(const SystemParams& p, Vec4& z, Vec4& v, double h);

// Joint RK4 step of the orbit and the fundamental matrix (Phi' = J(z) Phi).
void rk4_variational_step(const SystemParams& p, Vec4& z, Mat4& phi, double h);

// Streams every sample (including the initial one) to on_sample without storing the
// orbit. Returning false from on_sample stops the run early.
void propagate(const SystemParams& p, const State& start, double t_end, double dt,
               const IntegrationOptions& options,
               const std::function<bool(const State&)>& on_sample);

Trajectory integrate(const SystemParams& p, const State& start, double t_end, double dt,
                     const IntegrationOptions& options = {});

void propagate_variational(const SystemParams& p, const State& start, double t_end, double dt,
                           const IntegrationOptions& options,
                           const std::function<bool(const TangentFrame&)>& on_frame);

std::vector<TangentFrame> integrate_variational(const SystemParams& p, const State& start,
                                                double t_end, double dt,
                                                const IntegrationOptions& options = {});

// Scale symmetry r -> a r. Forces m -> m a^-(N+2), omega -> a^N omega and, for the
// equations of motion to be preserved, t -> a^-N t and p -> p / a. Energies scale as a^N.
SystemParams rescale_params(const SystemParams& p, double alpha);
State rescale_state(const SystemParams& p, const State& s, double alpha);
std::pair<SystemParams, Trajectory> rescale(const SystemParams& p, const Trajectory& trajectory,
                                            double alpha);

}  // namespace hhlab
