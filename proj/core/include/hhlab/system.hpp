#pragma once

#include <array>
#include <utility>

#include <Eigen/Core>

namespace hhlab {

// One member of the generalized Henon-Heiles family
//   H = (px^2 + py^2)/(2m) + (m w^2/2)(x^2 + y^2) + Im((x + i y)^N)/N.
struct SystemParams {
  double mass = 1.0;
  double omega = 1.0;
  int order = 3;

  // Throws Error(InvalidArgument) unless mass > 0, omega > 0 and order >= 1.
  void validate() const;

  double stiffness() const { return mass * omega * omega; }
};

// Phase-space point (x, y, px, py) at time t.
struct State {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;

  std::array<double, 4> phase() const { return {x, y, px, py}; }
  bool finite() const;
};

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

inline Vec4 to_vec(const State& s) { return {s.x, s.y, s.px, s.py}; }
inline State from_vec(double t, const Vec4& v) { return {t, v[0], v[1], v[2], v[3]}; }

// (Re z^k, Im z^k) for z = x + i y, by the real recurrence z^k = z^{k-1} z.
std::pair<double, double> complex_power(double x, double y, int k);

double potential(const SystemParams& p, double x, double y);

// (dV/dx, dV/dy). The anharmonic part contributes (Im z^{N-1}, Re z^{N-1}).
std::pair<double, double> grad_potential(const SystemParams& p, double x, double y);

// Symmetric 2x2 Hessian of V.
Mat2 hessian_potential(const SystemParams& p, double x, double y);

double kinetic_energy(const SystemParams& p, double px, double py);
double total_energy(const SystemParams& p, const State& s);

// Escape energy (N-2)/(2N), independent of m and omega.
double critical_energy(const SystemParams& p);

// px = sign * sqrt(2m(E - V(x,y)) - py^2). Throws Error(OffShell) on a negative radicand.
double solve_momentum_on_shell(const SystemParams& p, double energy, double x, double y,
                               double py, int sign = +1);

// Hamilton's equations: (x', y', px', py').
Vec4 rhs(const SystemParams& p, const Vec4& z);
Vec4 rhs(const SystemParams& p, const State& s);

// Jacobian of the vector field, [[0, I/m], [-Hess V, 0]].
Mat4 jacobian(const SystemParams& p, const Vec4& z);

}  // namespace hhlab
