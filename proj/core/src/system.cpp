#include "hhlab/system.hpp"

#include <cmath>
#include <string>

#include "hhlab/error.hpp"

namespace hhlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::OffShell: return "off_shell";
    case ErrorKind::Unbounded: return "unbounded";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::NoCrossings: return "no_crossings";
    case ErrorKind::TooShort: return "too_short";
    case ErrorKind::EmptyLine: return "empty_line";
    case ErrorKind::NoReturn: return "no_return";
    case ErrorKind::NoIntersections: return "no_intersections";
    case ErrorKind::NotClosed: return "not_closed";
    case ErrorKind::LibraryTooSmall: return "library_too_small";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::AllClean: return "all_clean";
    case ErrorKind::NoRelation: return "no_relation";
    case ErrorKind::UnknownKey: return "unknown_key";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

void SystemParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw Error(ErrorKind::InvalidArgument, "mass must be positive, got " + std::to_string(mass));
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw Error(ErrorKind::InvalidArgument, "omega must be positive, got " + std::to_string(omega));
  if (order < 1)
    throw Error(ErrorKind::InvalidArgument, "order N must be >= 1, got " + std::to_string(order));
}

bool State::finite() const {
  return std::isfinite(t) && std::isfinite(x) && std::isfinite(y) && std::isfinite(px) &&
         std::isfinite(py);
}

std::pair<double, double> complex_power(double x, double y, int k) {
  double re = 1.0;
  double im = 0.0;
  for (int i = 0; i < k; ++i) {
    const double next_re = re * x - im * y;
    im = re * y + im * x;
    re = next_re;
  }
  return {re, im};
}

double potential(const SystemParams& p, double x, double y) {
  const auto [re, im] = complex_power(x, y, p.order);
  (void)re;
  return 0.5 * p.stiffness() * (x * x + y * y) + im / p.order;
}

std::pair<double, double> grad_potential(const SystemParams& p, double x, double y) {
  const auto [re, im] = complex_power(x, y, p.order - 1);
  const double k = p.stiffness();
  return {k * x + im, k * y + re};
}

Mat2 hessian_potential(const SystemParams& p, double x, double y) {
  const double k = p.stiffness();
  Mat2 h;
  h << k, 0.0, 0.0, k;
  if (p.order >= 2) {
    const auto [re, im] = complex_power(x, y, p.order - 2);
    const double c = p.order - 1;
    h(0, 0) += c * im;
    h(0, 1) += c * re;
    h(1, 0) += c * re;
    h(1, 1) -= c * im;
  }
  return h;
}

double kinetic_energy(const SystemParams& p, double px, double py) {
  return (px * px + py * py) / (2.0 * p.mass);
}

double total_energy(const SystemParams& p, const State& s) {
  return kinetic_energy(p, s.px, s.py) + potential(p, s.x, s.y);
}

double critical_energy(const SystemParams& p) {
  return static_cast<double>(p.order - 2) / (2.0 * p.order);
}

double solve_momentum_on_shell(const SystemParams& p, double energy, double x, double y,
                               double py, int sign) {
  const double radicand = 2.0 * p.mass * (energy - potential(p, x, y)) - py * py;
  if (!(radicand >= 0.0)) {
    throw Error(ErrorKind::OffShell, "point (x=" + std::to_string(x) + ", y=" +
                                         std::to_string(y) + ", py=" + std::to_string(py) +
                                         ") lies outside the accessible region");
  }
  return (sign >= 0 ? 1.0 : -1.0) * std::sqrt(radicand);
}

Vec4 rhs(const SystemParams& p, const Vec4& z) {
  const auto [gx, gy] = grad_potential(p, z[0], z[1]);
  return {z[2] / p.mass, z[3] / p.mass, -gx, -gy};
}

Vec4 rhs(const SystemParams& p, const State& s) { return rhs(p, to_vec(s)); }

Mat4 jacobian(const SystemParams& p, const Vec4& z) {
  Mat4 j = Mat4::Zero();
  j(0, 2) = 1.0 / p.mass;
  j(1, 3) = 1.0 / p.mass;
  j.block<2, 2>(2, 0) = -hessian_potential(p, z[0], z[1]);
  return j;
}

}  // namespace hhlab
