#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "hhlab/error.hpp"
#include "hhlab/sindy.hpp"

namespace hhlab::sindy {
namespace {

using Poly = std::vector<double>;  // coefficient of s^k at index k

std::vector<double> real_parts_of_roots(Poly c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  std::vector<double> out;
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return out;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  for (const auto& z : es.eigenvalues()) out.push_back(z.real());
  return out;
}

Poly derivative(const Poly& c) {
  Poly d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  return d;
}

}  // namespace

LinearRelation periodic_relation(const ModelDiff& diff, const Trajectory& trajectory,
                                 double drop_below) {
  LinearRelation rel;
  bool spurious = false;
  for (const auto& t : diff.terms) {
    if (t.equation < 2) continue;  // velocity equations carry no force terms
    if (std::abs(t.reconstructed - t.exact) < drop_below) continue;
    rel.terms.push_back(t);
    spurious = spurious || t.flag != TermFlag::Matched;
  }
  if (!spurious) throw Error(ErrorKind::NoRelation, "no extra or missing force terms to analyse");

  // On y = s x, py = s px the monomial x^a y^b px^c py^d becomes s^(b+d) x^(a+b) px^(c+d);
  // each (equation, a+b, c+d) group must vanish separately.
  std::map<std::array<int, 3>, Poly> groups;
  for (const auto& t : rel.terms) {
    const auto& e = t.monomial.exponents;
    Poly& poly = groups[{t.equation, e[0] + e[1], e[2] + e[3]}];
    const std::size_t power = static_cast<std::size_t>(e[1] + e[3]);
    if (poly.size() <= power) poly.resize(power + 1, 0.0);
    poly[power] += t.reconstructed - t.exact;
  }

  std::vector<double> candidates;
  for (const auto& [key, poly] : groups) {
    for (double r : real_parts_of_roots(poly)) candidates.push_back(r);
    for (double r : real_parts_of_roots(derivative(poly))) candidates.push_back(r);
  }
  auto residual = [&](double s) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [key, poly] : groups) {
      double v = 0.0;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const double term = poly[k] * std::pow(s, static_cast<double>(k));
        v += term;
        den += std::abs(term);
      }
      num += std::abs(v);
    }
    return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  };
  double best = std::numeric_limits<double>::infinity();
  for (double s : candidates) {
    const double r = residual(s);
    if (r < best) {
      best = r;
      rel.slope = s;
    }
  }
  constexpr double kMaxResidual = 0.05;
  if (!(best <= kMaxResidual))
    throw Error(ErrorKind::NoRelation, "extra terms do not vanish on any line y = s x");
  rel.residual = best;

  double sxy = 0.0;
  double sxx = 0.0;
  for (const State& s : trajectory.states) {
    sxy += s.x * s.y;
    sxx += s.x * s.x;
  }
  rel.fitted_slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  return rel;
}

}  // namespace hhlab::sindy
