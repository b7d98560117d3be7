#include <algorithm>

#include "hhlab/error.hpp"
#include "hhlab/sindy.hpp"

namespace hhlab::sindy {
namespace {

constexpr std::array<const char*, 4> kVariableNames = {"x", "y", "px", "py"};

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

double Monomial::operator()(const Vec4& z) const {
  double v = 1.0;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < exponents[i]; ++k) v *= z[i];
  return v;
}

std::string Monomial::name() const {
  std::string out;
  for (int i = 0; i < 4; ++i) {
    if (exponents[i] == 0) continue;
    if (!out.empty()) out += ' ';
    out += kVariableNames[i];
    if (exponents[i] > 1) out += '^' + std::to_string(exponents[i]);
  }
  return out.empty() ? "1" : out;
}

std::optional<std::size_t> CandidateLibrary::index_of(const std::array<int, 4>& exponents) const {
  for (std::size_t k = 0; k < monomials.size(); ++k)
    if (monomials[k].exponents == exponents) return k;
  return std::nullopt;
}

void CandidateLibrary::evaluate(const Vec4& z, double* out) const {
  // Power tables up to the library degree.
  std::array<std::vector<double>, 4> pow;
  for (int i = 0; i < 4; ++i) {
    pow[i].resize(static_cast<std::size_t>(degree) + 1);
    pow[i][0] = 1.0;
    for (int k = 1; k <= degree; ++k) pow[i][k] = pow[i][k - 1] * z[i];
  }
  for (std::size_t k = 0; k < monomials.size(); ++k) {
    const auto& e = monomials[k].exponents;
    out[k] = pow[0][e[0]] * pow[1][e[1]] * pow[2][e[2]] * pow[3][e[3]];
  }
}

CandidateLibrary build_library(int degree) {
  if (degree < 1) throw Error(ErrorKind::InvalidArgument, "library degree must be >= 1");
  CandidateLibrary lib;
  lib.degree = degree;
  for (int d = 0; d <= degree; ++d) {
    // Descending lexicographic order within degree d.
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b)
        for (int c = d - a - b; c >= 0; --c) lib.monomials.push_back({{a, b, c, d - a - b - c}});
  }
  return lib;
}

Vec4 SparseModel::evaluate(const Vec4& z) const {
  Eigen::VectorXd theta(library.size());
  library.evaluate(z, theta.data());
  return (xi.transpose() * theta).eval();
}

SparseModel exact_model(const SystemParams& p, int degree) {
  p.validate();
  if (degree < p.order - 1)
    throw Error(ErrorKind::LibraryTooSmall, "library degree " + std::to_string(degree) +
                                                " cannot hold the degree-" +
                                                std::to_string(p.order - 1) + " force terms");
  SparseModel model;
  model.library = build_library(degree);
  model.xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.library.size()), 4);
  auto add = [&](std::array<int, 4> e, int column, double c) {
    model.xi(static_cast<Eigen::Index>(*model.library.index_of(e)), column) += c;
  };
  add({0, 0, 1, 0}, 0, 1.0 / p.mass);
  add({0, 0, 0, 1}, 1, 1.0 / p.mass);
  add({1, 0, 0, 0}, 2, -p.stiffness());
  add({0, 1, 0, 0}, 3, -p.stiffness());
  // (x + i y)^M = sum_k C(M, k) x^(M-k) (i y)^k; i^k cycles through 1, i, -1, -i.
  const int m = p.order - 1;
  constexpr std::array<double, 4> re_unit = {1, 0, -1, 0};
  constexpr std::array<double, 4> im_unit = {0, 1, 0, -1};
  for (int k = 0; k <= m; ++k) {
    const double c = binomial(m, k);
    const std::array<int, 4> e = {m - k, k, 0, 0};
    if (im_unit[k % 4] != 0.0) add(e, 2, -c * im_unit[k % 4]);
    if (re_unit[k % 4] != 0.0) add(e, 3, -c * re_unit[k % 4]);
  }
  return model;
}

DerivativeData estimate_derivatives(const Trajectory& trajectory) {
  const std::size_t n = trajectory.size();
  if (n < 3) throw Error(ErrorKind::TooShort, "derivative estimation needs >= 3 samples");
  if (!(trajectory.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "trajectory dt must be positive");
  DerivativeData out;
  out.states.reserve(n - 2);
  out.derivatives.reserve(n - 2);
  const double inv = 1.0 / (2.0 * trajectory.dt);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out.states.push_back(to_vec(trajectory[k]));
    out.derivatives.push_back((to_vec(trajectory[k + 1]) - to_vec(trajectory[k - 1])) * inv);
  }
  return out;
}

Eigen::MatrixXd evaluate_library(const CandidateLibrary& library, const std::vector<Vec4>& states) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> theta(
      static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(library.size()));
  for (std::size_t k = 0; k < states.size(); ++k)
    library.evaluate(states[k], theta.row(static_cast<Eigen::Index>(k)).data());
  return theta;
}

}  // namespace hhlab::sindy
