#include <cmath>

#include "hhlab/error.hpp"
#include "hhlab/parallel.hpp"
#include "hhlab/sindy.hpp"

namespace hhlab::sindy {
namespace {

int resolve_degree(const SystemParams& p, int degree) { return degree > 0 ? degree : p.order; }

bool is_dirty(const ModelDiff& diff) { return !diff.clean(); }

}  // namespace

SparseModel reconstruct(const Trajectory& trajectory, int degree, const StlsqOptions& options) {
  const DerivativeData data = estimate_derivatives(trajectory);
  SparseModel model;
  model.library = build_library(degree);
  model.threshold = options.threshold;
  model.dt = trajectory.dt;
  RegressionAccumulator acc(model.library.size(), 4);
  std::vector<double> row(model.library.size());
  for (std::size_t k = 0; k < data.states.size(); ++k) {
    model.library.evaluate(data.states[k], row.data());
    acc.add_row(row.data(), data.derivatives[k].data());
  }
  model.xi = stlsq(acc.finish(), options).xi;
  return model;
}

int substeps_for(double dt, double max_internal_step) {
  if (!(max_internal_step > 0.0)) return 1;
  return std::max(1, static_cast<int>(std::ceil(dt / max_internal_step - 1e-9)));
}

SparseModel reconstruct_from_ic(const SystemParams& p, const State& ic, double dt, int degree,
                                const StlsqOptions& options, const DataOptions& data) {
  if (!(dt > 0.0) || !(data.duration > 0.0))
    throw Error(ErrorKind::InvalidArgument, "reconstruction needs dt > 0 and duration > 0");
  if (sample_count(data.duration, dt) < 3)
    throw Error(ErrorKind::TooShort, "duration holds fewer than 3 samples at this dt");
  SparseModel model;
  model.library = build_library(degree);
  model.threshold = options.threshold;
  model.dt = dt;

  IntegrationOptions integration = data.integration;
  integration.substeps = substeps_for(dt, data.max_internal_step);
  RegressionAccumulator acc(model.library.size(), 4);
  std::vector<double> row(model.library.size());
  const double inv = 1.0 / (2.0 * dt);
  Vec4 older;
  Vec4 prev;
  std::size_t seen = 0;
  propagate(p, ic, data.duration, dt, integration, [&](const State& s) {
    const Vec4 z = to_vec(s);
    if (seen >= 2) {
      const Vec4 deriv = (z - older) * inv;
      model.library.evaluate(prev, row.data());
      acc.add_row(row.data(), deriv.data());
    }
    older = prev;
    prev = z;
    ++seen;
    return true;
  });
  model.xi = stlsq(acc.finish(), options).xi;
  return model;
}

std::string_view to_string(TermFlag f) noexcept {
  switch (f) {
    case TermFlag::Matched: return "matched";
    case TermFlag::Extra: return "extra";
    case TermFlag::Missing: return "missing";
  }
  return "unknown";
}

bool ModelDiff::clean() const {
  for (const auto& t : terms)
    if (t.flag != TermFlag::Matched) return false;
  return true;
}

std::size_t ModelDiff::count(TermFlag f) const {
  std::size_t n = 0;
  for (const auto& t : terms) n += t.flag == f ? 1 : 0;
  return n;
}

double ModelDiff::max_abs_delta_c() const {
  double m = 0.0;
  for (const auto& t : terms)
    if (t.flag == TermFlag::Matched && t.delta_c) m = std::max(m, std::abs(*t.delta_c));
  return m;
}

ModelDiff model_diff(const SparseModel& reconstructed, const SparseModel& exact, double presence) {
  if (!(reconstructed.library.monomials == exact.library.monomials) ||
      reconstructed.xi.cols() != exact.xi.cols())
    throw Error(ErrorKind::InvalidArgument, "model_diff needs models over the same library");
  ModelDiff diff;
  diff.presence = presence;
  for (Eigen::Index j = 0; j < exact.xi.cols(); ++j) {
    for (std::size_t k = 0; k < exact.library.size(); ++k) {
      const Eigen::Index i = static_cast<Eigen::Index>(k);
      const double e = exact.xi(i, j);
      const double r = reconstructed.xi(i, j);
      const bool present = std::abs(r) >= presence;
      if (e == 0.0 && !present) continue;
      TermDiff t;
      t.equation = static_cast<int>(j);
      t.monomial = exact.library.monomials[k];
      t.exact = e;
      t.reconstructed = r;
      if (e != 0.0) {
        t.delta_c = (e - r) / e;
        t.flag = present ? TermFlag::Matched : TermFlag::Missing;
      } else {
        t.flag = TermFlag::Extra;
      }
      diff.terms.push_back(t);
    }
  }
  return diff;
}

DtcResult find_dtc(const SystemParams& p, const State& ic, const DtcOptions& options) {
  if (options.grid.empty()) throw Error(ErrorKind::InvalidArgument, "dt grid is empty");
  for (std::size_t k = 0; k < options.grid.size(); ++k)
    if (!(options.grid[k] > 0.0) || (k > 0 && !(options.grid[k] > options.grid[k - 1])))
      throw Error(ErrorKind::InvalidArgument, "dt grid must be positive and ascending");
  const int degree = resolve_degree(p, options.degree);
  const SparseModel exact = exact_model(p, degree);
  DtcResult result;
  auto dirty_at = [&](double dt) {
    const SparseModel m = reconstruct_from_ic(p, ic, dt, degree, options.stlsq, options.data);
    const bool d = is_dirty(model_diff(m, exact, options.presence));
    result.probes.push_back({dt, d});
    return d;
  };

  for (std::size_t k = 0; k < options.grid.size(); ++k) {
    if (!dirty_at(options.grid[k])) continue;
    if (k == 0) {
      result.zero = true;
      result.dt_c = 0.0;
      return result;
    }
    double lo = options.grid[k - 1];
    double hi = options.grid[k];
    while ((hi - lo) / hi > options.relative_tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (dirty_at(mid)) hi = mid;
      else lo = mid;
    }
    result.dt_c = hi;
    return result;
  }
  throw Error(ErrorKind::AllClean, "no step in the grid produced an extra or missing term");
}

std::vector<SweepRow> delta_c_sweep(const SystemParams& p, const State& ic,
                                    const std::vector<double>& dts, const DtcOptions& options) {
  const int degree = resolve_degree(p, options.degree);
  const SparseModel exact = exact_model(p, degree);
  std::vector<std::vector<SweepRow>> per_dt(dts.size());
  parallel_for(dts.size(), options.workers, [&](std::size_t k) {
    const SparseModel m = reconstruct_from_ic(p, ic, dts[k], degree, options.stlsq, options.data);
    for (const auto& t : model_diff(m, exact, options.presence).terms)
      if (t.flag == TermFlag::Matched) per_dt[k].push_back({dts[k], t.equation, t.monomial, *t.delta_c});
  });
  std::vector<SweepRow> rows;
  for (auto& v : per_dt) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<Vec4> extra_term_series(const SparseModel& model, const SparseModel& exact,
                                    const Trajectory& trajectory) {
  if (!(model.library.monomials == exact.library.monomials))
    throw Error(ErrorKind::InvalidArgument, "extra_term_series needs models over the same library");
  const Eigen::MatrixXd delta = model.xi - exact.xi;
  std::vector<Vec4> out;
  out.reserve(trajectory.size());
  Eigen::VectorXd theta(model.library.size());
  for (const State& s : trajectory.states) {
    model.library.evaluate(to_vec(s), theta.data());
    out.push_back((delta.transpose() * theta).eval());
  }
  return out;
}

}  // namespace hhlab::sindy
