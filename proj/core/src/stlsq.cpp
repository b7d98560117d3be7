#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "hhlab/error.hpp"
#include "hhlab/sindy.hpp"

namespace hhlab::sindy {
namespace {

using Index = Eigen::Index;

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& a, const std::vector<Index>& cols) {
  Eigen::MatrixXd out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = a.col(cols[k]);
  return out;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& r_s, const Eigen::VectorXd& rhs, double alpha) {
  const Index m = r_s.rows();
  const Index s = r_s.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + s, s);
  a.topRows(m) = r_s;
  a.bottomRows(s).diagonal().setConstant(std::sqrt(alpha));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + s);
  b.head(m) = rhs;
  return a.householderQr().solve(b);
}

}  // namespace

RegressionAccumulator::RegressionAccumulator(std::size_t columns, std::size_t targets,
                                             std::size_t block_rows)
    : m_(columns), q_(targets), block_rows_(std::max<std::size_t>(block_rows, 1)) {
  if (m_ == 0 || q_ == 0) throw Error(ErrorKind::InvalidArgument, "regression needs columns and targets");
  stack_ = Eigen::MatrixXd::Zero(static_cast<Index>(m_ + block_rows_), static_cast<Index>(m_));
  stack_rhs_ = Eigen::MatrixXd::Zero(static_cast<Index>(m_ + block_rows_), static_cast<Index>(q_));
}

void RegressionAccumulator::add_row(const double* theta_row, const double* target_row) {
  const Index r = static_cast<Index>(m_ + pending_);
  for (std::size_t k = 0; k < m_; ++k) stack_(r, static_cast<Index>(k)) = theta_row[k];
  for (std::size_t k = 0; k < q_; ++k) stack_rhs_(r, static_cast<Index>(k)) = target_row[k];
  ++pending_;
  ++rows_;
  if (pending_ == block_rows_) flush();
}

void RegressionAccumulator::flush() {
  if (pending_ == 0) return;
  const Index m = static_cast<Index>(m_);
  const Index rows = static_cast<Index>(m_ + pending_);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack_.topRows(rows));
  Eigen::MatrixXd rhs = stack_rhs_.topRows(rows);
  rhs.applyOnTheLeft(qr.householderQ().adjoint());
  stack_.topRows(m) = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  stack_rhs_.topRows(m) = rhs.topRows(m);
  pending_ = 0;
}

ReducedSystem RegressionAccumulator::finish() {
  flush();
  const Index m = static_cast<Index>(m_);
  return {stack_.topRows(m), stack_rhs_.topRows(m), rows_};
}

ReducedSystem reduce(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets) {
  if (theta.rows() != targets.rows())
    throw Error(ErrorKind::InvalidArgument, "theta and targets must have the same row count");
  RegressionAccumulator acc(static_cast<std::size_t>(theta.cols()),
                            static_cast<std::size_t>(targets.cols()));
  Eigen::VectorXd tr(theta.cols());
  Eigen::VectorXd br(targets.cols());
  for (Index i = 0; i < theta.rows(); ++i) {
    tr = theta.row(i).transpose();
    br = targets.row(i).transpose();
    acc.add_row(tr.data(), br.data());
  }
  return acc.finish();
}

bool StlsqResult::any_rank_deficient() const {
  for (bool b : rank_deficient)
    if (b) return true;
  return false;
}

StlsqResult stlsq(const ReducedSystem& system, const StlsqOptions& options) {
  if (options.max_iter < 1) throw Error(ErrorKind::InvalidArgument, "stlsq: max_iter must be >= 1");
  if (!(options.threshold >= 0.0) || !(options.ridge >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "stlsq: threshold and ridge must be non-negative");
  const Index m = system.r.cols();
  const Index q = system.qtb.cols();
  StlsqResult result;
  result.xi = Eigen::MatrixXd::Zero(m, q);
  result.thresholded = Eigen::MatrixXd::Zero(m, q);
  result.iterations.assign(static_cast<std::size_t>(q), 0);
  result.rank_deficient.assign(static_cast<std::size_t>(q), false);

  for (Index j = 0; j < q; ++j) {
    std::vector<bool> support(static_cast<std::size_t>(m), true);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
    int it = 0;
    for (; it < options.max_iter; ++it) {
      std::vector<Index> cols;
      for (Index k = 0; k < m; ++k)
        if (support[static_cast<std::size_t>(k)]) cols.push_back(k);
      const Eigen::VectorXd c = ridge_solve(select_columns(system.r, cols), system.qtb.col(j), options.ridge);
      full.setZero();
      for (std::size_t k = 0; k < cols.size(); ++k) full[cols[k]] = c[static_cast<Index>(k)];
      std::vector<bool> next(static_cast<std::size_t>(m));
      bool any = false;
      for (Index k = 0; k < m; ++k) {
        next[static_cast<std::size_t>(k)] = std::abs(full[k]) >= options.threshold;
        any = any || next[static_cast<std::size_t>(k)];
      }
      if (next == support) break;
      support = std::move(next);
      if (!any) break;
    }
    result.iterations[static_cast<std::size_t>(j)] = std::min(it + 1, options.max_iter);

    std::vector<Index> cols;
    for (Index k = 0; k < m; ++k) {
      if (support[static_cast<std::size_t>(k)]) {
        cols.push_back(k);
        result.thresholded(k, j) = std::abs(full[k]) >= options.threshold ? full[k] : 0.0;
      }
    }
    if (cols.empty()) continue;

    // Unregularized min-norm refit; cutoff matches a dense SVD least-squares solver.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(select_columns(system.r, cols),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double rcond = std::numeric_limits<double>::epsilon() *
                         static_cast<double>(std::max<std::size_t>(system.rows, cols.size()));
    svd.setThreshold(rcond);
    const Eigen::VectorXd c = svd.solve(system.qtb.col(j));
    const auto& sv = svd.singularValues();
    result.rank_deficient[static_cast<std::size_t>(j)] =
        sv.size() > 0 && sv[0] > 0.0 && sv[sv.size() - 1] < options.rank_tolerance * sv[0];
    for (std::size_t k = 0; k < cols.size(); ++k) result.xi(cols[k], j) = c[static_cast<Index>(k)];
  }
  return result;
}

StlsqResult stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets,
                  const StlsqOptions& options) {
  return stlsq(reduce(theta, targets), options);
}

}  // namespace hhlab::sindy
