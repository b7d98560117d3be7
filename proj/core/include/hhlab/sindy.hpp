#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "hhlab/integrator.hpp"

namespace hhlab::sindy {

// x^a y^b px^c py^d
struct Monomial {
  std::array<int, 4> exponents{};

  int degree() const { return exponents[0] + exponents[1] + exponents[2] + exponents[3]; }
  double operator()(const Vec4& z) const;
  // "1", "x", "x^2 y px", ...
  std::string name() const;
  bool operator==(const Monomial&) const = default;
};

// All monomials of total degree <= K. Within a degree, exponent tuples are in
// descending lexicographic order: x^2, x y, x px, ..., py^2.
struct CandidateLibrary {
  int degree = 0;
  std::vector<Monomial> monomials;

  std::size_t size() const { return monomials.size(); }
  std::optional<std::size_t> index_of(const std::array<int, 4>& exponents) const;
  // Writes the size() library values at z into out.
  void evaluate(const Vec4& z, double* out) const;
};

// Throws Error(InvalidArgument) for K < 1.
CandidateLibrary build_library(int degree);

inline constexpr std::array<const char*, 4> kEquationNames = {"xdot", "ydot", "pxdot", "pydot"};

struct SparseModel {
  CandidateLibrary library;
  Eigen::MatrixXd xi;  // library.size() x 4, one column per equation
  double threshold = 0.0;
  double dt = 0.0;

  // Right-hand side of the model at z.
  Vec4 evaluate(const Vec4& z) const;
};

// Ground-truth coefficients of Hamilton's equations. Throws Error(LibraryTooSmall) if
// K < N - 1.
SparseModel exact_model(const SystemParams& p, int degree);

// Second-order central differences; the first and last samples are dropped.
struct DerivativeData {
  std::vector<Vec4> states;
  std::vector<Vec4> derivatives;
};

// Throws Error(TooShort) below 3 samples.
DerivativeData estimate_derivatives(const Trajectory& trajectory);

// Dense n x size() design matrix.
Eigen::MatrixXd evaluate_library(const CandidateLibrary& library, const std::vector<Vec4>& states);

// Least-squares problem min ||Theta c - b|| reduced to min ||R c - Q^T b|| by an
// orthogonal factorization accumulated block by block, so Theta is never stored whole.
struct ReducedSystem {
  Eigen::MatrixXd r;    // m x m upper triangular
  Eigen::MatrixXd qtb;  // m x q
  std::size_t rows = 0;
};

class RegressionAccumulator {
 public:
  RegressionAccumulator(std::size_t columns, std::size_t targets, std::size_t block_rows = 4096);

  void add_row(const double* theta_row, const double* target_row);
  ReducedSystem finish();

 private:
  void flush();

  std::size_t m_;
  std::size_t q_;
  std::size_t block_rows_;
  std::size_t pending_ = 0;
  std::size_t rows_ = 0;
  Eigen::MatrixXd stack_;      // (m + block) x m
  Eigen::MatrixXd stack_rhs_;  // (m + block) x q
};

ReducedSystem reduce(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets);

struct StlsqOptions {
  double threshold = 0.05;
  int max_iter = 20;
  // Ridge penalty used inside the thresholding iterations.
  double ridge = 0.05;
  // Columns whose smallest singular value falls below this fraction of the largest are
  // reported as rank deficient.
  double rank_tolerance = 1e-9;
};

struct StlsqResult {
  Eigen::MatrixXd xi;           // final unregularized refit on the terminal support
  Eigen::MatrixXd thresholded;  // last ridge iterate with sub-threshold entries zeroed
  std::vector<int> iterations;
  std::vector<bool> rank_deficient;

  bool any_rank_deficient() const;
};

// Sequential thresholded least squares, column by column. Each iteration solves a ridge
// problem on the active support and drops entries below the threshold; the reported
// coefficients are an unregularized min-norm refit on the final support, so entries
// below the threshold can survive there (every entry of `thresholded` is >= threshold).
StlsqResult stlsq(const ReducedSystem& system, const StlsqOptions& options = {});
StlsqResult stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& targets,
                  const StlsqOptions& options = {});

SparseModel reconstruct(const Trajectory& trajectory, int degree,
                        const StlsqOptions& options = {});

struct DataOptions {
  double duration = 150.0;
  // Data at step dt come from RK4 with ceil(dt / max_internal_step) substeps.
  double max_internal_step = 1e-3;
  IntegrationOptions integration;
};

int substeps_for(double dt, double max_internal_step);

// Integrates from ic over `duration` at sampling step dt and regresses while streaming,
// without storing the trajectory.
SparseModel reconstruct_from_ic(const SystemParams& p, const State& ic, double dt, int degree,
                                const StlsqOptions& options = {}, const DataOptions& data = {});

enum class TermFlag { Matched, Extra, Missing };
std::string_view to_string(TermFlag f) noexcept;

struct TermDiff {
  int equation = 0;
  Monomial monomial;
  double exact = 0.0;
  double reconstructed = 0.0;
  std::optional<double> delta_c;  // (exact - reconstructed) / exact when exact != 0
  TermFlag flag = TermFlag::Matched;
};

struct ModelDiff {
  std::vector<TermDiff> terms;
  double presence = 0.0;

  bool clean() const;
  std::size_t count(TermFlag f) const;
  double max_abs_delta_c() const;  // over matched terms
};

inline constexpr double kDefaultPresence = 5e-4;

// A reconstructed coefficient is present when |c| >= presence. Terms that are zero in
// both models, or absent from the reconstruction where the exact one is zero, are omitted.
ModelDiff model_diff(const SparseModel& reconstructed, const SparseModel& exact,
                     double presence = kDefaultPresence);

struct DtcOptions {
  std::vector<double> grid = {1e-3, 2e-3,  3e-3, 5e-3, 7e-3, 0.01, 0.014, 0.02,
                              0.028, 0.04, 0.056, 0.08, 0.11, 0.16, 0.22, 0.3};
  int degree = 0;  // 0 means N
  StlsqOptions stlsq;
  DataOptions data;
  double presence = kDefaultPresence;
  // Bisection stops when (hi - lo) / hi <= this.
  double relative_tolerance = 2e-3;
  std::size_t workers = 1;
};

struct DtcProbe {
  double dt = 0.0;
  bool dirty = false;
};

struct DtcResult {
  double dt_c = 0.0;
  bool zero = false;  // the smallest grid step is already dirty
  std::vector<DtcProbe> probes;
};

// Throws Error(AllClean) if no grid step produces an extra or missing term.
DtcResult find_dtc(const SystemParams& p, const State& ic, const DtcOptions& options = {});

struct SweepRow {
  double dt = 0.0;
  int equation = 0;
  Monomial monomial;
  double delta_c = 0.0;
};

// Delta C of every matched term for each dt.
std::vector<SweepRow> delta_c_sweep(const SystemParams& p, const State& ic,
                                    const std::vector<double>& dts, const DtcOptions& options = {});

// S_extra = S_model - S_exact along the trajectory, one row per sample.
std::vector<Vec4> extra_term_series(const SparseModel& model, const SparseModel& exact,
                                    const Trajectory& trajectory);

struct LinearRelation {
  double slope = 0.0;           // y = slope * x from the model's extra terms
  double residual = 0.0;        // normalized size of the constraint at that slope
  double fitted_slope = 0.0;    // least-squares fit of y against x along the trajectory
  std::vector<TermDiff> terms;  // extra-polynomial terms that were kept
};

// Drops terms of the pxdot and pydot difference polynomials (model minus exact) below
// drop_below, substitutes y = s x, py = s px and picks the real s that best annihilates
// every homogeneous group.
// Throws Error(NoRelation).
LinearRelation periodic_relation(const ModelDiff& diff, const Trajectory& trajectory,
                                 double drop_below = 1e-3);

nlohmann::json model_json(const SparseModel& model);
SparseModel model_from_json(const nlohmann::json& j);
std::string model_diff_csv(const ModelDiff& diff);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace hhlab::sindy
