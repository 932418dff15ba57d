#ifndef GMS_SEPARATION_HPP
#define GMS_SEPARATION_HPP

#include "gms/filter.hpp"
#include "gms/lasso.hpp"
#include "gms/prox.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace gms {

// Outer ADMM for the separation program
//   min lambda*||S||_1 + ||L||_*  subject to  L + H*S = M0,
// with and without preconditioning of H.

enum class LassoBackend { Auto, DenseSvd, Cholesky, Circulant, Separable, Block, BlockCirculant };

struct SolverConfig {
  double lambda = 0.0;  // 0 means the 1/sqrt(min(m,n)) default
  double rho_outer = 1.0;
  double rho_inner = 1.0;
  int max_outer = 100;
  int max_inner = 30;
  double tol_outer = 1e-7;
  double tol_inner = 1e-5;
  bool warm_start_inner = false;
  double rank_rtol = 1e-12;
  LassoBackend backend = LassoBackend::Auto;

  void validate() const {
    if (lambda < 0) throw InvalidParameterError("SolverConfig: lambda < 0");
    if (rho_outer <= 0) throw InvalidParameterError("SolverConfig: rho_outer <= 0");
    if (rho_inner <= 0) throw InvalidParameterError("SolverConfig: rho_inner <= 0");
    if (max_outer < 1) throw InvalidParameterError("SolverConfig: max_outer < 1");
    if (max_inner < 1) throw InvalidParameterError("SolverConfig: max_inner < 1");
    if (tol_outer <= 0) throw InvalidParameterError("SolverConfig: tol_outer <= 0");
    if (tol_inner <= 0) throw InvalidParameterError("SolverConfig: tol_inner <= 0");
    if (rank_rtol <= 0) throw InvalidParameterError("SolverConfig: rank_rtol <= 0");
  }

  double effective_lambda(Index m, Index n) const {
    return lambda > 0 ? lambda : 1.0 / std::sqrt(double(std::min(m, n)));
  }
};

struct TraceRow {
  double change_ratio = 0.0;
  double residual = 0.0;
  std::optional<double> relerr_s, relerr_l;
  int inner_iters = 0;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  std::size_t size() const { return rows.size(); }
};

enum class Termination { Tolerance, MaxIters };

struct SeparationResult {
  Matrix S_hat, L_hat;
  ConvergenceTrace trace;
  Termination terminated_by = Termination::MaxIters;
  std::optional<Matrix> Y_hat;  // preconditioned-space low-rank iterate (pgms diagnostic)
};

struct TensorSeparationResult {
  Tensor3 S_hat, L_hat;
  ConvergenceTrace trace;
  Termination terminated_by = Termination::MaxIters;
  std::optional<Tensor3> Y_hat;
};

struct MatrixTruth {
  std::optional<Matrix> L0, S0;
};

struct TensorTruth {
  std::optional<Tensor3> L0, S0;
};

namespace detail {

inline double rel_err_unchecked(const Matrix& truth, const Matrix& est) {
  return (est - truth).norm() / truth.norm();
}

inline PrefactoredOperator prefactor_for(const FilterSpec& H, const SolverConfig& cfg) {
  switch (cfg.backend) {
    case LassoBackend::Auto:
      return H.prefactor(cfg.rho_inner);
    case LassoBackend::DenseSvd:
      return PrefactoredOperator::dense_svd(H.densify(), cfg.rho_inner);
    case LassoBackend::Cholesky:
      return PrefactoredOperator::cholesky(H.densify(), cfg.rho_inner);
    case LassoBackend::Circulant: {
      if (!H.holds<FilterSpec::Circulant>())
        throw InvalidParameterError("backend circulant requires a circulant filter");
      return H.prefactor(cfg.rho_inner);
    }
    case LassoBackend::Separable:
    case LassoBackend::Block:
    case LassoBackend::BlockCirculant: {
      if (!H.is_tensor_domain())
        throw InvalidParameterError("tensor backend requires a tensor-domain filter");
      return H.prefactor(cfg.rho_inner);
    }
  }
  throw InvalidParameterError("unknown backend");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generalized matrix separation (no preconditioning)
// ---------------------------------------------------------------------------

inline SeparationResult gms(const Matrix& M0, const FilterSpec& H, const SolverConfig& cfg,
                            const MatrixTruth& truth = {}) {
  cfg.validate();
  if (!H.is_matrix_domain())
    throw InvalidParameterError("gms: filter must be dense or circulant; use gts for tensors");
  if (H.rows() != M0.rows()) throw ShapeError("gms: filter rows != M0 rows");
  require_finite(M0, "gms M0");

  const Index m = M0.rows(), n = M0.cols(), p = H.cols();
  const double lambda = cfg.effective_lambda(m, n);
  const double svt_thresh = 1.0 / cfg.rho_outer;

  PrefactoredOperator op = detail::prefactor_for(H, cfg);
  LassoConfig inner{lambda / cfg.rho_outer, cfg.rho_inner, cfg.max_inner, cfg.tol_inner};

  Matrix L = Matrix::Zero(m, n), S = Matrix::Zero(p, n), U = Matrix::Zero(m, n);
  std::optional<LassoState> warm;
  SeparationResult out;

  for (int k = 0; k < cfg.max_outer; ++k) {
    Matrix HS = H.apply(S);
    Matrix L_next = singular_value_threshold(Matrix(M0 - HS - U), svt_thresh);
    Matrix P = M0 - U - L_next;
    LassoResult ls = lasso_prefactored(op, H.apply_transpose(P), inner, warm);
    if (cfg.warm_start_inner) warm = ls.state;
    Matrix S_next = std::move(ls.x);
    Matrix HS_next = H.apply(S_next);
    U += L_next + HS_next - M0;

    double change = std::sqrt((L_next - L).squaredNorm() + (S_next - S).squaredNorm());
    double base = std::sqrt(L.squaredNorm() + S.squaredNorm()) + 1.0;
    double ratio = change / base;

    TraceRow row;
    row.change_ratio = ratio;
    row.residual = (L_next + HS_next - M0).norm();
    row.inner_iters = ls.iters;
    if (truth.S0) row.relerr_s = detail::rel_err_unchecked(*truth.S0, S_next);
    if (truth.L0) row.relerr_l = detail::rel_err_unchecked(*truth.L0, L_next);
    out.trace.rows.push_back(row);

    L = std::move(L_next);
    S = std::move(S_next);
    if (ratio < cfg.tol_outer) {
      out.terminated_by = Termination::Tolerance;
      break;
    }
  }

  out.S_hat = std::move(S);
  out.L_hat = std::move(L);
  return out;
}

// ---------------------------------------------------------------------------
// Preconditioning
// ---------------------------------------------------------------------------

// C = U_r Sigma_r^{-1} U_r^T and H~ = C H = U_r V_r^T, restricted to singular
// values above rank_rtol * sigma_1. H~ has unit singular values on the row
// space of H and shares its kernel.
struct PreconditionedFilter {
  FilterSpec H_tilde;
  Matrix C;
  Index retained_rank = 0;
  FilterSpec original;
};

inline PreconditionedFilter precondition_filter(const FilterSpec& H, double rank_rtol = 1e-12) {
  if (rank_rtol <= 0) throw InvalidParameterError("precondition_filter: rank_rtol <= 0");
  Matrix Hd = H.densify();
  Eigen::BDCSVD<Matrix> svd(Hd, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0)
    throw DegenerateFilterError("precondition_filter: filter is zero");
  Index r = 0;
  while (r < s.size() && s[r] > rank_rtol * s[0]) ++r;
  if (r == 0) throw DegenerateFilterError("precondition_filter: no retained singular values");
  Matrix Ur = svd.matrixU().leftCols(r);
  Matrix Vr = svd.matrixV().leftCols(r);
  Matrix C = Ur * s.head(r).cwiseInverse().asDiagonal() * Ur.transpose();
  return PreconditionedFilter{FilterSpec::dense(Ur * Vr.transpose()), std::move(C), r, H};
}

inline SeparationResult pgms(const Matrix& M0, const FilterSpec& H, const SolverConfig& cfg,
                             const MatrixTruth& truth = {}) {
  cfg.validate();
  if (!H.is_matrix_domain()) throw InvalidParameterError("pgms: filter must be matrix-domain");
  if (H.rows() != M0.rows()) throw ShapeError("pgms: filter rows != M0 rows");
  require_finite(M0, "pgms M0");

  PreconditionedFilter pf = precondition_filter(H, cfg.rank_rtol);

  SolverConfig inner_cfg = cfg;
  if (inner_cfg.backend == LassoBackend::Circulant) inner_cfg.backend = LassoBackend::Auto;
  // lambda default depends on M0 dims, identical for C*M0; resolve now.
  inner_cfg.lambda = cfg.effective_lambda(M0.rows(), M0.cols());

  MatrixTruth inner_truth;
  inner_truth.S0 = truth.S0;
  if (truth.L0) inner_truth.L0 = pf.C * (*truth.L0);

  SeparationResult inner = gms(pf.C * M0, pf.H_tilde, inner_cfg, inner_truth);

  SeparationResult out;
  out.S_hat = std::move(inner.S_hat);
  out.Y_hat = std::move(inner.L_hat);
  out.L_hat = M0 - H.apply(out.S_hat);
  out.trace = std::move(inner.trace);
  out.terminated_by = inner.terminated_by;
  return out;
}

inline Matrix recover_low_rank(const Matrix& M0, const FilterSpec& H, const Matrix& S_hat) {
  return M0 - H.apply(S_hat);
}

inline Tensor3 recover_low_rank(const Tensor3& M0, const FilterSpec& H, const Tensor3& S_hat) {
  Tensor3 out = M0;
  out.raw() -= H.apply(S_hat).raw();
  return out;
}

// ---------------------------------------------------------------------------
// Generalized tensor separation
// ---------------------------------------------------------------------------

inline TensorSeparationResult gts(const Tensor3& M0, const FilterSpec& H,
                                  const SolverConfig& cfg, const TensorTruth& truth = {}) {
  cfg.validate();
  if (!H.is_tensor_domain())
    throw InvalidParameterError("gts: filter must be separable/block/block-circulant");
  auto [m1, m2] = H.range_dims();
  auto [p1, p2] = H.domain_dims();
  if (m1 != M0.dim1() || m2 != M0.dim2()) throw ShapeError("gts: filter/tensor shape mismatch");
  if (!M0.allFinite()) throw DataError("gts: non-finite M0");

  const Index K = M0.dim3();
  const double lambda = cfg.effective_lambda(m1 * m2, K);
  const double svt_thresh = 1.0 / cfg.rho_outer;

  PrefactoredOperator op = detail::prefactor_for(H, cfg);
  LassoConfig inner{lambda / cfg.rho_outer, cfg.rho_inner, cfg.max_inner, cfg.tol_inner};

  Tensor3 L(m1, m2, K), S(p1, p2, K), U(m1, m2, K);
  std::optional<TensorLassoState> warm;
  TensorSeparationResult out;

  for (int k = 0; k < cfg.max_outer; ++k) {
    Tensor3 HS = H.apply(S);
    Matrix Z = mat3(M0) - mat3(HS) - mat3(U);
    Tensor3 L_next = ten3(singular_value_threshold(Z, svt_thresh), m1, m2);
    Tensor3 P = M0;
    P.raw() -= U.raw() + L_next.raw();
    TensorLassoResult ls = lasso_prefactored(op, H.apply_transpose(P), inner, warm);
    if (cfg.warm_start_inner) warm = ls.state;
    Tensor3 S_next = std::move(ls.x);
    Tensor3 HS_next = H.apply(S_next);
    U.raw() += L_next.raw() + HS_next.raw() - M0.raw();

    double change = std::sqrt((L_next.raw() - L.raw()).squaredNorm() +
                              (S_next.raw() - S.raw()).squaredNorm());
    double base = std::sqrt(L.raw().squaredNorm() + S.raw().squaredNorm()) + 1.0;
    double ratio = change / base;

    TraceRow row;
    row.change_ratio = ratio;
    row.residual = (L_next.raw() + HS_next.raw() - M0.raw()).norm();
    row.inner_iters = ls.iters;
    if (truth.S0)
      row.relerr_s = (S_next.raw() - truth.S0->raw()).norm() / truth.S0->raw().norm();
    if (truth.L0)
      row.relerr_l = (L_next.raw() - truth.L0->raw()).norm() / truth.L0->raw().norm();
    out.trace.rows.push_back(row);

    L = std::move(L_next);
    S = std::move(S_next);
    if (ratio < cfg.tol_outer) {
      out.terminated_by = Termination::Tolerance;
      break;
    }
  }

  out.S_hat = std::move(S);
  out.L_hat = std::move(L);
  return out;
}

// Per-axis preconditioning: G_i = U_i Sigma_i V_i^T, C_i = U_i Sigma_i^{-1} U_i^T,
// G~_i = U_i V_i^T. Block filters are preconditioned through their E_i factor
// and stay block structured (E~_i is generally not circulant, so the
// block-circulant variant degrades to plain block).
struct AxisPreconditioner {
  Matrix C1, C2;        // expanded per-axis preconditioners
  FilterSpec H_tilde;   // separable or block
  FilterSpec original;
};

inline AxisPreconditioner precondition_axes(const FilterSpec& H, double rank_rtol = 1e-12) {
  if (!H.is_tensor_domain())
    throw InvalidParameterError("precondition_axes: tensor-domain filter required");
  auto axis = [rank_rtol](const Matrix& G, Matrix& C) -> Matrix {
    Eigen::BDCSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0)
      throw DegenerateFilterError("precondition_axes: zero axis factor");
    Index r = 0;
    while (r < s.size() && s[r] > rank_rtol * s[0]) ++r;
    Matrix Ur = svd.matrixU().leftCols(r);
    Matrix Vr = svd.matrixV().leftCols(r);
    C = Ur * s.head(r).cwiseInverse().asDiagonal() * Ur.transpose();
    return Ur * Vr.transpose();
  };

  if (H.holds<FilterSpec::Separable>()) {
    const auto& s = H.get<FilterSpec::Separable>();
    Matrix C1, C2;
    Matrix G1t = axis(s.G1, C1);
    Matrix G2t = axis(s.G2, C2);
    return AxisPreconditioner{std::move(C1), std::move(C2),
                              FilterSpec::separable(std::move(G1t), std::move(G2t)), H};
  }
  // block / block-circulant: precondition the small E factors
  Matrix E1, E2;
  Index k1, k2;
  if (H.holds<FilterSpec::Block>()) {
    const auto& b = H.get<FilterSpec::Block>();
    E1 = b.E1; E2 = b.E2; k1 = b.k1; k2 = b.k2;
  } else {
    const auto& b = H.get<FilterSpec::BlockCirculant>();
    E1 = b.E1; E2 = b.E2; k1 = b.k1; k2 = b.k2;
  }
  Matrix Ce1, Ce2;
  Matrix E1t = axis(E1, Ce1);
  Matrix E2t = axis(E2, Ce2);
  Matrix C1 = kron_dense(Matrix::Identity(k1, k1), Ce1);
  Matrix C2 = kron_dense(Matrix::Identity(k2, k2), Ce2);
  return AxisPreconditioner{std::move(C1), std::move(C2),
                            FilterSpec::block(std::move(E1t), std::move(E2t), k1, k2), H};
}

inline TensorSeparationResult pgts(const Tensor3& M0, const FilterSpec& H,
                                   const SolverConfig& cfg, const TensorTruth& truth = {}) {
  cfg.validate();
  AxisPreconditioner pre = precondition_axes(H, cfg.rank_rtol);

  SolverConfig inner_cfg = cfg;
  if (inner_cfg.backend == LassoBackend::BlockCirculant ||
      inner_cfg.backend == LassoBackend::Circulant)
    inner_cfg.backend = LassoBackend::Auto;
  inner_cfg.lambda = cfg.effective_lambda(M0.dim1() * M0.dim2(), M0.dim3());

  Tensor3 CM0 = bilinear_framewise(M0, pre.C1, pre.C2.transpose());
  TensorTruth inner_truth;
  inner_truth.S0 = truth.S0;
  if (truth.L0) inner_truth.L0 = bilinear_framewise(*truth.L0, pre.C1, pre.C2.transpose());

  TensorSeparationResult inner = gts(CM0, pre.H_tilde, inner_cfg, inner_truth);

  TensorSeparationResult out;
  out.S_hat = std::move(inner.S_hat);
  out.Y_hat = std::move(inner.L_hat);
  out.L_hat = recover_low_rank(M0, H, out.S_hat);
  out.trace = std::move(inner.trace);
  out.terminated_by = inner.terminated_by;
  return out;
}

// Convenience overloads taking explicit axis factors.
inline TensorSeparationResult gts(const Tensor3& M0, const Matrix& G1, const Matrix& G2,
                                  const SolverConfig& cfg, const TensorTruth& truth = {}) {
  return gts(M0, FilterSpec::separable(G1, G2), cfg, truth);
}

inline TensorSeparationResult pgts(const Tensor3& M0, const Matrix& G1, const Matrix& G2,
                                   const SolverConfig& cfg, const TensorTruth& truth = {}) {
  return pgts(M0, FilterSpec::separable(G1, G2), cfg, truth);
}

}  // namespace gms

#endif  // GMS_SEPARATION_HPP
