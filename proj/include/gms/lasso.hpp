#ifndef GMS_LASSO_HPP
#define GMS_LASSO_HPP

#include "gms/core.hpp"
#include "gms/fft.hpp"
#include "gms/prox.hpp"

#include <optional>
#include <utility>

namespace gms {

// ADMM solvers for min_X lambda*||X||_1 + 1/2*||A X - B||_F^2 with a cached
// factorization of A^T A + rho*I. All backends share the same iteration:
//   x   <- (A^T A + rho I)^{-1} (A^T B + rho (z - u))
//   z   <- S_{lambda/rho}(x + u)
//   u   <- u + x - z
// terminating when ||x_new - x_old||_F / (||x_old||_F + 1) < tol.

struct LassoConfig {
  double lambda = 1.0;
  double rho = 1.0;
  int max_iters = 100;
  double tol = 1e-6;

  void validate() const {
    if (lambda < 0) throw InvalidParameterError("LassoConfig: lambda < 0");
    if (rho <= 0) throw InvalidParameterError("LassoConfig: rho <= 0");
    if (max_iters < 1) throw InvalidParameterError("LassoConfig: max_iters < 1");
    if (tol <= 0) throw InvalidParameterError("LassoConfig: tol <= 0");
  }
};

struct LassoState {
  Matrix z, u;
};

struct TensorLassoState {
  Tensor3 z, u;
};

struct LassoResult {
  Matrix x;
  LassoState state;
  int iters = 0;
};

struct TensorLassoResult {
  Tensor3 x;
  TensorLassoState state;
  int iters = 0;
};

// ---------------------------------------------------------------------------
// Cached factorizations of A^T A + rho I
// ---------------------------------------------------------------------------

class PrefactoredOperator {
 public:
  enum class Kind { DenseSvd, Cholesky, Circulant, SeparableSvd, BlockSvd, BlockCirculant };

  static PrefactoredOperator dense_svd(const Matrix& A, double rho) {
    PrefactoredOperator op(Kind::DenseSvd, rho);
    Matrix AtA = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(AtA);
    // nonincreasing order
    op.sigma_ = eig.eigenvalues().reverse();
    op.V_ = eig.eigenvectors().rowwise().reverse();
    return op;
  }

  static PrefactoredOperator cholesky(const Matrix& A, double rho) {
    PrefactoredOperator op(Kind::Cholesky, rho);
    Matrix AtA = A.transpose() * A;
    AtA.diagonal().array() += rho;
    op.llt_.compute(AtA);
    if (op.llt_.info() != Eigen::Success)
      throw DataError("lasso_cholesky: factorization failed");
    return op;
  }

  static PrefactoredOperator circulant(const Vector& first_col, double rho) {
    if (first_col.size() == 0) throw ShapeError("lasso_circulant: empty first column");
    PrefactoredOperator op(Kind::Circulant, rho);
    op.d_ = fft(first_col);
    op.coeff_ = op.d_.cwiseAbs2().real().array() + rho;
    return op;
  }

  static PrefactoredOperator separable(const Matrix& G1, const Matrix& G2, double rho) {
    PrefactoredOperator op(Kind::SeparableSvd, rho);
    op.V1_ = axis_factor(G1, op.s1_);
    op.V2_ = axis_factor(G2, op.s2_);
    op.divisor_ = (op.s1_ * op.s2_.transpose()).array() + rho;
    return op;
  }

  static PrefactoredOperator block(const Matrix& E1, const Matrix& E2, Index k1, Index k2,
                                   double rho) {
    check_block(E1, E2, k1, k2);
    PrefactoredOperator op(Kind::BlockSvd, rho);
    Vector se1, se2;
    Matrix W1 = axis_factor(E1, se1);
    Matrix W2 = axis_factor(E2, se2);
    op.V1_ = kron_dense(Matrix::Identity(k1, k1), W1);
    op.V2_ = kron_dense(Matrix::Identity(k2, k2), W2);
    op.s1_ = se1.replicate(k1, 1);
    op.s2_ = se2.replicate(k2, 1);
    op.divisor_ = (op.s1_ * op.s2_.transpose()).array() + rho;
    return op;
  }

  static PrefactoredOperator block_circulant(const Matrix& E1, const Matrix& E2, Index k1,
                                             Index k2, double rho) {
    check_block(E1, E2, k1, k2);
    PrefactoredOperator op(Kind::BlockCirculant, rho);
    op.n1_ = E1.rows();
    op.n2_ = E2.rows();
    op.k1_ = k1;
    op.k2_ = k2;
    Vector d1 = fft(Vector(E1.col(0))).cwiseAbs2().real();
    Vector d2 = fft(Vector(E2.col(0))).cwiseAbs2().real();
    // L = J_{k1 x k2} kron (d1 d2^T)
    op.divisor_ = (Vector(d1.replicate(k1, 1)) * Vector(d2.replicate(k2, 1)).transpose())
                      .array() + rho;
    return op;
  }

  Kind kind() const { return kind_; }
  double rho() const { return rho_; }
  const Matrix& V() const { return V_; }
  const Vector& sigma() const { return sigma_; }
  const Vector& coeff() const { return coeff_; }
  const Matrix& divisor() const { return divisor_; }

  // Solves (A^T A + rho I) x = r, matrix-space kinds.
  Matrix solve(const Matrix& r) const {
    switch (kind_) {
      case Kind::DenseSvd:
        return V_ * ((V_.transpose() * r).array().colwise() /
                     (sigma_.array() + rho_)).matrix();
      case Kind::Cholesky:
        return llt_.solve(r);
      case Kind::Circulant: {
        CMatrix Fr = fft_cols(r);
        Fr.array().colwise() /= coeff_.array().cast<std::complex<double>>();
        return real_part(ifft_cols(Fr));
      }
      default:
        throw Error("PrefactoredOperator: tensor kind used on matrix right-hand side");
    }
  }

  // Solves (H^T H + rho I) x = r framewise, tensor-space kinds.
  Tensor3 solve(const Tensor3& r) const {
    switch (kind_) {
      case Kind::SeparableSvd:
      case Kind::BlockSvd:
        return bilinear_framewise(
            slicewise_divide(bilinear_framewise(r, V1_.transpose(), V2_), divisor_), V1_,
            V2_.transpose());
      case Kind::BlockCirculant: {
        Tensor3 out(r.dim1(), r.dim2(), r.dim3());
        for (Index k = 0; k < r.dim3(); ++k) {
          CMatrix F = block_fft2(r.slice(k));
          F.array() /= divisor_.array().cast<std::complex<double>>();
          out.slice(k) = real_slice(block_ifft2(F));
        }
        return out;
      }
      default:
        throw Error("PrefactoredOperator: matrix kind used on tensor right-hand side");
    }
  }

 private:
  explicit PrefactoredOperator(Kind kind, double rho) : kind_(kind), rho_(rho) {}

  // Eigendecomposition of G^T G with nonincreasing spectrum.
  static Matrix axis_factor(const Matrix& G, Vector& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(G.transpose() * G));
    s = eig.eigenvalues().reverse();
    return eig.eigenvectors().rowwise().reverse();
  }

  static void check_block(const Matrix& E1, const Matrix& E2, Index k1, Index k2) {
    if (E1.rows() != E1.cols() || E2.rows() != E2.cols())
      throw ShapeError("block lasso: E factors must be square");
    if (k1 < 1 || k2 < 1) throw ShapeError("block lasso: block counts must be >= 1");
  }

  static Matrix real_part(const CMatrix& X) {
    double im = X.imag().norm();
    double re = X.real().norm();
    if (im > 1e-8 * (re + 1.0))
      throw DataError("circulant solve: unexpected imaginary residue");
    return X.real();
  }

  static Matrix real_slice(const CMatrix& X) { return real_part(X); }

  // Blockwise 2D DFT: (I kron F_{n1}) X (I kron F_{n2})^T, F symmetric.
  CMatrix block_fft2(const Matrix& X) const {
    CMatrix C = X.cast<std::complex<double>>();
    for (Index b = 0; b < k1_; ++b)
      C.middleRows(b * n1_, n1_) = fft_cols(CMatrix(C.middleRows(b * n1_, n1_)));
    for (Index b = 0; b < k2_; ++b)
      C.middleCols(b * n2_, n2_) =
          fft_cols(CMatrix(C.middleCols(b * n2_, n2_).transpose())).transpose();
    return C;
  }

  CMatrix block_ifft2(const CMatrix& X) const {
    CMatrix C = X;
    for (Index b = 0; b < k1_; ++b)
      C.middleRows(b * n1_, n1_) = ifft_cols(CMatrix(C.middleRows(b * n1_, n1_)));
    for (Index b = 0; b < k2_; ++b)
      C.middleCols(b * n2_, n2_) =
          ifft_cols(CMatrix(C.middleCols(b * n2_, n2_).transpose())).transpose();
    return C;
  }

  Kind kind_;
  double rho_;
  Matrix V_;
  Vector sigma_;
  Eigen::LLT<Matrix> llt_;
  CVector d_;
  Vector coeff_;
  Matrix V1_, V2_;
  Vector s1_, s2_;
  Matrix divisor_;
  Index n1_ = 0, n2_ = 0, k1_ = 0, k2_ = 0;
};

// ---------------------------------------------------------------------------
// Shared iteration
// ---------------------------------------------------------------------------

namespace detail {

inline LassoResult lasso_iterate(const PrefactoredOperator& op, const Matrix& Atb,
                                 Index xrows, Index xcols, const LassoConfig& cfg,
                                 const std::optional<LassoState>& init) {
  LassoState st;
  if (init) {
    if (init->z.rows() != xrows || init->z.cols() != xcols ||
        init->u.rows() != xrows || init->u.cols() != xcols)
      throw ShapeError("lasso: warm-start state shape mismatch");
    st = *init;
  } else {
    st.z = Matrix::Zero(xrows, xcols);
    st.u = Matrix::Zero(xrows, xcols);
  }
  Matrix x = st.z;
  const double shrink = cfg.lambda / cfg.rho;
  int iters = 0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    Matrix x_prev = std::move(x);
    x = op.solve(Atb + cfg.rho * (st.z - st.u));
    st.z = soft_threshold(Matrix(x + st.u), shrink);
    st.u += x - st.z;
    ++iters;
    if ((x - x_prev).norm() / (x_prev.norm() + 1.0) < cfg.tol) break;
  }
  return LassoResult{std::move(x), std::move(st), iters};
}

inline TensorLassoResult lasso_iterate(const PrefactoredOperator& op, const Tensor3& Atb,
                                       const LassoConfig& cfg,
                                       const std::optional<TensorLassoState>& init) {
  TensorLassoState st;
  if (init) {
    if (!init->z.same_shape(Atb) || !init->u.same_shape(Atb))
      throw ShapeError("lasso: warm-start state shape mismatch");
    st = *init;
  } else {
    st.z = Tensor3(Atb.dim1(), Atb.dim2(), Atb.dim3());
    st.u = Tensor3(Atb.dim1(), Atb.dim2(), Atb.dim3());
  }
  Tensor3 x = st.z;
  const double shrink = cfg.lambda / cfg.rho;
  int iters = 0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    Tensor3 x_prev = std::move(x);
    Tensor3 r = Atb;
    r.raw() += cfg.rho * (st.z.raw() - st.u.raw());
    x = op.solve(r);
    Tensor3 xu = x;
    xu.raw() += st.u.raw();
    st.z = soft_threshold(xu, shrink);
    st.u.raw() += x.raw() - st.z.raw();
    ++iters;
    if ((x.raw() - x_prev.raw()).norm() / (x_prev.raw().norm() + 1.0) < cfg.tol) break;
  }
  return TensorLassoResult{std::move(x), std::move(st), iters};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

inline LassoResult lasso_dense_svd(const Matrix& A, const Matrix& B, const LassoConfig& cfg,
                                   const std::optional<LassoState>& init = std::nullopt) {
  cfg.validate();
  if (A.rows() != B.rows()) throw ShapeError("lasso_dense_svd: A and B row mismatch");
  require_finite(A, "lasso_dense_svd A");
  require_finite(B, "lasso_dense_svd B");
  auto op = PrefactoredOperator::dense_svd(A, cfg.rho);
  return detail::lasso_iterate(op, Matrix(A.transpose() * B), A.cols(), B.cols(), cfg, init);
}

// Entry points for callers that keep the factorization across repeated solves
// (the outer separation loop calls LASSO once per outer iteration).
inline LassoResult lasso_prefactored(const PrefactoredOperator& op, const Matrix& Atb,
                                     const LassoConfig& cfg,
                                     const std::optional<LassoState>& init = std::nullopt) {
  cfg.validate();
  return detail::lasso_iterate(op, Atb, Atb.rows(), Atb.cols(), cfg, init);
}

inline TensorLassoResult lasso_prefactored(const PrefactoredOperator& op, const Tensor3& Atb,
                                           const LassoConfig& cfg,
                                           const std::optional<TensorLassoState>& init =
                                               std::nullopt) {
  cfg.validate();
  return detail::lasso_iterate(op, Atb, cfg, init);
}

inline LassoResult lasso_cholesky(const Matrix& A, const Matrix& B, const LassoConfig& cfg,
                                  const std::optional<LassoState>& init = std::nullopt) {
  cfg.validate();
  if (A.rows() != B.rows()) throw ShapeError("lasso_cholesky: A and B row mismatch");
  require_finite(A, "lasso_cholesky A");
  require_finite(B, "lasso_cholesky B");
  auto op = PrefactoredOperator::cholesky(A, cfg.rho);
  return detail::lasso_iterate(op, Matrix(A.transpose() * B), A.cols(), B.cols(), cfg, init);
}

// Circulant A given by its first column. A^T b is applied via the spectrum.
inline LassoResult lasso_circulant(const Vector& first_col, const Matrix& B,
                                   const LassoConfig& cfg,
                                   const std::optional<LassoState>& init = std::nullopt) {
  cfg.validate();
  if (first_col.size() == 0) throw ShapeError("lasso_circulant: empty first column");
  if (first_col.size() != B.rows())
    throw ShapeError("lasso_circulant: B row count != circulant size");
  require_finite(B, "lasso_circulant B");
  auto op = PrefactoredOperator::circulant(first_col, cfg.rho);
  // A^T b = ifft(conj(d) .* fft(b)) columnwise, A real circulant.
  CVector dconj = fft(first_col).conjugate();
  CMatrix Fb = fft_cols(B);
  Fb.array().colwise() *= dconj.array();
  Matrix Atb = ifft_cols(Fb).real();
  return detail::lasso_iterate(op, Atb, B.rows(), B.cols(), cfg, init);
}

inline TensorLassoResult lasso_separable(const Matrix& G1, const Matrix& G2, const Tensor3& B,
                                         const LassoConfig& cfg,
                                         const std::optional<TensorLassoState>& init =
                                             std::nullopt) {
  cfg.validate();
  if (G1.rows() != B.dim1() || G2.rows() != B.dim2())
    throw ShapeError("lasso_separable: factor/tensor shape mismatch");
  if (!B.allFinite()) throw DataError("lasso_separable: non-finite B");
  auto op = PrefactoredOperator::separable(G1, G2, cfg.rho);
  Tensor3 Atb = bilinear_framewise(B, G1.transpose(), G2);
  return detail::lasso_iterate(op, Atb, cfg, init);
}

inline TensorLassoResult lasso_block(const Matrix& E1, const Matrix& E2, const Tensor3& B,
                                     const LassoConfig& cfg,
                                     const std::optional<TensorLassoState>& init =
                                         std::nullopt) {
  cfg.validate();
  if (E1.rows() == 0 || E2.rows() == 0) throw ShapeError("lasso_block: empty E factor");
  if (B.dim1() % E1.rows() != 0 || B.dim2() % E2.rows() != 0)
    throw ShapeError("lasso_block: block size does not divide tensor dims");
  const Index k1 = B.dim1() / E1.rows(), k2 = B.dim2() / E2.rows();
  auto op = PrefactoredOperator::block(E1, E2, k1, k2, cfg.rho);
  Matrix G1 = kron_dense(Matrix::Identity(k1, k1), E1);
  Matrix G2 = kron_dense(Matrix::Identity(k2, k2), E2);
  Tensor3 Atb = bilinear_framewise(B, G1.transpose(), G2);
  return detail::lasso_iterate(op, Atb, cfg, init);
}

inline TensorLassoResult lasso_block_circulant(const Matrix& E1, const Matrix& E2,
                                               const Tensor3& B, const LassoConfig& cfg,
                                               const std::optional<TensorLassoState>& init =
                                                   std::nullopt) {
  cfg.validate();
  if (E1.rows() == 0 || E2.rows() == 0)
    throw ShapeError("lasso_block_circulant: empty E factor");
  if (B.dim1() % E1.rows() != 0 || B.dim2() % E2.rows() != 0)
    throw ShapeError("lasso_block_circulant: block size does not divide tensor dims");
  const Index k1 = B.dim1() / E1.rows(), k2 = B.dim2() / E2.rows();
  auto op = PrefactoredOperator::block_circulant(E1, E2, k1, k2, cfg.rho);
  Matrix G1 = kron_dense(Matrix::Identity(k1, k1), E1);
  Matrix G2 = kron_dense(Matrix::Identity(k2, k2), E2);
  Tensor3 Atb = bilinear_framewise(B, G1.transpose(), G2);
  return detail::lasso_iterate(op, Atb, cfg, init);
}

}  // namespace gms

#endif  // GMS_LASSO_HPP
