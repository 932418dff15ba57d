#ifndef GMS_FILTER_HPP
#define GMS_FILTER_HPP

#include "gms/core.hpp"
#include "gms/fft.hpp"
#include "gms/lasso.hpp"

#include <variant>

namespace gms {

// Tagged description of the filter H. Matrix-domain variants (dense,
// circulant) act as H * S; tensor-domain variants (separable, block,
// block-circulant) act framewise as B_{G1, G2^T}.
class FilterSpec {
 public:
  struct Dense {
    Matrix H;
  };
  struct Circulant {
    Vector first_col;
  };
  struct Separable {
    Matrix G1, G2;  // G_i maps length-p_i frames to length-m_i frames
  };
  struct Block {
    Matrix E1, E2;
    Index k1, k2;
  };
  struct BlockCirculant {
    Matrix E1, E2;
    Index k1, k2;
  };

  static FilterSpec dense(Matrix H) {
    require_finite(H, "FilterSpec::dense");
    return FilterSpec(Dense{std::move(H)});
  }
  static FilterSpec circulant(Vector first_col) {
    if (first_col.size() == 0) throw ShapeError("FilterSpec::circulant: empty first column");
    return FilterSpec(Circulant{std::move(first_col)});
  }
  static FilterSpec separable(Matrix G1, Matrix G2) {
    require_finite(G1, "FilterSpec::separable G1");
    require_finite(G2, "FilterSpec::separable G2");
    return FilterSpec(Separable{std::move(G1), std::move(G2)});
  }
  static FilterSpec block(Matrix E1, Matrix E2, Index k1, Index k2) {
    check_block(E1, E2, k1, k2);
    return FilterSpec(Block{std::move(E1), std::move(E2), k1, k2});
  }
  static FilterSpec block_circulant(Matrix E1, Matrix E2, Index k1, Index k2) {
    check_block(E1, E2, k1, k2);
    return FilterSpec(BlockCirculant{std::move(E1), std::move(E2), k1, k2});
  }

  bool is_matrix_domain() const {
    return std::holds_alternative<Dense>(v_) || std::holds_alternative<Circulant>(v_);
  }
  bool is_tensor_domain() const { return !is_matrix_domain(); }

  template <class T>
  bool holds() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& get() const {
    return std::get<T>(v_);
  }

  // Range (rows) and domain (cols) of the matrix action.
  Index rows() const {
    if (auto* d = std::get_if<Dense>(&v_)) return d->H.rows();
    if (auto* c = std::get_if<Circulant>(&v_)) return c->first_col.size();
    auto [m1, m2] = range_dims();
    return m1 * m2;
  }
  Index cols() const {
    if (auto* d = std::get_if<Dense>(&v_)) return d->H.cols();
    if (auto* c = std::get_if<Circulant>(&v_)) return c->first_col.size();
    auto [p1, p2] = domain_dims();
    return p1 * p2;
  }

  // Frame dimensions for tensor-domain variants.
  std::pair<Index, Index> range_dims() const {
    if (auto* s = std::get_if<Separable>(&v_)) return {s->G1.rows(), s->G2.rows()};
    if (auto* b = std::get_if<Block>(&v_)) return {b->k1 * b->E1.rows(), b->k2 * b->E2.rows()};
    if (auto* b = std::get_if<BlockCirculant>(&v_))
      return {b->k1 * b->E1.rows(), b->k2 * b->E2.rows()};
    throw Error("FilterSpec: range_dims on matrix-domain filter");
  }
  std::pair<Index, Index> domain_dims() const {
    if (auto* s = std::get_if<Separable>(&v_)) return {s->G1.cols(), s->G2.cols()};
    return range_dims();  // block variants are square per axis
  }

  Matrix apply(const Matrix& S) const {
    if (auto* d = std::get_if<Dense>(&v_)) {
      if (d->H.cols() != S.rows()) throw ShapeError("FilterSpec::apply: shape mismatch");
      return d->H * S;
    }
    if (auto* c = std::get_if<Circulant>(&v_)) {
      if (c->first_col.size() != S.rows())
        throw ShapeError("FilterSpec::apply: shape mismatch");
      return circulant_apply(c->first_col, S, false);
    }
    throw Error("FilterSpec::apply(Matrix) on tensor-domain filter");
  }

  Matrix apply_transpose(const Matrix& Y) const {
    if (auto* d = std::get_if<Dense>(&v_)) {
      if (d->H.rows() != Y.rows())
        throw ShapeError("FilterSpec::apply_transpose: shape mismatch");
      return d->H.transpose() * Y;
    }
    if (auto* c = std::get_if<Circulant>(&v_)) {
      if (c->first_col.size() != Y.rows())
        throw ShapeError("FilterSpec::apply_transpose: shape mismatch");
      return circulant_apply(c->first_col, Y, true);
    }
    throw Error("FilterSpec::apply_transpose(Matrix) on tensor-domain filter");
  }

  Tensor3 apply(const Tensor3& S) const {
    auto [g1, g2] = axis_factors();
    return bilinear_framewise(S, g1, g2.transpose());
  }

  Tensor3 apply_transpose(const Tensor3& Y) const {
    auto [g1, g2] = axis_factors();
    return bilinear_framewise(Y, g1.transpose(), g2);
  }

  // Dense m-by-p realization; oracle and preconditioning helper.
  Matrix densify() const {
    if (auto* d = std::get_if<Dense>(&v_)) return d->H;
    if (auto* c = std::get_if<Circulant>(&v_)) return circulant_dense(c->first_col);
    auto [g1, g2] = axis_factors();
    return kron_dense(g2, g1);
  }

  // Expanded per-axis factors G_i for tensor-domain variants.
  std::pair<Matrix, Matrix> axis_factors() const {
    if (auto* s = std::get_if<Separable>(&v_)) return {s->G1, s->G2};
    if (auto* b = std::get_if<Block>(&v_))
      return {kron_dense(Matrix::Identity(b->k1, b->k1), b->E1),
              kron_dense(Matrix::Identity(b->k2, b->k2), b->E2)};
    if (auto* b = std::get_if<BlockCirculant>(&v_))
      return {kron_dense(Matrix::Identity(b->k1, b->k1), b->E1),
              kron_dense(Matrix::Identity(b->k2, b->k2), b->E2)};
    throw Error("FilterSpec: axis_factors on matrix-domain filter");
  }

  PrefactoredOperator prefactor(double rho) const {
    if (auto* d = std::get_if<Dense>(&v_)) return PrefactoredOperator::dense_svd(d->H, rho);
    if (auto* c = std::get_if<Circulant>(&v_))
      return PrefactoredOperator::circulant(c->first_col, rho);
    if (auto* s = std::get_if<Separable>(&v_))
      return PrefactoredOperator::separable(s->G1, s->G2, rho);
    if (auto* b = std::get_if<Block>(&v_))
      return PrefactoredOperator::block(b->E1, b->E2, b->k1, b->k2, rho);
    auto* b = std::get_if<BlockCirculant>(&v_);
    return PrefactoredOperator::block_circulant(b->E1, b->E2, b->k1, b->k2, rho);
  }

 private:
  using Variant = std::variant<Dense, Circulant, Separable, Block, BlockCirculant>;
  explicit FilterSpec(Variant v) : v_(std::move(v)) {}

  static void check_block(const Matrix& E1, const Matrix& E2, Index k1, Index k2) {
    if (E1.rows() != E1.cols() || E2.rows() != E2.cols())
      throw ShapeError("FilterSpec: block E factors must be square");
    if (k1 < 1 || k2 < 1) throw ShapeError("FilterSpec: block counts must be >= 1");
  }

  static Matrix circulant_apply(const Vector& c, const Matrix& X, bool transpose) {
    CVector d = fft(c);
    if (transpose) d = d.conjugate();
    CMatrix F = fft_cols(X);
    F.array().colwise() *= d.array();
    return ifft_cols(F).real();
  }

  Variant v_;
};

}  // namespace gms

#endif  // GMS_FILTER_HPP
