#ifndef GMS_CORE_HPP
#define GMS_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace gms {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

struct InvalidParameterError : Error {
  explicit InvalidParameterError(const std::string& msg) : Error(msg) {}
};

struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg) {}
};

struct DivisionByZeroError : Error {
  explicit DivisionByZeroError(const std::string& msg) : Error(msg) {}
};

struct DegenerateFilterError : Error {
  explicit DegenerateFilterError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DataError(std::string(what) + ": non-finite entries");
}

// ---------------------------------------------------------------------------
// Order-3 tensor, slice-major storage (slice k contiguous, column-major
// within a slice). mat3/ten3 are therefore plain reinterpretations.
// ---------------------------------------------------------------------------

class Tensor3 {
 public:
  Tensor3() : d1_(0), d2_(0), d3_(0) {}

  Tensor3(Index d1, Index d2, Index d3)
      : d1_(d1), d2_(d2), d3_(d3), data_(Vector::Zero(d1 * d2 * d3)) {
    if (d1 < 0 || d2 < 0 || d3 < 0) throw ShapeError("Tensor3: negative dimension");
  }

  static Tensor3 Zero(Index d1, Index d2, Index d3) { return Tensor3(d1, d2, d3); }

  Index dim1() const { return d1_; }
  Index dim2() const { return d2_; }
  Index dim3() const { return d3_; }
  Index size() const { return data_.size(); }

  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  Eigen::Map<Matrix> slice(Index k) {
    return Eigen::Map<Matrix>(data_.data() + k * d1_ * d2_, d1_, d2_);
  }
  Eigen::Map<const Matrix> slice(Index k) const {
    return Eigen::Map<const Matrix>(data_.data() + k * d1_ * d2_, d1_, d2_);
  }

  Vector& raw() { return data_; }
  const Vector& raw() const { return data_; }

  double norm() const { return data_.norm(); }
  bool allFinite() const { return data_.allFinite(); }

  bool same_shape(const Tensor3& o) const {
    return d1_ == o.d1_ && d2_ == o.d2_ && d3_ == o.d3_;
  }

  Tensor3& operator+=(const Tensor3& o) { data_ += o.data_; return *this; }
  Tensor3& operator-=(const Tensor3& o) { data_ -= o.data_; return *this; }
  Tensor3& operator*=(double a) { data_ *= a; return *this; }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { a += b; return a; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { a -= b; return a; }
  friend Tensor3 operator*(double a, Tensor3 t) { t *= a; return t; }

 private:
  Index offset(Index i, Index j, Index k) const { return k * d1_ * d2_ + j * d1_ + i; }

  Index d1_, d2_, d3_;
  Vector data_;
};

// ---------------------------------------------------------------------------
// Reshaping operators
// ---------------------------------------------------------------------------

// Column-wise reshape of a length m*n vector into an m-by-n matrix.
inline Matrix columnwise_reshape(const Vector& x, Index m, Index n) {
  if (x.size() != m * n)
    throw ShapeError("columnwise_reshape: vector length " + std::to_string(x.size()) +
                     " != " + std::to_string(m) + "*" + std::to_string(n));
  return Eigen::Map<const Matrix>(x.data(), m, n);
}

// Column-major stacking; inverse of columnwise_reshape.
inline Vector vectorize(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

// Unfolds a tensor along the third dimension: column k = vec of slice k.
inline Matrix mat3(const Tensor3& T) {
  return Eigen::Map<const Matrix>(T.raw().data(), T.dim1() * T.dim2(), T.dim3());
}

// Inverse of mat3.
inline Tensor3 ten3(const Matrix& M, Index d1, Index d2) {
  if (M.rows() != d1 * d2)
    throw ShapeError("ten3: row count " + std::to_string(M.rows()) + " != " +
                     std::to_string(d1) + "*" + std::to_string(d2));
  Tensor3 T(d1, d2, M.cols());
  Eigen::Map<Matrix>(T.raw().data(), M.rows(), M.cols()) = M;
  return T;
}

// ---------------------------------------------------------------------------
// Framewise (slice-by-slice) operators
// ---------------------------------------------------------------------------

// Slice k of the result is Lm * T[:,:,k] * Rm.
inline Tensor3 bilinear_framewise(const Tensor3& T, const Matrix& Lm, const Matrix& Rm) {
  if (Lm.cols() != T.dim1() || Rm.rows() != T.dim2())
    throw ShapeError("bilinear_framewise: factor shapes do not match tensor slices");
  Tensor3 out(Lm.rows(), Rm.cols(), T.dim3());
  for (Index k = 0; k < T.dim3(); ++k) out.slice(k) = Lm * T.slice(k) * Rm;
  return out;
}

// Each slice divided pointwise by Y; Y must have no zero entry.
inline Tensor3 slicewise_divide(const Tensor3& T, const Matrix& Y) {
  if (Y.rows() != T.dim1() || Y.cols() != T.dim2())
    throw ShapeError("slicewise_divide: divisor shape mismatch");
  if ((Y.array() == 0.0).any())
    throw DivisionByZeroError("slicewise_divide: zero entry in divisor");
  Tensor3 out(T.dim1(), T.dim2(), T.dim3());
  for (Index k = 0; k < T.dim3(); ++k)
    out.slice(k) = T.slice(k).array() / Y.array();
  return out;
}

// im_{m,n}(diag(A x B)) for diagonal A = diag(dA) (n-by-n), B = diag(dB)
// (m-by-m): equals dB * dA^T.
inline Matrix kron_diag_image(const Vector& dA, const Vector& dB) {
  return dB * dA.transpose();
}

// Dense Kronecker product, intended for oracles and small densifications.
inline Matrix kron_dense(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

}  // namespace gms

#endif  // GMS_CORE_HPP
