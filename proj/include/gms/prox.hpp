#ifndef GMS_PROX_HPP
#define GMS_PROX_HPP

#include "gms/core.hpp"

namespace gms {

inline double soft_threshold(double x, double lambda) {
  if (lambda < 0) throw InvalidParameterError("soft_threshold: lambda < 0");
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

inline Vector soft_threshold(const Vector& x, double lambda) {
  if (lambda < 0) throw InvalidParameterError("soft_threshold: lambda < 0");
  return x.unaryExpr([lambda](double v) {
    return v > lambda ? v - lambda : (v < -lambda ? v + lambda : 0.0);
  });
}

inline Matrix soft_threshold(const Matrix& x, double lambda) {
  if (lambda < 0) throw InvalidParameterError("soft_threshold: lambda < 0");
  return x.unaryExpr([lambda](double v) {
    return v > lambda ? v - lambda : (v < -lambda ? v + lambda : 0.0);
  });
}

inline Tensor3 soft_threshold(const Tensor3& x, double lambda) {
  if (lambda < 0) throw InvalidParameterError("soft_threshold: lambda < 0");
  Tensor3 out = x;
  out.raw() = soft_threshold(x.raw(), lambda);
  return out;
}

// Shrinks the singular values of Y by rho: U S_rho(Sigma) V^T.
inline Matrix singular_value_threshold(const Matrix& Y, double rho) {
  if (rho <= 0) throw InvalidParameterError("singular_value_threshold: rho <= 0");
  require_finite(Y, "singular_value_threshold");
  if (Y.size() == 0) return Y;
  Eigen::BDCSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s[r] > rho) ++r;
  if (r == 0) return Matrix::Zero(Y.rows(), Y.cols());
  return svd.matrixU().leftCols(r) *
         (s.head(r).array() - rho).matrix().asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

}  // namespace gms

#endif  // GMS_PROX_HPP
