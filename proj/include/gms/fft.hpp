#ifndef GMS_FFT_HPP
#define GMS_FFT_HPP

#include "gms/core.hpp"

#include <unsupported/Eigen/FFT>

namespace gms {

inline constexpr double kPi = 3.14159265358979323846;

// DFT convention: unnormalized forward transform with omega = exp(-2*pi*i/n),
// so F F^* = n I. Inverse transforms carry the 1/n factor.

inline CVector fft(const Vector& x) {
  Eigen::FFT<double> engine;
  CVector out(x.size());
  CVector cx = x.cast<std::complex<double>>();
  engine.fwd(out, cx);
  return out;
}

inline CVector fft(const CVector& x) {
  Eigen::FFT<double> engine;
  CVector out(x.size());
  engine.fwd(out, x);
  return out;
}

inline CVector ifft(const CVector& x) {
  Eigen::FFT<double> engine;
  CVector out(x.size());
  engine.inv(out, x);
  return out;
}

// Columnwise transforms.
inline CMatrix fft_cols(const CMatrix& X) {
  Eigen::FFT<double> engine;
  CMatrix out(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    CVector in = X.col(j), f(X.rows());
    engine.fwd(f, in);
    out.col(j) = f;
  }
  return out;
}

inline CMatrix fft_cols(const Matrix& X) {
  return fft_cols(CMatrix(X.cast<std::complex<double>>()));
}

inline CMatrix ifft_cols(const CMatrix& X) {
  Eigen::FFT<double> engine;
  CMatrix out(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    CVector in = X.col(j), t(X.rows());
    engine.inv(t, in);
    out.col(j) = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circulant matrices
// ---------------------------------------------------------------------------

// Eigenvalues d of the circulant C with the given first column, satisfying
// F C F^* = n diag(d), i.e. d = F c.
struct CirculantSpectrum {
  Index size = 0;
  CVector eigenvalues;
};

inline CirculantSpectrum circulant_spectrum(const Vector& first_col) {
  if (first_col.size() == 0) throw ShapeError("circulant_spectrum: empty first column");
  return CirculantSpectrum{first_col.size(), fft(first_col)};
}

// Dense circulant built from its first column. Oracle/densify helper.
inline Matrix circulant_dense(const Vector& first_col) {
  const Index n = first_col.size();
  if (n == 0) throw ShapeError("circulant_dense: empty first column");
  Matrix C(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) C((i + j) % n, j) = first_col[i];
  return C;
}

// Unnormalized DFT matrix F[j,k] = omega^{jk}. Oracle helper; O(n^2) storage.
inline CMatrix dft_matrix(Index n) {
  const std::complex<double> i(0.0, 1.0);
  CMatrix F(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      F(j, k) = std::exp(-2.0 * kPi * i * double(j * k) / double(n));
  return F;
}

}  // namespace gms

#endif  // GMS_FFT_HPP
