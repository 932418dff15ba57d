#ifndef GMS_SYNTH_HPP
#define GMS_SYNTH_HPP

#include "gms/core.hpp"
#include "gms/filter.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gms {

// ---------------------------------------------------------------------------
// Deterministic PRNG: splitmix64 stream, Box-Muller normal variates.
// Every generator is a pure function of (dims, parameters, seed), so repeated
// calls are bit-identical and independent streams come from mixed seeds.
// ---------------------------------------------------------------------------

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller; caches the spare variate
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // unbiased integer in [0, n) by rejection
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives an independent stream seed from a base seed and up to three
// coordinates (cell indices, trial index), order-free across cells.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a = 0, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  SplitMix64 g(base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL) ^
               (c * 0x165667b19e3779f9ULL));
  return g.next();
}

// ---------------------------------------------------------------------------
// Ground-truth models
// ---------------------------------------------------------------------------

struct SparseModel {
  enum class Variant { Gaussian, Uniform, Impulsive };
  Variant variant = Variant::Gaussian;
  double sparsity_ratio = 0.05;

  static SparseModel gaussian(double rho_s) { return {Variant::Gaussian, rho_s}; }
  static SparseModel uniform(double rho_s) { return {Variant::Uniform, rho_s}; }
  static SparseModel impulsive(double rho_s) { return {Variant::Impulsive, rho_s}; }

  void validate() const {
    if (!(sparsity_ratio > 0 && sparsity_ratio < 1))
      throw InvalidParameterError("SparseModel: sparsity_ratio must be in (0,1)");
  }
};

// L0 = U V^T with U (m x r), V (n x r) i.i.d. standard normal,
// r = floor(rank_ratio * min(m,n)), clamped to at least 1.
inline Matrix gen_low_rank(Index m, Index n, double rank_ratio, std::uint64_t seed,
                           std::vector<std::string>* warnings = nullptr) {
  if (!(rank_ratio > 0 && rank_ratio <= 1))
    throw InvalidParameterError("gen_low_rank: rank_ratio must be in (0,1]");
  Index r = Index(std::floor(rank_ratio * double(std::min(m, n))));
  if (r < 1) {
    r = 1;
    if (warnings) warnings->push_back("gen_low_rank: rank clamped to 1");
  }
  SplitMix64 rng(seed);
  Matrix U(m, r), V(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < m; ++i) U(i, j) = rng.normal();
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) V(i, j) = rng.normal();
  return U * V.transpose();
}

// Exactly floor(rho_s * p * n) nonzeros at positions sampled without
// replacement; values per model. Uniform/impulsive need the paired L0 for the
// amplitude a = max|L0|.
inline Matrix gen_sparse(Index p, Index n, const SparseModel& model, std::uint64_t seed,
                         const Matrix* L0_ref = nullptr,
                         std::vector<std::string>* warnings = nullptr) {
  model.validate();
  double a = 0.0;
  if (model.variant != SparseModel::Variant::Gaussian) {
    if (!L0_ref)
      throw InvalidParameterError("gen_sparse: uniform/impulsive models need L0 reference");
    a = L0_ref->cwiseAbs().maxCoeff();
    if (a <= 0) throw InvalidParameterError("gen_sparse: amplitude from L0 is zero");
  }
  const Index total = p * n;
  Index count = Index(std::floor(model.sparsity_ratio * double(total)));
  if (count < 1) {
    count = 1;
    if (warnings) warnings->push_back("gen_sparse: nonzero count clamped to 1");
  }

  SplitMix64 rng(seed);
  // partial Fisher-Yates over the flat index space
  std::vector<Index> idx(total);
  for (Index i = 0; i < total; ++i) idx[i] = i;
  for (Index i = 0; i < count; ++i) {
    Index j = i + Index(rng.next_below(std::uint64_t(total - i)));
    std::swap(idx[i], idx[j]);
  }

  Matrix S = Matrix::Zero(p, n);
  for (Index i = 0; i < count; ++i) {
    double v = 0.0;
    switch (model.variant) {
      case SparseModel::Variant::Gaussian:
        v = rng.normal();
        break;
      case SparseModel::Variant::Uniform:
        v = rng.uniform(-a, a);
        break;
      case SparseModel::Variant::Impulsive:
        v = a * (rng.normal() >= 0 ? 1.0 : -1.0);
        break;
    }
    S(idx[i] % p, idx[i] / p) = v;
  }
  return S;
}

// ---------------------------------------------------------------------------
// Filters
// ---------------------------------------------------------------------------

inline FilterSpec gen_gaussian_filter(Index m, Index p, std::uint64_t seed) {
  if (m < 1 || p < 1) throw ShapeError("gen_gaussian_filter: dims must be >= 1");
  SplitMix64 rng(seed);
  Matrix H(m, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < m; ++i) H(i, j) = rng.normal();
  return FilterSpec::dense(std::move(H));
}

// Circulant difference filter: first column [-1, 0, ..., 0, 1]^T, i.e. the
// cyclic forward difference (row i is -1 at i, +1 at i+1 mod n).
inline FilterSpec gen_circulant_diff(Index n) {
  if (n < 1) throw ShapeError("gen_circulant_diff: n must be >= 1");
  Vector c = Vector::Zero(n);
  c[0] = -1.0;
  if (n > 1) c[n - 1] = 1.0;
  return FilterSpec::circulant(std::move(c));
}

inline Matrix blur_kernel_2x2() {
  Matrix E(2, 2);
  E << 0.4375, 0.5625,
       0.5625, 0.4375;
  return E;
}

inline Matrix blur_kernel_4x4() {
  Matrix E(4, 4);
  E << 0.1123, 0.3459, 0.3446, 0.1972,
       0.1972, 0.1123, 0.3459, 0.3446,
       0.3446, 0.1972, 0.1123, 0.3459,
       0.3459, 0.3446, 0.1972, 0.1123;
  return E;
}

// Row-stochastic block blur built from the 2x2 and 4x4 circulant kernels.
inline FilterSpec gen_paper_blur(Index k1, Index k2) {
  return FilterSpec::block_circulant(blur_kernel_2x2(), blur_kernel_4x4(), k1, k2);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline double rel_err(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw ShapeError("rel_err: shape mismatch");
  double tn = truth.norm();
  if (tn == 0) throw InvalidParameterError("rel_err: zero-norm truth");
  return (estimate - truth).norm() / tn;
}

inline double rel_err(const Tensor3& truth, const Tensor3& estimate) {
  if (!truth.same_shape(estimate)) throw ShapeError("rel_err: shape mismatch");
  double tn = truth.norm();
  if (tn == 0) throw InvalidParameterError("rel_err: zero-norm truth");
  return (estimate.raw() - truth.raw()).norm() / tn;
}

}  // namespace gms

#endif  // GMS_SYNTH_HPP
