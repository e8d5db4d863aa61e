// Copyright 2026 The measchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file linalg.hpp
 * Dense complex linear algebra for small composite Hilbert spaces.
 *
 * Matrices are stored row-major. Composite spaces order their factors with
 * factor 0 as the most significant digit of a flat basis index, so that the
 * Kronecker product `A ⊗ B` acts on index `i_a * dim(B) + i_b`. Operations
 * on composite spaces (embedding, partial trace, local application) work by
 * multi-index arithmetic and never build identity Kronecker factors.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "measchain/error.hpp"

namespace measchain {

using Complex = std::complex<double>;

/// Default tolerance for structural checks (unitarity, Hermiticity, norms).
inline constexpr double kStructuralTol = 1e-10;
/// State vectors closer than this to unit norm are silently renormalised.
inline constexpr double kRenormalizeTol = 1e-8;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
  }

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
    if (data_.size() != rows * cols)
      throw DimensionError("matrix entry count " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DimensionError("matrix entries must be finite");
  }

  /// Builds a matrix from nested rows; all rows must have equal length.
  static ComplexMatrix from_rows(const std::vector<std::vector<Complex>>& rows) {
    if (rows.empty() || rows.front().empty()) throw DimensionError("empty matrix literal");
    std::vector<Complex> flat;
    flat.reserve(rows.size() * rows.front().size());
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw DimensionError("ragged matrix rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return ComplexMatrix(rows.size(), rows.front().size(), std::move(flat));
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const Complex> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  static ComplexMatrix diagonal(std::initializer_list<Complex> diag) {
    return diagonal(std::span<const Complex>(diag.begin(), diag.size()));
  }

  /// |v⟩⟨w|
  static ComplexMatrix outer(std::span<const Complex> v, std::span<const Complex> w) {
    ComplexMatrix m(v.size(), w.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = v[i] * std::conj(w[j]);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> entries() const { return data_; }
  std::span<Complex> entries() { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  Complex trace() const {
    require_square("trace");
    Complex t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  /// Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  std::vector<Complex> apply(std::span<const Complex> v) const {
    if (v.size() != cols_) throw DimensionError("matrix-vector dimension mismatch");
    std::vector<Complex> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      Complex acc = 0.0;
      const Complex* row = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * v[c];
      out[r] = acc;
    }
    return out;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product dimension mismatch");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void require_square(const char* what) const {
    if (!is_square()) throw DimensionError(std::string(what) + " requires a square matrix");
  }
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Largest entrywise deviation |a_ij - b_ij|.
inline double max_deviation(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("matrix shape mismatch");
  double m = 0.0;
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t i = 0; i < ea.size(); ++i) m = std::max(m, std::abs(ea[i] - eb[i]));
  return m;
}

/// A normalised pure state.
class StateVector {
 public:
  StateVector() = default;

  /// Accepts amplitudes within kRenormalizeTol of unit norm (and renormalises
  /// them); anything further away is rejected.
  explicit StateVector(std::vector<Complex> amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.empty()) throw DimensionError("state vector dimension must be positive");
    const double n2 = squared_norm(amps_);
    if (!std::isfinite(n2)) throw DimensionError("state vector entries must be finite");
    if (std::abs(std::sqrt(n2) - 1.0) > kRenormalizeTol)
      throw NormalizationError("state vector norm " + std::to_string(std::sqrt(n2)) +
                               " is not 1");
    rescale(n2);
  }

  /// Normalises any nonzero finite vector.
  static StateVector normalized(std::vector<Complex> amplitudes) {
    if (amplitudes.empty()) throw DimensionError("state vector dimension must be positive");
    const double n2 = squared_norm(amplitudes);
    if (!std::isfinite(n2)) throw DimensionError("state vector entries must be finite");
    if (n2 < 1e-300) throw NormalizationError("cannot normalise the zero vector");
    StateVector v;
    v.amps_ = std::move(amplitudes);
    v.rescale(n2);
    return v;
  }

  static StateVector basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionError("basis index out of range");
    std::vector<Complex> a(dim);
    a[index] = 1.0;
    return StateVector(std::move(a));
  }

  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  /// |v⟩⟨v|
  ComplexMatrix projector() const { return ComplexMatrix::outer(amps_, amps_); }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  static double squared_norm(std::span<const Complex> a) {
    double s = 0.0;
    for (const auto& z : a) s += std::norm(z);
    return s;
  }
  void rescale(double n2) {
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& z : amps_) z *= inv;
  }

  std::vector<Complex> amps_;
};

/// ⟨a|b⟩
inline Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionError("inner product dimension mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline Complex inner(const StateVector& a, const StateVector& b) {
  return inner(a.amplitudes(), b.amplitudes());
}

struct SpaceFactor {
  std::string label;
  std::size_t dim = 0;
  friend bool operator==(const SpaceFactor&, const SpaceFactor&) = default;
};

/// Ordered tensor product of labelled factors.
class CompositeSpace {
 public:
  CompositeSpace() = default;

  explicit CompositeSpace(std::vector<SpaceFactor> factors) : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].dim == 0)
        throw DimensionError("factor '" + factors_[i].label + "' has zero dimension");
      for (std::size_t j = 0; j < i; ++j)
        if (factors_[j].label == factors_[i].label)
          throw DuplicateLabelError("duplicate factor label '" + factors_[i].label + "'");
    }
  }

  const std::vector<SpaceFactor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  std::size_t total_dim() const {
    std::size_t d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
  }

  bool contains(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(),
                       [&](const SpaceFactor& f) { return f.label == label; });
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].label == label) return i;
    throw UnknownLabelError("unknown space factor '" + label + "'");
  }

  std::size_t dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }

  /// Stride of each factor in the flat index (factor 0 most significant).
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(factors_.size());
    std::size_t acc = 1;
    for (std::size_t i = factors_.size(); i-- > 0;) {
      s[i] = acc;
      acc *= factors_[i].dim;
    }
    return s;
  }

  /// Returns a copy with one more factor appended.
  CompositeSpace extended(SpaceFactor f) const {
    auto fs = factors_;
    fs.push_back(std::move(f));
    return CompositeSpace(std::move(fs));
  }

  friend bool operator==(const CompositeSpace&, const CompositeSpace&) = default;

 private:
  std::vector<SpaceFactor> factors_;
};

namespace detail {

// Flat-index offsets of every joint value of the listed factors, with the
// sub-index enumerated row-major in list order.
inline std::vector<std::size_t> factor_offsets(const CompositeSpace& space,
                                               std::span<const std::size_t> factor_ids) {
  const auto strides = space.strides();
  std::vector<std::size_t> offsets{0};
  for (std::size_t f : factor_ids) {
    const std::size_t d = space.factors()[f].dim;
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * d);
    for (std::size_t base : offsets)
      for (std::size_t k = 0; k < d; ++k) next.push_back(base + k * strides[f]);
    offsets = std::move(next);
  }
  return offsets;
}

inline std::vector<std::size_t> resolve_labels(const CompositeSpace& space,
                                               std::span<const std::string> labels) {
  std::vector<std::size_t> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) {
    const std::size_t id = space.index_of(l);
    if (std::find(ids.begin(), ids.end(), id) != ids.end())
      throw DuplicateLabelError("label '" + l + "' listed twice");
    ids.push_back(id);
  }
  return ids;
}

inline std::vector<std::size_t> complement(const CompositeSpace& space,
                                           std::span<const std::size_t> ids) {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (std::find(ids.begin(), ids.end(), i) == ids.end()) rest.push_back(i);
  return rest;
}

}  // namespace detail

/// Kronecker product a ⊗ b.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      const Complex s = a(ar, ac);
      if (s == Complex{}) continue;
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
    }
  return out;
}

/// Kronecker product of vectors.
inline std::vector<Complex> tensor_product(std::span<const Complex> a, std::span<const Complex> b) {
  std::vector<Complex> out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

/**
 * Lifts `op`, acting on the factors named by `target_labels` (sub-index
 * ordered as listed), to the full space. Targets need not be contiguous or
 * in space order.
 */
inline ComplexMatrix embed_operator(const ComplexMatrix& op,
                                    std::span<const std::string> target_labels,
                                    const CompositeSpace& space) {
  const auto targets = detail::resolve_labels(space, target_labels);
  const auto rest = detail::complement(space, targets);
  const auto t_off = detail::factor_offsets(space, targets);
  const auto r_off = detail::factor_offsets(space, rest);
  if (!op.is_square() || op.rows() != t_off.size())
    throw DimensionError("operator dimension " + std::to_string(op.rows()) +
                         " does not match target dimension " + std::to_string(t_off.size()));
  const std::size_t n = space.total_dim();
  ComplexMatrix out(n, n);
  for (std::size_t r : r_off)
    for (std::size_t a = 0; a < t_off.size(); ++a)
      for (std::size_t b = 0; b < t_off.size(); ++b) out(r + t_off[a], r + t_off[b]) = op(a, b);
  return out;
}

inline ComplexMatrix embed_operator(const ComplexMatrix& op,
                                    std::initializer_list<std::string> target_labels,
                                    const CompositeSpace& space) {
  std::vector<std::string> labels(target_labels);
  return embed_operator(op, labels, space);
}

/// Applies `op` on the named factors to a flat state vector, in place of
/// `embed_operator(op, ...) * v` without forming the embedded matrix.
inline std::vector<Complex> apply_local(const ComplexMatrix& op,
                                        std::span<const std::string> target_labels,
                                        const CompositeSpace& space,
                                        std::span<const Complex> v) {
  if (v.size() != space.total_dim()) throw DimensionError("state does not match space");
  const auto targets = detail::resolve_labels(space, target_labels);
  const auto rest = detail::complement(space, targets);
  const auto t_off = detail::factor_offsets(space, targets);
  const auto r_off = detail::factor_offsets(space, rest);
  if (!op.is_square() || op.rows() != t_off.size())
    throw DimensionError("operator dimension does not match target factors");
  std::vector<Complex> out(v.size());
  std::vector<Complex> sub(t_off.size());
  for (std::size_t r : r_off) {
    for (std::size_t a = 0; a < t_off.size(); ++a) sub[a] = v[r + t_off[a]];
    for (std::size_t a = 0; a < t_off.size(); ++a) {
      Complex acc = 0.0;
      for (std::size_t b = 0; b < t_off.size(); ++b) acc += op(a, b) * sub[b];
      out[r + t_off[a]] = acc;
    }
  }
  return out;
}

/// ρ ↦ O ρ O† with O acting on the named factors.
inline ComplexMatrix conjugate_local(const ComplexMatrix& op,
                                     std::span<const std::string> target_labels,
                                     const CompositeSpace& space, const ComplexMatrix& rho) {
  const std::size_t n = space.total_dim();
  if (rho.rows() != n || rho.cols() != n) throw DimensionError("operator does not match space");
  // Columns of ρ are vectors; apply O to each column, then repeat on the adjoint.
  auto left = [&](const ComplexMatrix& m) {
    ComplexMatrix out(n, n);
    std::vector<Complex> col(n);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t r = 0; r < n; ++r) col[r] = m(r, c);
      const auto res = apply_local(op, target_labels, space, col);
      for (std::size_t r = 0; r < n; ++r) out(r, c) = res[r];
    }
    return out;
  };
  return left(left(rho).adjoint()).adjoint();
}

/**
 * Partial trace keeping `keep_labels` (result ordered as listed) and tracing
 * out every other factor.
 */
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const CompositeSpace& space,
                                   std::span<const std::string> keep_labels) {
  if (!rho.is_square()) throw DimensionError("partial trace requires a square operator");
  if (rho.rows() != space.total_dim()) throw DimensionError("operator does not match space");
  const auto keep = detail::resolve_labels(space, keep_labels);
  const auto traced = detail::complement(space, keep);
  const auto k_off = detail::factor_offsets(space, keep);
  const auto t_off = detail::factor_offsets(space, traced);
  ComplexMatrix out(k_off.size(), k_off.size());
  for (std::size_t a = 0; a < k_off.size(); ++a)
    for (std::size_t b = 0; b < k_off.size(); ++b) {
      Complex acc = 0.0;
      for (std::size_t t : t_off) acc += rho(k_off[a] + t, k_off[b] + t);
      out(a, b) = acc;
    }
  return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const CompositeSpace& space,
                                   std::initializer_list<std::string> keep_labels) {
  std::vector<std::string> labels(keep_labels);
  return partial_trace(rho, space, labels);
}

/// Partial trace of |v⟩⟨v| without forming the full projector.
inline ComplexMatrix partial_trace(const StateVector& v, const CompositeSpace& space,
                                   std::span<const std::string> keep_labels) {
  if (v.dim() != space.total_dim()) throw DimensionError("state does not match space");
  const auto keep = detail::resolve_labels(space, keep_labels);
  const auto traced = detail::complement(space, keep);
  const auto k_off = detail::factor_offsets(space, keep);
  const auto t_off = detail::factor_offsets(space, traced);
  ComplexMatrix out(k_off.size(), k_off.size());
  for (std::size_t a = 0; a < k_off.size(); ++a)
    for (std::size_t b = 0; b < k_off.size(); ++b) {
      Complex acc = 0.0;
      for (std::size_t t : t_off) acc += v[k_off[a] + t] * std::conj(v[k_off[b] + t]);
      out(a, b) = acc;
    }
  return out;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kStructuralTol) {
  if (!m.is_square()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
  return true;
}

/// True iff max |(M†M - I)_ij| ≤ tol.
inline bool is_unitary(const ComplexMatrix& m, double tol = kStructuralTol) {
  if (!m.is_square()) throw DimensionError("unitarity check requires a square matrix");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += std::conj(m(k, i)) * m(k, j);
      if (std::abs(acc - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  return true;
}

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns are eigenvectors
};

/**
 * Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
 *
 * Each rotation first removes the phase of the pivot a_pq and then applies a
 * real Jacobi rotation, so A' = J† A J stays Hermitian throughout.
 */
inline HermitianEigen eigen_hermitian(const ComplexMatrix& h, double hermitian_tol = kStructuralTol) {
  if (!is_hermitian(h, hermitian_tol)) throw NotHermitianError("matrix is not Hermitian");
  const std::size_t n = h.rows();
  ComplexMatrix a = h;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (const auto& z : a.entries()) scale += std::norm(z);
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-15 * std::max(scale, 1e-300); ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = std::abs(a(p, q));
        if (g < 1e-300) continue;
        const Complex phase = a(p, q) / g;
        const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * g);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // J = D R with D = diag(1, conj(phase)) on (p, q).
        const Complex jpp = c, jpq = s, jqp = -s * std::conj(phase), jqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
  HermitianEigen out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

/// exp(-i h t) for Hermitian h, via its eigendecomposition.
inline ComplexMatrix hermitian_evolution(const ComplexMatrix& h, double t) {
  const auto eig = eigen_hermitian(h);
  const std::size_t n = h.rows();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex phase = std::polar(1.0, -eig.values[k] * t);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = eig.vectors(i, k) * phase;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
    }
  }
  return out;
}

/**
 * Modified Gram-Schmidt over the given vectors, in order. Throws if a vector
 * becomes numerically dependent on its predecessors.
 */
inline std::vector<std::vector<Complex>> orthonormalize(std::vector<std::vector<Complex>> vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Complex c = inner(vs[j], vs[i]);
      for (std::size_t k = 0; k < vs[i].size(); ++k) vs[i][k] -= c * vs[j][k];
    }
    double n2 = 0.0;
    for (const auto& z : vs[i]) n2 += std::norm(z);
    if (n2 < 1e-20) throw NormalizationError("vectors are linearly dependent");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& z : vs[i]) z *= inv;
  }
  return vs;
}

}  // namespace measchain
