#include "qcm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qcm {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor: empty mode list");
  std::size_t p = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("tensor: zero mode dimension");
    p *= d;
  }
  return p;
}

}  // namespace

ComplexTensor::ComplexTensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), data_(checked_product(dims_), cplx(0.0, 0.0)) {}

ComplexTensor::ComplexTensor(std::vector<std::size_t> dims,
                             std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_product(dims_) != data_.size())
    throw std::invalid_argument("tensor: data length does not match dims");
}

ComplexTensor ComplexTensor::scalar(cplx value) {
  return ComplexTensor({1}, {value});
}

ComplexTensor tensor_product(const ComplexTensor& a, const ComplexTensor& b) {
  std::vector<std::size_t> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  std::vector<cplx> data(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx av = a.data()[i];
    for (std::size_t j = 0; j < b.size(); ++j)
      data[i * b.size() + j] = av * b.data()[j];
  }
  return ComplexTensor(std::move(dims), std::move(data));
}

ComplexTensor contract_modes(const ComplexTensor& t, std::size_t mode_a,
                             std::size_t mode_b) {
  const auto& dims = t.dims();
  const std::size_t n = dims.size();
  if (mode_a >= n || mode_b >= n || mode_a == mode_b)
    throw std::invalid_argument("contract_modes: invalid mode indices");
  if (dims[mode_a] != dims[mode_b])
    throw std::invalid_argument("contract_modes: mode " +
                                std::to_string(mode_a) + " and mode " +
                                std::to_string(mode_b) +
                                " have unequal dimensions");

  // Strides for the row-major layout.
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * dims[i];

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (i != mode_a && i != mode_b) kept.push_back(i);

  std::vector<std::size_t> out_dims;
  for (std::size_t i : kept) out_dims.push_back(dims[i]);
  const bool scalar_result = out_dims.empty();
  if (scalar_result) out_dims.push_back(1);

  ComplexTensor out(out_dims);
  const std::size_t out_size = out.size();
  const std::size_t d = dims[mode_a];

  for (std::size_t o = 0; o < out_size; ++o) {
    // Decompose o over the kept modes and rebuild the base flat offset.
    std::size_t rem = o;
    std::size_t base = 0;
    if (!scalar_result) {
      for (std::size_t j = kept.size(); j-- > 0;) {
        const std::size_t idx = rem % dims[kept[j]];
        rem /= dims[kept[j]];
        base += idx * stride[kept[j]];
      }
    }
    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < d; ++k)
      acc += t.data()[base + k * stride[mode_a] + k * stride[mode_b]];
    out.data()[o] = acc;
  }
  return out;
}

Matrix::Matrix() : rows_(1), cols_(1), data_(1, cplx(0.0, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("matrix: zero dimension");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("matrix: zero dimension");
  if (data_.size() != rows * cols)
    throw std::invalid_argument("matrix: data length does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::zero(std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols);
}

Matrix Matrix::basis_projector(std::size_t dim, std::size_t k) {
  Matrix m(dim, dim);
  m(k, k) = 1.0;
  return m;
}

Matrix Matrix::matrix_unit(std::size_t dim, std::size_t k, std::size_t l) {
  Matrix m(dim, dim);
  m(k, l) = 1.0;
  return m;
}

Matrix Matrix::from_tensor(const ComplexTensor& t) {
  if (t.mode_count() != 2)
    throw std::invalid_argument("matrix: tensor must have exactly two modes");
  return Matrix(t.dims()[0], t.dims()[1], t.data());
}

ComplexTensor Matrix::to_tensor() const {
  return ComplexTensor({rows_, cols_}, data_);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix add: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix sub: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matrix mul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator*(cplx s, Matrix m) { return m *= s; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

Matrix adjoint(const Matrix& m) {
  Matrix a(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(j, i) = std::conj(m(i, j));
  return a;
}

Matrix transpose(const Matrix& m) {
  Matrix a(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(j, i) = m(i, j);
  return a;
}

cplx trace(const Matrix& m) {
  if (!m.square()) throw std::invalid_argument("trace: non-square matrix");
  cplx t(0.0, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double max_abs(const Matrix& m) {
  double v = 0.0;
  for (const auto& e : m.data()) v = std::max(v, std::abs(e));
  return v;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    v = std::max(v, std::abs(a.data()[i] - b.data()[i]));
  return v;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

namespace {

void check_subsystem_dims(const Matrix& m,
                          const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (std::size_t d : dims) p *= d;
  if (!m.square() || p != m.rows())
    throw std::invalid_argument(
        "subsystem dims product " + std::to_string(p) +
        " does not match matrix dimension " + std::to_string(m.rows()));
}

std::vector<std::size_t> subsystem_strides(
    const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    stride[i - 1] = stride[i] * dims[i];
  return stride;
}

}  // namespace

Matrix partial_trace(const Matrix& m,
                     const std::vector<std::size_t>& subsystem_dims,
                     const std::vector<std::size_t>& traced) {
  check_subsystem_dims(m, subsystem_dims);
  const std::size_t n = subsystem_dims.size();
  std::vector<bool> is_traced(n, false);
  for (std::size_t t : traced) {
    if (t >= n)
      throw std::invalid_argument("partial_trace: traced subsystem index " +
                                  std::to_string(t) + " out of range");
    is_traced[t] = true;
  }

  std::vector<std::size_t> kept;
  std::size_t kept_dim = 1, traced_dim = 1;
  std::vector<std::size_t> traced_modes;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_traced[i]) {
      traced_dim *= subsystem_dims[i];
      traced_modes.push_back(i);
    } else {
      kept_dim *= subsystem_dims[i];
      kept.push_back(i);
    }
  }

  const auto stride = subsystem_strides(subsystem_dims);
  Matrix out(std::max<std::size_t>(kept_dim, 1),
             std::max<std::size_t>(kept_dim, 1));

  // Enumerate kept row/col indices and sum over the traced diagonal.
  for (std::size_t r = 0; r < kept_dim; ++r) {
    std::size_t r_base = 0, rem = r;
    for (std::size_t j = kept.size(); j-- > 0;) {
      r_base += (rem % subsystem_dims[kept[j]]) * stride[kept[j]];
      rem /= subsystem_dims[kept[j]];
    }
    for (std::size_t c = 0; c < kept_dim; ++c) {
      std::size_t c_base = 0;
      rem = c;
      for (std::size_t j = kept.size(); j-- > 0;) {
        c_base += (rem % subsystem_dims[kept[j]]) * stride[kept[j]];
        rem /= subsystem_dims[kept[j]];
      }
      cplx acc(0.0, 0.0);
      for (std::size_t t = 0; t < traced_dim; ++t) {
        std::size_t off = 0;
        rem = t;
        for (std::size_t j = traced_modes.size(); j-- > 0;) {
          off += (rem % subsystem_dims[traced_modes[j]]) * stride[traced_modes[j]];
          rem /= subsystem_dims[traced_modes[j]];
        }
        acc += m(r_base + off, c_base + off);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Matrix decohere(const Matrix& m, const std::vector<std::size_t>& subsystem_dims,
                const std::vector<std::size_t>& targets) {
  check_subsystem_dims(m, subsystem_dims);
  const std::size_t n = subsystem_dims.size();
  std::vector<bool> is_target(n, false);
  for (std::size_t t : targets) {
    if (t >= n)
      throw std::invalid_argument("decohere: target subsystem index " +
                                  std::to_string(t) + " out of range");
    is_target[t] = true;
  }
  const auto stride = subsystem_strides(subsystem_dims);
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      bool keep = true;
      for (std::size_t i = 0; i < n && keep; ++i) {
        if (!is_target[i]) continue;
        const std::size_t ri = (r / stride[i]) % subsystem_dims[i];
        const std::size_t ci = (c / stride[i]) % subsystem_dims[i];
        keep = (ri == ci);
      }
      if (keep) out(r, c) = m(r, c);
    }
  return out;
}

Matrix permute_subsystems(const Matrix& m, const std::vector<std::size_t>& dims,
                          const std::vector<std::size_t>& perm) {
  check_subsystem_dims(m, dims);
  const std::size_t n = dims.size();
  if (perm.size() != n)
    throw std::invalid_argument("permute_subsystems: bad permutation length");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p])
      throw std::invalid_argument("permute_subsystems: not a permutation");
    seen[p] = true;
  }

  const auto stride = subsystem_strides(dims);
  std::vector<std::size_t> new_dims(n);
  for (std::size_t j = 0; j < n; ++j) new_dims[j] = dims[perm[j]];
  const auto new_stride = subsystem_strides(new_dims);

  // map[old flat index] = new flat index
  std::vector<std::size_t> map(m.rows());
  for (std::size_t idx = 0; idx < m.rows(); ++idx) {
    std::size_t out = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t digit = (idx / stride[perm[j]]) % dims[perm[j]];
      out += digit * new_stride[j];
    }
    map[idx] = out;
  }

  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(map[r], map[c]) = m(r, c);
  return out;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += std::norm(a(p, q));
  return std::sqrt(s);
}

}  // namespace

EigenSystem hermitian_eigensystem(const Matrix& input) {
  if (!input.square())
    throw std::invalid_argument("hermitian_eigensystem: non-square matrix");
  const std::size_t n = input.rows();

  // Symmetrize to guard against round-off in the caller's data.
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(i, j) = 0.5 * (input(i, j) + std::conj(input(j, i)));

  Matrix v = Matrix::identity(n);
  double scale = max_abs(a);
  if (scale == 0.0) scale = 1.0;
  const double stop = 1e-15 * scale * static_cast<double>(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_norm(a) <= stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        const cplx phase = apq / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Rotation U: U(p,p)=c, U(p,q)=s*phase, U(q,p)=-s*conj(phase),
        // U(q,q)=c; update A <- U^dag A U and V <- V U.
        for (std::size_t j = 0; j < n; ++j) {
          const cplx apj = a(p, j);
          const cplx aqj = a(q, j);
          a(p, j) = c * apj - s * phase * aqj;
          a(q, j) = s * std::conj(phase) * apj + c * aqj;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cplx ajp = a(j, p);
          const cplx ajq = a(j, q);
          a(j, p) = c * ajp - s * std::conj(phase) * ajq;
          a(j, q) = s * phase * ajp + c * ajq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cplx vjp = v(j, p);
          const cplx vjq = v(j, q);
          v(j, p) = c * vjp - s * std::conj(phase) * vjq;
          v(j, q) = s * phase * vjp + c * vjq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() < a(y, y).real();
  });

  EigenSystem sys;
  sys.values.resize(n);
  sys.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sys.values[j] = a(order[j], order[j]).real();
    for (std::size_t i = 0; i < n; ++i) sys.vectors(i, j) = v(i, order[j]);
  }
  return sys;
}

std::vector<double> hermitian_eigenvalues(const Matrix& m) {
  return hermitian_eigensystem(m).values;
}

}  // namespace qcm
