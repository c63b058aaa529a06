#ifndef QCM_TENSOR_HPP
#define QCM_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace qcm {

using cplx = std::complex<double>;

// Dense multi-index array of complex amplitudes, stored row-major over the
// flattened index. Mode dimensions are fixed at construction; every dim >= 1.
class ComplexTensor {
public:
  explicit ComplexTensor(std::vector<std::size_t> dims);
  ComplexTensor(std::vector<std::size_t> dims, std::vector<cplx> data);

  static ComplexTensor scalar(cplx value);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t mode_count() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

private:
  std::vector<std::size_t> dims_;
  std::vector<cplx> data_;
};

// Kronecker/tensor product; result mode list is a.dims ++ b.dims.
ComplexTensor tensor_product(const ComplexTensor& a, const ComplexTensor& b);

// Sums two modes of equal dimension against each other, removing both.
ComplexTensor contract_modes(const ComplexTensor& t, std::size_t mode_a,
                             std::size_t mode_b);

// A ComplexTensor with exactly two modes (row dim, col dim).
class Matrix {
public:
  Matrix();  // 1x1 zero
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);

  static Matrix identity(std::size_t n);
  static Matrix zero(std::size_t rows, std::size_t cols);
  // |k><k| in dimension dim.
  static Matrix basis_projector(std::size_t dim, std::size_t k);
  // |k><l| in dimension dim.
  static Matrix matrix_unit(std::size_t dim, std::size_t k, std::size_t l);
  static Matrix from_tensor(const ComplexTensor& t);

  ComplexTensor to_tensor() const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(cplx s);

private:
  std::size_t rows_, cols_;
  std::vector<cplx> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(cplx s, Matrix m);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix adjoint(const Matrix& m);
Matrix transpose(const Matrix& m);
cplx trace(const Matrix& m);

double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool approx_equal(const Matrix& a, const Matrix& b, double tol);

// Reduced operator over the kept subsystems, in their original relative
// order. product(subsystem_dims) must equal both matrix dimensions.
Matrix partial_trace(const Matrix& m,
                     const std::vector<std::size_t>& subsystem_dims,
                     const std::vector<std::size_t>& traced);

// Zeroes all elements off-diagonal in the computational basis of each target
// subsystem. Idempotent and trace preserving.
Matrix decohere(const Matrix& m, const std::vector<std::size_t>& subsystem_dims,
                const std::vector<std::size_t>& targets);

// Result subsystem j is old subsystem perm[j]; perm must be a permutation of
// 0..dims.size()-1. Applied to rows and columns alike.
Matrix permute_subsystems(const Matrix& m, const std::vector<std::size_t>& dims,
                          const std::vector<std::size_t>& perm);

struct EigenSystem {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns are the corresponding eigenvectors
};

// Cyclic Jacobi diagonalization for Hermitian input (symmetrized internally).
std::vector<double> hermitian_eigenvalues(const Matrix& m);
EigenSystem hermitian_eigensystem(const Matrix& m);

}  // namespace qcm

#endif
