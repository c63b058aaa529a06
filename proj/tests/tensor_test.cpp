#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qcm/tensor.hpp"
#include "support/test_rng.hpp"

using namespace qcm;
using test::Rng;

namespace {

Matrix plus_state() {
  Matrix m(2, 2);
  m(0, 0) = m(0, 1) = m(1, 0) = m(1, 1) = 0.5;
  return m;
}

Matrix bell_state(std::size_t d) {
  Matrix m(d * d, d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(i * d + i, j * d + j) = 1.0 / static_cast<double>(d);
  return m;
}

// Brute-force partial trace straight from the index definition, kept separate
// from the library implementation on purpose.
Matrix ptrace_oracle(const Matrix& m, const std::vector<std::size_t>& dims,
                     const std::vector<bool>& traced) {
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    stride[i - 1] = stride[i] * dims[i];
  std::size_t kept_dim = 1;
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (!traced[i]) kept_dim *= dims[i];
  Matrix out(kept_dim, kept_dim);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      bool diag = true;
      std::size_t kr = 0, kc = 0;
      for (std::size_t s = 0; s < dims.size(); ++s) {
        const std::size_t rd = (r / stride[s]) % dims[s];
        const std::size_t cd = (c / stride[s]) % dims[s];
        if (traced[s]) {
          if (rd != cd) diag = false;
        } else {
          kr = kr * dims[s] + rd;
          kc = kc * dims[s] + cd;
        }
      }
      if (diag) out(kr, kc) += m(r, c);
    }
  return out;
}

}  // namespace

TEST_CASE("tensor product of identities") {
  const auto t = tensor_product(Matrix::identity(2).to_tensor(),
                                Matrix::identity(2).to_tensor());
  CHECK(t.dims() == std::vector<std::size_t>{2, 2, 2, 2});
  // Flattened as a 4x4 matrix this is the identity.
  const Matrix m = kron(Matrix::identity(2), Matrix::identity(2));
  CHECK(max_abs_diff(m, Matrix::identity(4)) == 0.0);
}

TEST_CASE("tensor product of basis projectors") {
  const Matrix m =
      kron(Matrix::basis_projector(2, 0), Matrix::basis_projector(2, 1));
  Matrix expect(4, 4);
  expect(1, 1) = 1.0;  // |01><01| in row-major composite order
  CHECK(max_abs_diff(m, expect) == 0.0);
}

TEST_CASE("trace multiplicativity of the tensor product") {
  Rng rng(7);
  for (int it = 0; it < 20; ++it) {
    const Matrix a = test::random_matrix(rng, 2, 2);
    const Matrix b = test::random_matrix(rng, 2, 2);
    const cplx lhs = trace(kron(a, b));
    const cplx rhs = trace(a) * trace(b);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("tensor product associativity") {
  Rng rng(11);
  const auto a = test::random_matrix(rng, 2, 3).to_tensor();
  const auto b = test::random_matrix(rng, 2, 2).to_tensor();
  const auto c = test::random_matrix(rng, 3, 2).to_tensor();
  const auto left = tensor_product(tensor_product(a, b), c);
  const auto right = tensor_product(a, tensor_product(b, c));
  REQUIRE(left.size() == right.size());
  for (std::size_t i = 0; i < left.size(); ++i)
    CHECK(std::abs(left.data()[i] - right.data()[i]) < 1e-12);
}

TEST_CASE("partial trace of the maximally entangled state") {
  const Matrix reduced = partial_trace(bell_state(2), {2, 2}, {1});
  CHECK(max_abs_diff(reduced, 0.5 * Matrix::identity(2)) < 1e-15);
}

TEST_CASE("partial trace against the brute-force oracle") {
  Rng rng(13);
  const Matrix a = test::random_matrix(rng, 3, 3);
  const Matrix b = test::random_matrix(rng, 2, 2);
  const Matrix ab = kron(a, b);

  const Matrix got = partial_trace(ab, {3, 2}, {1});
  const Matrix want = ptrace_oracle(ab, {3, 2}, {false, true});
  CHECK(max_abs_diff(got, want) < 1e-13);

  // partial_trace(A (x) B, trace B) = Tr(B) A
  Matrix scaled = a;
  scaled *= trace(b);
  CHECK(max_abs_diff(got, scaled) < 1e-12);

  // Random multi-factor instance.
  const Matrix big = test::random_matrix(rng, 12, 12);
  CHECK(max_abs_diff(partial_trace(big, {2, 3, 2}, {0, 2}),
                     ptrace_oracle(big, {2, 3, 2}, {true, false, true})) <
        1e-13);
}

TEST_CASE("trace-all partial trace") {
  Rng rng(17);
  const Matrix m = test::random_matrix(rng, 6, 6);
  const Matrix out = partial_trace(m, {2, 3}, {0, 1});
  REQUIRE(out.rows() == 1);
  CHECK(std::abs(out(0, 0) - trace(m)) < 1e-13);
}

TEST_CASE("partial trace dimension mismatch") {
  CHECK_THROWS_AS(partial_trace(Matrix::identity(4), {2, 3}, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(Matrix::identity(4), {2, 2}, {5}),
                  std::invalid_argument);
}

TEST_CASE("decohere plus state to the maximally mixed state") {
  const Matrix out = decohere(plus_state(), {2}, {0});
  CHECK(max_abs_diff(out, 0.5 * Matrix::identity(2)) < 1e-15);
}

TEST_CASE("decohere leaves diagonal matrices alone") {
  Matrix d(3, 3);
  d(0, 0) = 0.2;
  d(1, 1) = 0.3;
  d(2, 2) = 0.5;
  CHECK(max_abs_diff(decohere(d, {3}, {0}), d) == 0.0);
}

TEST_CASE("decohere is a projection") {
  Rng rng(19);
  for (int it = 0; it < 10; ++it) {
    const Matrix m = test::random_matrix(rng, 6, 6);
    const Matrix once = decohere(m, {2, 3}, {1});
    CHECK(max_abs_diff(decohere(once, {2, 3}, {1}), once) == 0.0);
    CHECK(std::abs(trace(once) - trace(m)) < 1e-13);
  }
}

TEST_CASE("subsystem permutation") {
  Rng rng(23);
  const Matrix a = test::random_matrix(rng, 2, 2);
  const Matrix b = test::random_matrix(rng, 3, 3);
  const Matrix swapped = permute_subsystems(kron(a, b), {2, 3}, {1, 0});
  CHECK(max_abs_diff(swapped, kron(b, a)) < 1e-13);
}

TEST_CASE("hermitian eigensystem reconstructs the input") {
  Rng rng(29);
  for (std::size_t d : {1u, 2u, 3u, 5u, 8u}) {
    const Matrix h = test::random_hermitian(rng, d);
    const EigenSystem sys = hermitian_eigensystem(h);
    // V diag(w) V^dag == H and V^dag V == 1.
    Matrix rebuilt(d, d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
          rebuilt(r, c) +=
              sys.values[j] * sys.vectors(r, j) * std::conj(sys.vectors(c, j));
    CHECK(max_abs_diff(rebuilt, h) < 1e-11);
    CHECK(max_abs_diff(adjoint(sys.vectors) * sys.vectors,
                       Matrix::identity(d)) < 1e-12);
    for (std::size_t j = 1; j < d; ++j)
      CHECK(sys.values[j - 1] <= sys.values[j]);
  }
}

TEST_CASE("eigenvalues of a known matrix") {
  Matrix z(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const auto vals = hermitian_eigenvalues(z);
  CHECK(vals[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(vals[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("contract_modes pairs tensor legs") {
  // Contracting the two legs of an identity matrix gives its trace.
  const auto t = Matrix::identity(5).to_tensor();
  const auto s = contract_modes(t, 0, 1);
  REQUIRE(s.size() == 1);
  CHECK(std::abs(s.data()[0] - cplx(5.0, 0.0)) == 0.0);
  CHECK_THROWS_AS(contract_modes(Matrix(2, 3).to_tensor(), 0, 1),
                  std::invalid_argument);
}
