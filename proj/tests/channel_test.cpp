#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qcm/channel.hpp"
#include "support/test_rng.hpp"

using namespace qcm;
using test::Rng;

namespace {

KrausChannel depolarizing(std::size_t d) {
  // Kraus set {(1/sqrt d) |i><j|}.
  KrausChannel ch;
  ch.in_dim = d;
  ch.out_dim = d;
  const double w = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Matrix k(d, d);
      k(i, j) = w;
      ch.kraus.push_back(k);
    }
  return ch;
}

KrausChannel amplitude_damping(double gamma) {
  Matrix k0(2, 2), k1(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return {2, 2, {k0, k1}};
}

KrausChannel measure_and_prepare(std::size_t d) {
  // rho -> sum_i <i|rho|i> |i><i|
  KrausChannel ch;
  ch.in_dim = d;
  ch.out_dim = d;
  for (std::size_t i = 0; i < d; ++i) {
    Matrix k(d, d);
    k(i, i) = 1.0;
    ch.kraus.push_back(k);
  }
  return ch;
}

}  // namespace

TEST_CASE("identity channel is the identity") {
  Rng rng(3);
  const Matrix rho = test::random_density(rng, 3);
  CHECK(max_abs_diff(apply_channel(KrausChannel::identity(3), rho), rho) ==
        0.0);
}

TEST_CASE("depolarizing channel maps to the maximally mixed state") {
  Rng rng(5);
  for (std::size_t d : {2u, 3u}) {
    const Matrix rho = test::random_density(rng, d);
    // Oracle: explicit double sum over the Kraus terms.
    Matrix expect(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        expect(i, i) += rho(j, j) / static_cast<double>(d);
    CHECK(max_abs_diff(apply_channel(depolarizing(d), rho), expect) < 1e-14);
    CHECK(max_abs_diff(expect, cplx(1.0 / d, 0.0) * Matrix::identity(d)) <
          1e-14);
  }
}

TEST_CASE("measure-and-prepare kills off-diagonals") {
  const Matrix unit = Matrix::matrix_unit(2, 0, 1);
  const Matrix out = apply_channel(measure_and_prepare(2), unit);
  CHECK(max_abs(out) == 0.0);
}

TEST_CASE("apply_channel rejects mismatched input") {
  CHECK_THROWS_AS(
      apply_channel(KrausChannel::identity(2), Matrix::identity(3)),
      std::invalid_argument);
}

TEST_CASE("channels preserve positivity and trace") {
  Rng rng(7);
  for (int it = 0; it < 25; ++it) {
    const std::size_t din = test::pick(rng, 1, 4);
    const std::size_t dout = test::pick(rng, 1, 4);
    const KrausChannel ch = test::random_channel(rng, din, dout, 3);
    const Matrix rho = test::random_density(rng, din);
    const Matrix out = apply_channel(ch, rho);
    CHECK(std::abs(trace(out).real() - 1.0) < 1e-9);
    CHECK(std::abs(trace(out).imag()) < 1e-12);
    const auto evals = hermitian_eigenvalues(out);
    CHECK(evals.front() > -1e-9);
  }
}

TEST_CASE("validate_cptp") {
  SUBCASE("identity passes with zero deviation") {
    const auto rep = validate_cptp(KrausChannel::identity(4), 1e-9);
    CHECK(rep.passed());
    CHECK(rep.max_deviation == 0.0);
  }
  SUBCASE("doubled identity fails") {
    KrausChannel bad{2, 2, {Matrix::identity(2), Matrix::identity(2)}};
    const auto rep = validate_cptp(bad, 1e-9);
    CHECK_FALSE(rep.passed());
    CHECK(rep.max_deviation == doctest::Approx(1.0));
  }
  SUBCASE("amplitude damping passes") {
    CHECK(validate_cptp(amplitude_damping(0.3), 1e-9).passed());
  }
}

TEST_CASE("validate_povm") {
  SUBCASE("computational projectors pass") {
    Povm p{3, {Matrix::basis_projector(3, 0), Matrix::basis_projector(3, 1),
               Matrix::basis_projector(3, 2)}};
    CHECK(validate_povm(p, 1e-9).passed());
  }
  SUBCASE("incomplete elements fail") {
    Povm p{2, {cplx(0.5, 0.0) * Matrix::identity(2),
               cplx(1.0 / 3.0, 0.0) * Matrix::identity(2)}};
    const auto rep = validate_povm(p, 1e-9);
    CHECK_FALSE(rep.passed());
  }
  SUBCASE("projector and complement pass") {
    Matrix bell(4, 4);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) bell(i * 2 + i, j * 2 + j) = 0.5;
    Povm p{4, {bell, Matrix::identity(4) - bell}};
    CHECK(validate_povm(p, 1e-9).passed());
  }
  SUBCASE("non-PSD element fails") {
    Matrix neg(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    Povm p{2, {neg, Matrix::identity(2) - neg}};
    CHECK_FALSE(validate_povm(p, 1e-9).passed());
  }
}

TEST_CASE("choi round trip preserves the channel action") {
  Rng rng(11);
  for (int it = 0; it < 10; ++it) {
    const std::size_t din = test::pick(rng, 1, 3);
    const std::size_t dout = test::pick(rng, 1, 3);
    const KrausChannel ch = test::random_channel(rng, din, dout, 2);
    const KrausChannel back =
        choi_to_kraus(kraus_to_choi(ch), din, dout, 1e-9);
    CHECK(validate_cptp(back, 1e-8).passed());
    const Matrix rho = test::random_density(rng, din);
    CHECK(max_abs_diff(apply_channel(ch, rho), apply_channel(back, rho)) <
          1e-10);
  }
}

TEST_CASE("negative choi matrix is rejected") {
  // The transpose map is positive but not completely positive.
  Matrix choi(4, 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) choi(i * 2 + j, j * 2 + i) = 1.0;
  CHECK_THROWS_AS(choi_to_kraus(choi, 2, 2, 1e-9), std::invalid_argument);
}

TEST_CASE("state channel prepares its state") {
  Rng rng(13);
  const Matrix rho = test::random_density(rng, 3);
  const KrausChannel prep = KrausChannel::from_state(rho);
  CHECK(validate_cptp(prep, 1e-9).passed());
  Matrix one(1, 1);
  one(0, 0) = 1.0;
  CHECK(max_abs_diff(apply_channel(prep, one), rho) < 1e-12);
}
