#include "qcm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qcm {

void ValidationReport::note_deviation(double dev) {
  max_deviation = std::max(max_deviation, dev);
}

void ValidationReport::fail(std::string location, std::string message,
                            double deviation) {
  note_deviation(deviation);
  issues.push_back({std::move(location), std::move(message), deviation});
}

void ValidationReport::merge(const ValidationReport& other) {
  note_deviation(other.max_deviation);
  issues.insert(issues.end(), other.issues.begin(), other.issues.end());
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  if (passed()) {
    os << "ok (max deviation " << max_deviation << ")";
    return os.str();
  }
  os << issues.size() << " issue(s):";
  for (const auto& iss : issues) {
    os << "\n  [" << iss.location << "] " << iss.message;
    if (iss.deviation != 0.0) os << " (deviation " << iss.deviation << ")";
  }
  return os.str();
}

KrausChannel KrausChannel::identity(std::size_t d) {
  return {d, d, {Matrix::identity(d)}};
}

KrausChannel KrausChannel::from_state(const Matrix& rho, double tol) {
  if (!rho.square()) throw std::invalid_argument("from_state: non-square rho");
  const std::size_t d = rho.rows();
  const auto sys = hermitian_eigensystem(rho);
  KrausChannel ch;
  ch.in_dim = 1;
  ch.out_dim = d;
  for (std::size_t j = 0; j < d; ++j) {
    double lam = sys.values[j];
    if (lam < -tol)
      throw std::invalid_argument(
          "from_state: state has negative eigenvalue " + std::to_string(lam));
    if (lam <= 0.0) continue;
    Matrix k(d, 1);
    const double w = std::sqrt(lam);
    for (std::size_t i = 0; i < d; ++i) k(i, 0) = w * sys.vectors(i, j);
    ch.kraus.push_back(std::move(k));
  }
  if (ch.kraus.empty()) ch.kraus.push_back(Matrix::zero(d, 1));
  return ch;
}

Matrix apply_channel(const KrausChannel& ch, const Matrix& rho) {
  if (rho.rows() != ch.in_dim || rho.cols() != ch.in_dim)
    throw std::invalid_argument("apply_channel: state dimension " +
                                std::to_string(rho.rows()) +
                                " does not match channel input " +
                                std::to_string(ch.in_dim));
  Matrix out(ch.out_dim, ch.out_dim);
  for (const Matrix& k : ch.kraus) out += k * rho * adjoint(k);
  return out;
}

ValidationReport validate_cptp(const KrausChannel& ch, double tol) {
  ValidationReport rep;
  if (ch.kraus.empty()) {
    rep.fail("kraus", "empty Kraus list");
    return rep;
  }
  for (std::size_t a = 0; a < ch.kraus.size(); ++a) {
    const Matrix& k = ch.kraus[a];
    if (k.rows() != ch.out_dim || k.cols() != ch.in_dim)
      rep.fail("kraus[" + std::to_string(a) + "]",
               "shape " + std::to_string(k.rows()) + "x" +
                   std::to_string(k.cols()) + " does not match " +
                   std::to_string(ch.out_dim) + "x" + std::to_string(ch.in_dim));
  }
  if (!rep.passed()) return rep;

  Matrix sum(ch.in_dim, ch.in_dim);
  for (const Matrix& k : ch.kraus) sum += adjoint(k) * k;
  const double dev = max_abs_diff(sum, Matrix::identity(ch.in_dim));
  rep.note_deviation(dev);
  if (dev > tol)
    rep.fail("kraus", "sum K^dag K deviates from identity", dev);
  return rep;
}

ValidationReport validate_povm(const Povm& p, double tol) {
  ValidationReport rep;
  if (p.elements.empty()) {
    rep.fail("povm", "no elements");
    return rep;
  }
  for (std::size_t x = 0; x < p.elements.size(); ++x) {
    const Matrix& e = p.elements[x];
    const std::string loc = "element[" + std::to_string(x) + "]";
    if (e.rows() != p.dim || e.cols() != p.dim) {
      rep.fail(loc, "shape does not match POVM dimension " +
                        std::to_string(p.dim));
      continue;
    }
    const double herm_dev = max_abs_diff(e, adjoint(e));
    rep.note_deviation(herm_dev);
    if (herm_dev > tol) {
      rep.fail(loc, "not Hermitian", herm_dev);
      continue;
    }
    const auto evals = hermitian_eigenvalues(e);
    const double min_ev = evals.empty() ? 0.0 : evals.front();
    if (min_ev < -tol)
      rep.fail(loc, "not positive semidefinite", -min_ev);
    else if (min_ev < 0.0)
      rep.note_deviation(-min_ev);
  }
  if (!rep.passed()) return rep;

  Matrix sum(p.dim, p.dim);
  for (const Matrix& e : p.elements) sum += e;
  const double dev = max_abs_diff(sum, Matrix::identity(p.dim));
  rep.note_deviation(dev);
  if (dev > tol) rep.fail("povm", "elements do not sum to identity", dev);
  return rep;
}

Matrix kraus_to_choi(const KrausChannel& ch) {
  const std::size_t din = ch.in_dim, dout = ch.out_dim;
  Matrix choi(din * dout, din * dout);
  for (const Matrix& k : ch.kraus) {
    // |v> = sum_i |i>_in (x) K|i>_out, C += |v><v|
    std::vector<cplx> v(din * dout, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < din; ++i)
      for (std::size_t o = 0; o < dout; ++o) v[i * dout + o] = k(o, i);
    for (std::size_t r = 0; r < v.size(); ++r)
      for (std::size_t c = 0; c < v.size(); ++c)
        choi(r, c) += v[r] * std::conj(v[c]);
  }
  return choi;
}

KrausChannel choi_to_kraus(const Matrix& choi, std::size_t in_dim,
                           std::size_t out_dim, double tol) {
  if (!choi.square() || choi.rows() != in_dim * out_dim)
    throw std::invalid_argument(
        "choi_to_kraus: matrix dimension does not equal in_dim*out_dim");
  const double herm_dev = max_abs_diff(choi, adjoint(choi));
  if (herm_dev > tol)
    throw std::invalid_argument("choi_to_kraus: matrix not Hermitian");

  const auto sys = hermitian_eigensystem(choi);
  KrausChannel ch;
  ch.in_dim = in_dim;
  ch.out_dim = out_dim;
  for (std::size_t j = 0; j < sys.values.size(); ++j) {
    const double lam = sys.values[j];
    if (lam < -tol)
      throw std::invalid_argument(
          "choi_to_kraus: negative eigenvalue " + std::to_string(lam) +
          ", not completely positive");
    if (lam <= tol) continue;
    Matrix k(out_dim, in_dim);
    const double w = std::sqrt(lam);
    for (std::size_t i = 0; i < in_dim; ++i)
      for (std::size_t o = 0; o < out_dim; ++o)
        k(o, i) = w * sys.vectors(i * out_dim + o, j);
    ch.kraus.push_back(std::move(k));
  }
  if (ch.kraus.empty()) ch.kraus.push_back(Matrix::zero(out_dim, in_dim));
  return ch;
}

}  // namespace qcm
