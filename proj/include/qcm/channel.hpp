#ifndef QCM_CHANNEL_HPP
#define QCM_CHANNEL_HPP

#include <string>
#include <vector>

#include "qcm/tensor.hpp"

namespace qcm {

struct ValidationIssue {
  std::string location;
  std::string message;
  double deviation = 0.0;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  double max_deviation = 0.0;

  bool passed() const { return issues.empty(); }
  void note_deviation(double dev);
  void fail(std::string location, std::string message, double deviation = 0.0);
  void merge(const ValidationReport& other);
  std::string to_string() const;
};

// CP map in Kraus form; each operator has shape out_dim x in_dim.
// Trace preserving when sum_a K_a^dag K_a = 1.
struct KrausChannel {
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  std::vector<Matrix> kraus;

  static KrausChannel identity(std::size_t d);
  // Exogenous preparation: channel from the trivial space to rho's space.
  static KrausChannel from_state(const Matrix& rho, double tol = 1e-9);
};

Matrix apply_channel(const KrausChannel& ch, const Matrix& rho);

ValidationReport validate_cptp(const KrausChannel& ch, double tol);

// Measurement: PSD elements on a dim-dimensional space summing to identity,
// one per outcome label.
struct Povm {
  std::size_t dim = 1;
  std::vector<Matrix> elements;
};

ValidationReport validate_povm(const Povm& p, double tol);

// Choi matrix on in (x) out with the unnormalized convention
// C = sum_ij |i><j|_in (x) ch(|i><j|).
Matrix kraus_to_choi(const KrausChannel& ch);
// Eigendecomposition route; an eigenvalue below -tol rejects the input.
KrausChannel choi_to_kraus(const Matrix& choi, std::size_t in_dim,
                           std::size_t out_dim, double tol = 1e-9);

}  // namespace qcm

#endif
