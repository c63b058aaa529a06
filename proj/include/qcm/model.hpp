#ifndef QCM_MODEL_HPP
#define QCM_MODEL_HPP

#include <map>
#include <string>
#include <vector>

#include "qcm/channel.hpp"
#include "qcm/graph.hpp"

namespace qcm {

// A causal graph with quantum mechanisms attached. Hilbert-space factors of a
// vertex's channel or POVM follow the graph's canonical wire order: in-edges
// by (source index, declaration order), out-edges by (target index,
// declaration order).
struct CausalModel {
  std::string name;
  std::string description;
  CausalGraph graph;

  std::vector<std::size_t> edge_dims;                     // per edge
  std::vector<std::vector<std::string>> edge_outcomes;    // classical edges
  std::vector<std::vector<std::string>> vertex_outcomes;  // observed vertices
  std::vector<KrausChannel> channels;                     // unobserved vertices
  std::vector<Povm> povms;                                // observed vertices

  std::size_t in_dim(std::size_t v) const;
  std::size_t out_dim(std::size_t v) const;
  // Product of all edge dimensions; the scale driver for the engine.
  std::size_t total_edge_dim() const;
  std::string edge_name(std::size_t e) const;
};

ValidationReport validate_model(const CausalModel& m, double tol = 1e-9);

// Post-selected teleportation pair: POVM element on A(x)B and a state on
// B(x)C with dim C = dim A, simulating the identity channel A->C with
// success probability q when conditioning on the element.
struct TeleProtocol {
  std::size_t dim_a = 1;
  std::size_t dim_b = 1;
  Matrix post_element;  // on A (x) B
  Matrix pre_state;     // on B (x) C
  double success_prob = 1.0;
};

// Maximally entangled pair; q = 1/d^2.
TeleProtocol bell_protocol(std::size_t d);

struct ProtocolReport {
  ValidationReport report;
  double extracted_q = 0.0;
};

// Checks the teleportation condition on every matrix unit |i><j| (sufficient
// by linearity), extracts q from the maximally mixed input, and confirms
// 0 < q <= 1/d^2 + tol along with positivity of the pair.
ProtocolReport verify_protocol(const TeleProtocol& p, double tol = 1e-9);

// Per split edge (keyed by base edge index); edges without an entry use the
// Bell protocol at the edge dimension.
struct ProtocolChoice {
  std::map<std::size_t, TeleProtocol> per_edge;

  TeleProtocol resolve(std::size_t edge, std::size_t dim) const;
};

// Acyclic model on tg.derived: mechanisms of preserved vertices carry over
// (re-ordered to the derived wire order), pre-selection vertices prepare the
// protocol state, post-selection vertices measure {E, 1-E} with outcomes
// {ok, fail}.
CausalModel build_teleportation_model(const CausalModel& m,
                                      const TeleportationGraph& tg,
                                      const ProtocolChoice& pc = {});

extern const char* const kPostSelectOk;
extern const char* const kPostSelectFail;

// Classical functional model: every vertex carries a finite outcome set, an
// error variable with a prior, and a lookup table over (parent outcomes,
// error value).
struct FunctionalVertex {
  std::vector<std::string> outcomes;
  std::vector<std::string> errors{"u0"};
  std::vector<double> prior{1.0};
  // Row-major over (parent outcomes in canonical in-edge order, error index);
  // values index into `outcomes`.
  std::vector<std::size_t> table;
};

struct FunctionalModel {
  std::string name;
  std::string description;
  CausalGraph graph;  // all vertices observed, all edges classical
  std::vector<FunctionalVertex> vertices;
};

ValidationReport validate_functional(const FunctionalModel& f);

// All-observed, all-classical causal model whose POVM at each vertex absorbs
// the function table and the error prior.
CausalModel embed_functional_model(const FunctionalModel& f);

}  // namespace qcm

#endif
