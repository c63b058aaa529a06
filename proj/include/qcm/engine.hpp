#ifndef QCM_ENGINE_HPP
#define QCM_ENGINE_HPP

#include <optional>
#include <vector>

#include "qcm/distribution.hpp"
#include "qcm/model.hpp"

namespace qcm {

struct EngineOptions {
  unsigned threads = 1;          // worker count for outcome enumeration
  std::size_t dim_cap = 4096;    // guard on the product of all edge dims
  double zero_threshold = 1e-12; // below this, sum of cycle weights => inconsistent
};

// Composes the mechanisms in topological order; requires an acyclic graph
// (cyclic models go through cyclic_probability).
Distribution acyclic_probability(const CausalModel& m,
                                 const EngineOptions& opts = {});

// Self-cycle composition of a map with matching in/out spaces, evaluated from
// the definition on the matrix-unit basis. Equals sum_a |Tr K_a|^2 in Kraus
// form; real and non-negative for CP maps.
double self_cycle(const KrausChannel& ch);

struct CyclicResult {
  double sum_cycle = 0.0;             // sum_x cycle(C_x)
  double success_prob = 0.0;          // (prod_i q_i) * sum_cycle
  std::vector<double> cycle_weights;  // per outcome tuple, declaration order
  bool inconsistent = false;
  bool markov = false;                // |sum_cycle - 1| <= 1e-9
  std::optional<Distribution> distribution;
};

// General probability rule. Weights cycle(C_x) are computed by contracting
// the full mechanism network (they do not depend on the teleportation graph);
// tg and the protocol choice fix the success probabilities q_i of the split
// edges. tg == nullptr selects the maximal teleportation graph.
CyclicResult cyclic_probability(const CausalModel& m,
                                const TeleportationGraph* tg = nullptr,
                                const ProtocolChoice& pc = {},
                                const EngineOptions& opts = {});

struct MarkovResult {
  bool markov = false;
  double sum_cycle = 0.0;
};

MarkovResult markov_check(const CausalModel& m, const EngineOptions& opts = {});

// The direct route: builds the teleportation causal model on tg, runs the
// acyclic rule and conditions on every post-selection outcome being ok.
// Agrees with cyclic_probability for every family member and protocol choice.
// Throws if the post-selection mass is ~zero (inconsistent model).
Distribution teleportation_route_distribution(const CausalModel& m,
                                              const TeleportationGraph& tg,
                                              const ProtocolChoice& pc = {},
                                              const EngineOptions& opts = {},
                                              double* success_prob_out = nullptr);

}  // namespace qcm

#endif
