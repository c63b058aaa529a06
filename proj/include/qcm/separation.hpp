#ifndef QCM_SEPARATION_HPP
#define QCM_SEPARATION_HPP

#include <string>
#include <vector>

#include "qcm/graph.hpp"

namespace qcm {

// Disjoint vertex sets; v1 and v2 must be non-empty.
struct SeparationQuery {
  std::vector<std::size_t> v1, v2, v3;

  static SeparationQuery from_ids(const CausalGraph& g,
                                  const std::vector<std::string>& ids1,
                                  const std::vector<std::string>& ids2,
                                  const std::vector<std::string>& ids3);
  void validate(const CausalGraph& g) const;  // throws on violation
};

// Path-enumeration d-separation: every undirected simple path from v1 to v2
// must be blocked by v3 (chains and forks through v3, colliders whose
// closure misses v3). Paths never traverse a self-loop.
bool d_separated(const CausalGraph& g, const SeparationQuery& q);

enum class SplitVariant { EdgeSplit, VertexSplit };

// True iff some member of the acyclic family derived from g d-separates v1
// from v2 given v3 together with that member's post-selection vertices.
bool p_separated(const CausalGraph& g, const SeparationQuery& q,
                 SplitVariant variant = SplitVariant::EdgeSplit,
                 std::size_t cap = 20);

}  // namespace qcm

#endif
