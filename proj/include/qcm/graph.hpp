#ifndef QCM_GRAPH_HPP
#define QCM_GRAPH_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qcm {

enum class VertexKind { Observed, Unobserved };
enum class EdgeKind { Classical, Quantum };

struct Vertex {
  std::string id;
  VertexKind kind;
};

struct Edge {
  std::size_t from;
  std::size_t to;
  EdgeKind kind;
};

// Directed graph with observed/unobserved vertices and classical/quantum
// edges. Self-loops are allowed, parallel edges are not, and every outgoing
// edge of an observed vertex must be classical.
class CausalGraph {
public:
  std::size_t add_vertex(std::string id, VertexKind kind);
  // For builder-generated pre/post-selection vertices; permits the reserved
  // '#' that user-declared ids may not contain.
  std::size_t add_generated_vertex(std::string id, VertexKind kind);
  std::size_t add_edge(const std::string& from, const std::string& to,
                       EdgeKind kind);
  std::size_t add_edge(std::size_t from, std::size_t to, EdgeKind kind);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Vertex& vertex(std::size_t i) const { return vertices_.at(i); }
  const Edge& edge(std::size_t i) const { return edges_.at(i); }

  bool has_vertex(const std::string& id) const;
  std::size_t vertex_index(const std::string& id) const;  // throws if unknown
  std::optional<std::size_t> edge_between(std::size_t from,
                                          std::size_t to) const;

  // In-edges ordered by (source index, declaration order); out-edges by
  // (target index, declaration order). This is the canonical wire order used
  // everywhere mechanisms meet the graph.
  const std::vector<std::size_t>& in_edges(std::size_t v) const;
  const std::vector<std::size_t>& out_edges(std::size_t v) const;

  std::vector<std::size_t> parents(std::size_t v) const;
  std::vector<std::size_t> parents(const std::string& id) const;
  std::vector<std::size_t> children(std::size_t v) const;

private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> index_;
  mutable std::vector<std::vector<std::size_t>> in_cache_, out_cache_;
  mutable bool cache_valid_ = false;
  void refresh_cache() const;
};

// True iff the graph restricted to `kept_edges` has no directed cycle; a
// self-loop counts as a cycle.
bool is_acyclic(const CausalGraph& g);
bool is_acyclic(const CausalGraph& g, const std::vector<std::size_t>& kept_edges);

// Vertices reachable from v by at least one edge; with a self-loop, v is its
// own descendant.
std::vector<std::size_t> descendants(const CausalGraph& g, std::size_t v);

// Throws if cyclic.
std::vector<std::size_t> topological_order(const CausalGraph& g);

// Every E' subseteq E with (V,E') acyclic, ordered by descending |E'| and
// then lexicographically by edge index list. Callback returns false to stop.
void for_each_acyclic_edge_subset(
    const CausalGraph& g, std::size_t cap,
    const std::function<bool(const std::vector<std::size_t>&)>& visit);
std::vector<std::vector<std::size_t>> enumerate_acyclic_edge_subsets(
    const CausalGraph& g, std::size_t cap = 20);

// Every vertex subset S such that removing all outgoing edges of S leaves an
// acyclic graph, ordered by ascending |S| then lexicographically.
void for_each_vertex_split_set(
    const CausalGraph& g, std::size_t cap,
    const std::function<bool(const std::vector<std::size_t>&)>& visit);
std::vector<std::vector<std::size_t>> enumerate_vertex_split_sets(
    const CausalGraph& g, std::size_t cap = 20);

struct SplitEdge {
  std::size_t base_edge;   // index in the base graph
  std::size_t pre_vertex;  // R, index in the derived graph
  std::size_t post_vertex; // T, index in the derived graph
};

// Acyclic graph obtained from a base graph by replacing each non-kept edge
// (v,v') with pre/post-selection vertices R,T and edges (v,T), (R,T), (R,v').
// Base vertices keep their indices in the derived graph.
struct TeleportationGraph {
  CausalGraph derived;
  std::vector<std::size_t> kept_edges;  // base edge indices, ascending
  std::vector<SplitEdge> splits;        // ascending by base edge index
  std::vector<std::size_t> post_vertices() const;
};

TeleportationGraph build_teleportation_graph(
    const CausalGraph& g, const std::vector<std::size_t>& kept_edges);

struct SplitVertex {
  std::size_t base_vertex;
  std::size_t pre_vertex;
  std::size_t post_vertex;
};

// Acyclic graph obtained by rerouting, for each split vertex v, all outgoing
// edges of v through a single R_v/T_v pair: (v,T_v), (R_v,T_v) and one edge
// (R_v,c) per child c of v in the base graph.
struct VertexSplitGraph {
  CausalGraph derived;
  std::vector<std::size_t> split_vertices;  // base vertex indices, ascending
  std::vector<SplitVertex> splits;
  std::vector<std::size_t> post_vertices() const;
};

VertexSplitGraph build_vertex_split_graph(
    const CausalGraph& g, const std::vector<std::size_t>& split_vertices);

}  // namespace qcm

#endif
