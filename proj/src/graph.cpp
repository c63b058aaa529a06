#include "qcm/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace qcm {

namespace {

void check_id(const std::string& id) {
  if (id.empty()) throw std::invalid_argument("vertex id must be non-empty");
  if (id.find('#') != std::string::npos)
    throw std::invalid_argument("vertex id '" + id +
                                "' uses reserved character '#'");
  if (id.find("->") != std::string::npos)
    throw std::invalid_argument("vertex id '" + id +
                                "' must not contain '->'");
}

}  // namespace

std::size_t CausalGraph::add_vertex(std::string id, VertexKind kind) {
  check_id(id);
  return add_generated_vertex(std::move(id), kind);
}

std::size_t CausalGraph::add_generated_vertex(std::string id, VertexKind kind) {
  if (id.empty()) throw std::invalid_argument("vertex id must be non-empty");
  if (index_.count(id))
    throw std::invalid_argument("duplicate vertex id '" + id + "'");
  index_[id] = vertices_.size();
  vertices_.push_back({std::move(id), kind});
  cache_valid_ = false;
  return vertices_.size() - 1;
}

std::size_t CausalGraph::add_edge(const std::string& from,
                                  const std::string& to, EdgeKind kind) {
  return add_edge(vertex_index(from), vertex_index(to), kind);
}

std::size_t CausalGraph::add_edge(std::size_t from, std::size_t to,
                                  EdgeKind kind) {
  if (from >= vertices_.size() || to >= vertices_.size())
    throw std::invalid_argument("edge endpoint out of range");
  if (edge_between(from, to))
    throw std::invalid_argument("duplicate edge " + vertices_[from].id +
                                "->" + vertices_[to].id);
  if (vertices_[from].kind == VertexKind::Observed &&
      kind != EdgeKind::Classical)
    throw std::invalid_argument("outgoing edge of observed vertex '" +
                                vertices_[from].id + "' must be classical");
  edges_.push_back({from, to, kind});
  cache_valid_ = false;
  return edges_.size() - 1;
}

bool CausalGraph::has_vertex(const std::string& id) const {
  return index_.count(id) != 0;
}

std::size_t CausalGraph::vertex_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw std::invalid_argument("unknown vertex id '" + id + "'");
  return it->second;
}

std::optional<std::size_t> CausalGraph::edge_between(std::size_t from,
                                                     std::size_t to) const {
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].from == from && edges_[i].to == to) return i;
  return std::nullopt;
}

void CausalGraph::refresh_cache() const {
  in_cache_.assign(vertices_.size(), {});
  out_cache_.assign(vertices_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    in_cache_[edges_[e].to].push_back(e);
    out_cache_[edges_[e].from].push_back(e);
  }
  for (auto& v : in_cache_)
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
      if (edges_[a].from != edges_[b].from) return edges_[a].from < edges_[b].from;
      return a < b;
    });
  for (auto& v : out_cache_)
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
      if (edges_[a].to != edges_[b].to) return edges_[a].to < edges_[b].to;
      return a < b;
    });
  cache_valid_ = true;
}

const std::vector<std::size_t>& CausalGraph::in_edges(std::size_t v) const {
  if (!cache_valid_) refresh_cache();
  return in_cache_.at(v);
}

const std::vector<std::size_t>& CausalGraph::out_edges(std::size_t v) const {
  if (!cache_valid_) refresh_cache();
  return out_cache_.at(v);
}

std::vector<std::size_t> CausalGraph::parents(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t e : in_edges(v)) out.push_back(edges_[e].from);
  return out;
}

std::vector<std::size_t> CausalGraph::parents(const std::string& id) const {
  return parents(vertex_index(id));
}

std::vector<std::size_t> CausalGraph::children(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t e : out_edges(v)) out.push_back(edges_[e].to);
  return out;
}

bool is_acyclic(const CausalGraph& g, const std::vector<std::size_t>& kept) {
  // Kahn's algorithm on the kept subgraph.
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t e : kept) {
    const Edge& ed = g.edge(e);
    if (ed.from == ed.to) return false;
    ++indeg[ed.to];
    adj[ed.from].push_back(ed.to);
  }
  std::queue<std::size_t> q;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) q.push(v);
  std::size_t removed = 0;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop();
    ++removed;
    for (std::size_t c : adj[v])
      if (--indeg[c] == 0) q.push(c);
  }
  return removed == n;
}

bool is_acyclic(const CausalGraph& g) {
  std::vector<std::size_t> all(g.edge_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return is_acyclic(g, all);
}

std::vector<std::size_t> descendants(const CausalGraph& g, std::size_t v) {
  std::vector<bool> seen(g.vertex_count(), false);
  std::queue<std::size_t> q;
  for (std::size_t c : g.children(v))
    if (!seen[c]) {
      seen[c] = true;
      q.push(c);
    }
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t c : g.children(u))
      if (!seen[c]) {
        seen[c] = true;
        q.push(c);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < seen.size(); ++u)
    if (seen[u]) out.push_back(u);
  return out;
}

std::vector<std::size_t> topological_order(const CausalGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) ++indeg[g.edge(e).to];
  // Min-index first for determinism.
  std::priority_queue<std::size_t, std::vector<std::size_t>,
                      std::greater<std::size_t>>
      q;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) q.push(v);
  std::vector<std::size_t> order;
  while (!q.empty()) {
    std::size_t v = q.top();
    q.pop();
    order.push_back(v);
    for (std::size_t c : g.children(v))
      if (--indeg[c] == 0) q.push(c);
  }
  if (order.size() != n)
    throw std::invalid_argument("topological_order: graph is cyclic");
  return order;
}

namespace {

// Visits k-combinations of 0..n-1 in lexicographic order.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  if (k == 0) return false;
  std::size_t i = k;
  while (i-- > 0) {
    if (c[i] + 1 <= n - (k - i)) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

void for_each_acyclic_edge_subset(
    const CausalGraph& g, std::size_t cap,
    const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  const std::size_t m = g.edge_count();
  if (m > cap)
    throw std::invalid_argument(
        "edge subset enumeration over " + std::to_string(m) +
        " edges exceeds cap " + std::to_string(cap) +
        "; raise the cap to proceed");
  for (std::size_t k = m + 1; k-- > 0;) {
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;
    bool more = true;
    while (more) {
      if (is_acyclic(g, comb)) {
        if (!visit(comb)) return;
      }
      more = next_combination(comb, m);
    }
  }
}

std::vector<std::vector<std::size_t>> enumerate_acyclic_edge_subsets(
    const CausalGraph& g, std::size_t cap) {
  std::vector<std::vector<std::size_t>> out;
  for_each_acyclic_edge_subset(g, cap, [&](const std::vector<std::size_t>& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

namespace {

std::vector<std::size_t> edges_without_outgoing_of(
    const CausalGraph& g, const std::vector<bool>& split) {
  std::vector<std::size_t> kept;
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (!split[g.edge(e).from]) kept.push_back(e);
  return kept;
}

}  // namespace

void for_each_vertex_split_set(
    const CausalGraph& g, std::size_t cap,
    const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  const std::size_t n = g.vertex_count();
  if (n > cap)
    throw std::invalid_argument(
        "vertex split enumeration over " + std::to_string(n) +
        " vertices exceeds cap " + std::to_string(cap) +
        "; raise the cap to proceed");
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;
    bool more = true;
    while (more) {
      std::vector<bool> split(n, false);
      for (std::size_t v : comb) split[v] = true;
      if (is_acyclic(g, edges_without_outgoing_of(g, split))) {
        if (!visit(comb)) return;
      }
      more = next_combination(comb, n);
    }
  }
}

std::vector<std::vector<std::size_t>> enumerate_vertex_split_sets(
    const CausalGraph& g, std::size_t cap) {
  std::vector<std::vector<std::size_t>> out;
  for_each_vertex_split_set(g, cap, [&](const std::vector<std::size_t>& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

std::vector<std::size_t> TeleportationGraph::post_vertices() const {
  std::vector<std::size_t> out;
  for (const auto& s : splits) out.push_back(s.post_vertex);
  return out;
}

TeleportationGraph build_teleportation_graph(
    const CausalGraph& g, const std::vector<std::size_t>& kept_edges) {
  if (!is_acyclic(g, kept_edges))
    throw std::invalid_argument(
        "build_teleportation_graph: kept edge subset is cyclic");

  std::vector<bool> keep(g.edge_count(), false);
  for (std::size_t e : kept_edges) {
    if (e >= g.edge_count())
      throw std::invalid_argument("build_teleportation_graph: bad edge index");
    keep[e] = true;
  }

  TeleportationGraph tg;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    tg.derived.add_vertex(g.vertex(v).id, g.vertex(v).kind);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (keep[e]) {
      tg.derived.add_edge(ed.from, ed.to, ed.kind);
      tg.kept_edges.push_back(e);
    } else {
      SplitEdge s;
      s.base_edge = e;
      s.pre_vertex = tg.derived.add_generated_vertex("R#" + std::to_string(e),
                                           VertexKind::Unobserved);
      s.post_vertex = tg.derived.add_generated_vertex("T#" + std::to_string(e),
                                            VertexKind::Observed);
      tg.derived.add_edge(ed.from, s.post_vertex, ed.kind);
      tg.derived.add_edge(s.pre_vertex, s.post_vertex, EdgeKind::Quantum);
      tg.derived.add_edge(s.pre_vertex, ed.to, EdgeKind::Quantum);
      tg.splits.push_back(s);
    }
  }
  return tg;
}

std::vector<std::size_t> VertexSplitGraph::post_vertices() const {
  std::vector<std::size_t> out;
  for (const auto& s : splits) out.push_back(s.post_vertex);
  return out;
}

VertexSplitGraph build_vertex_split_graph(
    const CausalGraph& g, const std::vector<std::size_t>& split_vertices) {
  std::vector<bool> split(g.vertex_count(), false);
  for (std::size_t v : split_vertices) {
    if (v >= g.vertex_count())
      throw std::invalid_argument("build_vertex_split_graph: bad vertex index");
    split[v] = true;
  }
  if (!is_acyclic(g, edges_without_outgoing_of(g, split)))
    throw std::invalid_argument(
        "build_vertex_split_graph: removing outgoing edges of the split set "
        "does not leave an acyclic graph");

  VertexSplitGraph sg;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    sg.derived.add_vertex(g.vertex(v).id, g.vertex(v).kind);

  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (!split[v]) continue;
    sg.split_vertices.push_back(v);
    SplitVertex s;
    s.base_vertex = v;
    s.pre_vertex = sg.derived.add_generated_vertex("R#" + g.vertex(v).id,
                                         VertexKind::Unobserved);
    s.post_vertex = sg.derived.add_generated_vertex("T#" + g.vertex(v).id,
                                          VertexKind::Observed);
    sg.splits.push_back(s);
  }

  // Kept edges plus the rerouted structure per split vertex.
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (!split[ed.from]) sg.derived.add_edge(ed.from, ed.to, ed.kind);
  }
  for (const SplitVertex& s : sg.splits) {
    const bool observed =
        g.vertex(s.base_vertex).kind == VertexKind::Observed;
    sg.derived.add_edge(s.base_vertex, s.post_vertex,
                        observed ? EdgeKind::Classical : EdgeKind::Quantum);
    sg.derived.add_edge(s.pre_vertex, s.post_vertex, EdgeKind::Quantum);
    for (std::size_t e : g.out_edges(s.base_vertex))
      sg.derived.add_edge(s.pre_vertex, g.edge(e).to, EdgeKind::Quantum);
  }
  return sg;
}

}  // namespace qcm
