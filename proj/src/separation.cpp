#include "qcm/separation.hpp"

#include <stdexcept>

namespace qcm {

SeparationQuery SeparationQuery::from_ids(
    const CausalGraph& g, const std::vector<std::string>& ids1,
    const std::vector<std::string>& ids2,
    const std::vector<std::string>& ids3) {
  SeparationQuery q;
  for (const auto& id : ids1) q.v1.push_back(g.vertex_index(id));
  for (const auto& id : ids2) q.v2.push_back(g.vertex_index(id));
  for (const auto& id : ids3) q.v3.push_back(g.vertex_index(id));
  q.validate(g);
  return q;
}

void SeparationQuery::validate(const CausalGraph& g) const {
  if (v1.empty() || v2.empty())
    throw std::invalid_argument("separation query: v1 and v2 must be "
                                "non-empty");
  std::vector<int> role(g.vertex_count(), 0);
  auto mark = [&](const std::vector<std::size_t>& set, int r) {
    for (std::size_t v : set) {
      if (v >= g.vertex_count())
        throw std::invalid_argument("separation query: vertex index out of "
                                    "range");
      if (role[v] != 0)
        throw std::invalid_argument("separation query: sets must be disjoint");
      role[v] = r;
    }
  };
  mark(v1, 1);
  mark(v2, 2);
  mark(v3, 3);
}

namespace {

struct DsepContext {
  const CausalGraph& g;
  std::vector<bool> in_v2;
  std::vector<bool> in_v3;
  std::vector<bool> unblocks_collider;  // vertex or a descendant in v3
  std::vector<bool> visited;

  // Undirected neighbor steps: (other endpoint, edge points toward current).
  std::vector<std::vector<std::pair<std::size_t, bool>>> steps;
};

// DFS over simple undirected paths. `towards_v` tells whether the edge used
// to arrive at v points at v (true) or away from it (false); at intermediate
// vertices the (arrive, leave) direction pair decides blocking.
bool search_unblocked(DsepContext& ctx, std::size_t v, bool arrived_towards) {
  for (const auto& [u, leave_towards_u] : ctx.steps[v]) {
    if (ctx.visited[u]) continue;
    // Pattern at v: collider iff arrival points in and departure points in.
    const bool collider = arrived_towards && !leave_towards_u;
    const bool passable =
        collider ? ctx.unblocks_collider[v] : !ctx.in_v3[v];
    if (!passable) continue;
    if (ctx.in_v2[u]) return true;
    ctx.visited[u] = true;
    if (search_unblocked(ctx, u, leave_towards_u)) return true;
    ctx.visited[u] = false;
  }
  return false;
}

}  // namespace

bool d_separated(const CausalGraph& g, const SeparationQuery& q) {
  q.validate(g);
  const std::size_t n = g.vertex_count();

  DsepContext ctx{g, std::vector<bool>(n, false), std::vector<bool>(n, false),
                  std::vector<bool>(n, false), std::vector<bool>(n, false),
                  {}};
  for (std::size_t v : q.v2) ctx.in_v2[v] = true;
  for (std::size_t v : q.v3) ctx.in_v3[v] = true;

  // A collider W is passable iff W or one of its descendants is in v3.
  for (std::size_t v = 0; v < n; ++v) {
    if (ctx.in_v3[v]) {
      ctx.unblocks_collider[v] = true;
      continue;
    }
    for (std::size_t d : descendants(g, v))
      if (ctx.in_v3[d]) {
        ctx.unblocks_collider[v] = true;
        break;
      }
  }

  ctx.steps.assign(n, {});
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.from == ed.to) continue;  // self-loops are never traversed
    ctx.steps[ed.from].push_back({ed.to, true});
    ctx.steps[ed.to].push_back({ed.from, false});
  }

  for (std::size_t a : q.v1) {
    // Direct neighbors in v2 give an unblockable single-edge path.
    for (const auto& [u, dir] : ctx.steps[a])
      if (ctx.in_v2[u]) return false;
    std::fill(ctx.visited.begin(), ctx.visited.end(), false);
    ctx.visited[a] = true;
    for (const auto& [u, dir] : ctx.steps[a]) {
      if (ctx.visited[u] || ctx.in_v2[u]) continue;
      ctx.visited[u] = true;
      if (search_unblocked(ctx, u, dir)) return false;
      ctx.visited[u] = false;
    }
  }
  return true;
}

namespace {

bool member_separates(const CausalGraph& derived,
                      const std::vector<std::size_t>& posts,
                      const SeparationQuery& q) {
  SeparationQuery qq = q;
  qq.v3.insert(qq.v3.end(), posts.begin(), posts.end());
  return d_separated(derived, qq);
}

}  // namespace

bool p_separated(const CausalGraph& g, const SeparationQuery& q,
                 SplitVariant variant, std::size_t cap) {
  q.validate(g);
  bool found = false;
  if (variant == SplitVariant::EdgeSplit) {
    for_each_acyclic_edge_subset(
        g, cap, [&](const std::vector<std::size_t>& kept) {
          const TeleportationGraph tg = build_teleportation_graph(g, kept);
          if (member_separates(tg.derived, tg.post_vertices(), q)) {
            found = true;
            return false;
          }
          return true;
        });
  } else {
    for_each_vertex_split_set(
        g, cap, [&](const std::vector<std::size_t>& split) {
          const VertexSplitGraph sg = build_vertex_split_graph(g, split);
          if (member_separates(sg.derived, sg.post_vertices(), q)) {
            found = true;
            return false;
          }
          return true;
        });
  }
  return found;
}

}  // namespace qcm
