#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qcm/distribution.hpp"
#include "qcm/separation.hpp"
#include "support/test_rng.hpp"

using namespace qcm;
using test::Rng;

namespace {

CausalGraph graph_of(std::size_t n,
                     const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  CausalGraph g;
  for (std::size_t v = 0; v < n; ++v)
    g.add_vertex("x" + std::to_string(v), VertexKind::Observed);
  for (const auto& [a, b] : edges) g.add_edge(a, b, EdgeKind::Classical);
  return g;
}

SeparationQuery q(const std::vector<std::size_t>& v1,
                  const std::vector<std::size_t>& v2,
                  const std::vector<std::size_t>& v3 = {}) {
  SeparationQuery out;
  out.v1 = v1;
  out.v2 = v2;
  out.v3 = v3;
  return out;
}

// All (V1,V2,V3) role assignments with V1, V2 non-empty, quotiented by the
// V1 <-> V2 symmetry.
std::vector<SeparationQuery> all_queries(std::size_t n) {
  std::vector<SeparationQuery> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 4;
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::size_t rem = mask;
    SeparationQuery query;
    for (std::size_t v = 0; v < n; ++v) {
      switch (rem % 4) {
        case 1: query.v1.push_back(v); break;
        case 2: query.v2.push_back(v); break;
        case 3: query.v3.push_back(v); break;
        default: break;
      }
      rem /= 4;
    }
    if (query.v1.empty() || query.v2.empty()) continue;
    if (query.v1.front() > query.v2.front()) continue;  // symmetric duplicate
    out.push_back(std::move(query));
  }
  return out;
}

CausalGraph random_digraph(Rng& rng, std::size_t n, std::size_t max_e,
                           bool allow_cycles, bool allow_loops = true) {
  while (true) {
    CausalGraph g;
    for (std::size_t v = 0; v < n; ++v)
      g.add_vertex("x" + std::to_string(v), VertexKind::Observed);
    const std::size_t want = test::pick(rng, 0, max_e);
    for (std::size_t t = 0; t < want; ++t) {
      const std::size_t a = test::pick(rng, 0, n - 1);
      const std::size_t b = test::pick(rng, 0, n - 1);
      if (a == b && !allow_loops) continue;
      if (!g.edge_between(a, b)) g.add_edge(a, b, EdgeKind::Classical);
    }
    if (allow_cycles || is_acyclic(g)) return g;
  }
}

}  // namespace

TEST_CASE("chain") {
  const CausalGraph g = graph_of(3, {{0, 1}, {1, 2}});  // x0 -> x1 -> x2
  CHECK(d_separated(g, q({0}, {2}, {1})));
  CHECK_FALSE(d_separated(g, q({0}, {2})));
}

TEST_CASE("fork") {
  const CausalGraph g = graph_of(3, {{1, 0}, {1, 2}});  // x0 <- x1 -> x2
  CHECK(d_separated(g, q({0}, {2}, {1})));
  CHECK_FALSE(d_separated(g, q({0}, {2})));
}

TEST_CASE("collider") {
  const CausalGraph g = graph_of(3, {{0, 1}, {2, 1}});  // x0 -> x1 <- x2
  CHECK(d_separated(g, q({0}, {2})));
  CHECK_FALSE(d_separated(g, q({0}, {2}, {1})));
}

TEST_CASE("collider with descendant") {
  // x0 -> x1 <- x2, x1 -> x3
  const CausalGraph g = graph_of(4, {{0, 1}, {2, 1}, {1, 3}});
  CHECK(d_separated(g, q({0}, {2})));
  CHECK_FALSE(d_separated(g, q({0}, {2}, {3})));
  CHECK_FALSE(d_separated(g, q({0}, {2}, {1, 3})));
}

TEST_CASE("direct edges are never blocked") {
  const CausalGraph g = graph_of(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK_FALSE(d_separated(g, q({0}, {2}, {1})));
}

TEST_CASE("query validation") {
  const CausalGraph g = graph_of(3, {{0, 1}});
  CHECK_THROWS_AS(d_separated(g, q({}, {1})), std::invalid_argument);
  CHECK_THROWS_AS(d_separated(g, q({0}, {0})), std::invalid_argument);
  CHECK_THROWS_AS(d_separated(g, q({0}, {1}, {7})), std::invalid_argument);
  CHECK_THROWS_AS(
      SeparationQuery::from_ids(g, {"x0"}, {"nope"}, {}),
      std::invalid_argument);
}

TEST_CASE("d-separation is symmetric") {
  Rng rng(211);
  for (int it = 0; it < 150; ++it) {
    const CausalGraph g = random_digraph(rng, 4, 6, true);
    for (const auto& query : all_queries(4)) {
      SeparationQuery swapped = query;
      std::swap(swapped.v1, swapped.v2);
      CHECK(d_separated(g, query) == d_separated(g, swapped));
    }
    break;  // one graph with all queries per iteration is plenty
  }
  // A few more graphs with a single random query each.
  for (int it = 0; it < 100; ++it) {
    const CausalGraph g = random_digraph(rng, 5, 8, true);
    const auto queries = all_queries(5);
    const auto& query = queries[test::pick(rng, 0, queries.size() - 1)];
    SeparationQuery swapped = query;
    std::swap(swapped.v1, swapped.v2);
    CHECK(d_separated(g, query) == d_separated(g, swapped));
  }
}

TEST_CASE("p-separation on the cycle-with-inputs graph") {
  // x2 -> x0, x3 -> x1, and the cycle x0 <-> x1.
  const CausalGraph g = graph_of(4, {{0, 1}, {1, 0}, {2, 0}, {3, 1}});
  CHECK_FALSE(p_separated(g, q({2}, {3})));
  CHECK(p_separated(g, q({2}, {3}, {0, 1})));
  CHECK_FALSE(p_separated(g, q({2}, {3}), SplitVariant::VertexSplit));
  CHECK(p_separated(g, q({2}, {3}, {0, 1}), SplitVariant::VertexSplit));
}

TEST_CASE("p-separation on the collider with descendant") {
  const CausalGraph g = graph_of(4, {{0, 1}, {2, 1}, {1, 3}});
  CHECK(p_separated(g, q({0}, {2})));
  CHECK_FALSE(p_separated(g, q({0}, {2}, {1})));
  CHECK(p_separated(g, q({0}, {2}), SplitVariant::VertexSplit));
  CHECK_FALSE(p_separated(g, q({0}, {2}, {1}), SplitVariant::VertexSplit));
}

TEST_CASE("non-trivial p-separation through an unconditioned collider") {
  // Cycle x0 <-> x1 with x2 -> x0; x1 -> x3 <- x4.
  const CausalGraph g =
      graph_of(5, {{0, 1}, {1, 0}, {2, 0}, {1, 3}, {4, 3}});
  CHECK(p_separated(g, q({2}, {4})));
  CHECK(p_separated(g, q({2}, {4}), SplitVariant::VertexSplit));
  CHECK_FALSE(p_separated(g, q({2}, {4}, {3})));
}

TEST_CASE("p-separation equals d-separation on acyclic graphs") {
  // Exhaustive over all digraphs on 3 vertices (acyclic ones only), every
  // query; then a random sample of larger DAGs.
  for (std::size_t mask = 0; mask < (1u << 9); ++mask) {
    CausalGraph g;
    for (std::size_t v = 0; v < 3; ++v)
      g.add_vertex("x" + std::to_string(v), VertexKind::Observed);
    bool ok = true;
    for (std::size_t a = 0; a < 3 && ok; ++a)
      for (std::size_t b = 0; b < 3 && ok; ++b)
        if (mask & (1u << (a * 3 + b))) {
          if (a == b)
            ok = false;  // self-loops make the graph cyclic anyway
          else
            g.add_edge(a, b, EdgeKind::Classical);
        }
    if (!ok || !is_acyclic(g)) continue;
    for (const auto& query : all_queries(3)) {
      CHECK(p_separated(g, query) == d_separated(g, query));
      CHECK(p_separated(g, query, SplitVariant::VertexSplit) ==
            d_separated(g, query));
    }
  }

  // Exhaustive over every labeled DAG on 4 vertices (the edge-split family).
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      if (a != b) all.push_back({a, b});
  std::size_t dags = 0;
  for (unsigned long long mask = 0; mask < (1ull << all.size()); ++mask) {
    CausalGraph g;
    for (std::size_t v = 0; v < 4; ++v)
      g.add_vertex("x" + std::to_string(v), VertexKind::Observed);
    for (std::size_t i = 0; i < all.size(); ++i)
      if (mask & (1ull << i))
        g.add_edge(all[i].first, all[i].second, EdgeKind::Classical);
    if (!is_acyclic(g)) continue;
    ++dags;
    for (const auto& query : all_queries(4))
      CHECK(p_separated(g, query) == d_separated(g, query));
  }
  CHECK(dags == 543);  // labeled DAGs on 4 vertices

  Rng rng(223);
  for (int it = 0; it < 25; ++it) {
    const CausalGraph g = random_digraph(rng, 5, 7, false);
    const auto queries = all_queries(5);
    for (int k = 0; k < 10; ++k) {
      const auto& query = queries[test::pick(rng, 0, queries.size() - 1)];
      CHECK(p_separated(g, query) == d_separated(g, query));
    }
  }
}

TEST_CASE("edge-split and vertex-split p-separation agree without self-loops") {
  Rng rng(227);
  for (int it = 0; it < 40; ++it) {
    const CausalGraph g = random_digraph(rng, 5, 6, true, false);
    const auto queries = all_queries(g.vertex_count());
    for (int k = 0; k < 6; ++k) {
      const auto& query = queries[test::pick(rng, 0, queries.size() - 1)];
      CHECK(p_separated(g, query, SplitVariant::EdgeSplit) ==
            p_separated(g, query, SplitVariant::VertexSplit));
    }
  }
}

TEST_CASE("the variants part ways on a broadcasting self-loop vertex") {
  // x0 loops onto itself and feeds both x1 and x2. Conditioning on x0 fixes
  // what both children receive, so x1 and x2 are independent in every model:
  // the edge-split criterion separates them. The vertex-split family must
  // split x0, and its single pre-selection vertex becomes an unconditioned
  // fork into both children, so that criterion reports a connection.
  const CausalGraph g = graph_of(3, {{0, 0}, {0, 1}, {0, 2}});
  const SeparationQuery query = q({1}, {2}, {0});
  CHECK(p_separated(g, query, SplitVariant::EdgeSplit));
  CHECK_FALSE(p_separated(g, query, SplitVariant::VertexSplit));
}

TEST_CASE("conditional independence of a product distribution") {
  Distribution d({{"a", {"0", "1"}}, {"b", {"0", "1"}}},
                 {0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4});
  const CiResult r = conditionally_independent(d, {0}, {1}, {}, 1e-9);
  CHECK(r.independent);
  CHECK(r.max_violation < 1e-15);
}

TEST_CASE("perfectly correlated bits are dependent") {
  Distribution d({{"a", {"0", "1"}}, {"b", {"0", "1"}}}, {0.5, 0.0, 0.0, 0.5});
  const CiResult r = conditionally_independent(d, {0}, {1}, {}, 1e-9);
  CHECK_FALSE(r.independent);
  // |P(0,0) - P(a=0)P(b=0)| = 1/2 - 1/4
  CHECK(r.max_violation == doctest::Approx(0.25));
}

TEST_CASE("conditioning can restore independence") {
  // a and b both copy a fair coin c: dependent marginally, independent
  // given c.
  std::vector<double> table(8, 0.0);
  // order: a, b, c
  table[0 * 4 + 0 * 2 + 0] = 0.5;
  table[1 * 4 + 1 * 2 + 1] = 0.5;
  Distribution d({{"a", {"0", "1"}}, {"b", {"0", "1"}}, {"c", {"0", "1"}}},
                 table);
  CHECK_FALSE(conditionally_independent(d, {0}, {1}, {}, 1e-9).independent);
  CHECK(conditionally_independent(d, {0}, {1}, {2}, 1e-9).independent);
}

TEST_CASE("conditional independence rejects bad sets") {
  Distribution d({{"a", {"0", "1"}}, {"b", {"0", "1"}}},
                 {0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(conditionally_independent(d, {0}, {0}, {}, 1e-9),
                  std::invalid_argument);
  CHECK_THROWS_AS(conditionally_independent(d, {}, {1}, {}, 1e-9),
                  std::invalid_argument);
  CHECK_THROWS_AS(conditionally_independent(d, {0}, {5}, {}, 1e-9),
                  std::invalid_argument);
}
