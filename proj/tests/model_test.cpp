#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qcm/engine.hpp"
#include "qcm/model.hpp"
#include "support/models.hpp"

using namespace qcm;
using test::Rng;

TEST_CASE("bell protocol basics") {
  const TeleProtocol p2 = bell_protocol(2);
  CHECK(p2.success_prob == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p2.post_element(0, 0) == cplx(0.5, 0.0));

  const TeleProtocol p1 = bell_protocol(1);
  CHECK(p1.success_prob == doctest::Approx(1.0));
  CHECK(p1.post_element.rows() == 1);
  CHECK(p1.pre_state(0, 0) == cplx(1.0, 0.0));

  const ProtocolReport r3 = verify_protocol(bell_protocol(3));
  CHECK(r3.report.passed());
  CHECK(r3.extracted_q == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("verify_protocol accepts the bell protocol exactly") {
  for (std::size_t d = 1; d <= 5; ++d) {
    const ProtocolReport rep = verify_protocol(bell_protocol(d));
    CHECK(rep.report.passed());
    CHECK(std::abs(rep.extracted_q - 1.0 / static_cast<double>(d * d)) <
          1e-12);
  }
}

TEST_CASE("verify_protocol on a non-maximally-entangled pair") {
  // Schmidt coefficients (sqrt .8, sqrt .2): q = 1/(1/.8 + 1/.2) = 0.16 and
  // the matrices have exact decimal entries.
  TeleProtocol p;
  p.dim_a = 2;
  p.dim_b = 2;
  p.pre_state = Matrix(4, 4);
  p.pre_state(0, 0) = 0.8;
  p.pre_state(0, 3) = 0.4;
  p.pre_state(3, 0) = 0.4;
  p.pre_state(3, 3) = 0.2;
  p.post_element = Matrix(4, 4);
  p.post_element(0, 0) = 0.2;
  p.post_element(0, 3) = 0.4;
  p.post_element(3, 0) = 0.4;
  p.post_element(3, 3) = 0.8;
  const ProtocolReport rep = verify_protocol(p);
  CHECK(rep.report.passed());
  CHECK(rep.extracted_q == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("verify_protocol rejects a non-teleporting pair") {
  TeleProtocol p;
  p.dim_a = 2;
  p.dim_b = 2;
  p.post_element = Matrix::identity(4);
  p.pre_state = cplx(0.25, 0.0) * Matrix::identity(4);
  const ProtocolReport rep = verify_protocol(p);
  CHECK_FALSE(rep.report.passed());
}

TEST_CASE("random self-test-form protocols verify with q below the ceiling") {
  Rng rng(331);
  for (int it = 0; it < 30; ++it) {
    const std::size_t d = test::pick(rng, 2, 3);
    const TeleProtocol p = test::self_test_protocol(rng, d, it % 2 == 0);
    const ProtocolReport rep = verify_protocol(p);
    CHECK(rep.report.passed());
    CHECK(rep.extracted_q <= 1.0 / static_cast<double>(d * d) + 1e-12);
    CHECK(std::abs(rep.extracted_q - p.success_prob) < 1e-9);
  }
}

TEST_CASE("extracted q is input independent") {
  Rng rng(337);
  const TeleProtocol p = test::self_test_protocol(rng, 2, false);
  const ProtocolReport rep = verify_protocol(p);
  REQUIRE(rep.report.passed());
  const Matrix e_full = kron(p.post_element, Matrix::identity(2));
  for (int it = 0; it < 20; ++it) {
    const Matrix rho = test::random_density(rng, 2);
    const Matrix out = partial_trace(e_full * kron(rho, p.pre_state),
                                     {2, 2, 2}, {0, 1});
    const double q = trace(out).real();
    CHECK(std::abs(q - rep.extracted_q) < 1e-9);
    CHECK(max_abs_diff(out, cplx(rep.extracted_q, 0.0) * rho) < 1e-9);
  }
}

TEST_CASE("validate_model accepts the bell fixture") {
  const CausalModel m = test::bell_model();
  const ValidationReport rep = validate_model(m);
  CHECK(rep.passed());
}

TEST_CASE("validate_model flags an outcome-set mismatch naming the edge") {
  CausalModel m = test::prepare_measure_model();
  m.edge_outcomes[0] = {"a", "b"};  // edge A->L no longer matches A
  const ValidationReport rep = validate_model(m);
  REQUIRE_FALSE(rep.passed());
  bool named = false;
  for (const auto& iss : rep.issues)
    if (iss.location.find("A->L") != std::string::npos) named = true;
  CHECK(named);
}

TEST_CASE("validate_model flags a coherence-creating channel on a classical edge") {
  CausalModel m = test::prepare_measure_model();
  m.channels[1] = KrausChannel{2, 2, {test::hadamard()}};
  const ValidationReport rep = validate_model(m);
  REQUIRE_FALSE(rep.passed());
  bool decoherence = false;
  for (const auto& iss : rep.issues)
    if (iss.message.find("decohere") != std::string::npos) decoherence = true;
  CHECK(decoherence);
}

TEST_CASE("validate_model flags bad POVMs and channel shapes") {
  CausalModel m = test::prepare_measure_model();
  m.povms[2].elements[0] = cplx(2.0, 0.0) * m.povms[2].elements[0];
  CHECK_FALSE(validate_model(m).passed());

  CausalModel m2 = test::prepare_measure_model();
  m2.channels[1].out_dim = 4;
  CHECK_FALSE(validate_model(m2).passed());
}

TEST_CASE("teleportation model with everything kept is the original") {
  const CausalModel m = test::bell_model();
  std::vector<std::size_t> all(m.graph.edge_count());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = e;
  const TeleportationGraph tg = build_teleportation_graph(m.graph, all);
  const CausalModel t = build_teleportation_model(m, tg);
  CHECK(t.graph.vertex_count() == m.graph.vertex_count());
  CHECK(t.graph.edge_count() == m.graph.edge_count());
  CHECK(validate_model(t).passed());
  for (std::size_t v = 0; v < m.graph.vertex_count(); ++v) {
    if (m.graph.vertex(v).kind == VertexKind::Observed) {
      for (std::size_t x = 0; x < m.povms[v].elements.size(); ++x)
        CHECK(max_abs_diff(t.povms[v].elements[x], m.povms[v].elements[x]) ==
              0.0);
    }
  }
}

TEST_CASE("teleportation model of the self-cycle graph") {
  const CausalModel m = test::self_loop_model(Matrix::identity(2));
  // Keep the leaf edge, split the loop.
  const TeleportationGraph tg = build_teleportation_graph(m.graph, {1});
  const CausalModel t = build_teleportation_model(m, tg);
  CHECK(validate_model(t).passed());
  REQUIRE(tg.splits.size() == 1);
  const auto& s = tg.splits[0];
  CHECK(t.vertex_outcomes[s.post_vertex] ==
        std::vector<std::string>{"ok", "fail"});
  // The post-selection POVM is {Phi+, 1 - Phi+}.
  CHECK(max_abs_diff(t.povms[s.post_vertex].elements[0],
                     test::bell_state_matrix(2)) < 1e-12);
}

TEST_CASE("teleportation models for different kept sets all validate") {
  const CausalModel m = test::two_cycle_inputs_model();
  const auto subsets = enumerate_acyclic_edge_subsets(m.graph);
  for (const auto& kept : subsets) {
    const TeleportationGraph tg = build_teleportation_graph(m.graph, kept);
    const CausalModel t = build_teleportation_model(m, tg);
    CHECK(validate_model(t).passed());
    CHECK(is_acyclic(t.graph));
  }
}

TEST_CASE("protocol choice enforces the edge dimension") {
  const CausalModel m = test::self_loop_model(Matrix::identity(2));
  const TeleportationGraph tg = build_teleportation_graph(m.graph, {1});
  ProtocolChoice pc;
  pc.per_edge[0] = bell_protocol(3);
  CHECK_THROWS_AS(build_teleportation_model(m, tg, pc), std::invalid_argument);
}

TEST_CASE("embedding a constant parentless function gives a point distribution") {
  FunctionalModel f;
  f.graph.add_vertex("V", VertexKind::Observed);
  f.vertices.resize(1);
  f.vertices[0].outcomes = {"0", "1", "2"};
  f.vertices[0].table = {1};
  const CausalModel m = embed_functional_model(f);
  CHECK(validate_model(m).passed());
  CHECK(m.povms[0].elements[0](0, 0) == cplx(0.0, 0.0));
  CHECK(m.povms[0].elements[1](0, 0) == cplx(1.0, 0.0));
  CHECK(m.povms[0].elements[2](0, 0) == cplx(0.0, 0.0));
}

TEST_CASE("embedding an XOR vertex sums two basis projectors per element") {
  const FunctionalModel f = test::xor_functional();
  const CausalModel m = embed_functional_model(f);
  CHECK(validate_model(m).passed());
  // v1's POVM element for outcome x collects the two (x2,x3) pairs with
  // x2 + x3 = x (mod 2).
  const Povm& p = m.povms[0];
  REQUIRE(p.dim == 4);
  Matrix expect0(4, 4), expect1(4, 4);
  expect0(0, 0) = 1.0;  // (0,0)
  expect0(3, 3) = 1.0;  // (1,1)
  expect1(1, 1) = 1.0;  // (0,1)
  expect1(2, 2) = 1.0;  // (1,0)
  CHECK(max_abs_diff(p.elements[0], expect0) == 0.0);
  CHECK(max_abs_diff(p.elements[1], expect1) == 0.0);
}

TEST_CASE("embedded functional models always validate") {
  Rng rng(353);
  for (int it = 0; it < 40; ++it) {
    const FunctionalModel f = test::random_functional(rng, 4, 5, it % 2 == 0);
    REQUIRE(validate_functional(f).passed());
    CHECK(validate_model(embed_functional_model(f)).passed());
  }
}

TEST_CASE("functional validation catches broken tables and priors") {
  FunctionalModel f = test::xor_functional();
  f.vertices[2].prior = {0.7, 0.7};
  CHECK_FALSE(validate_functional(f).passed());

  FunctionalModel g = test::xor_functional();
  g.vertices[0].table.pop_back();
  CHECK_FALSE(validate_functional(g).passed());
}

TEST_CASE("post-selected contraction equals q times the self cycle") {
  // Pairing a map's output with a verified protocol's post element on top of
  // its pre-state reproduces q * cycle(M) for any channel.
  Rng rng(359);
  for (int it = 0; it < 20; ++it) {
    const std::size_t d = test::pick(rng, 2, 3);
    const TeleProtocol p = test::self_test_protocol(rng, d, it % 2 == 0);
    const ProtocolReport rep = verify_protocol(p);
    REQUIRE(rep.report.passed());
    const KrausChannel ch = test::random_channel(rng, d, d, 2);

    // M applied to the C factor of tau_BC gives an operator on B (x) A.
    Matrix out(d * d, d * d);
    for (const Matrix& k : ch.kraus) {
      const Matrix kb = kron(Matrix::identity(d), k);
      out += kb * p.pre_state * adjoint(kb);
    }
    const Matrix out_ab = permute_subsystems(out, {d, d}, {1, 0});
    const cplx lhs = trace(p.post_element * out_ab);
    CHECK(std::abs(lhs.imag()) < 1e-10);
    CHECK(std::abs(lhs.real() - rep.extracted_q * self_cycle(ch)) < 1e-9);
  }
}
