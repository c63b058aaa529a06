#include "qcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcm {

const char* const kPostSelectOk = "ok";
const char* const kPostSelectFail = "fail";

namespace {

std::size_t dims_product(const CausalModel& m,
                         const std::vector<std::size_t>& edges) {
  std::size_t p = 1;
  for (std::size_t e : edges) p *= m.edge_dims.at(e);
  return p;
}

std::vector<std::size_t> edge_dim_list(const CausalModel& m,
                                       const std::vector<std::size_t>& edges) {
  std::vector<std::size_t> out;
  for (std::size_t e : edges) out.push_back(m.edge_dims.at(e));
  if (out.empty()) out.push_back(1);
  return out;
}

// Flat index map for reordering subsystems: new factor j is old factor
// perm[j].
std::vector<std::size_t> index_map(const std::vector<std::size_t>& dims,
                                   const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    stride[i - 1] = stride[i] * dims[i];
  std::vector<std::size_t> new_dims(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) new_dims[j] = dims[perm[j]];
  std::vector<std::size_t> new_stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    new_stride[i - 1] = new_stride[i] * new_dims[i];

  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  std::vector<std::size_t> map(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t out = 0;
    for (std::size_t j = 0; j < dims.size(); ++j)
      out += ((idx / stride[perm[j]]) % dims[perm[j]]) * new_stride[j];
    map[idx] = out;
  }
  return map;
}

Matrix remap_matrix(const Matrix& m, const std::vector<std::size_t>& row_map,
                    const std::vector<std::size_t>& col_map) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(row_map[r], col_map[c]) = m(r, c);
  return out;
}

}  // namespace

std::size_t CausalModel::in_dim(std::size_t v) const {
  return dims_product(*this, graph.in_edges(v));
}

std::size_t CausalModel::out_dim(std::size_t v) const {
  return dims_product(*this, graph.out_edges(v));
}

std::size_t CausalModel::total_edge_dim() const {
  std::size_t p = 1;
  for (std::size_t d : edge_dims) p *= d;
  return p;
}

std::string CausalModel::edge_name(std::size_t e) const {
  const Edge& ed = graph.edge(e);
  return graph.vertex(ed.from).id + "->" + graph.vertex(ed.to).id;
}

ValidationReport validate_model(const CausalModel& m, double tol) {
  ValidationReport rep;
  const std::size_t nv = m.graph.vertex_count();
  const std::size_t ne = m.graph.edge_count();

  if (m.edge_dims.size() != ne || m.edge_outcomes.size() != ne ||
      m.vertex_outcomes.size() != nv || m.channels.size() != nv ||
      m.povms.size() != nv) {
    rep.fail("model", "internal tables not aligned with the graph");
    return rep;
  }

  for (std::size_t e = 0; e < ne; ++e) {
    const std::string loc = "edge " + m.edge_name(e);
    if (m.edge_dims[e] == 0) {
      rep.fail(loc, "dimension must be at least 1");
      continue;
    }
    if (m.graph.edge(e).kind == EdgeKind::Classical) {
      if (m.edge_outcomes[e].empty())
        rep.fail(loc, "classical edge needs an outcome set");
      else if (m.edge_outcomes[e].size() != m.edge_dims[e])
        rep.fail(loc, "outcome set cardinality does not equal the dimension");
    } else if (!m.edge_outcomes[e].empty()) {
      rep.fail(loc, "quantum edge must not carry an outcome set");
    }
  }
  if (!rep.passed()) return rep;

  for (std::size_t v = 0; v < nv; ++v) {
    const Vertex& vert = m.graph.vertex(v);
    const std::string loc = "vertex " + vert.id;
    const std::size_t din = m.in_dim(v);
    const std::size_t dout = m.out_dim(v);

    if (vert.kind == VertexKind::Observed) {
      const auto& outcomes = m.vertex_outcomes[v];
      if (outcomes.empty()) {
        rep.fail(loc, "observed vertex needs a non-empty outcome set");
        continue;
      }
      for (std::size_t e : m.graph.out_edges(v))
        if (m.edge_outcomes[e] != outcomes)
          rep.fail("edge " + m.edge_name(e),
                   "outcome set differs from the outcome set of " + vert.id);
      const Povm& p = m.povms[v];
      if (p.dim != din) {
        rep.fail(loc, "POVM dimension " + std::to_string(p.dim) +
                          " does not match the in-edge space " +
                          std::to_string(din));
        continue;
      }
      if (p.elements.size() != outcomes.size()) {
        rep.fail(loc, "POVM has " + std::to_string(p.elements.size()) +
                          " elements for " + std::to_string(outcomes.size()) +
                          " outcomes");
        continue;
      }
      ValidationReport sub = validate_povm(p, tol);
      for (auto& iss : sub.issues) iss.location = loc + ": " + iss.location;
      rep.merge(sub);
    } else {
      const KrausChannel& ch = m.channels[v];
      if (ch.in_dim != din || ch.out_dim != dout) {
        rep.fail(loc, "channel shape " + std::to_string(ch.out_dim) + "x" +
                          std::to_string(ch.in_dim) +
                          " does not match the edge spaces " +
                          std::to_string(dout) + "x" + std::to_string(din));
        continue;
      }
      ValidationReport sub = validate_cptp(ch, tol);
      for (auto& iss : sub.issues) iss.location = loc + ": " + iss.location;
      rep.merge(sub);
      if (!sub.passed()) continue;

      // Decoherence condition on classical out-edges, checked exactly on the
      // matrix-unit basis of the input space.
      const auto& outs = m.graph.out_edges(v);
      std::vector<std::size_t> classical_positions;
      for (std::size_t j = 0; j < outs.size(); ++j)
        if (m.graph.edge(outs[j]).kind == EdgeKind::Classical)
          classical_positions.push_back(j);
      if (!classical_positions.empty()) {
        const auto out_dims = edge_dim_list(m, outs);
        double dev = 0.0;
        for (std::size_t i = 0; i < din; ++i)
          for (std::size_t j = 0; j < din; ++j) {
            const Matrix img =
                apply_channel(ch, Matrix::matrix_unit(din, i, j));
            dev = std::max(
                dev, max_abs_diff(img,
                                  decohere(img, out_dims, classical_positions)));
          }
        rep.note_deviation(dev);
        if (dev > tol)
          rep.fail(loc, "channel output is not decohered on its classical "
                        "out-edges", dev);
      }
    }
  }
  return rep;
}

TeleProtocol bell_protocol(std::size_t d) {
  if (d == 0) throw std::invalid_argument("bell_protocol: dimension 0");
  TeleProtocol p;
  p.dim_a = d;
  p.dim_b = d;
  Matrix phi(d * d, d * d);
  const double w = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) phi(i * d + i, j * d + j) = w;
  p.post_element = phi;
  p.pre_state = phi;
  p.success_prob = 1.0 / static_cast<double>(d * d);
  return p;
}

ProtocolReport verify_protocol(const TeleProtocol& p, double tol) {
  ProtocolReport out;
  ValidationReport& rep = out.report;
  const std::size_t da = p.dim_a, db = p.dim_b;

  if (p.post_element.rows() != da * db || !p.post_element.square()) {
    rep.fail("post_element", "shape does not match dim_a*dim_b");
    return out;
  }
  if (p.pre_state.rows() != db * da || !p.pre_state.square()) {
    rep.fail("pre_state", "shape does not match dim_b*dim_c");
    return out;
  }

  const double herm_e = max_abs_diff(p.post_element, adjoint(p.post_element));
  if (herm_e > tol) rep.fail("post_element", "not Hermitian", herm_e);
  const double herm_t = max_abs_diff(p.pre_state, adjoint(p.pre_state));
  if (herm_t > tol) rep.fail("pre_state", "not Hermitian", herm_t);
  if (!rep.passed()) return out;

  const auto evals_e = hermitian_eigenvalues(p.post_element);
  if (evals_e.front() < -tol)
    rep.fail("post_element", "not positive semidefinite", -evals_e.front());
  if (evals_e.back() > 1.0 + tol)
    rep.fail("post_element", "exceeds the identity", evals_e.back() - 1.0);
  const auto evals_t = hermitian_eigenvalues(p.pre_state);
  if (evals_t.front() < -tol)
    rep.fail("pre_state", "not positive semidefinite", -evals_t.front());
  const double tr_dev = std::abs(trace(p.pre_state).real() - 1.0) +
                        std::abs(trace(p.pre_state).imag());
  rep.note_deviation(tr_dev);
  if (tr_dev > tol) rep.fail("pre_state", "trace differs from 1", tr_dev);
  if (!rep.passed()) return out;

  // Response to |i><j|_A: Tr_AB[E_AB (|i><j|_A (x) tau_BC)].
  const std::vector<std::size_t> dims = {da, db, da};
  const Matrix e_full = kron(p.post_element, Matrix::identity(da));
  std::vector<std::vector<Matrix>> response(da, std::vector<Matrix>());
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      const Matrix in = kron(Matrix::matrix_unit(da, i, j), p.pre_state);
      response[i].push_back(partial_trace(e_full * in, dims, {0, 1}));
    }

  // q from the maximally mixed input: sum_i response(i,i) = q d * (1/d) * d.
  Matrix sum(da, da);
  for (std::size_t i = 0; i < da; ++i) sum += response[i][i];
  const double q = trace(sum).real() / static_cast<double>(da);
  out.extracted_q = q;

  double dev = 0.0;
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      Matrix expect(da, da);
      expect(i, j) = q;
      dev = std::max(dev, max_abs_diff(response[i][j], expect));
    }
  rep.note_deviation(dev);
  if (dev > tol)
    rep.fail("condition",
             "output is not proportional to the input on the operator basis",
             dev);
  if (q <= tol)
    rep.fail("success_prob", "extracted q is not positive", -q);
  const double qmax = 1.0 / static_cast<double>(da * da);
  if (q > qmax + tol)
    rep.fail("success_prob", "extracted q exceeds 1/d^2", q - qmax);
  return out;
}

TeleProtocol ProtocolChoice::resolve(std::size_t edge, std::size_t dim) const {
  auto it = per_edge.find(edge);
  if (it == per_edge.end()) return bell_protocol(dim);
  if (it->second.dim_a != dim)
    throw std::invalid_argument(
        "protocol for edge " + std::to_string(edge) + " has dim_a " +
        std::to_string(it->second.dim_a) + " but the edge dimension is " +
        std::to_string(dim));
  return it->second;
}

CausalModel build_teleportation_model(const CausalModel& m,
                                      const TeleportationGraph& tg,
                                      const ProtocolChoice& pc) {
  CausalModel out;
  out.name = m.name;
  out.description = m.description;
  out.graph = tg.derived;
  const std::size_t ne = out.graph.edge_count();
  const std::size_t nv = out.graph.vertex_count();
  out.edge_dims.assign(ne, 1);
  out.edge_outcomes.assign(ne, {});
  out.vertex_outcomes.assign(nv, {});
  out.channels.assign(nv, {});
  out.povms.assign(nv, {});

  // Map base edges onto derived edges and assign spaces.
  std::vector<std::size_t> carrier(m.graph.edge_count());  // derived edge
  for (std::size_t e : tg.kept_edges) {
    const Edge& ed = m.graph.edge(e);
    const std::size_t de = *out.graph.edge_between(ed.from, ed.to);
    carrier[e] = de;
    out.edge_dims[de] = m.edge_dims[e];
    out.edge_outcomes[de] = m.edge_outcomes[e];
  }
  std::vector<TeleProtocol> protocols(tg.splits.size());
  for (std::size_t s = 0; s < tg.splits.size(); ++s) {
    const SplitEdge& sp = tg.splits[s];
    const Edge& ed = m.graph.edge(sp.base_edge);
    const std::size_t d = m.edge_dims[sp.base_edge];
    protocols[s] = pc.resolve(sp.base_edge, d);

    const std::size_t e_vt = *out.graph.edge_between(ed.from, sp.post_vertex);
    const std::size_t e_rt =
        *out.graph.edge_between(sp.pre_vertex, sp.post_vertex);
    const std::size_t e_rv = *out.graph.edge_between(sp.pre_vertex, ed.to);
    out.edge_dims[e_vt] = d;
    out.edge_outcomes[e_vt] = m.edge_outcomes[sp.base_edge];
    out.edge_dims[e_rt] = protocols[s].dim_b;
    out.edge_dims[e_rv] = d;
    carrier[sp.base_edge] = e_rv;  // the input side of the simulated edge
  }

  // Wire-order permutations for the preserved mechanisms. Base in-edge e of v
  // is fed by carrier[e]; base out-edge e of v emits into carrier[e] for kept
  // edges and into (v, T) for split edges.
  std::vector<std::size_t> out_carrier(m.graph.edge_count());
  for (std::size_t e : tg.kept_edges) out_carrier[e] = carrier[e];
  for (const SplitEdge& sp : tg.splits)
    out_carrier[sp.base_edge] =
        *out.graph.edge_between(m.graph.edge(sp.base_edge).from,
                                sp.post_vertex);

  for (std::size_t v = 0; v < m.graph.vertex_count(); ++v) {
    const auto& base_in = m.graph.in_edges(v);
    const auto& base_out = m.graph.out_edges(v);
    const auto& new_in = out.graph.in_edges(v);
    const auto& new_out = out.graph.out_edges(v);

    auto perm_for = [&](const std::vector<std::size_t>& base_edges,
                        const std::vector<std::size_t>& new_edges,
                        const std::vector<std::size_t>& to_new) {
      std::vector<std::size_t> perm(new_edges.size());
      for (std::size_t j = 0; j < new_edges.size(); ++j) {
        bool found = false;
        for (std::size_t k = 0; k < base_edges.size(); ++k)
          if (to_new[base_edges[k]] == new_edges[j]) {
            perm[j] = k;
            found = true;
            break;
          }
        if (!found)
          throw std::logic_error("teleportation model: wire mapping failed");
      }
      return perm;
    };
    auto wire_map = [&](const std::vector<std::size_t>& base_edges,
                        const std::vector<std::size_t>& perm)
        -> std::vector<std::size_t> {
      if (base_edges.empty()) return {0};
      std::vector<std::size_t> dims;
      for (std::size_t e : base_edges) dims.push_back(m.edge_dims[e]);
      return index_map(dims, perm);
    };
    const auto in_map = wire_map(base_in, perm_for(base_in, new_in, carrier));
    const auto out_map =
        wire_map(base_out, perm_for(base_out, new_out, out_carrier));

    if (m.graph.vertex(v).kind == VertexKind::Observed) {
      out.vertex_outcomes[v] = m.vertex_outcomes[v];
      Povm p;
      p.dim = m.povms[v].dim;
      for (const Matrix& e : m.povms[v].elements)
        p.elements.push_back(remap_matrix(e, in_map, in_map));
      out.povms[v] = std::move(p);
    } else {
      KrausChannel ch;
      ch.in_dim = m.channels[v].in_dim;
      ch.out_dim = m.channels[v].out_dim;
      for (const Matrix& k : m.channels[v].kraus)
        ch.kraus.push_back(remap_matrix(k, out_map, in_map));
      out.channels[v] = std::move(ch);
    }
  }

  // Pre-selection vertices prepare the protocol state; out-edge order is
  // (R,v') then (R,T), so the stored state is tau with B and C swapped.
  for (std::size_t s = 0; s < tg.splits.size(); ++s) {
    const SplitEdge& sp = tg.splits[s];
    const TeleProtocol& pr = protocols[s];
    const std::size_t d = m.edge_dims[sp.base_edge];
    const Matrix tau_cb = permute_subsystems(
        pr.pre_state, {pr.dim_b, d}, {1, 0});
    out.channels[sp.pre_vertex] = KrausChannel::from_state(tau_cb);

    out.vertex_outcomes[sp.post_vertex] = {kPostSelectOk, kPostSelectFail};
    Povm p;
    p.dim = d * pr.dim_b;
    p.elements.push_back(pr.post_element);
    p.elements.push_back(Matrix::identity(d * pr.dim_b) - pr.post_element);
    out.povms[sp.post_vertex] = std::move(p);
  }
  return out;
}

ValidationReport validate_functional(const FunctionalModel& f) {
  ValidationReport rep;
  const std::size_t nv = f.graph.vertex_count();
  if (f.vertices.size() != nv) {
    rep.fail("model", "vertex table not aligned with the graph");
    return rep;
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (f.graph.vertex(v).kind != VertexKind::Observed)
      rep.fail("vertex " + f.graph.vertex(v).id,
               "functional models have only observed vertices");
  for (std::size_t e = 0; e < f.graph.edge_count(); ++e)
    if (f.graph.edge(e).kind != EdgeKind::Classical)
      rep.fail("edge", "functional models have only classical edges");
  if (!rep.passed()) return rep;

  for (std::size_t v = 0; v < nv; ++v) {
    const FunctionalVertex& fv = f.vertices[v];
    const std::string loc = "vertex " + f.graph.vertex(v).id;
    if (fv.outcomes.empty()) {
      rep.fail(loc, "empty outcome set");
      continue;
    }
    if (fv.errors.empty() || fv.errors.size() != fv.prior.size()) {
      rep.fail(loc, "error labels and prior are not aligned");
      continue;
    }
    double sum = 0.0;
    bool neg = false;
    for (double p : fv.prior) {
      if (p < 0.0) neg = true;
      sum += p;
    }
    if (neg) rep.fail(loc, "prior has a negative entry");
    const double dev = std::abs(sum - 1.0);
    rep.note_deviation(dev);
    if (dev > 1e-12) rep.fail(loc, "prior does not sum to 1", dev);

    std::size_t domain = fv.errors.size();
    for (std::size_t p : f.graph.parents(v))
      domain *= f.vertices[p].outcomes.size();
    if (fv.table.size() != domain) {
      rep.fail(loc, "lookup table covers " + std::to_string(fv.table.size()) +
                        " rows of a domain of size " + std::to_string(domain));
      continue;
    }
    for (std::size_t t : fv.table)
      if (t >= fv.outcomes.size()) {
        rep.fail(loc, "lookup table value out of range");
        break;
      }
  }
  return rep;
}

CausalModel embed_functional_model(const FunctionalModel& f) {
  const ValidationReport rep = validate_functional(f);
  if (!rep.passed())
    throw std::invalid_argument("embed_functional_model: " + rep.to_string());

  CausalModel m;
  m.name = f.name;
  m.description = f.description;
  m.graph = f.graph;
  const std::size_t nv = m.graph.vertex_count();
  const std::size_t ne = m.graph.edge_count();
  m.edge_dims.assign(ne, 1);
  m.edge_outcomes.assign(ne, {});
  m.vertex_outcomes.assign(nv, {});
  m.channels.assign(nv, {});
  m.povms.assign(nv, {});

  for (std::size_t e = 0; e < ne; ++e) {
    const std::size_t src = m.graph.edge(e).from;
    m.edge_dims[e] = f.vertices[src].outcomes.size();
    m.edge_outcomes[e] = f.vertices[src].outcomes;
  }

  for (std::size_t v = 0; v < nv; ++v) {
    const FunctionalVertex& fv = f.vertices[v];
    m.vertex_outcomes[v] = fv.outcomes;

    std::size_t din = 1;
    for (std::size_t p : m.graph.parents(v))
      din *= f.vertices[p].outcomes.size();
    const std::size_t nerr = fv.errors.size();

    // E_x = sum_y ( sum_u prior(u) [f(y,u) = x] ) |y><y| with the error
    // state absorbed.
    Povm povm;
    povm.dim = din;
    for (std::size_t x = 0; x < fv.outcomes.size(); ++x) {
      Matrix el(din, din);
      for (std::size_t y = 0; y < din; ++y) {
        double w = 0.0;
        for (std::size_t u = 0; u < nerr; ++u)
          if (fv.table[y * nerr + u] == x) w += fv.prior[u];
        el(y, y) = w;
      }
      povm.elements.push_back(std::move(el));
    }
    m.povms[v] = std::move(povm);
  }
  return m;
}

}  // namespace qcm
