#include "qcm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qcm {

namespace {

void check_dim_cap(const CausalModel& m, const EngineOptions& opts) {
  const std::size_t total = m.total_edge_dim();
  if (opts.dim_cap != 0 && total > opts.dim_cap)
    throw std::invalid_argument(
        "total edge dimension " + std::to_string(total) + " exceeds the cap " +
        std::to_string(opts.dim_cap) +
        "; raise it via the engine options or QCM_DIM_CAP");
}

std::vector<std::size_t> edge_dim_list(const CausalModel& m,
                                       const std::vector<std::size_t>& edges) {
  std::vector<std::size_t> out;
  for (std::size_t e : edges) out.push_back(m.edge_dims[e]);
  return out;
}

// CP map attached to one vertex for one outcome (channels ignore the outcome).
struct VertexOp {
  std::vector<Matrix> kraus;  // out_dim x in_dim
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
};

VertexOp channel_op(const KrausChannel& ch) {
  return {ch.kraus, ch.in_dim, ch.out_dim};
}

// M_x(rho) = Tr[E_x rho] (x)_e |x><x|: Kraus set {sqrt(l_i) |x...x><u_i|}
// from the PSD eigendecomposition of E_x.
VertexOp observed_op(const CausalModel& m, std::size_t v, std::size_t x) {
  const Povm& p = m.povms[v];
  const auto& outs = m.graph.out_edges(v);
  const std::size_t dout = m.out_dim(v);

  // All out-edges carry the vertex outcome set, so the output basis vector
  // has every digit equal to x.
  std::size_t target = 0;
  for (std::size_t j = 0; j < outs.size(); ++j)
    target = target * m.edge_dims[outs[j]] + x;

  const auto sys = hermitian_eigensystem(p.elements[x]);
  VertexOp op;
  op.in_dim = p.dim;
  op.out_dim = dout;
  const double scale = std::max(1.0, std::abs(sys.values.back()));
  for (std::size_t j = 0; j < sys.values.size(); ++j) {
    const double lam = sys.values[j];
    if (lam <= 1e-14 * scale) continue;
    Matrix k(dout, p.dim);
    const double w = std::sqrt(lam);
    for (std::size_t i = 0; i < p.dim; ++i)
      k(target, i) = w * std::conj(sys.vectors(i, j));
    op.kraus.push_back(std::move(k));
  }
  if (op.kraus.empty()) op.kraus.push_back(Matrix::zero(dout, p.dim));
  return op;
}

struct CompiledModel {
  const CausalModel* model;
  std::vector<std::size_t> observed;             // vertex indices, declaration order
  std::vector<std::size_t> outcome_counts;       // per observed vertex
  std::size_t tuple_count = 1;
  // ops[v][x]: observed vertices have one entry per outcome, unobserved one.
  std::vector<std::vector<VertexOp>> ops;

  std::vector<std::size_t> tuple_at(std::size_t flat) const {
    std::vector<std::size_t> a(observed.size());
    for (std::size_t i = observed.size(); i-- > 0;) {
      a[i] = flat % outcome_counts[i];
      flat /= outcome_counts[i];
    }
    return a;
  }
};

CompiledModel compile(const CausalModel& m) {
  CompiledModel c;
  c.model = &m;
  c.ops.resize(m.graph.vertex_count());
  for (std::size_t v = 0; v < m.graph.vertex_count(); ++v) {
    if (m.graph.vertex(v).kind == VertexKind::Observed) {
      c.observed.push_back(v);
      c.outcome_counts.push_back(m.vertex_outcomes[v].size());
      c.tuple_count *= m.vertex_outcomes[v].size();
      for (std::size_t x = 0; x < m.vertex_outcomes[v].size(); ++x)
        c.ops[v].push_back(observed_op(m, v, x));
    } else {
      c.ops[v].push_back(channel_op(m.channels[v]));
    }
  }
  return c;
}

std::vector<Distribution::Variable> observed_variables(const CausalModel& m,
                                                       const CompiledModel& c) {
  std::vector<Distribution::Variable> vars;
  for (std::size_t v : c.observed)
    vars.push_back({m.graph.vertex(v).id, m.vertex_outcomes[v]});
  return vars;
}

//---------------------------------------------------------------------------
// Cycle route: contract the double-layer mechanism network. Each edge gives a
// ket wire and a bra wire pairing the source's output legs with the target's
// input legs; contracting everything yields cycle(C_x).
//---------------------------------------------------------------------------

struct Leg {
  std::size_t edge;
  bool bra;
};

constexpr std::size_t kNoEdge = static_cast<std::size_t>(-1);

// Double-layer tensor of a CP map: modes are out kets, out bras, in kets,
// in bras, each decomposed per edge; entries sum_a K_a (x) conj(K_a).
ComplexTensor superop_tensor(const VertexOp& op,
                             const std::vector<std::size_t>& out_dims,
                             const std::vector<std::size_t>& in_dims,
                             std::vector<Leg>* legs,
                             const std::vector<std::size_t>& out_edges,
                             const std::vector<std::size_t>& in_edges) {
  std::vector<std::size_t> dims;
  legs->clear();
  auto push_layer = [&](const std::vector<std::size_t>& ds,
                        const std::vector<std::size_t>& es, bool bra) {
    if (es.empty()) {
      dims.push_back(1);
      legs->push_back({kNoEdge, bra});
      return;
    }
    for (std::size_t j = 0; j < es.size(); ++j) {
      dims.push_back(ds[j]);
      legs->push_back({es[j], bra});
    }
  };
  push_layer(out_dims, out_edges, false);
  push_layer(out_dims, out_edges, true);
  push_layer(in_dims, in_edges, false);
  push_layer(in_dims, in_edges, true);

  ComplexTensor t(dims);
  const std::size_t din = op.in_dim, dout = op.out_dim;
  for (const Matrix& k : op.kraus)
    for (std::size_t o = 0; o < dout; ++o)
      for (std::size_t i = 0; i < din; ++i) {
        const cplx koi = k(o, i);
        if (koi == cplx(0.0, 0.0)) continue;
        for (std::size_t op2 = 0; op2 < dout; ++op2)
          for (std::size_t i2 = 0; i2 < din; ++i2) {
            const cplx kc = k(op2, i2);
            if (kc == cplx(0.0, 0.0)) continue;
            t.data()[((o * dout + op2) * din + i) * din + i2] +=
                koi * std::conj(kc);
          }
      }
  return t;
}

double contract_cycle(const CausalModel& m, const CompiledModel& c,
                      const std::vector<std::size_t>& tuple) {
  const std::size_t nv = m.graph.vertex_count();
  std::vector<std::size_t> outcome_of(nv, 0);
  for (std::size_t i = 0; i < c.observed.size(); ++i)
    outcome_of[c.observed[i]] = tuple[i];

  std::optional<ComplexTensor> accum;
  std::vector<Leg> legs;
  std::vector<bool> absorbed(nv, false);

  auto absorb = [&](std::size_t v) {
    if (absorbed[v]) return;
    absorbed[v] = true;
    const VertexOp& op = c.ops[v][m.graph.vertex(v).kind == VertexKind::Observed
                                      ? outcome_of[v]
                                      : 0];
    std::vector<Leg> vlegs;
    ComplexTensor t = superop_tensor(
        op, edge_dim_list(m, m.graph.out_edges(v)),
        edge_dim_list(m, m.graph.in_edges(v)), &vlegs,
        m.graph.out_edges(v), m.graph.in_edges(v));
    if (!accum) {
      accum = std::move(t);
      legs = std::move(vlegs);
    } else {
      accum = tensor_product(*accum, t);
      legs.insert(legs.end(), vlegs.begin(), vlegs.end());
    }
  };

  auto contract_edge_layer = [&](std::size_t e, bool bra) {
    std::size_t first = legs.size(), second = legs.size();
    for (std::size_t i = 0; i < legs.size(); ++i)
      if (legs[i].edge == e && legs[i].bra == bra) {
        if (first == legs.size())
          first = i;
        else
          second = i;
      }
    if (second == legs.size())
      throw std::logic_error("engine: wire legs not found");
    accum = contract_modes(*accum, first, second);
    legs.erase(legs.begin() + second);
    legs.erase(legs.begin() + first);
    if (legs.empty()) legs.push_back({kNoEdge, false});  // scalar placeholder
  };

  // Eliminate edges in declaration order.
  for (std::size_t e = 0; e < m.graph.edge_count(); ++e) {
    absorb(m.graph.edge(e).from);
    absorb(m.graph.edge(e).to);
    contract_edge_layer(e, false);
    contract_edge_layer(e, true);
  }
  for (std::size_t v = 0; v < nv; ++v) absorb(v);  // isolated vertices

  const cplx value = accum ? accum->data()[0] : cplx(1.0, 0.0);
  return value.real();
}

//---------------------------------------------------------------------------
// Acyclic route: branch over observed outcomes while composing mechanisms in
// a frontier-minimizing topological order.
//---------------------------------------------------------------------------

// sum_a (K_a (x) 1_rest) rho (K_a (x) 1_rest)^dag for rho on in*rest.
Matrix kraus_sandwich(const std::vector<Matrix>& kraus, const Matrix& rho,
                      std::size_t rest) {
  const std::size_t din = kraus.front().cols();
  const std::size_t dout = kraus.front().rows();
  Matrix res(dout * rest, dout * rest);
  Matrix tmp(dout * rest, din * rest);
  for (const Matrix& k : kraus) {
    for (auto& v : tmp.data()) v = cplx(0.0, 0.0);
    for (std::size_t o = 0; o < dout; ++o)
      for (std::size_t i = 0; i < din; ++i) {
        const cplx koi = k(o, i);
        if (koi == cplx(0.0, 0.0)) continue;
        for (std::size_t r = 0; r < rest; ++r)
          for (std::size_t cc = 0; cc < din * rest; ++cc)
            tmp(o * rest + r, cc) += koi * rho(i * rest + r, cc);
      }
    for (std::size_t o2 = 0; o2 < dout; ++o2)
      for (std::size_t i2 = 0; i2 < din; ++i2) {
        const cplx kc = std::conj(k(o2, i2));
        if (kc == cplx(0.0, 0.0)) continue;
        for (std::size_t rr = 0; rr < dout * rest; ++rr)
          for (std::size_t r2 = 0; r2 < rest; ++r2)
            res(rr, o2 * rest + r2) += tmp(rr, i2 * rest + r2) * kc;
      }
  }
  return res;
}

struct SweepState {
  Matrix rho;                       // over the open wires
  std::vector<std::size_t> wires;   // edge indices, in rho's factor order
};

// Applies a vertex op: consumes the vertex's in-wires, emits its out-wires.
SweepState apply_vertex(const CausalModel& m, const SweepState& st,
                        std::size_t v, const VertexOp& op) {
  const auto& ins = m.graph.in_edges(v);
  const auto& outs = m.graph.out_edges(v);

  std::vector<std::size_t> perm;
  std::vector<bool> used(st.wires.size(), false);
  for (std::size_t e : ins) {
    bool found = false;
    for (std::size_t i = 0; i < st.wires.size(); ++i)
      if (!used[i] && st.wires[i] == e) {
        perm.push_back(i);
        used[i] = true;
        found = true;
        break;
      }
    if (!found) throw std::logic_error("engine sweep: missing frontier wire");
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < st.wires.size(); ++i)
    if (!used[i]) {
      perm.push_back(i);
      rest.push_back(st.wires[i]);
    }

  std::vector<std::size_t> dims;
  for (std::size_t w : st.wires) dims.push_back(m.edge_dims[w]);

  SweepState out;
  Matrix arranged = perm.empty() ? st.rho
                                 : permute_subsystems(st.rho, dims, perm);
  std::size_t rest_dim = 1;
  for (std::size_t w : rest) rest_dim *= m.edge_dims[w];
  out.rho = kraus_sandwich(op.kraus, arranged, rest_dim);
  out.wires = outs;
  out.wires.insert(out.wires.end(), rest.begin(), rest.end());
  return out;
}

// Topological order that greedily keeps the open-wire dimension small.
std::vector<std::size_t> sweep_order(const CausalModel& m) {
  const std::size_t n = m.graph.vertex_count();
  std::vector<std::size_t> pending(n, 0);
  for (std::size_t e = 0; e < m.graph.edge_count(); ++e)
    ++pending[m.graph.edge(e).to];

  std::vector<bool> done(n, false);
  std::vector<std::size_t> order;
  double log_open = 0.0;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    double best_cost = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || pending[v] != 0) continue;
      double cost = log_open;
      for (std::size_t e : m.graph.in_edges(v))
        cost -= std::log(static_cast<double>(m.edge_dims[e]));
      for (std::size_t e : m.graph.out_edges(v))
        cost += std::log(static_cast<double>(m.edge_dims[e]));
      if (best == n || cost < best_cost - 1e-12) {
        best = v;
        best_cost = cost;
      }
    }
    if (best == n)
      throw std::invalid_argument(
          "acyclic_probability: the graph is cyclic; use cyclic_probability");
    done[best] = true;
    order.push_back(best);
    for (std::size_t e : m.graph.in_edges(best))
      log_open -= std::log(static_cast<double>(m.edge_dims[e]));
    for (std::size_t e : m.graph.out_edges(best)) {
      log_open += std::log(static_cast<double>(m.edge_dims[e]));
      --pending[m.graph.edge(e).to];
    }
  }
  return order;
}

void sweep_branches(const CausalModel& m, const CompiledModel& c,
                    const std::vector<std::size_t>& order, std::size_t pos,
                    const SweepState& st, std::vector<std::size_t>& tuple,
                    std::vector<double>& table) {
  if (pos == order.size()) {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < c.observed.size(); ++i)
      flat = flat * c.outcome_counts[i] + tuple[i];
    table[flat] = st.rho(0, 0).real();
    return;
  }
  const std::size_t v = order[pos];
  if (m.graph.vertex(v).kind == VertexKind::Observed) {
    std::size_t slot = 0;
    while (c.observed[slot] != v) ++slot;
    for (std::size_t x = 0; x < c.ops[v].size(); ++x) {
      tuple[slot] = x;
      sweep_branches(m, c, order, pos + 1,
                     apply_vertex(m, st, v, c.ops[v][x]), tuple, table);
    }
  } else {
    sweep_branches(m, c, order, pos + 1, apply_vertex(m, st, v, c.ops[v][0]),
                   tuple, table);
  }
}

Distribution acyclic_probability_impl(const CausalModel& m) {
  if (!is_acyclic(m.graph))
    throw std::invalid_argument(
        "acyclic_probability: the graph is cyclic; use cyclic_probability");
  const CompiledModel c = compile(m);
  const auto order = sweep_order(m);

  std::vector<double> table(c.tuple_count, 0.0);
  std::vector<std::size_t> tuple(c.observed.size(), 0);
  SweepState init;
  init.rho = Matrix(1, 1);
  init.rho(0, 0) = 1.0;
  sweep_branches(m, c, order, 0, init, tuple, table);
  return Distribution(observed_variables(m, c), std::move(table));
}

std::vector<double> cycle_weights(const CausalModel& m, const CompiledModel& c,
                                  const EngineOptions& opts) {
  std::vector<double> weights(c.tuple_count, 0.0);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(opts.threads,
                                      static_cast<unsigned>(c.tuple_count)));
  if (workers == 1) {
    for (std::size_t t = 0; t < c.tuple_count; ++t)
      weights[t] = contract_cycle(m, c, c.tuple_at(t));
    return weights;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (std::size_t t = w; t < c.tuple_count; t += workers)
        weights[t] = contract_cycle(m, c, c.tuple_at(t));
    });
  for (auto& th : pool) th.join();
  return weights;
}

}  // namespace

Distribution acyclic_probability(const CausalModel& m,
                                 const EngineOptions& opts) {
  check_dim_cap(m, opts);
  return acyclic_probability_impl(m);
}

double self_cycle(const KrausChannel& ch) {
  if (ch.in_dim != ch.out_dim)
    throw std::invalid_argument(
        "self_cycle: input dimension " + std::to_string(ch.in_dim) +
        " differs from output dimension " + std::to_string(ch.out_dim));
  const std::size_t d = ch.in_dim;
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l)
      acc += apply_channel(ch, Matrix::matrix_unit(d, k, l))(k, l);
  return acc.real();
}

CyclicResult cyclic_probability(const CausalModel& m,
                                const TeleportationGraph* tg,
                                const ProtocolChoice& pc,
                                const EngineOptions& opts) {
  check_dim_cap(m, opts);
  const CompiledModel c = compile(m);

  CyclicResult res;
  res.cycle_weights = cycle_weights(m, c, opts);
  for (double w : res.cycle_weights) res.sum_cycle += w;

  double q_product = 1.0;
  if (tg) {
    for (const SplitEdge& s : tg->splits)
      q_product *=
          pc.resolve(s.base_edge, m.edge_dims[s.base_edge]).success_prob;
  } else {
    for (std::size_t e = 0; e < m.graph.edge_count(); ++e)
      q_product *= pc.resolve(e, m.edge_dims[e]).success_prob;
  }
  res.success_prob = q_product * res.sum_cycle;
  res.markov = std::abs(res.sum_cycle - 1.0) <= 1e-9;

  if (res.sum_cycle < opts.zero_threshold) {
    res.inconsistent = true;
    return res;
  }
  std::vector<double> table(res.cycle_weights.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    double p = res.cycle_weights[i] / res.sum_cycle;
    if (p < 0.0 && p >= -1e-12) p = 0.0;
    table[i] = p;
  }
  res.distribution = Distribution(observed_variables(m, c), std::move(table));
  return res;
}

MarkovResult markov_check(const CausalModel& m, const EngineOptions& opts) {
  const CyclicResult res = cyclic_probability(m, nullptr, {}, opts);
  return {res.markov, res.sum_cycle};
}

Distribution teleportation_route_distribution(const CausalModel& m,
                                              const TeleportationGraph& tg,
                                              const ProtocolChoice& pc,
                                              const EngineOptions& opts,
                                              double* success_prob_out) {
  check_dim_cap(m, opts);
  const CausalModel derived = build_teleportation_model(m, tg, pc);
  const Distribution joint = acyclic_probability_impl(derived);

  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const SplitEdge& s : tg.splits) {
    const auto idx = joint.variable_index(derived.graph.vertex(s.post_vertex).id);
    if (!idx) throw std::logic_error("teleportation route: missing post vertex");
    fixed.push_back({*idx, 0});  // outcome 0 = ok
  }
  if (success_prob_out) {
    double mass = 0.0;
    for (std::size_t f = 0; f < joint.table_size(); ++f) {
      const auto a = joint.unflatten(f);
      bool all_ok = true;
      for (const auto& [var, val] : fixed)
        if (a[var] != val) {
          all_ok = false;
          break;
        }
      if (all_ok) mass += joint.prob_at(f);
    }
    *success_prob_out = mass;
  }
  return joint.condition(fixed);
}

}  // namespace qcm
