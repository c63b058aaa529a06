#include "qcm/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

namespace qcm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw IoError(path + ": " + message);
}

const json& expect(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, "missing key '" + std::string(key) + "'");
  return j.at(key);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      fail(path, "unknown key '" + it.key() + "'");
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t get_size(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() || j.get<std::size_t>() == 0)
    fail(path, "expected a positive integer");
  return j.get<std::size_t>();
}

std::vector<std::string> get_string_list(const json& j,
                                         const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

cplx parse_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    fail(path, "complex scalars are two-element arrays [re, im]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

json json_complex(cplx v) { return json::array({v.real(), v.imag()}); }

}  // namespace

Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty row array");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<cplx> data;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) fail(rp, "expected a non-empty row");
    if (r == 0)
      cols = row.size();
    else if (row.size() != cols)
      fail(rp, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      data.push_back(parse_complex(row[c], rp + "[" + std::to_string(c) + "]"));
  }
  return Matrix(rows, cols, std::move(data));
}

json json_matrix(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
      row.push_back(json_complex(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

double round12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

namespace {

CausalGraph parse_graph(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"vertices", "edges"}, path);
  CausalGraph g;
  const json& verts = expect(j, "vertices", path);
  if (!verts.is_array() || verts.empty())
    fail(path + ".vertices", "expected a non-empty array");
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const std::string vp = path + ".vertices[" + std::to_string(i) + "]";
    reject_unknown_keys(verts[i], {"id", "kind"}, vp);
    const std::string id = get_string(expect(verts[i], "id", vp), vp + ".id");
    const std::string kind =
        get_string(expect(verts[i], "kind", vp), vp + ".kind");
    if (kind != "observed" && kind != "unobserved")
      fail(vp + ".kind", "expected 'observed' or 'unobserved'");
    try {
      g.add_vertex(id, kind == "observed" ? VertexKind::Observed
                                          : VertexKind::Unobserved);
    } catch (const std::invalid_argument& e) {
      fail(vp, e.what());
    }
  }
  const json& edges = expect(j, "edges", path);
  if (!edges.is_array()) fail(path + ".edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ep = path + ".edges[" + std::to_string(i) + "]";
    reject_unknown_keys(edges[i], {"from", "to", "kind"}, ep);
    const std::string from =
        get_string(expect(edges[i], "from", ep), ep + ".from");
    const std::string to = get_string(expect(edges[i], "to", ep), ep + ".to");
    const std::string kind =
        get_string(expect(edges[i], "kind", ep), ep + ".kind");
    if (kind != "classical" && kind != "quantum")
      fail(ep + ".kind", "expected 'classical' or 'quantum'");
    try {
      g.add_edge(from, to,
                 kind == "classical" ? EdgeKind::Classical : EdgeKind::Quantum);
    } catch (const std::invalid_argument& e) {
      fail(ep, e.what());
    }
  }
  return g;
}

std::size_t edge_by_name(const CausalGraph& g, const std::string& name,
                         const std::string& path) {
  const auto arrow = name.find("->");
  if (arrow == std::string::npos)
    fail(path, "edge key '" + name + "' is not of the form 'from->to'");
  const std::string from = name.substr(0, arrow);
  const std::string to = name.substr(arrow + 2);
  if (!g.has_vertex(from) || !g.has_vertex(to))
    fail(path, "edge key '" + name + "' names an unknown vertex");
  const auto e = g.edge_between(g.vertex_index(from), g.vertex_index(to));
  if (!e) fail(path, "edge '" + name + "' is not in the graph");
  return *e;
}

// Reorders raw mechanism factors (per in_order/out_order) to the canonical
// wire order.
std::vector<std::size_t> order_permutation(
    const CausalGraph& g, const std::vector<std::size_t>& canonical,
    const json* order, const std::string& path) {
  std::vector<std::size_t> perm(canonical.size());
  if (!order) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    return perm;
  }
  if (!order->is_array() || order->size() != canonical.size())
    fail(path, "ordering list must name every wire exactly once");
  std::vector<std::size_t> declared;
  for (std::size_t i = 0; i < order->size(); ++i)
    declared.push_back(edge_by_name(
        g, get_string((*order)[i], path + "[" + std::to_string(i) + "]"),
        path));
  for (std::size_t j = 0; j < canonical.size(); ++j) {
    bool found = false;
    for (std::size_t k = 0; k < declared.size(); ++k)
      if (declared[k] == canonical[j]) {
        perm[j] = k;
        found = true;
        break;
      }
    if (!found) fail(path, "ordering list does not cover every wire");
  }
  return perm;
}

std::vector<std::size_t> flat_map(const std::vector<std::size_t>& dims,
                                  const std::vector<std::size_t>& perm) {
  // map[declared flat index] -> canonical flat index; dims are canonical.
  std::vector<std::size_t> declared_dims(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j)
    declared_dims[perm[j]] = dims[j];
  std::vector<std::size_t> declared_stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    declared_stride[i - 1] = declared_stride[i] * declared_dims[i];
  std::vector<std::size_t> canon_stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    canon_stride[i - 1] = canon_stride[i] * dims[i];

  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  std::vector<std::size_t> map(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t out = 0;
    for (std::size_t j = 0; j < dims.size(); ++j)
      out += ((idx / declared_stride[perm[j]]) % dims[j]) * canon_stride[j];
    map[idx] = out;
  }
  return map;
}

Matrix remap(const Matrix& m, const std::vector<std::size_t>& row_map,
             const std::vector<std::size_t>& col_map) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(row_map[r], col_map[c]) = m(r, c);
  return out;
}

struct SpacesSection {
  std::vector<std::size_t> edge_dims;
  std::vector<std::vector<std::string>> edge_outcomes;
  std::vector<std::vector<std::string>> vertex_outcomes;
};

SpacesSection parse_spaces(const json& j, const CausalGraph& g,
                           bool functional, const std::string& path) {
  reject_unknown_keys(j, {"edge_dims", "edge_outcomes", "vertex_outcomes"},
                      path);
  SpacesSection s;
  s.edge_dims.assign(g.edge_count(), 0);
  s.edge_outcomes.assign(g.edge_count(), {});
  s.vertex_outcomes.assign(g.vertex_count(), {});

  if (functional && (j.contains("edge_dims") || j.contains("edge_outcomes")))
    fail(path, "functional documents derive edge spaces from vertex outcome "
               "sets; remove edge_dims/edge_outcomes");

  if (j.contains("edge_dims")) {
    const json& ed = j.at("edge_dims");
    if (!ed.is_object()) fail(path + ".edge_dims", "expected an object");
    for (auto it = ed.begin(); it != ed.end(); ++it) {
      const std::string p = path + ".edge_dims." + it.key();
      const std::size_t e = edge_by_name(g, it.key(), p);
      if (g.edge(e).kind != EdgeKind::Quantum)
        fail(p, "classical edges take their dimension from edge_outcomes");
      s.edge_dims[e] = get_size(it.value(), p);
    }
  }
  if (j.contains("edge_outcomes")) {
    const json& eo = j.at("edge_outcomes");
    if (!eo.is_object()) fail(path + ".edge_outcomes", "expected an object");
    for (auto it = eo.begin(); it != eo.end(); ++it) {
      const std::string p = path + ".edge_outcomes." + it.key();
      const std::size_t e = edge_by_name(g, it.key(), p);
      if (g.edge(e).kind != EdgeKind::Classical)
        fail(p, "quantum edges carry no outcome set");
      s.edge_outcomes[e] = get_string_list(it.value(), p);
      s.edge_dims[e] = s.edge_outcomes[e].size();
    }
  }
  if (j.contains("vertex_outcomes")) {
    const json& vo = j.at("vertex_outcomes");
    if (!vo.is_object()) fail(path + ".vertex_outcomes", "expected an object");
    for (auto it = vo.begin(); it != vo.end(); ++it) {
      const std::string p = path + ".vertex_outcomes." + it.key();
      if (!g.has_vertex(it.key())) fail(p, "unknown vertex");
      const std::size_t v = g.vertex_index(it.key());
      if (g.vertex(v).kind != VertexKind::Observed)
        fail(p, "only observed vertices carry outcome sets");
      s.vertex_outcomes[v] = get_string_list(it.value(), p);
    }
  }
  return s;
}

std::size_t outcome_index(const std::vector<std::string>& outcomes,
                          const std::string& label, const std::string& path) {
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i] == label) return i;
  fail(path, "label '" + label + "' is not in the outcome set");
}

}  // namespace

CausalModel ModelDocument::as_model() const {
  if (model) return *model;
  if (functional) return embed_functional_model(*functional);
  throw IoError("document '" + name +
                "' has no mechanisms section; only graph queries apply");
}

ModelDocument parse_model_json(const json& j) {
  const std::string root = "$";
  reject_unknown_keys(j, {"name", "description", "graph", "spaces",
                          "mechanisms"},
                      root);
  ModelDocument doc;
  if (j.contains("name"))
    doc.name = get_string(j.at("name"), root + ".name");
  if (j.contains("description"))
    doc.description = get_string(j.at("description"), root + ".description");
  doc.graph = parse_graph(expect(j, "graph", root), root + ".graph");

  if (!j.contains("mechanisms")) {
    if (j.contains("spaces"))
      fail(root, "spaces without mechanisms; remove both for a graph-only "
                 "document");
    return doc;
  }
  const json& mech = j.at("mechanisms");
  if (!mech.is_object()) fail(root + ".mechanisms", "expected an object");

  // Functional iff every mechanism is a lookup table.
  std::size_t tables = 0, others = 0;
  for (auto it = mech.begin(); it != mech.end(); ++it)
    (it.value().is_object() && it.value().contains("table") ? tables : others)++;
  const bool functional = tables > 0;
  if (functional && others > 0)
    fail(root + ".mechanisms",
         "mix of lookup tables and quantum mechanisms is not supported");

  SpacesSection spaces =
      parse_spaces(j.contains("spaces") ? j.at("spaces") : json::object(),
                   doc.graph, functional, root + ".spaces");

  for (std::size_t v = 0; v < doc.graph.vertex_count(); ++v) {
    const std::string id = doc.graph.vertex(v).id;
    if (!mech.contains(id))
      fail(root + ".mechanisms", "missing mechanism for vertex '" + id + "'");
    if (doc.graph.vertex(v).kind == VertexKind::Observed &&
        spaces.vertex_outcomes[v].empty())
      fail(root + ".spaces.vertex_outcomes",
           "missing outcome set for observed vertex '" + id + "'");
  }

  if (functional) {
    for (std::size_t v = 0; v < doc.graph.vertex_count(); ++v)
      if (doc.graph.vertex(v).kind != VertexKind::Observed)
        fail(root + ".graph",
             "functional documents require every vertex to be observed");
    FunctionalModel f;
    f.name = doc.name;
    f.description = doc.description;
    f.graph = doc.graph;
    f.vertices.resize(doc.graph.vertex_count());
    for (std::size_t v = 0; v < doc.graph.vertex_count(); ++v) {
      const std::string id = doc.graph.vertex(v).id;
      const std::string p = root + ".mechanisms." + id;
      const json& mj = mech.at(id);
      reject_unknown_keys(mj, {"errors", "prior", "table"}, p);
      FunctionalVertex& fv = f.vertices[v];
      fv.outcomes = spaces.vertex_outcomes[v];
      if (mj.contains("errors") != mj.contains("prior"))
        fail(p, "errors and prior must be given together");
      if (mj.contains("errors")) {
        fv.errors = get_string_list(mj.at("errors"), p + ".errors");
        const json& prior = mj.at("prior");
        if (!prior.is_array() || prior.size() != fv.errors.size())
          fail(p + ".prior", "prior must align with the error labels");
        fv.prior.clear();
        for (std::size_t i = 0; i < prior.size(); ++i)
          fv.prior.push_back(
              get_number(prior[i], p + ".prior[" + std::to_string(i) + "]"));
      }

      // Row layout: parent outcomes in canonical in-edge order, error last.
      const auto& ins = f.graph.in_edges(v);
      std::vector<std::size_t> parents;
      std::size_t domain = fv.errors.size();
      for (std::size_t e : ins) {
        parents.push_back(f.graph.edge(e).from);
        domain *= spaces.vertex_outcomes[f.graph.edge(e).from].size();
      }
      fv.table.assign(domain, 0);
      std::vector<bool> covered(domain, false);

      const json& table = mj.at("table");
      if (!table.is_array()) fail(p + ".table", "expected an array of rows");
      for (std::size_t r = 0; r < table.size(); ++r) {
        const std::string rp = p + ".table[" + std::to_string(r) + "]";
        reject_unknown_keys(table[r], {"inputs", "output"}, rp);
        const json& inputs = expect(table[r], "inputs", rp);
        if (!inputs.is_array() || inputs.size() != parents.size() + 1)
          fail(rp + ".inputs",
               "expected one label per parent plus the error label");
        std::size_t flat = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) {
          const auto& outcomes = spaces.vertex_outcomes[parents[k]];
          flat = flat * outcomes.size() +
                 outcome_index(outcomes,
                               get_string(inputs[k], rp + ".inputs"), rp);
        }
        std::size_t uidx = fv.errors.size();
        const std::string ulabel =
            get_string(inputs[parents.size()], rp + ".inputs");
        for (std::size_t u = 0; u < fv.errors.size(); ++u)
          if (fv.errors[u] == ulabel) uidx = u;
        if (uidx == fv.errors.size())
          fail(rp, "error label '" + ulabel + "' is not declared");
        flat = flat * fv.errors.size() + uidx;
        if (covered[flat]) fail(rp, "duplicate table row");
        covered[flat] = true;
        fv.table[flat] =
            outcome_index(fv.outcomes,
                          get_string(expect(table[r], "output", rp), rp), rp);
      }
      for (bool b : covered)
        if (!b) fail(p + ".table", "lookup table is not total over its domain");
    }
    const ValidationReport rep = validate_functional(f);
    if (!rep.passed()) fail(root, rep.to_string());
    doc.functional = std::move(f);
    return doc;
  }

  CausalModel m;
  m.name = doc.name;
  m.description = doc.description;
  m.graph = doc.graph;
  m.edge_dims = spaces.edge_dims;
  m.edge_outcomes = spaces.edge_outcomes;
  m.vertex_outcomes = spaces.vertex_outcomes;
  m.channels.assign(m.graph.vertex_count(), {});
  m.povms.assign(m.graph.vertex_count(), {});

  for (std::size_t e = 0; e < m.graph.edge_count(); ++e)
    if (m.edge_dims[e] == 0)
      fail(root + ".spaces",
           "edge " + m.edge_name(e) + " has no declared space");

  for (std::size_t v = 0; v < m.graph.vertex_count(); ++v) {
    const std::string id = m.graph.vertex(v).id;
    const std::string p = root + ".mechanisms." + id;
    const json& mj = mech.at(id);
    const auto& ins = m.graph.in_edges(v);
    const auto& outs = m.graph.out_edges(v);
    const std::size_t din = m.in_dim(v);
    const std::size_t dout = m.out_dim(v);

    const json* in_order =
        mj.contains("in_order") ? &mj.at("in_order") : nullptr;
    const json* out_order =
        mj.contains("out_order") ? &mj.at("out_order") : nullptr;
    std::vector<std::size_t> in_dims, out_dims;
    for (std::size_t e : ins) in_dims.push_back(m.edge_dims[e]);
    for (std::size_t e : outs) out_dims.push_back(m.edge_dims[e]);
    const auto in_map = flat_map(
        in_dims, order_permutation(m.graph, ins, in_order, p + ".in_order"));
    const auto out_map =
        flat_map(out_dims,
                 order_permutation(m.graph, outs, out_order, p + ".out_order"));

    if (m.graph.vertex(v).kind == VertexKind::Observed) {
      reject_unknown_keys(mj, {"povm", "in_order"}, p);
      const json& pj = expect(mj, "povm", p);
      if (!pj.is_array() || pj.empty())
        fail(p + ".povm", "expected a non-empty array of elements");
      Povm povm;
      povm.dim = din;
      for (std::size_t x = 0; x < pj.size(); ++x) {
        Matrix el =
            parse_matrix(pj[x], p + ".povm[" + std::to_string(x) + "]");
        if (el.rows() != din || el.cols() != din)
          fail(p + ".povm[" + std::to_string(x) + "]",
               "element shape does not match the in-edge space");
        povm.elements.push_back(remap(el, in_map, in_map));
      }
      m.povms[v] = std::move(povm);
    } else {
      reject_unknown_keys(mj, {"kraus", "choi", "state", "in_order",
                               "out_order"},
                          p);
      const int forms = mj.contains("kraus") + mj.contains("choi") +
                        mj.contains("state");
      if (forms != 1)
        fail(p, "exactly one of kraus, choi or state is required");
      KrausChannel ch;
      if (mj.contains("kraus")) {
        const json& kj = mj.at("kraus");
        if (!kj.is_array() || kj.empty())
          fail(p + ".kraus", "expected a non-empty array of matrices");
        ch.in_dim = din;
        ch.out_dim = dout;
        for (std::size_t a = 0; a < kj.size(); ++a) {
          Matrix k =
              parse_matrix(kj[a], p + ".kraus[" + std::to_string(a) + "]");
          if (k.rows() != dout || k.cols() != din)
            fail(p + ".kraus[" + std::to_string(a) + "]",
                 "operator shape does not match the edge spaces");
          ch.kraus.push_back(remap(k, out_map, in_map));
        }
      } else if (mj.contains("choi")) {
        Matrix choi = parse_matrix(mj.at("choi"), p + ".choi");
        try {
          ch = choi_to_kraus(choi, din, dout);
        } catch (const std::invalid_argument& e) {
          fail(p + ".choi", e.what());
        }
        for (Matrix& k : ch.kraus) k = remap(k, out_map, in_map);
      } else {
        if (!ins.empty())
          fail(p + ".state", "state form is only for exogenous vertices");
        Matrix rho = parse_matrix(mj.at("state"), p + ".state");
        if (rho.rows() != dout || rho.cols() != dout)
          fail(p + ".state", "state shape does not match the out-edge space");
        try {
          ch = KrausChannel::from_state(rho);
        } catch (const std::invalid_argument& e) {
          fail(p + ".state", e.what());
        }
        for (Matrix& k : ch.kraus) k = remap(k, out_map, in_map);
      }
      m.channels[v] = std::move(ch);
    }
  }
  doc.model = std::move(m);
  return doc;
}

ModelDocument parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  return parse_model_json(j);
}

namespace {

json serialize_graph(const CausalGraph& g) {
  json verts = json::array();
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    verts.push_back({{"id", g.vertex(v).id},
                     {"kind", g.vertex(v).kind == VertexKind::Observed
                                  ? "observed"
                                  : "unobserved"}});
  json edges = json::array();
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    edges.push_back({{"from", g.vertex(g.edge(e).from).id},
                     {"to", g.vertex(g.edge(e).to).id},
                     {"kind", g.edge(e).kind == EdgeKind::Classical
                                  ? "classical"
                                  : "quantum"}});
  return {{"vertices", verts}, {"edges", edges}};
}

}  // namespace

json serialize_model(const CausalModel& m) {
  json doc;
  if (!m.name.empty()) doc["name"] = m.name;
  if (!m.description.empty()) doc["description"] = m.description;
  doc["graph"] = serialize_graph(m.graph);

  json spaces = json::object();
  json edge_dims = json::object(), edge_outcomes = json::object(),
       vertex_outcomes = json::object();
  for (std::size_t e = 0; e < m.graph.edge_count(); ++e) {
    if (m.graph.edge(e).kind == EdgeKind::Quantum)
      edge_dims[m.edge_name(e)] = m.edge_dims[e];
    else
      edge_outcomes[m.edge_name(e)] = m.edge_outcomes[e];
  }
  for (std::size_t v = 0; v < m.graph.vertex_count(); ++v)
    if (m.graph.vertex(v).kind == VertexKind::Observed)
      vertex_outcomes[m.graph.vertex(v).id] = m.vertex_outcomes[v];
  if (!edge_dims.empty()) spaces["edge_dims"] = edge_dims;
  if (!edge_outcomes.empty()) spaces["edge_outcomes"] = edge_outcomes;
  if (!vertex_outcomes.empty()) spaces["vertex_outcomes"] = vertex_outcomes;
  doc["spaces"] = spaces;

  json mech = json::object();
  for (std::size_t v = 0; v < m.graph.vertex_count(); ++v) {
    const std::string id = m.graph.vertex(v).id;
    if (m.graph.vertex(v).kind == VertexKind::Observed) {
      json elements = json::array();
      for (const Matrix& e : m.povms[v].elements)
        elements.push_back(json_matrix(e));
      mech[id] = {{"povm", elements}};
    } else {
      json kraus = json::array();
      for (const Matrix& k : m.channels[v].kraus)
        kraus.push_back(json_matrix(k));
      mech[id] = {{"kraus", kraus}};
    }
  }
  doc["mechanisms"] = mech;
  return doc;
}

json serialize_functional(const FunctionalModel& f) {
  json doc;
  if (!f.name.empty()) doc["name"] = f.name;
  if (!f.description.empty()) doc["description"] = f.description;
  doc["graph"] = serialize_graph(f.graph);

  json vertex_outcomes = json::object();
  for (std::size_t v = 0; v < f.graph.vertex_count(); ++v)
    vertex_outcomes[f.graph.vertex(v).id] = f.vertices[v].outcomes;
  doc["spaces"] = {{"vertex_outcomes", vertex_outcomes}};

  json mech = json::object();
  for (std::size_t v = 0; v < f.graph.vertex_count(); ++v) {
    const FunctionalVertex& fv = f.vertices[v];
    json entry = json::object();
    entry["errors"] = fv.errors;
    entry["prior"] = fv.prior;
    json table = json::array();
    const auto& ins = f.graph.in_edges(v);
    std::vector<std::size_t> parents;
    std::size_t rows = fv.errors.size();
    for (std::size_t e : ins) {
      parents.push_back(f.graph.edge(e).from);
      rows *= f.vertices[f.graph.edge(e).from].outcomes.size();
    }
    for (std::size_t flat = 0; flat < rows; ++flat) {
      std::size_t rem = flat;
      const std::size_t u = rem % fv.errors.size();
      rem /= fv.errors.size();
      std::vector<std::string> inputs(parents.size());
      for (std::size_t k = parents.size(); k-- > 0;) {
        const auto& outs = f.vertices[parents[k]].outcomes;
        inputs[k] = outs[rem % outs.size()];
        rem /= outs.size();
      }
      inputs.push_back(fv.errors[u]);
      table.push_back(
          {{"inputs", inputs}, {"output", fv.outcomes[fv.table[flat]]}});
    }
    entry["table"] = table;
    mech[f.graph.vertex(v).id] = entry;
  }
  doc["mechanisms"] = mech;
  return doc;
}

json serialize_document(const ModelDocument& doc) {
  if (doc.model) return serialize_model(*doc.model);
  if (doc.functional) return serialize_functional(*doc.functional);
  json out;
  if (!doc.name.empty()) out["name"] = doc.name;
  if (!doc.description.empty()) out["description"] = doc.description;
  out["graph"] = serialize_graph(doc.graph);
  return out;
}

ProtocolChoice parse_protocols_json(const json& j, const CausalGraph& graph) {
  const std::string root = "$";
  reject_unknown_keys(j, {"protocols"}, root);
  ProtocolChoice pc;
  const json& map = expect(j, "protocols", root);
  if (!map.is_object()) fail(root + ".protocols", "expected an object");
  for (auto it = map.begin(); it != map.end(); ++it) {
    const std::string p = root + ".protocols." + it.key();
    const std::size_t e = edge_by_name(graph, it.key(), p);
    reject_unknown_keys(it.value(),
                        {"dim_a", "dim_b", "post_element", "pre_state"}, p);
    TeleProtocol tp;
    tp.dim_a = get_size(expect(it.value(), "dim_a", p), p + ".dim_a");
    tp.dim_b = get_size(expect(it.value(), "dim_b", p), p + ".dim_b");
    tp.post_element = parse_matrix(expect(it.value(), "post_element", p),
                                   p + ".post_element");
    tp.pre_state =
        parse_matrix(expect(it.value(), "pre_state", p), p + ".pre_state");
    const ProtocolReport rep = verify_protocol(tp);
    if (!rep.report.passed())
      fail(p, "not a valid post-selected teleportation protocol: " +
                  rep.report.to_string());
    tp.success_prob = rep.extracted_q;
    pc.per_edge[e] = std::move(tp);
  }
  return pc;
}

ProtocolChoice parse_protocols_file(const std::string& path,
                                    const CausalGraph& graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  return parse_protocols_json(j, graph);
}

}  // namespace qcm
