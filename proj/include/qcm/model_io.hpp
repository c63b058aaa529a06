#ifndef QCM_MODEL_IO_HPP
#define QCM_MODEL_IO_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qcm/model.hpp"

namespace qcm {

// Parse or schema violation; carries a dotted path into the document.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A model document: graph section always present; spaces/mechanisms optional
// (graph-only files serve the separation queries). Mechanism tables make the
// document functional; Kraus/Choi/state/POVM mechanisms make it quantum.
struct ModelDocument {
  std::string name;
  std::string description;
  CausalGraph graph;
  std::optional<CausalModel> model;
  std::optional<FunctionalModel> functional;

  bool graph_only() const { return !model && !functional; }
  // The quantum model; functional documents are embedded on demand.
  CausalModel as_model() const;
};

ModelDocument parse_model_json(const nlohmann::json& j);
ModelDocument parse_model_file(const std::string& path);

nlohmann::json serialize_document(const ModelDocument& doc);
nlohmann::json serialize_model(const CausalModel& m);
nlohmann::json serialize_functional(const FunctionalModel& f);

// {"protocols": {"A->B": {dim_a, dim_b, post_element, pre_state}}}; each
// entry is verified and carries its extracted success probability.
ProtocolChoice parse_protocols_json(const nlohmann::json& j,
                                    const CausalGraph& graph);
ProtocolChoice parse_protocols_file(const std::string& path,
                                    const CausalGraph& graph);

nlohmann::json json_matrix(const Matrix& m);
Matrix parse_matrix(const nlohmann::json& j, const std::string& path);

// Rounds to 12 significant digits for stable, machine-diffable output.
double round12(double v);

}  // namespace qcm

#endif
