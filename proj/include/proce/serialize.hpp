#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "proce/causal.hpp"
#include "proce/data.hpp"
#include "proce/engine.hpp"
#include "proce/metrics.hpp"
#include "proce/models.hpp"
#include "proce/nn.hpp"

namespace proce {

using Json = nlohmann::json;

// File helpers: IoError on filesystem trouble, ParseError on bad JSON.
Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& doc);

// Throws ParseError when `version` is absent, VersionError when newer than
// this build understands. `what` names the artifact in messages.
void require_version(const Json& doc, const std::string& what);

Json network_to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const Json& doc);
std::string serialize_network(const MlpNetwork& net);
MlpNetwork deserialize_network(const std::string& text);

Json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const Json& doc);

Json normalizer_to_json(const Normalizer& norm, const FeatureSchema& schema);
Normalizer normalizer_from_json(const Json& doc, const FeatureSchema& schema);

Json classifier_to_json(const Classifier& clf);
Classifier classifier_from_json(const Json& doc);

Json autoencoder_to_json(const Autoencoder& ae, const FeatureSchema& schema);
Autoencoder autoencoder_from_json(const Json& doc,
                                  const FeatureSchema& schema);

Json graph_to_json(const CausalGraph& graph);
CausalGraph graph_from_json(const Json& doc);

Json scm_to_json(const StructuralModel& model);
StructuralModel scm_from_json(const Json& doc);

// Raw-space instance keyed by feature name; categorical values carry labels.
Json raw_instance_to_json(const Instance& raw, const FeatureSchema& schema);
Instance raw_instance_from_json(const Json& doc, const FeatureSchema& schema,
                                const std::string& what = "instance");

Json report_to_json(const ExplanationReport& report,
                    const FeatureSchema& schema, const Json& config_echo);
ExplanationReport report_from_json(const Json& doc,
                                   const FeatureSchema& schema);

std::vector<ConstraintSpec> constraints_from_json(const Json& doc,
                                                  const FeatureSchema& schema);

Json metrics_to_json(const MetricsReport& metrics, const std::string& method,
                     const std::string& dataset, const Json& config_echo);
MetricsReport metrics_from_json(const Json& doc);
std::string metrics_to_csv(const MetricsReport& metrics,
                           const std::string& method,
                           const std::string& dataset);

}  // namespace proce
