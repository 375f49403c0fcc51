#ifndef STMT_SERIALIZATION_HPP
#define STMT_SERIALIZATION_HPP

#include <string>

#include <json.hpp>

#include "stmt/ensemble.hpp"
#include "stmt/tree.hpp"

namespace stmt {

// JSON documents; the layout is described in docs/model_format.md.

nlohmann::json to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EnsembleConfig& cfg);
EnsembleConfig ensemble_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

void save_ensemble(const Ensemble& ensemble, const std::string& path);
Ensemble load_ensemble(const std::string& path);

std::string splitter_name(const Splitter& splitter);

}  // namespace stmt

#endif  // STMT_SERIALIZATION_HPP
