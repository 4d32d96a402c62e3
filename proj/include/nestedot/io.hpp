#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "nestedot/coupling.hpp"
#include "nestedot/embedding.hpp"
#include "nestedot/process_model.hpp"

namespace nestedot::io {

using nlohmann::json;

/// {"depth": N, "nodes": [{"id", "parent", "stage", "value", "prob"}]}; the
/// root has null parent, value and prob and stage 0.
json tree_to_json(const ScenarioTree& tree);
ScenarioTree tree_from_json(const json& j);

/// [{"mu_path": [...], "nu_path": [...], "mass": w}]. Paths are resolved to
/// leaves of the given trees; unknown paths are a ValidationError.
json coupling_to_json(const Coupling& c, const ScenarioTree& mu, const ScenarioTree& nu);
Coupling coupling_from_json(const json& j, const ScenarioTree& mu, const ScenarioTree& nu);

/// {"atoms": [{"mass", "value", "next": <nested or null>}]}.
json nested_to_json(const NestedDistribution& p);
NestedDistribution nested_from_json(const json& j);

/// Rectangular numeric CSV, one path per row. An optional header row is
/// recognised when it is entirely non-numeric; a last header column named
/// "weight" (or `weighted = true`) makes the last column the path weight.
/// Weights default to uniform and are normalised.
PathDistribution read_samples_csv(const std::filesystem::path& path, bool weighted = false);
PathDistribution parse_samples_csv(const std::string& text, bool weighted = false);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace nestedot::io
