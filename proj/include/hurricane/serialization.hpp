#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "hurricane/backbone.hpp"
#include "hurricane/latency_model.hpp"
#include "hurricane/search_engine.hpp"

namespace hurricane {

using Json = nlohmann::ordered_json;

Json space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const Json& j);
/// Content hash of the canonical space document.
std::string space_hash(const SearchSpace& space);

/// {space_hash, choices: [operator ids]}.
Json architecture_to_json(const SearchSpace& space, const Architecture& arch);
/// Resolves ids against `space`; a differing space_hash is tolerated as long
/// as every id is a candidate of its layer.
Architecture architecture_from_json(const SearchSpace& space, const Json& j);

Json model_to_json(const PredictorModel& model);
PredictorModel model_from_json(const Json& j);

Json report_to_json(const SearchReport& report);
SearchReport report_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace hurricane
