#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmconv/models.hpp"
#include "lmconv/path.hpp"

namespace lmconv {

using Json = nlohmann::ordered_json;

/// Either {"preset": id, ...overrides} or a full model description. Unknown
/// or mistyped fields raise ConfigError naming the field.
ModelSpec model_from_json(const Json& j);
Json model_to_json(const ModelSpec& m);

Json read_json_file(const std::filesystem::path& file);
/// Two-space indentation and a trailing newline; non-finite numbers become
/// null, so the output is deterministic.
void write_json_file(const std::filesystem::path& file, const Json& j);

/// Fields are written with 17 significant digits.
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::string csv_number(double v);

/// Interchange format: {initial, horizon, jumps: [[t, size], ...],
/// drift: [[t0, t1, rate], ...], diffusion_qv_rate, diffusion_start?,
/// diffusion_samples?, absorption_time?, explosion_time?}.
Json path_to_json(const CadlagPath& path);
/// Also accepts the "index" and "terminal" fields of NDJSON records.
CadlagPath path_from_json(const Json& j);

/// The interchange format on one line, with "index" and "terminal" added.
std::string path_ndjson(const CadlagPath& path, std::uint64_t index);

}  // namespace lmconv
