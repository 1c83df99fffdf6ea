#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sanm/cli/config.hpp"

namespace sanm::cli {

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const void* data, std::size_t size);

// Writes config.ini (the effective configuration) and manifest.json into
// `out`. The manifest records the command, its inputs, seeds and the SHA-256
// of every artifact (paths relative to `out`), config.ini included.
void write_run_manifest(const std::filesystem::path& out, const std::string& command, const RunConfig& config,
                        const nlohmann::json& inputs, std::vector<std::filesystem::path> artifacts);

}  // namespace sanm::cli
