#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace qdual::report {

using json = nlohmann::ordered_json;

void write_json(const std::filesystem::path& path, const json& j);

/// One column per header entry.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace qdual::report
