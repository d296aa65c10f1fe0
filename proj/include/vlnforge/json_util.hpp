#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "vlnforge/core.hpp"

namespace vlnforge {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);     // throws Error
void write_json_file(const std::filesystem::path& path, const Json& j, int indent = 2);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }
Vec3 vec3_from_json(const Json& j);

}  // namespace vlnforge
