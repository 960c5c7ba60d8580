#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "neuroplan/geom.hpp"

namespace neuroplan {

// Ordered JSON keeps serialization byte-stable across save/load round trips.
using Json = nlohmann::ordered_json;

Json workspace_to_json(const Workspace& ws);
Workspace workspace_from_json(const Json& j);

void save_workspace(const Workspace& ws, const std::filesystem::path& path);
Workspace load_workspace(const std::filesystem::path& path);

// Flat little-endian f32 with an 8-byte header (u32 N, u32 dim).
void save_cloud_f32(const PointCloud& pc, const std::filesystem::path& path);
PointCloud load_cloud_f32(const std::filesystem::path& path);

void save_cloud_csv(const PointCloud& pc, const std::filesystem::path& path);

Json path_to_json(const Path& path);
Path path_from_json(const Json& j, int dim);

void write_json_file(const Json& j, const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

std::uint64_t fnv1a_hash_file(const std::filesystem::path& path);

} // namespace neuroplan
