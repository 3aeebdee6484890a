#pragma once

#include "graspref/scene.hpp"

#include <filesystem>
#include <string_view>

#include <json.hpp>

namespace graspref {

inline constexpr std::string_view kSceneFormat = "graspref-scene/1";

// Writes the scene document plus any referenced mesh files next to it. An
// existing mesh file is reused only if its contents match exactly.
void save_scene(const SceneSample& sample, const std::filesystem::path& path);

// Rebuilds the hand model (SDF, surface tree) from the referenced meshes.
SceneSample load_scene(const std::filesystem::path& path);

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

std::string encode_depth(const DepthImage& depth);
DepthImage decode_depth(const std::string& text, int width, int height);
std::vector<std::uint32_t> encode_mask_runs(const Mask& mask);
Mask decode_mask_runs(const std::vector<std::uint32_t>& runs, int width, int height);

}  // namespace graspref
