#pragma once

// JSON conversions shared by the file formats and the CLI.

#include "json.hpp"
#include "posepost/geometry.hpp"
#include "posepost/network.hpp"

namespace posepost {

nlohmann::json config_to_json(const NetworkConfig& cfg);
NetworkConfig config_from_json(const nlohmann::json& j);

nlohmann::json camera_to_json(const CameraIntrinsics& cam);
CameraIntrinsics camera_from_json(const nlohmann::json& j);

}  // namespace posepost
