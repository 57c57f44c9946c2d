#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "splat2d/core.hpp"

namespace splat2d {

inline constexpr int kCheckpointVersion = 1;

/// A saved scene. Text CSV, doubles written with 17 significant digits, so
/// save -> load reproduces every parameter bit-exactly.
///
///   format_version,1
///   iteration,<int>
///   count,<n>
///   background,<r>,<g>,<b>
///   config,<key>,<value>          (zero or more)
///   mu_x,mu_y,log_scale_x,log_scale_y,rotation,logit_opacity,r,g,b,depth
///   <n records>
struct Checkpoint {
    int iteration = 0;
    Scene scene;
    std::vector<std::pair<std::string, std::string>> config;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// One serialized Gaussian record, without the trailing newline.
std::string checkpoint_record(const Gaussian2D& g);

/// Storage estimate: total bytes of the scene's checkpoint records.
std::size_t estimate_memory_bytes(const Scene& scene);

} // namespace splat2d
