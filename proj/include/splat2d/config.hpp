#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "splat2d/densify.hpp"
#include "splat2d/rasterizer.hpp"
#include "splat2d/targets.hpp"

namespace splat2d {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Units in which positional subgradients are accumulated for densification.
enum class GradientUnits {
    Ndc,   ///< normalized device coordinates: pixel gradient * (extent / 2)
    Pixel, ///< raw pixel-space gradient
};

/// Everything a training run needs. Defaults are the desk-scale schedule.
struct TrainConfig {
    std::string target_path; ///< PPM; empty selects the synthetic `target`
    TargetSpec target;

    int iterations = 5000;
    int n_init = 50;
    int densify_interval = 50;
    int densify_start = 250;
    int densify_stop = 2500;
    int opacity_reset_interval = 3000; ///< 0 disables; only fires inside the densify window

    DensifyConfig densify;
    double percent_dense = 0.01;      ///< tau_s = percent_dense * extent
    double max_scale_fraction = 0.25; ///< prune when max scale > fraction * extent
    GradientUnits gradient_units = GradientUnits::Ndc;

    // Position rates are multiplied by the image extent.
    double lr_position_init = 1.6e-4;
    double lr_position_final = 1.6e-6;
    double lr_scale = 5e-3;
    double lr_rotation = 1e-3;
    double lr_opacity = 0.05;
    double lr_color = 2.5e-3;

    LossKind loss = LossKind::L1;
    RasterOptions raster;
    Rgb background{0.0, 0.0, 0.0};

    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int snapshot_every = 0; ///< 0 disables snapshot renders

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

struct ConfigKey {
    std::string name;
    std::string help;
    std::function<void(TrainConfig&, std::string_view)> set;
    std::function<std::string(const TrainConfig&)> get;
};

/// Every recognised key, in canonical order.
const std::vector<ConfigKey>& config_keys();

/// Throws ConfigError for an unknown key or a malformed value.
void set_config_value(TrainConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const TrainConfig& cfg, std::string_view key);

/// Line-oriented `key = value`, `#` starts a comment.
void apply_config_text(TrainConfig& cfg, std::string_view text, std::string_view source = "<config>");
void apply_config_file(TrainConfig& cfg, const std::filesystem::path& path);

/// Canonical `key = value` dump of every key.
std::string config_to_text(const TrainConfig& cfg);

/// Shortest decimal that round-trips.
std::string format_double(double v);
/// 17 significant digits.
std::string format_double17(double v);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

} // namespace splat2d
