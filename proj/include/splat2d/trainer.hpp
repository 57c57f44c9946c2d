#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "splat2d/config.hpp"
#include "splat2d/densify.hpp"
#include "splat2d/image.hpp"
#include "splat2d/metrics.hpp"

namespace splat2d {

/// One densification round as logged to telemetry.csv. n_before is kept in
/// memory for bookkeeping checks but is not part of the CSV schema.
struct TelemetryRow {
    int iteration = 0;
    std::size_t n_before = 0;
    std::size_t n_split = 0;
    std::size_t n_clone = 0;
    std::size_t n_pruned = 0;
    std::size_t n_total = 0;
    double loss = 0.0;
    double psnr = 0.0;

    static std::string csv_header() { return "iteration,n_split,n_clone,n_pruned,n_total,loss,psnr"; }
    std::string csv_row() const;
};

std::string telemetry_csv(const std::vector<TelemetryRow>& rows);

struct TrainResult {
    Scene scene;
    QualityReport quality;
    double initial_psnr = 0.0;
    std::vector<TelemetryRow> telemetry;
    std::size_t memory_bytes = 0;
};

/// n0 splats at uniform positions, colored from the target pixel beneath,
/// isotropic scale extent / sqrt(n0), opacity 0.1, random depth.
Scene init_scene(const Image& target, int n0, std::uint64_t seed);

/// max(width, height)
double image_extent(const Image& image);

Image load_target(const TrainConfig& cfg);

/// Full training loop. Writes telemetry.csv, checkpoint.csv, final.ppm,
/// quality.csv and optional snapshots under cfg.out_dir unless it is empty.
TrainResult train(const TrainConfig& cfg);

struct CompareRow {
    std::string name; ///< output subdirectory
    DensifyPolicy policy = DensifyPolicy::Baseline;
    std::optional<TrainResult> result;
    std::string error;
};

/// Train once per policy on the same target and seed. Failures are recorded
/// per policy and do not stop the others. Writes comparison.csv plus one
/// subdirectory per policy under cfg.out_dir.
std::vector<CompareRow> compare(const TrainConfig& cfg, const std::vector<DensifyPolicy>& policies, int jobs = 1);

std::string comparison_csv(const std::vector<CompareRow>& rows);

} // namespace splat2d
