#include "splat2d/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>

#include "splat2d/checkpoint.hpp"
#include "splat2d/optim.hpp"
#include "splat2d/rasterizer.hpp"
#include "splat2d/rng.hpp"

namespace splat2d {

namespace fs = std::filesystem;

std::string TelemetryRow::csv_row() const {
    return std::to_string(iteration) + "," + std::to_string(n_split) + "," + std::to_string(n_clone) + "," +
           std::to_string(n_pruned) + "," + std::to_string(n_total) + "," + format_double(loss) + "," +
           format_double(psnr);
}

std::string telemetry_csv(const std::vector<TelemetryRow>& rows) {
    std::string out = TelemetryRow::csv_header() + "\n";
    for (const auto& r : rows) out += r.csv_row() + "\n";
    return out;
}

double image_extent(const Image& image) { return static_cast<double>(std::max(image.width(), image.height())); }

Scene init_scene(const Image& target, int n0, std::uint64_t seed) {
    if (n0 < 1) throw std::invalid_argument("init_scene: n0 must be >= 1");
    Rng rng(seed);
    const double extent = image_extent(target);
    const double log_scale = std::log(extent / std::sqrt(static_cast<double>(n0)));
    Scene scene;
    scene.gaussians.reserve(static_cast<std::size_t>(n0));
    for (int i = 0; i < n0; ++i) {
        Gaussian2D g;
        g.mu = {rng.uniform(0.0, target.width()), rng.uniform(0.0, target.height())};
        const int px = std::clamp(static_cast<int>(g.mu.x), 0, target.width() - 1);
        const int py = std::clamp(static_cast<int>(g.mu.y), 0, target.height() - 1);
        g.color = target.pixel(px, py);
        g.log_scale = {log_scale, log_scale};
        g.rotation = 0.0;
        g.logit_opacity = logit(0.1);
        g.depth = rng.uniform();
        scene.gaussians.push_back(g);
    }
    return scene;
}

Image load_target(const TrainConfig& cfg) {
    if (!cfg.target_path.empty()) return read_ppm(cfg.target_path);
    return generate(cfg.target);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::pair<std::string, std::string>> config_echo(const TrainConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : config_keys()) {
        if (k.name == "out_dir") continue; // keeps checkpoints comparable across output locations
        out.emplace_back(k.name, k.get(cfg));
    }
    return out;
}

} // namespace

TrainResult train(const TrainConfig& cfg) {
    cfg.validate();
    const Image target = load_target(cfg);
    const double extent = image_extent(target);
    const int width = target.width();
    const int height = target.height();

    const fs::path out_dir = cfg.out_dir;
    const bool write_outputs = !cfg.out_dir.empty();
    if (write_outputs) {
        fs::create_directories(out_dir);
        if (cfg.snapshot_every > 0) fs::create_directories(out_dir / "snapshots");
    }

    Scene scene = init_scene(target, cfg.n_init, cfg.seed);
    scene.background = cfg.background;
    Rng rng(cfg.seed ^ 0x5eed5eed5eedULL);

    LearningRates rates;
    rates.position_init = cfg.lr_position_init * extent;
    rates.position_final = cfg.lr_position_final * extent;
    rates.position_max_steps = cfg.iterations;
    rates.log_scale = cfg.lr_scale;
    rates.rotation = cfg.lr_rotation;
    rates.opacity = cfg.lr_opacity;
    rates.color = cfg.lr_color;
    AdamOptimizer optimizer(rates, scene.size());

    DensifyConfig densify = cfg.densify;
    densify.tau_s = cfg.percent_dense * extent;
    densify.max_scale_limit = cfg.max_scale_fraction * extent;
    densify.validate();

    const Vec2 stats_scale = cfg.gradient_units == GradientUnits::Ndc ? Vec2{0.5 * width, 0.5 * height}
                                                                        : Vec2{1.0, 1.0};
    GradStats stats(scene.size());

    TrainResult result;
    result.initial_psnr = psnr(render(scene, width, height, cfg.raster), target);

    ForwardTrace trace;
    for (int it = 1; it <= cfg.iterations; ++it) {
        const Image rendered = render(scene, width, height, cfg.raster, &trace);
        const bool densifying = it < cfg.densify_stop;

        SubgradientSinks sinks;
        if (densifying) {
            sinks.stats = &stats;
            sinks.stats_scale = stats_scale;
        }
        BackwardResult backward = render_backward(scene, rendered, target, cfg.loss, cfg.raster, sinks, &trace);
        optimizer.step(scene.gaussians, backward.grads, it);

        if (densifying && it >= cfg.densify_start && it % cfg.densify_interval == 0) {
            TelemetryRow row;
            row.iteration = it;
            row.n_before = scene.size();
            row.loss = backward.loss;
            row.psnr = psnr(rendered, target);
            const DensifyReport report =
                densify_round(scene, stats, optimizer, densify, rng, {it, lr_pos(rates, it), stats_scale});
            row.n_split = report.n_split;
            row.n_clone = report.n_clone;
            row.n_pruned = report.n_pruned;
            row.n_total = report.n_total_after;
            result.telemetry.push_back(row);
        }
        if (densifying && cfg.opacity_reset_interval > 0 && it % cfg.opacity_reset_interval == 0)
            reset_opacity(scene, optimizer);

        if (write_outputs && cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "iter_%06d.ppm", it);
            write_ppm(out_dir / "snapshots" / name, render(scene, width, height, cfg.raster));
        }
    }

    const Image final_render = render(scene, width, height, cfg.raster);
    result.quality = evaluate(final_render, target);
    result.memory_bytes = estimate_memory_bytes(scene);
    result.scene = scene;

    if (write_outputs) {
        write_text(out_dir / "telemetry.csv", telemetry_csv(result.telemetry));
        save_checkpoint(out_dir / "checkpoint.csv", {cfg.iterations, scene, config_echo(cfg)});
        write_ppm(out_dir / "final.ppm", final_render);
        write_text(out_dir / "quality.csv",
                   QualityReport::csv_header() + ",n_gaussians,memory_bytes\n" + result.quality.csv_row() + "," +
                       std::to_string(scene.size()) + "," + std::to_string(result.memory_bytes) + "\n");
    }
    return result;
}

std::vector<CompareRow> compare(const TrainConfig& cfg, const std::vector<DensifyPolicy>& policies, int jobs) {
    if (policies.size() < 2) throw std::invalid_argument("compare: need at least two policies");

    std::vector<CompareRow> rows(policies.size());
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const std::string base(to_string(policies[i]));
        const int n = ++seen[base];
        rows[i].policy = policies[i];
        rows[i].name = n == 1 ? base : base + "-" + std::to_string(n);
    }

    auto run_one = [&](std::size_t i) {
        TrainConfig c = cfg;
        c.densify.policy = rows[i].policy;
        c.out_dir = cfg.out_dir.empty() ? std::string{} : (fs::path(cfg.out_dir) / rows[i].name).string();
        try {
            rows[i].result = train(c);
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_one(i);
    } else {
        for (std::size_t start = 0; start < rows.size(); start += static_cast<std::size_t>(jobs)) {
            std::vector<std::future<void>> batch;
            for (std::size_t i = start; i < std::min(rows.size(), start + static_cast<std::size_t>(jobs)); ++i)
                batch.push_back(std::async(std::launch::async, run_one, i));
            for (auto& f : batch) f.get();
        }
    }

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        write_text(fs::path(cfg.out_dir) / "comparison.csv", comparison_csv(rows));
    }
    return rows;
}

std::string comparison_csv(const std::vector<CompareRow>& rows) {
    std::string out = "policy,status,initial_psnr,psnr,ssim,l1,mse,n_gaussians,memory_bytes,rounds\n";
    for (const auto& row : rows) {
        out += row.name + ",";
        if (!row.result) {
            std::string msg = row.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out += "error: " + msg + ",,,,,,,,\n";
            continue;
        }
        const TrainResult& r = *row.result;
        out += "ok," + format_double(r.initial_psnr) + "," + format_double(r.quality.psnr) + "," +
               format_double(r.quality.ssim) + "," + format_double(r.quality.l1) + "," + format_double(r.quality.mse) +
               "," + std::to_string(r.scene.size()) + "," + std::to_string(r.memory_bytes) + "," +
               std::to_string(r.telemetry.size()) + "\n";
    }
    return out;
}

} // namespace splat2d
