#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "splat2d/checkpoint.hpp"
#include "splat2d/config.hpp"
#include "splat2d/metrics.hpp"
#include "splat2d/rasterizer.hpp"
#include "splat2d/targets.hpp"
#include "splat2d/trainer.hpp"
#include "splat2d/verify.hpp"

using namespace splat2d;
namespace fs = std::filesystem;

namespace {

// --config FILE plus one --<key> flag per config key.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
        for (const auto& key : config_keys()) {
            std::string names = "--" + key.name;
            if (key.name == "out_dir") names += ",--out-dir";
            app.add_option_function<std::string>(
                names, [this, name = key.name](const std::string& v) { values[name] = v; }, key.help);
        }
    }

    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!config_file.empty()) apply_config_file(cfg, config_file);
        for (const auto& key : config_keys()) {
            const auto it = values.find(key.name);
            if (it != values.end()) set_config_value(cfg, key.name, it->second);
        }
        cfg.validate();
        return cfg;
    }
};

std::vector<DensifyPolicy> parse_policy_list(const std::string& text) {
    std::vector<DensifyPolicy> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(parse_policy(item));
    }
    return out;
}

void print_quality(const std::string& label, const QualityReport& q, std::size_t n) {
    std::printf("%s psnr=%.3f ssim=%.4f l1=%.5f mse=%.6f gaussians=%zu\n", label.c_str(), q.psnr, q.ssim, q.l1, q.mse,
                n);
}

int run_train(const ConfigFlags& flags) {
    const TrainConfig cfg = flags.resolve();
    const TrainResult r = train(cfg);
    std::printf("initial psnr=%.3f\n", r.initial_psnr);
    print_quality("final", r.quality, r.scene.size());
    if (!cfg.out_dir.empty()) std::printf("outputs in %s\n", cfg.out_dir.c_str());
    return 0;
}

int run_compare(const ConfigFlags& flags, const std::string& policies, int jobs) {
    const TrainConfig cfg = flags.resolve();
    const auto rows = compare(cfg, parse_policy_list(policies), jobs);
    int failed = 0;
    for (const auto& row : rows) {
        if (row.result) {
            print_quality(row.name, row.result->quality, row.result->scene.size());
        } else {
            std::printf("%s failed: %s\n", row.name.c_str(), row.error.c_str());
            ++failed;
        }
    }
    return failed ? 1 : 0;
}

int run_eval(const ConfigFlags& flags, const std::string& checkpoint_path) {
    const TrainConfig cfg = flags.resolve();
    const Image target = load_target(cfg);
    const Checkpoint cp = load_checkpoint(checkpoint_path);
    const Image rendered = render(cp.scene, target.width(), target.height(), cfg.raster);
    const QualityReport q = evaluate(rendered, target);
    std::printf("%s,n_gaussians,memory_bytes\n%s,%zu,%zu\n", QualityReport::csv_header().c_str(), q.csv_row().c_str(),
                cp.scene.size(), estimate_memory_bytes(cp.scene));
    return 0;
}

int run_gen_target(const ConfigFlags& flags, std::string output) {
    const TrainConfig cfg = flags.resolve();
    if (output.empty()) {
        fs::create_directories(cfg.out_dir);
        output = (fs::path(cfg.out_dir) / (std::string(to_string(cfg.target.kind)) + ".ppm")).string();
    }
    write_ppm(output, generate(cfg.target));
    std::printf("wrote %s\n", output.c_str());
    return 0;
}

int run_verify(int scenes, int samples, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream table(fs::path(out_dir) / "vmf.csv");
    table << "kappa,empirical,analytic,asymptotic,abs_error\n";
    bool ok = true;
    std::printf("vmf consistency (%d samples)\n", samples);
    for (const auto& row : vmf_check({0.5, 1.0, 2.0, 5.0, 10.0}, samples, seed)) {
        const double err = std::abs(row.check.empirical - row.check.analytic);
        const bool pass = err < 0.01;
        ok = ok && pass;
        std::printf("  kappa=%-4g empirical=%.5f bessel=%.5f asymptotic=%.5f |diff|=%.5f %s\n", row.kappa,
                    row.check.empirical, row.check.analytic, row.check.asymptotic, err, pass ? "ok" : "FAIL");
        table << format_double(row.kappa) << ',' << format_double(row.check.empirical) << ','
              << format_double(row.check.analytic) << ',' << format_double(row.check.asymptotic) << ','
              << format_double(err) << '\n';
    }
    const GradientCheck fd = gradient_check(scenes, 16, 16, LossKind::MSE, 1e-4, seed);
    const bool fd_ok = fd.max_relative_error < 1e-3 && fd.max_subgradient_error < 1e-6;
    ok = ok && fd_ok;
    std::printf("finite differences: scenes=%d parameters=%zu max_rel_err=%.3g subgradient_err=%.3g %s\n", fd.scenes,
                fd.parameters, fd.max_relative_error, fd.max_subgradient_error, fd_ok ? "ok" : "FAIL");
    std::ofstream(fs::path(out_dir) / "gradient_check.csv")
        << "scenes,parameters,max_relative_error,max_subgradient_error\n"
        << fd.scenes << ',' << fd.parameters << ',' << format_double(fd.max_relative_error) << ','
        << format_double(fd.max_subgradient_error) << '\n';
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D Gaussian splatting with pluggable density control"};
    app.require_subcommand(1);

    ConfigFlags train_flags, compare_flags, eval_flags, gen_flags;

    auto* train_cmd = app.add_subcommand("train", "fit a target image");
    train_flags.attach(*train_cmd);

    auto* compare_cmd = app.add_subcommand("compare", "train once per policy and tabulate");
    compare_flags.attach(*compare_cmd);
    std::string policies = "baseline,abs,gdags";
    int jobs = 1;
    compare_cmd->add_option("--policies", policies, "comma separated policy list")->capture_default_str();
    compare_cmd->add_option("--jobs", jobs, "policies trained concurrently")->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint against a target");
    eval_flags.attach(*eval_cmd);
    std::string checkpoint_path;
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint CSV")->required()->check(CLI::ExistingFile);

    auto* gen_cmd = app.add_subcommand("gen-target", "write a synthetic target as PPM");
    gen_flags.attach(*gen_cmd);
    std::string output;
    gen_cmd->add_option("--output", output, "PPM path (default <out_dir>/<kind>.ppm)");

    auto* verify_cmd = app.add_subcommand("verify", "vMF consistency and finite-difference gradient checks");
    int scenes = 20;
    int samples = 100000;
    std::uint64_t seed = 0;
    verify_cmd->add_option("--scenes", scenes, "random scenes for the gradient check")->capture_default_str();
    verify_cmd->add_option("--samples", samples, "vMF samples per kappa")->capture_default_str();
    std::string verify_out = "out";
    verify_cmd->add_option("--seed", seed)->capture_default_str();
    verify_cmd->add_option("--out-dir", verify_out, "directory for vmf.csv and gradient_check.csv")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return run_train(train_flags);
        if (*compare_cmd) return run_compare(compare_flags, policies, jobs);
        if (*eval_cmd) return run_eval(eval_flags, checkpoint_path);
        if (*gen_cmd) return run_gen_target(gen_flags, output);
        if (*verify_cmd) return run_verify(scenes, samples, seed, verify_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
