#include "splat2d/config.hpp"

#include <cstdint>
#include <charconv>
#include <fstream>
#include <sstream>

namespace splat2d {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string format_double17(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

double parse_double(std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) throw ConfigError("expected a number, got '" + std::string(text) + "'");
    return v;
}

long long parse_int(std::string_view text) {
    text = trim(text);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw ConfigError("expected an integer, got '" + std::string(text) + "'");
    return v;
}

namespace {

int parse_int32(std::string_view text) {
    const long long v = parse_int(text);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("integer out of range: " + std::string(text));
    return static_cast<int>(v);
}

Rgb parse_rgb(std::string_view text) {
    Rgb out{};
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
        const std::size_t comma = text.find(',', start);
        if ((k < 2) == (comma == std::string_view::npos)) throw ConfigError("expected r,g,b, got '" + std::string(text) + "'");
        out[k] = parse_double(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        start = comma + 1;
    }
    return out;
}

std::string rgb_text(const Rgb& c) { return format_double(c[0]) + "," + format_double(c[1]) + "," + format_double(c[2]); }

template <class T, class Parse, class Format>
ConfigKey field(std::string name, std::string help, T TrainConfig::*member, Parse parse, Format format) {
    return {std::move(name), std::move(help),
            [member, parse](TrainConfig& c, std::string_view v) { c.*member = parse(v); },
            [member, format](const TrainConfig& c) { return format(c.*member); }};
}

ConfigKey int_key(std::string name, std::string help, int TrainConfig::*member) {
    return field(std::move(name), std::move(help), member, parse_int32, [](int v) { return std::to_string(v); });
}

ConfigKey double_key(std::string name, std::string help, double TrainConfig::*member) {
    return field(std::move(name), std::move(help), member, parse_double, format_double);
}

ConfigKey densify_double(std::string name, std::string help, double DensifyConfig::*member) {
    return {std::move(name), std::move(help),
            [member](TrainConfig& c, std::string_view v) { c.densify.*member = parse_double(v); },
            [member](const TrainConfig& c) { return format_double(c.densify.*member); }};
}

std::vector<ConfigKey> build_keys() {
    std::vector<ConfigKey> keys;
    keys.push_back(field("target", "target PPM path (empty: synthetic target)", &TrainConfig::target_path,
                         [](std::string_view v) { return std::string(trim(v)); },
                         [](const std::string& s) { return s; }));
    keys.push_back({"target_kind", "synthetic target: checker|radial_gradient|hf_noise|stripes|mixed",
                    [](TrainConfig& c, std::string_view v) { c.target.kind = parse_target_kind(trim(v)); },
                    [](const TrainConfig& c) { return std::string(to_string(c.target.kind)); }});
    keys.push_back({"width", "synthetic target width",
                    [](TrainConfig& c, std::string_view v) { c.target.width = parse_int32(v); },
                    [](const TrainConfig& c) { return std::to_string(c.target.width); }});
    keys.push_back({"height", "synthetic target height",
                    [](TrainConfig& c, std::string_view v) { c.target.height = parse_int32(v); },
                    [](const TrainConfig& c) { return std::to_string(c.target.height); }});
    keys.push_back({"target_seed", "synthetic target seed",
                    [](TrainConfig& c, std::string_view v) {
                        const long long s = parse_int(v);
                        if (s < 0) throw ConfigError("target_seed must be >= 0");
                        c.target.seed = static_cast<std::uint64_t>(s);
                    },
                    [](const TrainConfig& c) { return std::to_string(c.target.seed); }});
    keys.push_back(int_key("iterations", "training iterations", &TrainConfig::iterations));
    keys.push_back(int_key("n_init", "initial Gaussian count", &TrainConfig::n_init));
    keys.push_back(int_key("densify_interval", "iterations between densification rounds",
                           &TrainConfig::densify_interval));
    keys.push_back(int_key("densify_start", "first iteration eligible for densification", &TrainConfig::densify_start));
    keys.push_back(int_key("densify_stop", "densification runs only below this iteration", &TrainConfig::densify_stop));
    keys.push_back(int_key("opacity_reset_interval", "opacity reset cadence (0 disables)",
                           &TrainConfig::opacity_reset_interval));
    keys.push_back({"policy", "baseline|abs|gdags|gdags-s|gdags-c",
                    [](TrainConfig& c, std::string_view v) { c.densify.policy = parse_policy(trim(v)); },
                    [](const TrainConfig& c) { return std::string(to_string(c.densify.policy)); }});
    keys.push_back(densify_double("weight_alpha", "coherence weight floor", &DensifyConfig::weight_alpha));
    keys.push_back(densify_double("weight_beta", "coherence weight amplification", &DensifyConfig::weight_beta));
    keys.push_back(densify_double("weight_p", "coherence weight exponent", &DensifyConfig::weight_p));
    keys.push_back(densify_double("tau_p", "positional gradient threshold", &DensifyConfig::tau_p));
    keys.push_back(densify_double("abs_tau_p", "gradient threshold for the abs policy (<= 0: tau_p)",
                                  &DensifyConfig::abs_tau_p));
    keys.push_back(densify_double("split_factor", "scale divisor for split children", &DensifyConfig::split_factor));
    keys.push_back(densify_double("opacity_prune_threshold", "prune below this opacity",
                                  &DensifyConfig::opacity_prune_threshold));
    keys.push_back({"gcr_scope", "global|per_step",
                    [](TrainConfig& c, std::string_view v) {
                        v = trim(v);
                        if (v == "global") c.densify.gcr_scope = GcrScope::Global;
                        else if (v == "per_step") c.densify.gcr_scope = GcrScope::PerStepMean;
                        else throw ConfigError("gcr_scope must be global or per_step");
                    },
                    [](const TrainConfig& c) {
                        return std::string(c.densify.gcr_scope == GcrScope::Global ? "global" : "per_step");
                    }});
    keys.push_back(double_key("percent_dense", "size gate as a fraction of the image extent",
                              &TrainConfig::percent_dense));
    keys.push_back(double_key("max_scale_fraction", "prune splats larger than this fraction of the extent",
                              &TrainConfig::max_scale_fraction));
    keys.push_back({"gradient_units", "ndc|pixel",
                    [](TrainConfig& c, std::string_view v) {
                        v = trim(v);
                        if (v == "ndc") c.gradient_units = GradientUnits::Ndc;
                        else if (v == "pixel") c.gradient_units = GradientUnits::Pixel;
                        else throw ConfigError("gradient_units must be ndc or pixel");
                    },
                    [](const TrainConfig& c) {
                        return std::string(c.gradient_units == GradientUnits::Ndc ? "ndc" : "pixel");
                    }});
    keys.push_back(double_key("lr_position_init", "initial position rate (times extent)",
                              &TrainConfig::lr_position_init));
    keys.push_back(double_key("lr_position_final", "final position rate (times extent)",
                              &TrainConfig::lr_position_final));
    keys.push_back(double_key("lr_scale", "log-scale rate", &TrainConfig::lr_scale));
    keys.push_back(double_key("lr_rotation", "rotation rate", &TrainConfig::lr_rotation));
    keys.push_back(double_key("lr_opacity", "opacity-logit rate", &TrainConfig::lr_opacity));
    keys.push_back(double_key("lr_color", "color rate", &TrainConfig::lr_color));
    keys.push_back({"loss", "l1|mse", [](TrainConfig& c, std::string_view v) { c.loss = parse_loss_kind(trim(v)); },
                    [](const TrainConfig& c) { return std::string(to_string(c.loss)); }});
    keys.push_back({"min_density", "per-pixel density cutoff",
                    [](TrainConfig& c, std::string_view v) { c.raster.min_density = parse_double(v); },
                    [](const TrainConfig& c) { return format_double(c.raster.min_density); }});
    keys.push_back({"min_transmittance", "early-termination transmittance",
                    [](TrainConfig& c, std::string_view v) { c.raster.min_transmittance = parse_double(v); },
                    [](const TrainConfig& c) { return format_double(c.raster.min_transmittance); }});
    keys.push_back({"threads", "rasterizer worker threads (1: reference path)",
                    [](TrainConfig& c, std::string_view v) { c.raster.threads = parse_int32(v); },
                    [](const TrainConfig& c) { return std::to_string(c.raster.threads); }});
    keys.push_back(field("background", "background color r,g,b", &TrainConfig::background, parse_rgb, rgb_text));
    keys.push_back({"seed", "run seed",
                    [](TrainConfig& c, std::string_view v) {
                        const long long s = parse_int(v);
                        if (s < 0) throw ConfigError("seed must be >= 0");
                        c.seed = static_cast<std::uint64_t>(s);
                    },
                    [](const TrainConfig& c) { return std::to_string(c.seed); }});
    keys.push_back(field("out_dir", "output directory", &TrainConfig::out_dir,
                         [](std::string_view v) { return std::string(trim(v)); },
                         [](const std::string& s) { return s; }));
    keys.push_back(int_key("snapshot_every", "snapshot render cadence (0 disables)", &TrainConfig::snapshot_every));
    return keys;
}

const ConfigKey& find_key(std::string_view key) {
    for (const auto& k : config_keys())
        if (k.name == key) return k;
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

} // namespace

void TrainConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(iterations >= 0, "iterations must be >= 0");
    require(n_init >= 1, "n_init must be >= 1");
    require(densify_interval >= 1, "densify_interval must be >= 1");
    require(densify_start >= 0, "densify_start must be >= 0");
    require(densify_stop <= iterations, "densify_stop must be <= iterations");
    require(opacity_reset_interval >= 0, "opacity_reset_interval must be >= 0");
    require(percent_dense > 0.0, "percent_dense must be > 0");
    require(max_scale_fraction > 0.0, "max_scale_fraction must be > 0");
    require(raster.threads >= 1, "threads must be >= 1");
    require(snapshot_every >= 0, "snapshot_every must be >= 0");
    if (target_path.empty()) require(target.width >= 16 && target.height >= 16, "target width/height must be >= 16");
    try {
        densify.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void set_config_value(TrainConfig& cfg, std::string_view key, std::string_view value) {
    const ConfigKey& k = find_key(trim(key));
    try {
        k.set(cfg, value);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(k.name) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(k.name) + ": " + e.what());
    }
}

std::string get_config_value(const TrainConfig& cfg, std::string_view key) { return find_key(key).get(cfg); }

void apply_config_text(TrainConfig& cfg, std::string_view text, std::string_view source) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        try {
            set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
}

void apply_config_file(TrainConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(cfg, buffer.str(), path.string());
}

std::string config_to_text(const TrainConfig& cfg) {
    std::string out;
    for (const auto& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

} // namespace splat2d
