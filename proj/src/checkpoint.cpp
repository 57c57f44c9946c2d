#include "splat2d/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "splat2d/config.hpp"

namespace splat2d {

namespace {

constexpr const char* kRecordHeader = "mu_x,mu_y,log_scale_x,log_scale_y,rotation,logit_opacity,r,g,b,depth";

std::vector<std::string_view> split_csv(std::string_view line, std::size_t max_fields = 0) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        if (max_fields && out.size() + 1 == max_fields) {
            out.push_back(line.substr(start));
            break;
        }
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

class LineReader {
public:
    explicit LineReader(const std::string& text) : in_(text) {}

    std::string next(const char* what) {
        std::string line;
        if (!std::getline(in_, line)) throw std::runtime_error(std::string("checkpoint: missing ") + what);
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }
    std::string where() const { return "checkpoint line " + std::to_string(line_no_) + ": "; }

private:
    std::istringstream in_;
    int line_no_ = 0;
};

std::string_view expect_field(std::string_view line, std::string_view name, LineReader& r) {
    const auto fields = split_csv(line, 2);
    if (fields.size() != 2 || fields[0] != name) throw std::runtime_error(r.where() + "expected '" + std::string(name) + ",...'");
    return fields[1];
}

} // namespace

std::string checkpoint_record(const Gaussian2D& g) {
    const double values[] = {g.mu.x,     g.mu.y,     g.log_scale.x, g.log_scale.y, g.rotation,
                             g.logit_opacity, g.color[0], g.color[1], g.color[2], g.depth};
    std::string out;
    for (std::size_t k = 0; k < std::size(values); ++k) {
        if (k) out.push_back(',');
        out += format_double17(values[k]);
    }
    return out;
}

std::string serialize_checkpoint(const Checkpoint& cp) {
    std::string out;
    out += "format_version," + std::to_string(kCheckpointVersion) + "\n";
    out += "iteration," + std::to_string(cp.iteration) + "\n";
    out += "count," + std::to_string(cp.scene.size()) + "\n";
    const Rgb& bg = cp.scene.background;
    out += "background," + format_double17(bg[0]) + "," + format_double17(bg[1]) + "," + format_double17(bg[2]) + "\n";
    for (const auto& [key, value] : cp.config) out += "config," + key + "," + value + "\n";
    out += kRecordHeader;
    out += "\n";
    for (const Gaussian2D& g : cp.scene.gaussians) out += checkpoint_record(g) + "\n";
    return out;
}

Checkpoint parse_checkpoint(const std::string& text) {
    LineReader reader(text);
    Checkpoint cp;
    try {
        const long long version = parse_int(expect_field(reader.next("format_version"), "format_version", reader));
        if (version != kCheckpointVersion)
            throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
        cp.iteration = static_cast<int>(parse_int(expect_field(reader.next("iteration"), "iteration", reader)));
        const long long count = parse_int(expect_field(reader.next("count"), "count", reader));
        if (count < 0) throw std::runtime_error(reader.where() + "negative count");

        const std::string bg_line = reader.next("background");
        const auto bg = split_csv(expect_field(bg_line, "background", reader));
        if (bg.size() != 3) throw std::runtime_error(reader.where() + "background needs 3 values");
        for (int k = 0; k < 3; ++k) cp.scene.background[k] = parse_double(bg[k]);

        std::string line = reader.next("record header");
        while (line.rfind("config,", 0) == 0) {
            const auto fields = split_csv(line, 3);
            if (fields.size() != 3) throw std::runtime_error(reader.where() + "malformed config line");
            cp.config.emplace_back(std::string(fields[1]), std::string(fields[2]));
            line = reader.next("record header");
        }
        if (line != kRecordHeader) throw std::runtime_error(reader.where() + "expected record header");

        cp.scene.gaussians.reserve(static_cast<std::size_t>(count));
        for (long long i = 0; i < count; ++i) {
            const std::string record = reader.next("Gaussian record");
            const auto f = split_csv(record);
            if (f.size() != 10) throw std::runtime_error(reader.where() + "record needs 10 fields");
            Gaussian2D g;
            g.mu = {parse_double(f[0]), parse_double(f[1])};
            g.log_scale = {parse_double(f[2]), parse_double(f[3])};
            g.rotation = parse_double(f[4]);
            g.logit_opacity = parse_double(f[5]);
            g.color = {parse_double(f[6]), parse_double(f[7]), parse_double(f[8])};
            g.depth = parse_double(f[9]);
            cp.scene.gaussians.push_back(g);
        }
    } catch (const ConfigError& e) {
        throw std::runtime_error(reader.where() + e.what());
    }
    return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << serialize_checkpoint(checkpoint);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_checkpoint(buffer.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::size_t estimate_memory_bytes(const Scene& scene) {
    std::size_t bytes = 0;
    for (const Gaussian2D& g : scene.gaussians) bytes += checkpoint_record(g).size() + 1;
    return bytes;
}

} // namespace splat2d
