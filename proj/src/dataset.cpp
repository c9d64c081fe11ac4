#include "angiosim/dataset.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "angiosim/errors.hpp"
#include "angiosim/image_io.hpp"
#include "angiosim/parallel.hpp"
#include "angiosim/random.hpp"
#include "angiosim/raster.hpp"

namespace angiosim {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

double DatasetManifest::aneurysm_fraction() const {
    if (entries.empty()) return 0.0;
    std::size_t k = 0;
    for (const auto& e : entries) k += e.has_aneurysm ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(entries.size());
}

std::string DatasetManifest::to_jsonl() const {
    Json header;
    header["record"] = "header";
    header["generator_version"] = generator_version;
    header["config_digest"] = config_digest;
    header["master_seed"] = master_seed;
    header["count"] = entries.size();
    std::string out = header.dump() + "\n";
    for (const auto& e : entries) {
        Json j;
        j["record"] = "image";
        j["filename"] = e.filename;
        j["seed"] = e.seed;
        j["has_aneurysm"] = e.has_aneurysm;
        j["thickness"] = e.thickness;
        out += j.dump() + "\n";
    }
    return out;
}

DatasetManifest DatasetManifest::parse_jsonl(std::string_view text) {
    DatasetManifest m;
    bool have_header = false;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const Json j = Json::parse(line);
            const std::string kind = j.at("record").get<std::string>();
            if (kind == "header") {
                m.generator_version = j.at("generator_version").get<std::string>();
                m.config_digest = j.at("config_digest").get<std::string>();
                m.master_seed = j.at("master_seed").get<std::uint64_t>();
                have_header = true;
            } else if (kind == "image") {
                m.entries.push_back({j.at("filename").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                                     j.at("has_aneurysm").get<bool>(), j.at("thickness").get<double>()});
            } else {
                throw ValidationError(fmt::format("manifest line {}: unknown record '{}'", line_no, kind));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("manifest line {}: {}", line_no, e.what()));
    }
    if (!have_header) throw ValidationError("manifest: missing header record");
    return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_jsonl(ss.str());
}

std::string image_filename(std::size_t index) { return fmt::format("img_{:06d}.pgm", index); }

DatasetManifest generate_batch(const SimConfig& config, std::size_t count, std::uint64_t master_seed,
                               const fs::path& out_dir, unsigned threads) {
    config.validate();
    if (count < 1) throw ValidationError("generate_batch: count must be >= 1");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw IoError(fmt::format("cannot create output directory {}: {}", out_dir.string(), ec.message()));
    // Probe writability before rendering anything.
    const fs::path probe = out_dir / ".angiosim_write_probe";
    {
        std::ofstream p(probe, std::ios::binary | std::ios::trunc);
        if (!p) throw IoError("output directory is not writable: " + out_dir.string());
    }
    fs::remove(probe, ec);
    // A stale manifest must not describe a partially rewritten directory.
    fs::remove(out_dir / kManifestName, ec);

    DatasetManifest manifest;
    manifest.config_digest = config.digest();
    manifest.master_seed = master_seed;
    manifest.entries.resize(count);

    parallel_for(count, threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(master_seed, i);
        const Angiogram a = render(config, seed, manifest.config_digest);
        ManifestEntry& e = manifest.entries[i];
        e.filename = image_filename(i);
        e.seed = seed;
        e.has_aneurysm = a.label.has_aneurysm;
        e.thickness = a.label.thickness;
        write_pgm(out_dir / e.filename, a.image);
    });

    config.save(out_dir / kConfigName);
    std::ofstream out(out_dir / kManifestName, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in " + out_dir.string());
    out << manifest.to_jsonl();
    if (!out.flush()) throw IoError("manifest write failed in " + out_dir.string());
    return manifest;
}

}  // namespace angiosim
