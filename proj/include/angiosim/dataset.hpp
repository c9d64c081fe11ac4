#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "angiosim/phantom.hpp"

namespace angiosim {

inline constexpr const char* kGeneratorVersion = "angiosim-1.0";
inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kConfigName = "config.txt";

struct ManifestEntry {
    std::string filename;
    std::uint64_t seed = 0;
    bool has_aneurysm = false;
    double thickness = 0.0;
};

/// JSON Lines: a header record followed by one record per image.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string config_digest;
    std::string generator_version = kGeneratorVersion;
    std::uint64_t master_seed = 0;

    double aneurysm_fraction() const;

    std::string to_jsonl() const;
    static DatasetManifest parse_jsonl(std::string_view text);
    static DatasetManifest load(const std::filesystem::path& path);
};

/// File name of image `index`: img_000000.pgm, ...
std::string image_filename(std::size_t index);

/// Renders `count` images with seeds derive_seed(master_seed, i) into out_dir
/// together with manifest.jsonl and config.txt. Output is byte-identical for
/// identical arguments. The manifest is written last and only after every
/// image was written.
DatasetManifest generate_batch(const SimConfig& config, std::size_t count, std::uint64_t master_seed,
                               const std::filesystem::path& out_dir, unsigned threads = 1);

}  // namespace angiosim
