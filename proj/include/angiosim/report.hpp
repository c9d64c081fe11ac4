#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "angiosim/stats.hpp"

namespace angiosim {

using Json = nlohmann::ordered_json;

struct FloorSummary {
    Metric metric = Metric::Kl;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
    std::size_t replicates = 0;
};

/// Metric values for one candidate population against one reference.
struct DivergenceReport {
    std::string run_label;
    std::optional<double> kl_nats;
    std::optional<double> js_nats;
    std::optional<double> frechet_sq;
    std::size_t n_ref = 0;
    std::size_t n_cand = 0;
    std::size_t invalid_ref = 0;
    std::size_t invalid_cand = 0;
    HistogramSpec histogram{};
    std::string feature_name;
    std::string estimator_name = "shared-bin histogram, additive smoothing";
    std::optional<FloorSummary> noise_floor;
    /// metric > floor mean + 3 floor std, for the floor's metric.
    std::optional<bool> above_floor;

    Json to_json() const;
    static DivergenceReport from_json(const Json& j);

    static std::string csv_header();
    std::string csv_row() const;
};

/// Serialized form of a noise-floor run.
Json floor_to_json(const NoiseFloor& floor, const HistogramSpec& histogram, const std::string& config_digest,
                   std::uint64_t master_seed, const std::string& feature_name);
FloorSummary floor_summary_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace angiosim
