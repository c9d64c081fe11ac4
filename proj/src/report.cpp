#include "angiosim/report.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "angiosim/errors.hpp"

namespace angiosim {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string{}; }

std::optional<double> optional_number(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw ValidationError(fmt::format("field '{}' must be a number", key));
    return j[key].get<double>();
}

}  // namespace

Json DivergenceReport::to_json() const {
    Json j;
    j["run_label"] = run_label;
    if (kl_nats) j["kl_nats"] = *kl_nats;
    if (js_nats) j["js_nats"] = *js_nats;
    if (frechet_sq) j["frechet_sq"] = *frechet_sq;
    j["n_ref"] = n_ref;
    j["n_cand"] = n_cand;
    j["invalid_ref"] = invalid_ref;
    j["invalid_cand"] = invalid_cand;
    j["histogram"] = {{"lo", histogram.lo},
                      {"hi", histogram.hi},
                      {"bin_width", histogram.bin_width},
                      {"epsilon", histogram.epsilon}};
    if (frechet_sq) j["feature"] = feature_name;
    j["estimator_name"] = estimator_name;
    if (noise_floor) {
        j["noise_floor"] = {{"metric", metric_name(noise_floor->metric)},
                            {"mean", noise_floor->mean},
                            {"std", noise_floor->std},
                            {"n", noise_floor->n},
                            {"replicates", noise_floor->replicates}};
    }
    if (above_floor) j["above_floor"] = *above_floor;
    return j;
}

DivergenceReport DivergenceReport::from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("report must be a JSON object");
    for (const char* key : {"n_ref", "n_cand", "histogram"})
        if (!j.contains(key)) throw ValidationError(fmt::format("report missing field '{}'", key));
    DivergenceReport r;
    try {
        r.run_label = j.value("run_label", std::string{});
        r.kl_nats = optional_number(j, "kl_nats");
        r.js_nats = optional_number(j, "js_nats");
        r.frechet_sq = optional_number(j, "frechet_sq");
        r.n_ref = j.at("n_ref").get<std::size_t>();
        r.n_cand = j.at("n_cand").get<std::size_t>();
        r.invalid_ref = j.value("invalid_ref", std::size_t{0});
        r.invalid_cand = j.value("invalid_cand", std::size_t{0});
        const Json& h = j.at("histogram");
        r.histogram = {h.at("lo").get<double>(), h.at("hi").get<double>(), h.at("bin_width").get<double>(),
                       h.at("epsilon").get<double>()};
        r.feature_name = j.value("feature", std::string{});
        r.estimator_name = j.value("estimator_name", r.estimator_name);
        if (j.contains("noise_floor")) r.noise_floor = floor_summary_from_json(j.at("noise_floor"));
        if (j.contains("above_floor")) r.above_floor = j.at("above_floor").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return r;
}

std::string DivergenceReport::csv_header() {
    return "run_label,n_ref,n_cand,kl_nats,js_nats,frechet_sq,floor_mean,floor_std";
}

std::string DivergenceReport::csv_row() const {
    return fmt::format("{},{},{},{},{},{},{},{}", run_label, n_ref, n_cand, optional_cell(kl_nats),
                       optional_cell(js_nats), optional_cell(frechet_sq),
                       noise_floor ? fmt::format("{}", noise_floor->mean) : "",
                       noise_floor ? fmt::format("{}", noise_floor->std) : "");
}

Json floor_to_json(const NoiseFloor& floor, const HistogramSpec& histogram, const std::string& config_digest,
                   std::uint64_t master_seed, const std::string& feature_name) {
    Json j;
    j["metric"] = metric_name(floor.metric);
    j["mean"] = floor.mean;
    j["std"] = floor.std;
    j["n"] = floor.n;
    j["replicates"] = floor.replicates;
    j["values"] = floor.values;
    if (floor.replicates == 1) j["warning"] = "single replicate: std is undefined and reported as 0";
    j["master_seed"] = master_seed;
    j["config_digest"] = config_digest;
    if (floor.metric == Metric::Frechet) {
        j["feature"] = feature_name;
    } else {
        j["histogram"] = {{"lo", histogram.lo},
                          {"hi", histogram.hi},
                          {"bin_width", histogram.bin_width},
                          {"epsilon", histogram.epsilon}};
    }
    return j;
}

FloorSummary floor_summary_from_json(const Json& j) {
    try {
        FloorSummary f;
        f.metric = parse_metric(j.at("metric").get<std::string>());
        f.mean = j.at("mean").get<double>();
        f.std = j.at("std").get<double>();
        f.n = j.at("n").get<std::size_t>();
        f.replicates = j.at("replicates").get<std::size_t>();
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed noise floor: ") + e.what());
    }
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(fmt::format("{}: invalid JSON ({})", path.string(), e.what()));
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw IoError("write failed: " + path.string());
}

}  // namespace angiosim
