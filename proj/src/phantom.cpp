#include "angiosim/phantom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/core.h>
#include <openssl/sha.h>

#include "angiosim/errors.hpp"

namespace angiosim {

namespace {

// Field table shared by to_text/parse so the two cannot drift apart.
struct Field {
    const char* key;
    std::function<double&(SimConfig&)> ref;
};

const std::vector<Field>& double_fields() {
    static const std::vector<Field> fields = {
        {"nominal_thickness", [](SimConfig& c) -> double& { return c.nominal_thickness; }},
        {"t0", [](SimConfig& c) -> double& { return c.t0; }},
        {"sigma_an", [](SimConfig& c) -> double& { return c.sigma_an; }},
        {"taper_width", [](SimConfig& c) -> double& { return c.taper_width; }},
        {"edge_noise_sigma", [](SimConfig& c) -> double& { return c.edge_noise_sigma; }},
        {"aneurysm_prevalence", [](SimConfig& c) -> double& { return c.aneurysm_prevalence; }},
        {"thickness_floor", [](SimConfig& c) -> double& { return c.thickness_floor; }},
        {"kappa_draw_min", [](SimConfig& c) -> double& { return c.process.kappa_draw.lo; }},
        {"kappa_draw_max", [](SimConfig& c) -> double& { return c.process.kappa_draw.hi; }},
        {"tau_draw_min", [](SimConfig& c) -> double& { return c.process.tau_draw.lo; }},
        {"tau_draw_max", [](SimConfig& c) -> double& { return c.process.tau_draw.hi; }},
        {"kappa_clip_min", [](SimConfig& c) -> double& { return c.process.kappa_range.lo; }},
        {"kappa_clip_max", [](SimConfig& c) -> double& { return c.process.kappa_range.hi; }},
        {"tau_clip_min", [](SimConfig& c) -> double& { return c.process.tau_range.lo; }},
        {"tau_clip_max", [](SimConfig& c) -> double& { return c.process.tau_range.hi; }},
        {"segment_length", [](SimConfig& c) -> double& { return c.process.segment_length; }},
        {"total_length", [](SimConfig& c) -> double& { return c.total_length; }},
        {"step", [](SimConfig& c) -> double& { return c.step; }},
        {"threshold", [](SimConfig& c) -> double& { return c.threshold; }},
    };
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
    double out = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    if (!value.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw ValidationError(fmt::format("config key '{}': cannot parse '{}' as a number", key, value));
    return out;
}

int parse_int(std::string_view key, std::string_view value) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ValidationError(fmt::format("config key '{}': cannot parse '{}' as an integer", key, value));
    return out;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError("invalid SimConfig: " + message);
}

}  // namespace

void SimConfig::validate() const {
    require(nominal_thickness > 0.0, "nominal_thickness must be > 0");
    require(t0 > nominal_thickness, "t0 must exceed nominal_thickness");
    require(sigma_an >= 0.0, "sigma_an must be >= 0");
    require(taper_width > 0.0, "taper_width must be > 0");
    require(edge_noise_sigma >= 0.0, "edge_noise_sigma must be >= 0");
    require(aneurysm_prevalence >= 0.0 && aneurysm_prevalence <= 1.0, "aneurysm_prevalence must lie in [0, 1]");
    require(thickness_floor > 0.0, "thickness_floor must be > 0");
    require(image_width >= 64 && image_height >= 64, "image dimensions must be >= 64");
    require(step > 0.0 && total_length >= 2.0 * step, "need step > 0 and total_length >= 2 * step");
    require(threshold >= 0.0 && threshold <= 1.0, "threshold must lie in [0, 1]");
    SimConfig copy = *this;
    for (const auto& f : double_fields())
        require(std::isfinite(f.ref(copy)), fmt::format("{} must be finite", f.key));
    process.validate();
}

std::string SimConfig::to_text() const {
    std::string out = "# angiosim SimConfig\n";
    SimConfig copy = *this;
    for (const auto& f : double_fields()) out += fmt::format("{} = {}\n", f.key, f.ref(copy));
    out += fmt::format("image_width = {}\n", image_width);
    out += fmt::format("image_height = {}\n", image_height);
    return out;
}

SimConfig SimConfig::parse(std::string_view text) {
    SimConfig config;
    std::map<std::string, double*, std::less<>> lookup;
    for (const auto& f : double_fields()) lookup.emplace(f.key, &f.ref(config));

    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError(fmt::format("config line {}: expected 'key = value'", line_no));
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "image_width") {
            config.image_width = parse_int(key, value);
        } else if (key == "image_height") {
            config.image_height = parse_int(key, value);
        } else if (auto it = lookup.find(key); it != lookup.end()) {
            *it->second = parse_double(key, value);
        } else {
            throw ValidationError(fmt::format("config line {}: unknown key '{}'", line_no, key));
        }
    }
    config.validate();
    return config;
}

SimConfig SimConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void SimConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write config file " + path);
    out << to_text();
    if (!out.flush()) throw IoError("write failed: " + path);
}

std::string SimConfig::digest() const {
    const std::string text = to_text();
    unsigned char hash[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), hash);
    std::string hex;
    hex.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char b : hash) hex += fmt::format("{:02x}", b);
    return hex;
}

bool operator==(const SimConfig& a, const SimConfig& b) { return a.to_text() == b.to_text(); }

SimConfig preset(std::string_view name) {
    SimConfig c;
    if (name == "sim23") {
        c.t0 = 23.0;
    } else if (name == "sim27") {
        c.t0 = 27.0;
    } else if (name == "sim33") {
        c.t0 = 33.0;
    } else {
        throw ValidationError(fmt::format("unknown preset '{}' (expected sim23, sim27 or sim33)", name));
    }
    return c;
}

std::vector<std::string> preset_names() { return {"sim23", "sim27", "sim33"}; }

Perturbation Perturbation::parse(std::string_view spec) {
    Perturbation p;
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        const auto item = trim(spec.substr(0, comma));
        spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError(fmt::format("perturbation '{}': expected key=delta", item));
        const auto key = trim(item.substr(0, eq));
        const double v = parse_double(key, trim(item.substr(eq + 1)));
        if (key == "t0") {
            p.t0 = v;
        } else if (key == "prevalence") {
            p.prevalence = v;
        } else if (key == "edge_noise") {
            p.edge_noise = v;
        } else {
            throw ValidationError(fmt::format("unknown perturbation key '{}'", key));
        }
    }
    return p;
}

SimConfig perturb(SimConfig config, const Perturbation& delta) {
    config.t0 += delta.t0;
    config.aneurysm_prevalence += delta.prevalence;
    config.edge_noise_sigma += delta.edge_noise;
    config.validate();
    return config;
}

PhantomLabel draw_label(const SimConfig& config, Rng& rng) {
    PhantomLabel label;
    label.thickness = config.nominal_thickness;
    std::bernoulli_distribution aneurysm(config.aneurysm_prevalence);
    label.has_aneurysm = aneurysm(rng);
    if (!label.has_aneurysm) return label;

    if (config.sigma_an == 0.0) {
        label.thickness = config.t0;
        return label;
    }
    // Rejection sampling; t0 > nominal keeps the acceptance rate above 1/2.
    std::normal_distribution<double> peak(config.t0, config.sigma_an);
    double t = peak(rng);
    while (t < config.nominal_thickness) t = peak(rng);
    label.thickness = t;
    return label;
}

std::vector<double> thickness_profile(const PhantomLabel& label, const SimConfig& config,
                                      std::span<const double> arc_lengths, double anchor, Rng& rng) {
    if (arc_lengths.empty()) throw ValidationError("thickness_profile: empty arc-length list");
    if (!std::is_sorted(arc_lengths.begin(), arc_lengths.end()))
        throw ValidationError("thickness_profile: arc lengths must be sorted");
    if (anchor < arc_lengths.front() || anchor > arc_lengths.back())
        throw ValidationError("thickness_profile: anchor outside the arc-length range");

    const double excess = label.thickness - config.nominal_thickness;
    const double inv_two_w2 = 1.0 / (2.0 * config.taper_width * config.taper_width);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> out;
    out.reserve(arc_lengths.size());
    for (double s : arc_lengths) {
        const double d = s - anchor;
        double value = config.nominal_thickness + excess * std::exp(-d * d * inv_two_w2);
        if (config.edge_noise_sigma > 0.0) value += config.edge_noise_sigma * noise(rng);
        out.push_back(std::max(value, config.thickness_floor));
    }
    return out;
}

}  // namespace angiosim
