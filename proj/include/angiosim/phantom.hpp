#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "angiosim/curve.hpp"
#include "angiosim/random.hpp"

namespace angiosim {

/// Parameters of the canonical angiogram model. All lengths in pixels.
struct SimConfig {
    double nominal_thickness = 20.0;
    double t0 = 27.0;
    double sigma_an = 1.0;
    double taper_width = 15.0;
    double edge_noise_sigma = 0.2;
    double aneurysm_prevalence = 0.5;
    double thickness_floor = 2.0;
    int image_width = 256;
    int image_height = 256;
    CurvatureTorsionConfig process{};
    double total_length = 600.0;
    double step = 1.0;
    /// Fraction of full scale used when binarizing images downstream.
    double threshold = 0.5;

    void validate() const;

    /// Arc length of the sample mapped to the image center.
    double anchor_arc_length() const { return total_length / 2.0; }

    /// Canonical key-value text, one `key = value` per line. Doubles are written
    /// with round-trip precision so parse(to_text(c)) == c.
    std::string to_text() const;
    static SimConfig parse(std::string_view text);
    static SimConfig load(const std::string& path);
    void save(const std::string& path) const;

    /// Hex SHA-256 of to_text().
    std::string digest() const;

    friend bool operator==(const SimConfig&, const SimConfig&);
};

/// Returns the named preset: "sim23", "sim27" or "sim33".
SimConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Shifts applied to a reference config to build an imperfect candidate model.
struct Perturbation {
    double t0 = 0.0;
    double prevalence = 0.0;
    double edge_noise = 0.0;

    /// Parses "t0=+2,prevalence=-0.1,edge_noise=0.25". Unknown keys throw.
    static Perturbation parse(std::string_view spec);
    bool is_identity() const { return t0 == 0.0 && prevalence == 0.0 && edge_noise == 0.0; }
};

/// Applies the perturbation and validates the result.
SimConfig perturb(SimConfig config, const Perturbation& delta);

struct PhantomLabel {
    bool has_aneurysm = false;
    double thickness = 0.0;
    std::uint64_t seed = 0;
};

/// Bernoulli(prevalence) aneurysm draw; the peak thickness follows
/// Normal(t0, sigma_an) truncated below at the nominal thickness.
PhantomLabel draw_label(const SimConfig& config, Rng& rng);

/// Gaussian taper from the drawn thickness to nominal, plus IID edge noise,
/// floored at config.thickness_floor.
std::vector<double> thickness_profile(const PhantomLabel& label, const SimConfig& config,
                                      std::span<const double> arc_lengths, double anchor, Rng& rng);

}  // namespace angiosim
