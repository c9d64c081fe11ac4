#include "angiosim/raster.hpp"

#include <algorithm>
#include <cmath>

#include "angiosim/errors.hpp"

namespace angiosim {

std::vector<Disk> project_orthographic(const VesselCurve& curve) {
    std::vector<Disk> disks;
    disks.reserve(curve.size());
    for (const auto& s : curve.samples) {
        if (!(s.thickness > 0.0))
            throw ValidationError("project_orthographic: curve sample without a positive thickness");
        disks.push_back({s.position.x(), s.position.y(), s.thickness / 2.0});
    }
    return disks;
}

GrayImage rasterize_disks(std::span<const Disk> disks, int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("rasterize_disks: image dimensions must be positive");
    GrayImage img(width, height, 0);
    for (const Disk& d : disks) {
        if (!(d.radius >= 0.0) || !std::isfinite(d.x) || !std::isfinite(d.y)) continue;
        const double r2 = d.radius * d.radius;
        const int x0 = std::max(0, static_cast<int>(std::ceil(d.x - d.radius)));
        const int x1 = std::min(width - 1, static_cast<int>(std::floor(d.x + d.radius)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(d.y - d.radius)));
        const int y1 = std::min(height - 1, static_cast<int>(std::floor(d.y + d.radius)));
        for (int j = y0; j <= y1; ++j) {
            const double dy = j - d.y;
            for (int i = x0; i <= x1; ++i) {
                const double dx = i - d.x;
                if (dx * dx + dy * dy <= r2) img.at(i, j) = 255;
            }
        }
    }
    return img;
}

Angiogram render(const SimConfig& config, std::uint64_t seed) { return render(config, seed, config.digest()); }

Angiogram render(const SimConfig& config, std::uint64_t seed, const std::string& config_digest) {
    config.validate();

    Rng label_rng = make_stream(seed, Stream::Label);
    PhantomLabel label = draw_label(config, label_rng);
    label.seed = seed;

    CurvatureTorsionProcess process(config.process, make_stream(seed, Stream::Curve));
    VesselCurve curve = integrate_frenet_serret(process, config.total_length, config.step);

    const Vec3 center(config.image_width / 2, config.image_height / 2, 0.0);
    curve = recenter_curve(curve, config.anchor_arc_length(), center);

    Rng rotation_rng = make_stream(seed, Stream::Rotation);
    curve = random_rotation(curve, rotation_rng);

    std::vector<double> arc_lengths;
    arc_lengths.reserve(curve.size());
    for (const auto& s : curve.samples) arc_lengths.push_back(s.arc_length);
    Rng noise_rng = make_stream(seed, Stream::EdgeNoise);
    const double anchor_s = curve.samples[curve.center_index].arc_length;
    const std::vector<double> profile = thickness_profile(label, config, arc_lengths, anchor_s, noise_rng);
    for (std::size_t i = 0; i < curve.size(); ++i) curve.samples[i].thickness = profile[i];

    const std::vector<Disk> disks = project_orthographic(curve);

    Angiogram out;
    out.image = rasterize_disks(disks, config.image_width, config.image_height);
    out.label = label;
    out.config_digest = config_digest;
    out.seed = seed;
    return out;
}

}  // namespace angiosim
