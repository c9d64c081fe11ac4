#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "angiosim/curve.hpp"
#include "angiosim/image.hpp"
#include "angiosim/phantom.hpp"

namespace angiosim {

struct Disk {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
};

/// Binary angiogram (0 background, 255 vessel) plus generation metadata.
struct Angiogram {
    GrayImage image;
    PhantomLabel label;
    std::string config_digest;
    std::uint64_t seed = 0;
};

/// Orthographic projection along z: each sphere becomes a disk of the same
/// diameter. Requires every sample to carry a thickness.
std::vector<Disk> project_orthographic(const VesselCurve& curve);

/// Pixel (i, j) is 255 iff (i - x)^2 + (j - y)^2 <= r^2 for some disk.
GrayImage rasterize_disks(std::span<const Disk> disks, int width, int height);

/// Full generation pipeline for one image, deterministic in (config, seed).
Angiogram render(const SimConfig& config, std::uint64_t seed);

/// render() with a precomputed digest, for batch use.
Angiogram render(const SimConfig& config, std::uint64_t seed, const std::string& config_digest);

}  // namespace angiosim
