#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "angiosim/image.hpp"
#include "angiosim/samples.hpp"

namespace angiosim {

struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // 0 or 1, row-major

    BinaryImage() = default;
    BinaryImage(int w, int h, bool fill = false)
        : width(w), height(h), mask(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {}

    bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { mask[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
};

/// Exact Euclidean distance map. Squared distances are integers and stored
/// exactly; distance() is their square root.
struct DistanceMap {
    int width = 0;
    int height = 0;
    std::vector<std::int64_t> squared;

    std::int64_t squared_at(int x, int y) const { return squared[static_cast<std::size_t>(y) * width + x]; }
    double distance(int x, int y) const;
};

struct ThicknessEstimate {
    double thickness = 0.0;
    bool valid = false;
    int center_x = -1;
    int center_y = -1;
};

constexpr double kDefaultThreshold = 0.5;
constexpr double kDefaultSearchRadius = 40.0;

/// mask(p) = intensity(p) / 255 >= threshold.
BinaryImage binarize(const GrayImage& image, double threshold = kDefaultThreshold);

/// Distance from each foreground pixel center to the nearest background pixel
/// center; background maps to 0. Pixels just outside the frame count as
/// background. Two-pass lower-envelope algorithm (Felzenszwalb-Huttenlocher).
DistanceMap distance_transform(const BinaryImage& mask);

/// Diameter of the largest disk inside the foreground that covers the given
/// point, searched over disk centers within search_radius of that point.
ThicknessEstimate estimate_thickness_at(const BinaryImage& mask, int cx, int cy,
                                        double search_radius = kDefaultSearchRadius);

/// estimate_thickness_at() with the image center (width/2, height/2).
ThicknessEstimate estimate_center_thickness(const BinaryImage& mask, double search_radius = kDefaultSearchRadius);

struct ThicknessRow {
    std::string filename;
    double thickness = 0.0;
    bool valid = false;
};

struct FileError {
    std::string filename;
    std::string message;
};

struct BatchEstimate {
    std::vector<ThicknessRow> rows;
    std::vector<FileError> errors;

    std::size_t invalid_count() const;
    /// Valid estimates only, in input order.
    ThicknessSamples samples(std::string source_tag = {}) const;
};

/// Sorted list of .pgm/.png files in a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Estimates every image in `dir` (sorted by filename). Undecodable files are
/// recorded in `errors` and skipped. Throws IoError when the directory is
/// missing, holds no images, or no image could be decoded.
BatchEstimate estimate_batch(const std::filesystem::path& dir, double threshold = kDefaultThreshold,
                             double search_radius = kDefaultSearchRadius, unsigned threads = 1);

/// CSV with header `filename,thickness_px,valid`, LF line endings.
std::string thickness_csv(const BatchEstimate& batch);
void write_thickness_csv(const std::filesystem::path& path, const BatchEstimate& batch);
BatchEstimate read_thickness_csv(const std::filesystem::path& path);

}  // namespace angiosim
