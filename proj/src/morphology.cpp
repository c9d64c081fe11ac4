#include "angiosim/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/core.h>

#include "angiosim/errors.hpp"
#include "angiosim/image_io.hpp"
#include "angiosim/parallel.hpp"

namespace angiosim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of sampled function f (lower envelope of
// parabolas). f and d have length n; v and z are scratch.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
    v.resize(n);
    z.resize(n + 1);
    int k = 0;
    int first = 0;
    while (first < n && f[first] == kInf) ++first;
    if (first == n) {
        std::fill(d, d + n, kInf);
        return;
    }
    v[0] = first;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = first + 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        auto intersect = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };
        double s = intersect(v[k]);
        // z[0] = -inf, so the first parabola is never popped.
        while (s <= z[k]) s = intersect(v[--k]);
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

double DistanceMap::distance(int x, int y) const { return std::sqrt(static_cast<double>(squared_at(x, y))); }

BinaryImage binarize(const GrayImage& image, double threshold) {
    if (image.empty() || image.width <= 0 || image.height <= 0) throw ValidationError("binarize: empty image");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("binarize: threshold must lie in [0, 1]");
    BinaryImage out(image.width, image.height);
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        out.mask[i] = (image.pixels[i] / 255.0 >= threshold) ? 1 : 0;
    return out;
}

DistanceMap distance_transform(const BinaryImage& mask) {
    // Work on a frame padded by one background pixel on each side.
    const int w = mask.width + 2;
    const int h = mask.height + 2;
    std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) grid[static_cast<std::size_t>(y + 1) * w + (x + 1)] = kInf;

    std::vector<int> v;
    std::vector<double> z;
    std::vector<double> f(std::max(w, h)), d(std::max(w, h));

    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        edt_1d(f.data(), d.data(), h, v, z);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = grid.data() + static_cast<std::size_t>(y) * w;
        std::copy(row, row + w, f.begin());
        edt_1d(f.data(), row, w, v, z);
    }

    DistanceMap out;
    out.width = mask.width;
    out.height = mask.height;
    out.squared.resize(static_cast<std::size_t>(mask.width) * mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            out.squared[static_cast<std::size_t>(y) * mask.width + x] =
                std::llround(grid[static_cast<std::size_t>(y + 1) * w + (x + 1)]);
    return out;
}

ThicknessEstimate estimate_thickness_at(const BinaryImage& mask, int cx, int cy, double search_radius) {
    if (!(search_radius > 0.0)) throw ValidationError("search_radius must be positive");
    ThicknessEstimate best;
    if (mask.width <= 0 || mask.height <= 0) return best;

    const DistanceMap dt = distance_transform(mask);
    const int r = static_cast<int>(std::floor(search_radius));
    const double r2 = search_radius * search_radius;
    std::int64_t best_sq = 0;
    for (int y = std::max(0, cy - r); y <= std::min(mask.height - 1, cy + r); ++y) {
        for (int x = std::max(0, cx - r); x <= std::min(mask.width - 1, cx + r); ++x) {
            const std::int64_t dx = x - cx;
            const std::int64_t dy = y - cy;
            const std::int64_t offset_sq = dx * dx + dy * dy;
            if (static_cast<double>(offset_sq) > r2) continue;
            const std::int64_t sq = dt.squared_at(x, y);
            // The inscribed disk at (x, y) has radius sqrt(sq) and must cover the point.
            if (sq == 0 || offset_sq > sq) continue;
            if (sq > best_sq) {
                best_sq = sq;
                best.center_x = x;
                best.center_y = y;
            }
        }
    }
    if (best_sq > 0) {
        best.valid = true;
        best.thickness = 2.0 * std::sqrt(static_cast<double>(best_sq));
    }
    return best;
}

ThicknessEstimate estimate_center_thickness(const BinaryImage& mask, double search_radius) {
    return estimate_thickness_at(mask, mask.width / 2, mask.height / 2, search_radius);
}

std::size_t BatchEstimate::invalid_count() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.valid; }));
}

ThicknessSamples BatchEstimate::samples(std::string source_tag) const {
    ThicknessSamples out;
    out.source_tag = std::move(source_tag);
    for (const auto& r : rows)
        if (r.valid) out.values.push_back(r.thickness);
    return out;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    if (ec) throw IoError(fmt::format("cannot list {}: {}", dir.string(), ec.message()));
    std::sort(files.begin(), files.end());
    return files;
}

BatchEstimate estimate_batch(const std::filesystem::path& dir, double threshold, double search_radius,
                             unsigned threads) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
    if (!(search_radius > 0.0)) throw ValidationError("search_radius must be positive");
    const auto files = list_images(dir);
    if (files.empty()) throw IoError("no .pgm/.png images in " + dir.string());

    struct Slot {
        ThicknessEstimate estimate;
        std::string error;
    };
    std::vector<Slot> slots(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        try {
            const GrayImage img = decode_image(files[i]);
            slots[i].estimate = estimate_center_thickness(binarize(img, threshold), search_radius);
        } catch (const std::exception& e) {
            slots[i].error = e.what();
        }
    });

    BatchEstimate out;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].filename().string();
        if (!slots[i].error.empty()) {
            out.errors.push_back({name, slots[i].error});
        } else {
            out.rows.push_back({name, slots[i].estimate.thickness, slots[i].estimate.valid});
        }
    }
    if (out.rows.empty())
        throw IoError(fmt::format("none of the {} images in {} could be decoded (first error: {})", files.size(),
                                  dir.string(), out.errors.front().message));
    return out;
}

std::string thickness_csv(const BatchEstimate& batch) {
    std::string out = "filename,thickness_px,valid\n";
    for (const auto& r : batch.rows) out += fmt::format("{},{},{}\n", r.filename, r.thickness, r.valid ? 1 : 0);
    return out;
}

void write_thickness_csv(const std::filesystem::path& path, const BatchEstimate& batch) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << thickness_csv(batch);
    if (!out.flush()) throw IoError("write failed: " + path.string());
}

BatchEstimate read_thickness_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "filename,thickness_px,valid")
        throw ValidationError(path.string() + ": missing header 'filename,thickness_px,valid'");
    BatchEstimate out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.rfind(',');
        if (c1 == std::string::npos || c1 == c2)
            throw ValidationError(fmt::format("{}:{}: expected three fields", path.string(), line_no));
        ThicknessRow row;
        row.filename = line.substr(0, c1);
        try {
            row.thickness = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("{}:{}: bad thickness value", path.string(), line_no));
        }
        row.valid = line.substr(c2 + 1) == "1";
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace angiosim
