#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the code paths it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "angiosim/morphology.hpp"

namespace angiosim::oracle {

/// Squared distance from every pixel to the nearest background pixel center,
/// with a background ring just outside the frame. O(N^2).
inline std::vector<std::int64_t> brute_force_squared_edt(const BinaryImage& m) {
    std::vector<std::pair<int, int>> background;
    for (int y = -1; y <= m.height; ++y)
        for (int x = -1; x <= m.width; ++x) {
            const bool inside = x >= 0 && y >= 0 && x < m.width && y < m.height;
            if (!inside || !m.at(x, y)) background.emplace_back(x, y);
        }
    std::vector<std::int64_t> out(static_cast<std::size_t>(m.width) * m.height, 0);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (auto [bx, by] : background) {
                const std::int64_t dx = bx - x, dy = by - y;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[static_cast<std::size_t>(y) * m.width + x] = best;
        }
    return out;
}

/// Largest disk containing the point (cx, cy) and no background pixel center
/// (frame exterior included), trying every candidate center within
/// search_radius. For each center the clean radius is grown ring by ring until
/// a background pixel is hit. Returns the diameter, 0 when no disk qualifies.
inline double brute_force_inscribed_diameter(const BinaryImage& m, int cx, int cy, double search_radius) {
    auto foreground = [&](int x, int y) { return x >= 0 && y >= 0 && x < m.width && y < m.height && m.at(x, y); };
    std::int64_t best = 0;
    const int r = static_cast<int>(search_radius);
    for (int py = cy - r; py <= cy + r; ++py)
        for (int px = cx - r; px <= cx + r; ++px) {
            const std::int64_t off = std::int64_t(px - cx) * (px - cx) + std::int64_t(py - cy) * (py - cy);
            if (double(off) > search_radius * search_radius || !foreground(px, py)) continue;
            std::int64_t clean = std::numeric_limits<std::int64_t>::max();
            for (std::int64_t ring = 1; ring * ring < clean; ++ring) {
                for (std::int64_t qy = py - ring; qy <= py + ring; ++qy)
                    for (std::int64_t qx = px - ring; qx <= px + ring; ++qx) {
                        if (std::max(std::abs(qx - px), std::abs(qy - py)) != ring) continue;
                        if (foreground(int(qx), int(qy))) continue;
                        clean = std::min(clean, (qx - px) * (qx - px) + (qy - py) * (qy - py));
                    }
            }
            // The open disk of radius sqrt(clean) holds only foreground; it must cover the point.
            if (off <= clean) best = std::max(best, clean);
        }
    return best > 0 ? 2.0 * std::sqrt(double(best)) : 0.0;
}

/// Position on the constant (kappa, tau) curve starting at the origin with
/// frame (T0, N0, B0) = identity, from the closed-form helix.
inline Eigen::Vector3d helix_position(double kappa, double tau, double s) {
    const double w2 = kappa * kappa + tau * tau;
    const double w = std::sqrt(w2);
    const double along_t = (tau * tau / w2) * s + (kappa * kappa / (w2 * w)) * std::sin(w * s);
    const double along_n = (kappa / w2) * (1.0 - std::cos(w * s));
    const double along_b = (kappa * tau / w2) * (s - std::sin(w * s) / w);
    return {along_t, along_n, along_b};
}

/// Principal square root by Denman-Beavers iteration (general, non-symmetric).
inline Eigen::MatrixXd denman_beavers_sqrt(const Eigen::MatrixXd& a, int iterations = 100) {
    Eigen::MatrixXd y = a;
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (int i = 0; i < iterations; ++i) {
        const Eigen::MatrixXd y_next = 0.5 * (y + z.inverse());
        const Eigen::MatrixXd z_next = 0.5 * (z + y.inverse());
        y = y_next;
        z = z_next;
    }
    return y;
}

/// Pixel-center coverage count of one disk by scanning the whole frame.
inline int disk_pixel_count(double x, double y, double r, int w, int h) {
    int count = 0;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i)
            if ((i - x) * (i - x) + (j - y) * (j - y) <= r * r) ++count;
    return count;
}

/// Random mask of blobs: union of a few random disks plus salt noise.
inline BinaryImage random_blob_mask(std::mt19937_64& rng, int w, int h) {
    BinaryImage m(w, h);
    std::uniform_real_distribution<double> pos(0.0, w), rad(2.0, 16.0), coin(0.0, 1.0);
    const int blobs = 1 + static_cast<int>(coin(rng) * 5);
    std::vector<std::array<double, 3>> disks;
    for (int b = 0; b < blobs; ++b) disks.push_back({pos(rng), pos(rng) * h / w, rad(rng)});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool on = false;
            for (const auto& d : disks) on |= (x - d[0]) * (x - d[0]) + (y - d[1]) * (y - d[1]) <= d[2] * d[2];
            if (coin(rng) < 0.02) on = !on;
            m.set(x, y, on);
        }
    return m;
}

/// Straight bar through the image center (w/2, h/2): a pixel is foreground
/// iff its center lies within width/2 of the bar's axis.
inline BinaryImage straight_bar(int w, int h, double width, double angle_deg) {
    BinaryImage m(w, h);
    const double a = angle_deg * 3.14159265358979323846 / 180.0;
    const double nx = -std::sin(a), ny = std::cos(a);
    const double cx = w / 2, cy = h / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, std::abs((x - cx) * nx + (y - cy) * ny) < width / 2.0);
    return m;
}

}  // namespace angiosim::oracle
