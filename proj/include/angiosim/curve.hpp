#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "angiosim/random.hpp"

namespace angiosim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    /// NaN passes through unchanged so callers can detect it.
    double clip(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

/// Position plus Frenet-Serret frame (tangent, normal, binormal).
struct FrenetState {
    Vec3 position = Vec3::Zero();
    Vec3 tangent = Vec3::UnitX();
    Vec3 normal = Vec3::UnitY();
    Vec3 binormal = Vec3::UnitZ();

    /// Largest deviation of the frame Gram matrix from the identity, and of
    /// B from T x N.
    double orthonormality_error() const;
};

/// Parameters of the piecewise-constant curvature/torsion process. Values are
/// drawn uniformly from the *_draw intervals once per segment and then clipped
/// to the *_range intervals.
struct CurvatureTorsionConfig {
    Interval kappa_draw{0.0, 0.005};
    Interval tau_draw{-0.05, 0.05};
    Interval kappa_range{0.0, 0.005};
    Interval tau_range{-0.05, 0.05};
    double segment_length = 20.0;

    void validate() const;
};

struct KappaTau {
    double kappa = 0.0;
    double tau = 0.0;
};

class CurvatureTorsionProcess {
public:
    CurvatureTorsionProcess(CurvatureTorsionConfig config, Rng rng);

    /// Deterministic process with fixed curvature and torsion.
    static CurvatureTorsionProcess constant(double kappa, double tau);

    /// Value on the segment containing arc length s. Segments are generated
    /// lazily and in order, so the realization does not depend on the query
    /// pattern.
    KappaTau at(double s);

    const CurvatureTorsionConfig& config() const { return config_; }

private:
    CurvatureTorsionConfig config_;
    Rng rng_;
    std::vector<KappaTau> segments_;
};

struct CurveSample {
    double arc_length = 0.0;
    Vec3 position = Vec3::Zero();
    /// NaN until a thickness profile is attached.
    double thickness = std::numeric_limits<double>::quiet_NaN();
};

/// Arc-length sampled space curve.
struct VesselCurve {
    std::vector<CurveSample> samples;
    std::size_t center_index = 0;
    double step = 0.0;
    double total_length = 0.0;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    const Vec3& anchor() const { return samples.at(center_index).position; }
};

/// One RK4 step of the Frenet-Serret system with constant (kappa, tau),
/// followed by Gram-Schmidt re-orthonormalization of the frame.
FrenetState frenet_step(const FrenetState& state, double kappa, double tau, double h);

/// RK4 integration of r' = T, T' = kN, N' = -kT + tB, B' = -tN with
/// Gram-Schmidt re-orthonormalization after every step. Returns
/// floor(total_length / step) + 1 samples at arc lengths i * step.
VesselCurve integrate_frenet_serret(CurvatureTorsionProcess& process, double total_length, double step,
                                    const FrenetState& initial = {});

/// Rigid translation placing the sample nearest `anchor_arc_length` at `target`.
VesselCurve recenter_curve(const VesselCurve& curve, double anchor_arc_length, const Vec3& target);

/// Haar-uniform random rotation (via a normalized Gaussian quaternion).
Mat3 random_rotation_matrix(Rng& rng);

/// Rotates the curve about its anchor sample by a uniformly random rotation.
VesselCurve random_rotation(const VesselCurve& curve, Rng& rng);

/// Applies the given rotation about the anchor sample.
VesselCurve rotate_about_anchor(const VesselCurve& curve, const Mat3& rotation);

}  // namespace angiosim
