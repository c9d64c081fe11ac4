#include "angiosim/curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <fmt/core.h>

#include "angiosim/errors.hpp"

namespace angiosim {

namespace {

constexpr double kFrameTolerance = 1e-9;

struct FrameDerivative {
    Vec3 dr, dT, dN, dB;
};

FrameDerivative derivative(const FrenetState& s, double kappa, double tau) {
    return {s.tangent, kappa * s.normal, -kappa * s.tangent + tau * s.binormal, -tau * s.normal};
}

FrenetState advance(const FrenetState& s, const FrameDerivative& d, double h) {
    return {s.position + h * d.dr, s.tangent + h * d.dT, s.normal + h * d.dN, s.binormal + h * d.dB};
}

void reorthonormalize(FrenetState& s) {
    s.tangent.normalize();
    s.normal -= s.normal.dot(s.tangent) * s.tangent;
    s.normal.normalize();
    s.binormal = s.tangent.cross(s.normal);
}

}  // namespace

FrenetState frenet_step(const FrenetState& s, double kappa, double tau, double h) {
    const FrameDerivative k1 = derivative(s, kappa, tau);
    const FrameDerivative k2 = derivative(advance(s, k1, h / 2), kappa, tau);
    const FrameDerivative k3 = derivative(advance(s, k2, h / 2), kappa, tau);
    const FrameDerivative k4 = derivative(advance(s, k3, h), kappa, tau);
    const double w = h / 6.0;
    FrenetState out;
    out.position = s.position + w * (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr);
    out.tangent = s.tangent + w * (k1.dT + 2 * k2.dT + 2 * k3.dT + k4.dT);
    out.normal = s.normal + w * (k1.dN + 2 * k2.dN + 2 * k3.dN + k4.dN);
    out.binormal = s.binormal + w * (k1.dB + 2 * k2.dB + 2 * k3.dB + k4.dB);
    reorthonormalize(out);
    return out;
}

namespace {

bool is_finite(const Vec3& v) { return v.allFinite(); }

void check_interval(const Interval& iv, const char* name) {
    if (!(std::isfinite(iv.lo) && std::isfinite(iv.hi)) || iv.lo > iv.hi)
        throw ValidationError(fmt::format("{}: invalid interval [{}, {}]", name, iv.lo, iv.hi));
}

}  // namespace

double FrenetState::orthonormality_error() const {
    Mat3 frame;
    frame << tangent, normal, binormal;
    const double gram = (frame.transpose() * frame - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double handed = (tangent.cross(normal) - binormal).cwiseAbs().maxCoeff();
    return std::max(gram, handed);
}

void CurvatureTorsionConfig::validate() const {
    check_interval(kappa_draw, "kappa_draw");
    check_interval(tau_draw, "tau_draw");
    check_interval(kappa_range, "kappa_range");
    check_interval(tau_range, "tau_range");
    if (kappa_range.lo < 0.0) throw ValidationError("kappa_range must be non-negative");
    if (!(segment_length > 0.0) || !std::isfinite(segment_length))
        throw ValidationError("segment_length must be positive");
}

CurvatureTorsionProcess::CurvatureTorsionProcess(CurvatureTorsionConfig config, Rng rng)
    : config_(config), rng_(std::move(rng)) {
    if (!(config_.segment_length > 0.0)) throw ValidationError("segment_length must be positive");
}

CurvatureTorsionProcess CurvatureTorsionProcess::constant(double kappa, double tau) {
    CurvatureTorsionConfig c;
    c.kappa_draw = c.kappa_range = {kappa, kappa};
    c.tau_draw = c.tau_range = {tau, tau};
    c.segment_length = std::numeric_limits<double>::max();
    return CurvatureTorsionProcess(c, Rng(0));
}

KappaTau CurvatureTorsionProcess::at(double s) {
    const double seg = std::floor(std::max(0.0, s) / config_.segment_length);
    const auto index = static_cast<std::size_t>(seg);
    while (segments_.size() <= index) {
        const double k = uniform(rng_, config_.kappa_draw.lo, config_.kappa_draw.hi);
        const double t = uniform(rng_, config_.tau_draw.lo, config_.tau_draw.hi);
        segments_.push_back({config_.kappa_range.clip(k), config_.tau_range.clip(t)});
    }
    return segments_[index];
}

VesselCurve integrate_frenet_serret(CurvatureTorsionProcess& process, double total_length, double step,
                                    const FrenetState& initial) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("integration step must be positive");
    if (!(total_length >= 2.0 * step) || !std::isfinite(total_length))
        throw ValidationError("total_length must be at least two steps");
    if (!is_finite(initial.position) || initial.orthonormality_error() > kFrameTolerance)
        throw ValidationError(
            fmt::format("initial frame is not orthonormal (error {:.3g})", initial.orthonormality_error()));

    // Tolerate representation error when total_length is an exact multiple of step.
    const auto intervals = static_cast<std::size_t>(std::floor(total_length / step * (1.0 + 1e-12)));

    VesselCurve curve;
    curve.step = step;
    curve.total_length = static_cast<double>(intervals) * step;
    curve.samples.reserve(intervals + 1);
    curve.samples.push_back({0.0, initial.position});

    FrenetState state = initial;
    for (std::size_t i = 0; i < intervals; ++i) {
        const double s0 = static_cast<double>(i) * step;
        const KappaTau kt = process.at(s0 + step / 2);
        if (!std::isfinite(kt.kappa) || !std::isfinite(kt.tau))
            throw ValidationError(fmt::format("non-finite curvature/torsion at s = {}", s0));
        state = frenet_step(state, kt.kappa, kt.tau, step);
        curve.samples.push_back({static_cast<double>(i + 1) * step, state.position});
    }
    return curve;
}

VesselCurve recenter_curve(const VesselCurve& curve, double anchor_arc_length, const Vec3& target) {
    if (curve.empty()) throw ValidationError("recenter_curve: empty curve");
    const double total = curve.samples.back().arc_length;
    if (!(anchor_arc_length >= 0.0 && anchor_arc_length <= total))
        throw ValidationError(fmt::format("anchor arc length {} outside [0, {}]", anchor_arc_length, total));

    const auto nearest = std::min_element(curve.samples.begin(), curve.samples.end(),
                                          [&](const CurveSample& a, const CurveSample& b) {
                                              return std::abs(a.arc_length - anchor_arc_length) <
                                                     std::abs(b.arc_length - anchor_arc_length);
                                          });
    VesselCurve out = curve;
    out.center_index = static_cast<std::size_t>(nearest - curve.samples.begin());
    const Vec3 shift = target - nearest->position;
    for (auto& s : out.samples) s.position += shift;
    // Exact placement of the anchor regardless of rounding in the shift.
    out.samples[out.center_index].position = target;
    return out;
}

Mat3 random_rotation_matrix(Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q;
    double norm = 0.0;
    do {
        q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        norm = q.norm();
    } while (norm < 1e-12);
    q.coeffs() /= norm;
    return q.toRotationMatrix();
}

VesselCurve rotate_about_anchor(const VesselCurve& curve, const Mat3& rotation) {
    if (curve.empty()) throw ValidationError("rotate_about_anchor: empty curve");
    VesselCurve out = curve;
    const Vec3 center = curve.anchor();
    for (auto& s : out.samples) s.position = center + rotation * (s.position - center);
    out.samples[out.center_index].position = center;
    return out;
}

VesselCurve random_rotation(const VesselCurve& curve, Rng& rng) {
    if (curve.empty()) throw ValidationError("random_rotation: empty curve");
    return rotate_about_anchor(curve, random_rotation_matrix(rng));
}

}  // namespace angiosim
