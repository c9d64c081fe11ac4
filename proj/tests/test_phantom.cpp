#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "angiosim/errors.hpp"
#include "angiosim/phantom.hpp"

namespace angiosim {
namespace {

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> s;
    for (double v = lo; v <= hi + 1e-12; v += step) s.push_back(v);
    return s;
}

TEST(Preset, Values) {
    const SimConfig s33 = preset("sim33");
    EXPECT_EQ(s33.t0, 33.0);
    EXPECT_EQ(s33.nominal_thickness, 20.0);
    EXPECT_EQ(s33.aneurysm_prevalence, 0.5);
    EXPECT_EQ(preset("sim23").t0, 23.0);
    const SimConfig s27 = preset("sim27");
    EXPECT_EQ(s27.t0, 27.0);
    EXPECT_EQ(s27.image_width, 256);
    EXPECT_EQ(s27.image_height, 256);
    EXPECT_THROW(preset("sim30"), ValidationError);
}

TEST(SimConfig, Validation) {
    SimConfig c;
    EXPECT_NO_THROW(c.validate());
    c.t0 = 20.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = SimConfig{};
    c.aneurysm_prevalence = 1.5;
    EXPECT_THROW(c.validate(), ValidationError);
    c = SimConfig{};
    c.image_width = 32;
    EXPECT_THROW(c.validate(), ValidationError);
    c = SimConfig{};
    c.taper_width = 0.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = SimConfig{};
    c.sigma_an = -1.0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(SimConfig, TextRoundTrip) {
    SimConfig c = preset("sim23");
    c.sigma_an = 0.1 + 0.2;  // not exactly representable in short decimal
    c.process.tau_range = {-0.0123456789, 0.03};
    c.image_width = 128;
    const SimConfig back = SimConfig::parse(c.to_text());
    EXPECT_EQ(back.to_text(), c.to_text());
    EXPECT_EQ(back.sigma_an, c.sigma_an);
    EXPECT_EQ(back.digest(), c.digest());
    EXPECT_NE(preset("sim23").digest(), preset("sim27").digest());
}

TEST(SimConfig, ParsePartialAndComments) {
    const SimConfig c = SimConfig::parse("# comment\n t0 = 31  # trailing\n\nedge_noise_sigma=0\n");
    EXPECT_EQ(c.t0, 31.0);
    EXPECT_EQ(c.edge_noise_sigma, 0.0);
    EXPECT_EQ(c.nominal_thickness, 20.0);
    EXPECT_THROW(SimConfig::parse("bogus = 1\n"), ValidationError);
    EXPECT_THROW(SimConfig::parse("t0 = abc\n"), ValidationError);
    EXPECT_THROW(SimConfig::parse("t0 31\n"), ValidationError);
    EXPECT_THROW(SimConfig::parse("t0 = 10\n"), ValidationError);  // t0 below nominal
}

TEST(Perturbation, ParseAndApply) {
    const Perturbation p = Perturbation::parse("t0=-6,prevalence=+0.1,edge_noise=0.25");
    EXPECT_EQ(p.t0, -6.0);
    EXPECT_EQ(p.prevalence, 0.1);
    EXPECT_EQ(p.edge_noise, 0.25);
    const SimConfig c = perturb(preset("sim33"), Perturbation::parse("t0=-6"));
    EXPECT_EQ(c.t0, 27.0);
    EXPECT_THROW(Perturbation::parse("width=3"), ValidationError);
    EXPECT_THROW(perturb(preset("sim23"), Perturbation::parse("t0=-4")), ValidationError);
}

TEST(DrawLabel, DegenerateCases) {
    SimConfig c = preset("sim33");
    c.aneurysm_prevalence = 0.0;
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const PhantomLabel l = draw_label(c, rng);
        ASSERT_FALSE(l.has_aneurysm);
        ASSERT_EQ(l.thickness, 20.0);
    }
    c.aneurysm_prevalence = 1.0;
    c.sigma_an = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const PhantomLabel l = draw_label(c, rng);
        ASSERT_TRUE(l.has_aneurysm);
        ASSERT_EQ(l.thickness, 33.0);
    }
}

TEST(DrawLabel, PrevalenceAndBimodality) {
    const SimConfig c = preset("sim27");
    Rng rng(42);
    int aneurysms = 0, near_t0 = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const PhantomLabel l = draw_label(c, rng);
        ASSERT_GT(l.thickness, 0.0);
        if (!l.has_aneurysm) {
            ASSERT_EQ(l.thickness, c.nominal_thickness);
        } else {
            ++aneurysms;
            ASSERT_GE(l.thickness, c.nominal_thickness);
        }
        if (std::abs(l.thickness - c.t0) <= 3.0 * c.sigma_an) ++near_t0;
    }
    EXPECT_GE(aneurysms / double(n), 0.47);
    EXPECT_LE(aneurysms / double(n), 0.53);
    EXPECT_NEAR(near_t0 / double(n), 0.5, 0.03);
}

TEST(DrawLabel, TruncatedBelowNominal) {
    SimConfig c = preset("sim23");
    c.aneurysm_prevalence = 1.0;
    c.sigma_an = 4.0;  // heavy mass below 20 before truncation
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) ASSERT_GE(draw_label(c, rng).thickness, 20.0);
}

TEST(ThicknessProfile, FlatWithoutAneurysmOrNoise) {
    SimConfig c = preset("sim33");
    c.edge_noise_sigma = 0.0;
    const PhantomLabel label{false, 20.0, 0};
    Rng rng(1);
    const auto s = grid(0, 600, 1);
    for (double t : thickness_profile(label, c, s, 300.0, rng)) ASSERT_EQ(t, 20.0);
}

TEST(ThicknessProfile, GaussianTaper) {
    SimConfig c = preset("sim33");
    c.edge_noise_sigma = 0.0;
    const PhantomLabel label{true, 33.0, 0};
    Rng rng(1);
    const auto s = grid(0, 600, 0.5);
    const auto t = thickness_profile(label, c, s, 300.0, rng);
    const double w = c.taper_width;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = std::abs(s[i] - 300.0);
        const double expected = 20.0 + 13.0 * std::exp(-d * d / (2 * w * w));
        ASSERT_NEAR(t[i], expected, 1e-12);
        if (d == 0.0) ASSERT_EQ(t[i], 33.0);
        if (d == w) ASSERT_LE(t[i], 20.0 + 13.0 * std::exp(-0.5) + 1e-12);
        if (d >= 5 * w) ASSERT_LT(t[i] - 20.0, 0.1);
    }
    // Symmetric and non-increasing away from the anchor.
    const std::size_t mid = 600;
    for (std::size_t k = 1; k <= mid; ++k) {
        ASSERT_EQ(t[mid + k], t[mid - k]);
        ASSERT_LE(t[mid + k], t[mid + k - 1]);
    }
}

TEST(ThicknessProfile, EdgeNoiseStd) {
    SimConfig c = preset("sim27");
    c.edge_noise_sigma = 0.5;
    const PhantomLabel label{false, 20.0, 0};
    Rng rng(9);
    const auto s = grid(0, 9999, 1);
    const auto t = thickness_profile(label, c, s, 5000.0, rng);
    double sum = 0, sq = 0;
    for (double v : t) {
        sum += v - 20.0;
        sq += (v - 20.0) * (v - 20.0);
    }
    const double n = double(t.size());
    const double sd = std::sqrt((sq - sum * sum / n) / (n - 1));
    EXPECT_GE(sd, 0.45);
    EXPECT_LE(sd, 0.55);
}

TEST(ThicknessProfile, FloorHolds) {
    SimConfig c = preset("sim23");
    c.edge_noise_sigma = 15.0;
    const PhantomLabel label{false, 20.0, 0};
    Rng rng(2);
    const auto s = grid(0, 2000, 1);
    for (double t : thickness_profile(label, c, s, 1000.0, rng)) ASSERT_GE(t, c.thickness_floor);
}

TEST(ThicknessProfile, Errors) {
    const SimConfig c;
    const PhantomLabel label{false, 20.0, 0};
    Rng rng(1);
    EXPECT_THROW(thickness_profile(label, c, {}, 0.0, rng), ValidationError);
    const std::vector<double> s{0, 1, 2};
    EXPECT_THROW(thickness_profile(label, c, s, 5.0, rng), ValidationError);
    const std::vector<double> unsorted{0, 2, 1};
    EXPECT_THROW(thickness_profile(label, c, unsorted, 1.0, rng), ValidationError);
}

}  // namespace
}  // namespace angiosim
