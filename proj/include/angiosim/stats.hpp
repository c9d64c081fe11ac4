#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "angiosim/image.hpp"
#include "angiosim/morphology.hpp"
#include "angiosim/phantom.hpp"
#include "angiosim/samples.hpp"

namespace angiosim {

/// Shared binning for the histogram divergence estimators. `epsilon` is the
/// probability mass added to every bin before renormalization.
struct HistogramSpec {
    double lo = 0.0;
    double hi = 64.0;
    double bin_width = 0.5;
    double epsilon = 1e-5;

    void validate() const;
    std::size_t bins() const;
};

/// Normalized histogram; out-of-range values are clamped into the end bins.
std::vector<double> histogram(const ThicknessSamples& samples, const HistogramSpec& spec);

/// Empirical KL(ref || cand) in nats over shared, smoothed bins.
double kl_divergence(const ThicknessSamples& ref, const ThicknessSamples& cand, const HistogramSpec& spec = {});

/// Empirical Jensen-Shannon divergence in nats, in [0, ln 2].
double js_divergence(const ThicknessSamples& ref, const ThicknessSamples& cand, const HistogramSpec& spec = {});

/// Divergences between already-binned distributions of equal length.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double js_divergence(std::span<const double> p, std::span<const double> q);

/// Alternate estimator: k-nearest-neighbor KL(ref || cand) for continuous 1-D
/// samples (Wang, Kulkarni and Verdu). Can return small negative values and
/// requires distinct sample values; ties at the k-th neighbor throw.
double knn_kl_divergence(const ThicknessSamples& ref, const ThicknessSamples& cand, int k = 1);

struct GaussianFeatureStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    std::size_t n = 0;
    std::string feature_name;

    Eigen::Index dim() const { return mean.size(); }
};

/// Block-mean pooling with square blocks of `block` pixels, scaled to [0, 1].
struct DownsampledPixels {
    int block = 32;
};

/// The morphology thickness estimate as a one-dimensional feature.
struct ThicknessScalar {
    double threshold = kDefaultThreshold;
    double search_radius = kDefaultSearchRadius;
};

using FeatureExtractor = std::variant<DownsampledPixels, ThicknessScalar>;

std::string feature_name(const FeatureExtractor& extractor);
Eigen::VectorXd extract_features(const GrayImage& image, const FeatureExtractor& extractor);

/// Sample mean and unbiased covariance of row feature vectors (n >= 2).
GaussianFeatureStats fit_gaussian(std::span<const Eigen::VectorXd> features, std::string feature_name = {});

GaussianFeatureStats fit_gaussian_features(std::span<const GrayImage> images, const FeatureExtractor& extractor);
GaussianFeatureStats fit_gaussian_features(const std::filesystem::path& dir, const FeatureExtractor& extractor,
                                           unsigned threads = 1);

/// Squared Frechet distance between Gaussians:
/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), clamped at 0.
double frechet_distance(const GaussianFeatureStats& a, const GaussianFeatureStats& b);

enum class Metric { Kl, Js, Frechet };

/// "kl", "js", "ffd" (alias "frechet").
Metric parse_metric(std::string_view name);
std::string metric_name(Metric metric);

struct PopulationOptions {
    HistogramSpec histogram{};
    double search_radius = kDefaultSearchRadius;
    FeatureExtractor extractor = DownsampledPixels{};
    unsigned threads = 1;
};

/// Thickness estimates and (optionally) feature vectors of n rendered images
/// with seeds derive_seed(master_seed, i), computed in memory.
struct Population {
    ThicknessSamples thickness;
    std::vector<bool> has_aneurysm;
    std::vector<Eigen::VectorXd> features;
    std::size_t invalid = 0;
};

Population simulate_population(const SimConfig& config, std::size_t n, std::uint64_t master_seed,
                               const PopulationOptions& options, bool with_features);

/// Metric between two populations.
double population_metric(const Population& ref, const Population& cand, Metric metric,
                         const PopulationOptions& options);

struct NoiseFloor {
    Metric metric = Metric::Kl;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> values;
    std::size_t n = 0;
    std::size_t replicates = 0;
};

/// For each replicate, compares two independent n-image sets from `config`
/// and records the metric; returns the mean and sample std across replicates
/// (std = 0 for a single replicate).
NoiseFloor noise_floor(const SimConfig& config, std::size_t n, std::size_t replicates, Metric metric,
                       std::uint64_t master_seed, const PopulationOptions& options = {});

/// noise_floor() for several metrics evaluated on the same replicate pairs.
std::vector<NoiseFloor> noise_floors(const SimConfig& config, std::size_t n, std::size_t replicates,
                                     std::span<const Metric> metrics, std::uint64_t master_seed,
                                     const PopulationOptions& options = {});
/// Mean and sample standard deviation (0 when fewer than two values).
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace angiosim
