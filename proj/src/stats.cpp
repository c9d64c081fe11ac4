#include "angiosim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "angiosim/errors.hpp"
#include "angiosim/image_io.hpp"
#include "angiosim/parallel.hpp"
#include "angiosim/random.hpp"
#include "angiosim/raster.hpp"

namespace angiosim {

namespace {

void require_samples(const ThicknessSamples& s, const char* what) {
    if (s.empty()) throw ValidationError(fmt::format("{}: empty sample set", what));
}

// Eigenvalues of a symmetric matrix, with failure reported as NumericalError.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_symmetric(const Eigen::MatrixXd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw NumericalError(fmt::format("eigendecomposition of {} ({}x{}) did not converge", what, m.rows(), m.cols()));
    return solver;
}

double psd_tolerance(const Eigen::MatrixXd& m) {
    return 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

void validate_covariance(const GaussianFeatureStats& g, const char* which) {
    const Eigen::MatrixXd& c = g.covariance;
    if (c.rows() != g.dim() || c.cols() != g.dim())
        throw ValidationError(fmt::format("{}: covariance shape does not match mean dimension", which));
    if (!c.allFinite() || !g.mean.allFinite()) throw ValidationError(fmt::format("{}: non-finite statistics", which));
    const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff()))
        throw ValidationError(fmt::format("{}: covariance not symmetric (max asymmetry {:.3g})", which, asym));
    if (g.dim() == 0) return;
    const double min_eig = eigen_symmetric(c, which).eigenvalues().minCoeff();
    if (min_eig < -psd_tolerance(c))
        throw ValidationError(fmt::format("{}: covariance not positive semidefinite (min eigenvalue {:.3g})", which,
                                          min_eig));
}

}  // namespace

void HistogramSpec::validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo)) throw ValidationError("histogram: need hi > lo");
    if (!(bin_width > 0.0)) throw ValidationError("histogram: bin_width must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("histogram: epsilon must be positive");
    const double ratio = (hi - lo) / bin_width;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError(fmt::format("histogram: (hi - lo) / bin_width = {} is not an integer", ratio));
}

std::size_t HistogramSpec::bins() const { return static_cast<std::size_t>(std::llround((hi - lo) / bin_width)); }

std::vector<double> histogram(const ThicknessSamples& samples, const HistogramSpec& spec) {
    spec.validate();
    require_samples(samples, "histogram");
    const std::size_t nb = spec.bins();
    std::vector<double> counts(nb, 0.0);
    for (double v : samples.values) {
        const double pos = std::floor((v - spec.lo) / spec.bin_width);
        const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(nb - 1)));
        counts[b] += 1.0;
    }
    const double n = static_cast<double>(samples.count());
    for (double& c : counts) c = c / n + spec.epsilon;
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (double& c : counts) c /= total;
    return counts;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) throw ValidationError("kl_divergence: mismatched or empty histograms");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) sum += p[i] * std::log(p[i] / q[i]);
    return std::max(0.0, sum);
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) throw ValidationError("js_divergence: mismatched or empty histograms");
    // Term-wise symmetric form so js(p, q) == js(q, p) bit for bit.
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        double term_p = p[i] > 0.0 ? p[i] * std::log(p[i] / m) : 0.0;
        double term_q = q[i] > 0.0 ? q[i] * std::log(q[i] / m) : 0.0;
        if (term_q < term_p) std::swap(term_p, term_q);
        sum += 0.5 * (term_p + term_q);
    }
    return std::clamp(sum, 0.0, std::log(2.0));
}

double kl_divergence(const ThicknessSamples& ref, const ThicknessSamples& cand, const HistogramSpec& spec) {
    require_samples(ref, "kl_divergence(ref)");
    require_samples(cand, "kl_divergence(cand)");
    return kl_divergence(histogram(ref, spec), histogram(cand, spec));
}

double js_divergence(const ThicknessSamples& ref, const ThicknessSamples& cand, const HistogramSpec& spec) {
    require_samples(ref, "js_divergence(ref)");
    require_samples(cand, "js_divergence(cand)");
    return js_divergence(histogram(ref, spec), histogram(cand, spec));
}

double knn_kl_divergence(const ThicknessSamples& ref, const ThicknessSamples& cand, int k) {
    if (k < 1) throw ValidationError("knn_kl_divergence: k must be >= 1");
    const std::size_t n = ref.count();
    const std::size_t m = cand.count();
    if (n < static_cast<std::size_t>(k) + 1 || m < static_cast<std::size_t>(k))
        throw ValidationError("knn_kl_divergence: not enough samples for the requested k");

    std::vector<double> p(ref.values), q(cand.values);
    std::sort(p.begin(), p.end());
    std::sort(q.begin(), q.end());

    // k-th smallest |x - y| over sorted `pool`, optionally skipping one copy of x.
    auto kth_distance = [k](const std::vector<double>& pool, double x, bool exclude_self) {
        auto right = std::lower_bound(pool.begin(), pool.end(), x);
        auto left = right;
        if (exclude_self) ++right;  // *right == x is the point itself
        double d = 0.0;
        for (int found = 0; found < k; ++found) {
            const bool has_left = left != pool.begin();
            const bool has_right = right != pool.end();
            const double dl = has_left ? x - *(left - 1) : INFINITY;
            const double dr = has_right ? *right - x : INFINITY;
            if (dl <= dr) {
                d = dl;
                --left;
            } else {
                d = dr;
                ++right;
            }
        }
        return d;
    };

    double sum = 0.0;
    for (double x : p) {
        const double rho = kth_distance(p, x, true);
        const double nu = kth_distance(q, x, false);
        if (!(rho > 0.0) || !(nu > 0.0))
            throw ValidationError("knn_kl_divergence: tied samples; the k-NN estimator needs continuous data");
        sum += std::log(nu / rho);
    }
    return sum / static_cast<double>(n) + std::log(static_cast<double>(m) / static_cast<double>(n - 1));
}

std::string feature_name(const FeatureExtractor& extractor) {
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, DownsampledPixels>) {
                return fmt::format("downsampled_pixels({})", e.block);
            } else {
                return "thickness_scalar";
            }
        },
        extractor);
}

Eigen::VectorXd extract_features(const GrayImage& image, const FeatureExtractor& extractor) {
    if (const auto* pool = std::get_if<DownsampledPixels>(&extractor)) {
        const int k = pool->block;
        if (k <= 0 || image.width % k != 0 || image.height % k != 0)
            throw ValidationError(
                fmt::format("downsampled_pixels({}): block must divide the {}x{} image", k, image.width, image.height));
        const int bw = image.width / k;
        const int bh = image.height / k;
        Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bw) * bh);
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x) f[(y / k) * bw + x / k] += image.at(x, y);
        f /= 255.0 * k * k;
        return f;
    }
    const auto& scalar = std::get<ThicknessScalar>(extractor);
    Eigen::VectorXd f(1);
    f[0] = estimate_center_thickness(binarize(image, scalar.threshold), scalar.search_radius).thickness;
    return f;
}

GaussianFeatureStats fit_gaussian(std::span<const Eigen::VectorXd> features, std::string name) {
    if (features.size() < 2) throw ValidationError("fit_gaussian: need at least two feature vectors");
    const Eigen::Index d = features.front().size();
    GaussianFeatureStats g;
    g.n = features.size();
    g.feature_name = std::move(name);
    g.mean = Eigen::VectorXd::Zero(d);
    for (const auto& f : features) {
        if (f.size() != d) throw ValidationError("fit_gaussian: inconsistent feature dimensions");
        g.mean += f;
    }
    g.mean /= static_cast<double>(g.n);
    g.covariance = Eigen::MatrixXd::Zero(d, d);
    for (const auto& f : features) {
        const Eigen::VectorXd c = f - g.mean;
        g.covariance.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    g.covariance = g.covariance.selfadjointView<Eigen::Lower>();
    g.covariance /= static_cast<double>(g.n - 1);
    return g;
}

GaussianFeatureStats fit_gaussian_features(std::span<const GrayImage> images, const FeatureExtractor& extractor) {
    if (images.size() < 2) throw ValidationError("fit_gaussian_features: need at least two images");
    std::vector<Eigen::VectorXd> features;
    features.reserve(images.size());
    for (const auto& img : images) features.push_back(extract_features(img, extractor));
    return fit_gaussian(features, feature_name(extractor));
}

GaussianFeatureStats fit_gaussian_features(const std::filesystem::path& dir, const FeatureExtractor& extractor,
                                           unsigned threads) {
    const auto files = list_images(dir);
    if (files.size() < 2) throw ValidationError("fit_gaussian_features: need at least two images in " + dir.string());
    std::vector<Eigen::VectorXd> features(files.size());
    parallel_for(files.size(), threads,
                 [&](std::size_t i) { features[i] = extract_features(decode_image(files[i]), extractor); });
    return fit_gaussian(features, feature_name(extractor));
}

double frechet_distance(const GaussianFeatureStats& a, const GaussianFeatureStats& b) {
    if (a.dim() != b.dim())
        throw ValidationError(fmt::format("frechet_distance: dimension mismatch ({} vs {})", a.dim(), b.dim()));
    validate_covariance(a, "frechet_distance(a)");
    validate_covariance(b, "frechet_distance(b)");
    if (a.dim() == 0) return 0.0;

    // Tr((S_a S_b)^{1/2}) = Tr((S_a^{1/2} S_b S_a^{1/2})^{1/2}); the inner
    // product is symmetric PSD, so both roots come from symmetric eigensolves.
    const auto ea = eigen_symmetric(a.covariance, "covariance a");
    const Eigen::VectorXd root_vals = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root_a = ea.eigenvectors() * root_vals.asDiagonal() * ea.eigenvectors().transpose();
    Eigen::MatrixXd inner = root_a * b.covariance * root_a;
    inner = 0.5 * (inner + inner.transpose()).eval();

    const auto ei = eigen_symmetric(inner, "sqrt(S_a) S_b sqrt(S_a)");
    const double min_eig = ei.eigenvalues().minCoeff();
    if (min_eig < -psd_tolerance(inner))
        throw NumericalError(fmt::format(
            "frechet_distance: matrix square root failed, product has eigenvalue {:.6g} (tolerance {:.3g}, dim {})",
            min_eig, psd_tolerance(inner), inner.rows()));
    const double trace_root = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    const double mean_term = (a.mean - b.mean).squaredNorm();
    const double value = mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_root;
    return std::max(0.0, value);
}

Metric parse_metric(std::string_view name) {
    if (name == "kl") return Metric::Kl;
    if (name == "js") return Metric::Js;
    if (name == "ffd" || name == "frechet") return Metric::Frechet;
    throw ValidationError(fmt::format("unknown metric '{}' (expected kl, js or ffd)", name));
}

std::string metric_name(Metric metric) {
    switch (metric) {
        case Metric::Kl: return "kl";
        case Metric::Js: return "js";
        case Metric::Frechet: return "ffd";
    }
    return "?";
}

Population simulate_population(const SimConfig& config, std::size_t n, std::uint64_t master_seed,
                               const PopulationOptions& options, bool with_features) {
    config.validate();
    const std::string digest = config.digest();
    struct Item {
        ThicknessEstimate estimate;
        bool aneurysm = false;
        Eigen::VectorXd features;
    };
    std::vector<Item> items(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        const Angiogram a = render(config, derive_seed(master_seed, i), digest);
        items[i].aneurysm = a.label.has_aneurysm;
        items[i].estimate = estimate_center_thickness(binarize(a.image, config.threshold), options.search_radius);
        if (with_features) items[i].features = extract_features(a.image, options.extractor);
    });

    Population pop;
    pop.thickness.source_tag = fmt::format("sim:{}:{}", digest.substr(0, 12), master_seed);
    for (auto& item : items) {
        if (!item.estimate.valid) {
            ++pop.invalid;
            continue;
        }
        pop.thickness.values.push_back(item.estimate.thickness);
        pop.has_aneurysm.push_back(item.aneurysm);
        if (with_features) pop.features.push_back(std::move(item.features));
    }
    return pop;
}

double population_metric(const Population& ref, const Population& cand, Metric metric,
                         const PopulationOptions& options) {
    switch (metric) {
        case Metric::Kl: return kl_divergence(ref.thickness, cand.thickness, options.histogram);
        case Metric::Js: return js_divergence(ref.thickness, cand.thickness, options.histogram);
        case Metric::Frechet: {
            const std::string name = feature_name(options.extractor);
            return frechet_distance(fit_gaussian(ref.features, name), fit_gaussian(cand.features, name));
        }
    }
    return 0.0;
}

std::vector<NoiseFloor> noise_floors(const SimConfig& config, std::size_t n, std::size_t replicates,
                                     std::span<const Metric> metrics, std::uint64_t master_seed,
                                     const PopulationOptions& options) {
    if (n < 100) throw ValidationError("noise_floor: n must be >= 100");
    if (replicates < 1) throw ValidationError("noise_floor: replicates must be >= 1");
    if (metrics.empty()) throw ValidationError("noise_floor: no metrics requested");
    options.histogram.validate();

    std::vector<NoiseFloor> out(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        out[m].metric = metrics[m];
        out[m].n = n;
        out[m].replicates = replicates;
    }
    const bool features = std::find(metrics.begin(), metrics.end(), Metric::Frechet) != metrics.end();
    for (std::size_t r = 0; r < replicates; ++r) {
        const Population a = simulate_population(config, n, derive_seed(master_seed, 2 * r), options, features);
        const Population b = simulate_population(config, n, derive_seed(master_seed, 2 * r + 1), options, features);
        for (std::size_t m = 0; m < metrics.size(); ++m)
            out[m].values.push_back(population_metric(a, b, metrics[m], options));
    }
    for (auto& f : out) std::tie(f.mean, f.std) = mean_std(f.values);
    return out;
}

NoiseFloor noise_floor(const SimConfig& config, std::size_t n, std::size_t replicates, Metric metric,
                       std::uint64_t master_seed, const PopulationOptions& options) {
    const Metric metrics[] = {metric};
    return noise_floors(config, n, replicates, metrics, master_seed, options).front();
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace angiosim
