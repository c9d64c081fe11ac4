#include "angiosim/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "angiosim/dataset.hpp"
#include "angiosim/errors.hpp"
#include "angiosim/morphology.hpp"
#include "angiosim/parallel.hpp"
#include "angiosim/phantom.hpp"
#include "angiosim/report.hpp"
#include "angiosim/stats.hpp"

namespace angiosim::cli {

namespace fs = std::filesystem;

namespace {

/// Flag combinations that parse but make no sense; mapped to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelFlags {
    std::string preset;
    std::string config_path;

    void add_to(CLI::App& cmd) {
        auto* p = cmd.add_option("--preset", preset, "Built-in model: sim23, sim27 or sim33");
        auto* c = cmd.add_option("--config", config_path, "Key-value SimConfig file");
        p->excludes(c);
        c->excludes(p);
    }

    SimConfig resolve() const {
        if (preset.empty() == config_path.empty()) throw UsageError("exactly one of --preset or --config is required");
        if (!preset.empty()) {
            try {
                return angiosim::preset(preset);
            } catch (const ValidationError& e) {
                throw UsageError(e.what());
            }
        }
        return SimConfig::load(config_path);
    }
};

struct HistogramFlags {
    HistogramSpec spec;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--hist-lo", spec.lo, "Histogram lower edge (px)")->capture_default_str();
        cmd.add_option("--hist-hi", spec.hi, "Histogram upper edge (px)")->capture_default_str();
        cmd.add_option("--bin-width", spec.bin_width, "Histogram bin width (px)")->capture_default_str();
        cmd.add_option("--epsilon", spec.epsilon, "Smoothing mass per bin")->capture_default_str();
    }

    HistogramSpec validated() const {
        try {
            spec.validate();
        } catch (const ValidationError& e) {
            throw UsageError(e.what());
        }
        return spec;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

fs::path sibling_csv(const fs::path& json_path) {
    fs::path p = json_path;
    p.replace_extension(".csv");
    return p;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    ModelFlags model;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string perturb;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    SimConfig config = a.model.resolve();
    if (!a.perturb.empty()) {
        try {
            config = perturb(config, Perturbation::parse(a.perturb));
        } catch (const ValidationError& e) {
            throw UsageError(e.what());
        }
    }
    if (a.count < 1) throw UsageError("--count must be >= 1");
    const DatasetManifest m = generate_batch(config, a.count, a.seed, a.out_dir, worker_count());
    out << fmt::format("generated {} images in {}\n", m.entries.size(), a.out_dir);
    out << fmt::format("aneurysm fraction: {:.4f}\n", m.aneurysm_fraction());
    out << fmt::format("config digest: {}\n", m.config_digest);
    return kOk;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string in_dir;
    std::string out_csv;
    double threshold = kDefaultThreshold;
    double search_radius = kDefaultSearchRadius;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
    if (!(a.threshold >= 0.0 && a.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
    if (!(a.search_radius > 0.0)) throw UsageError("--search-radius must be positive");
    const BatchEstimate batch = estimate_batch(a.in_dir, a.threshold, a.search_radius, worker_count());
    write_thickness_csv(a.out_csv, batch);
    for (const auto& e : batch.errors) err << fmt::format("warning: {}: {}\n", e.filename, e.message);
    const ThicknessSamples s = batch.samples();
    const auto [mean, sd] = mean_std(s.values);
    out << fmt::format("images: {}\n", batch.rows.size());
    out << fmt::format("invalid: {}\n", batch.invalid_count());
    out << fmt::format("unreadable: {}\n", batch.errors.size());
    out << fmt::format("thickness mean: {:.4f} px, std: {:.4f} px\n", mean, sd);
    return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string ref_dir;
    std::string cand_dir;
    std::string metrics = "kl,js";
    std::string out_json;
    std::string floor_from;
    std::string label;
    HistogramFlags histogram;
    double threshold = kDefaultThreshold;
    double search_radius = kDefaultSearchRadius;
    int feature_block = 32;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    std::vector<Metric> metrics;
    try {
        for (const auto& name : split_list(a.metrics)) metrics.push_back(parse_metric(name));
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    if (metrics.empty()) throw UsageError("--metrics must name at least one of kl, js, ffd");
    auto wants = [&](Metric m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
    const HistogramSpec spec = a.histogram.validated();
    if (a.feature_block <= 0) throw UsageError("--feature-block must be positive");

    std::optional<FloorSummary> floor;
    if (!a.floor_from.empty()) {
        floor = floor_summary_from_json(read_json(a.floor_from));
        if (!wants(floor->metric))
            throw UsageError(fmt::format("floor metric '{}' is not among --metrics", metric_name(floor->metric)));
    }

    const unsigned threads = worker_count();
    DivergenceReport report;
    report.run_label = a.label.empty() ? fs::path(a.cand_dir).lexically_normal().filename().string() : a.label;
    if (report.run_label.empty()) report.run_label = fs::path(a.cand_dir).lexically_normal().parent_path().filename();
    report.histogram = spec;

    if (wants(Metric::Kl) || wants(Metric::Js)) {
        const BatchEstimate ref = estimate_batch(a.ref_dir, a.threshold, a.search_radius, threads);
        const BatchEstimate cand = estimate_batch(a.cand_dir, a.threshold, a.search_radius, threads);
        const ThicknessSamples rs = ref.samples(a.ref_dir);
        const ThicknessSamples cs = cand.samples(a.cand_dir);
        if (rs.empty() || cs.empty()) throw ValidationError("no valid thickness estimates in one of the populations");
        report.n_ref = rs.count();
        report.n_cand = cs.count();
        report.invalid_ref = ref.invalid_count();
        report.invalid_cand = cand.invalid_count();
        if (wants(Metric::Kl)) report.kl_nats = kl_divergence(rs, cs, spec);
        if (wants(Metric::Js)) report.js_nats = js_divergence(rs, cs, spec);
    }
    if (wants(Metric::Frechet)) {
        const FeatureExtractor extractor = DownsampledPixels{a.feature_block};
        const GaussianFeatureStats ga = fit_gaussian_features(a.ref_dir, extractor, threads);
        const GaussianFeatureStats gb = fit_gaussian_features(a.cand_dir, extractor, threads);
        report.frechet_sq = frechet_distance(ga, gb);
        report.feature_name = ga.feature_name;
        if (report.n_ref == 0) {
            report.n_ref = ga.n;
            report.n_cand = gb.n;
        }
    }
    if (floor) {
        report.noise_floor = floor;
        const double value = floor->metric == Metric::Kl   ? *report.kl_nats
                             : floor->metric == Metric::Js ? *report.js_nats
                                                           : *report.frechet_sq;
        report.above_floor = value > floor->mean + 3.0 * floor->std;
    }

    write_text(a.out_json, report.to_json().dump(2) + "\n");
    write_text(sibling_csv(a.out_json), DivergenceReport::csv_header() + "\n" + report.csv_row() + "\n");

    out << fmt::format("run: {}  n_ref={} n_cand={}\n", report.run_label, report.n_ref, report.n_cand);
    if (report.kl_nats) out << fmt::format("kl_nats: {:.6g}\n", *report.kl_nats);
    if (report.js_nats) out << fmt::format("js_nats: {:.6g}\n", *report.js_nats);
    if (report.frechet_sq) out << fmt::format("frechet_sq: {:.6g}\n", *report.frechet_sq);
    if (report.above_floor)
        out << fmt::format("above {} floor (mean {:.4g} + 3 x {:.4g}): {}\n", metric_name(floor->metric), floor->mean,
                           floor->std, *report.above_floor ? "yes" : "no");
    return kOk;
}

// ---------------------------------------------------------------- floor

struct FloorArgs {
    ModelFlags model;
    std::size_t n = 0;
    std::size_t reps = 5;
    std::string metric;
    std::uint64_t seed = 0;
    std::string out_json;
    HistogramFlags histogram;
    double search_radius = kDefaultSearchRadius;
    int feature_block = 32;
};

int cmd_floor(const FloorArgs& a, std::ostream& out) {
    if (a.n < 100) throw UsageError("--n must be >= 100");
    if (a.reps < 1) throw UsageError("--reps must be >= 1");
    Metric metric;
    try {
        metric = parse_metric(a.metric);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    const SimConfig config = a.model.resolve();
    PopulationOptions options;
    options.histogram = a.histogram.validated();
    options.search_radius = a.search_radius;
    options.extractor = DownsampledPixels{a.feature_block};
    options.threads = worker_count();

    const NoiseFloor floor = noise_floor(config, a.n, a.reps, metric, a.seed, options);
    const Json j = floor_to_json(floor, options.histogram, config.digest(), a.seed, feature_name(options.extractor));
    write_text(a.out_json, j.dump(2) + "\n");
    out << fmt::format("{} noise floor over {} replicates at n = {}: mean {:.6g}, std {:.6g}\n", metric_name(metric),
                       a.reps, a.n, floor.mean, floor.std);
    if (a.reps == 1) out << "warning: single replicate, std reported as 0\n";
    return kOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::string runs;
    std::string out_csv;
};

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    std::vector<std::string> out;
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    ::globfree(&g);
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
    const auto files = expand_glob(a.runs);
    if (files.empty()) {
        err << fmt::format("error: no report files match '{}'\n", a.runs);
        return kFailure;
    }
    std::vector<DivergenceReport> reports;
    for (const auto& f : files) {
        try {
            DivergenceReport r = DivergenceReport::from_json(read_json(f));
            if (r.run_label.empty()) r.run_label = fs::path(f).stem().string();
            reports.push_back(std::move(r));
        } catch (const std::exception& e) {
            err << fmt::format("error: malformed report {}: {}\n", f, e.what());
            return kFailure;
        }
    }
    std::stable_sort(reports.begin(), reports.end(),
                     [](const auto& x, const auto& y) { return x.run_label < y.run_label; });
    std::string csv = DivergenceReport::csv_header() + "\n";
    for (const auto& r : reports) csv += r.csv_row() + "\n";
    write_text(a.out_csv, csv);
    out << fmt::format("wrote {} rows to {}\n", reports.size(), a.out_csv);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"angiosim: synthetic angiogram generation and thickness-statistics evaluation"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Render a dataset of angiograms");
    gen.model.add_to(*g);
    g->add_option("--count", gen.count, "Number of images")->required();
    g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    g->add_option("--out", gen.out_dir, "Output directory")->required();
    g->add_option("--perturb", gen.perturb, "Parameter shifts, e.g. t0=-6,prevalence=+0.1,edge_noise=0.2");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Estimate center vessel thickness for every image in a directory");
    e->add_option("--in", est.in_dir, "Image directory")->required();
    e->add_option("--out", est.out_csv, "Output CSV")->required();
    e->add_option("--threshold", est.threshold, "Binarization threshold (fraction of full scale)")
        ->capture_default_str();
    e->add_option("--search-radius", est.search_radius, "Inscribed-disk search radius (px)")->capture_default_str();

    EvaluateArgs ev;
    auto* v = app.add_subcommand("evaluate", "Compare a candidate image set against a reference set");
    v->add_option("--ref", ev.ref_dir, "Reference image directory")->required();
    v->add_option("--cand", ev.cand_dir, "Candidate image directory")->required();
    v->add_option("--metrics", ev.metrics, "Comma-separated subset of kl,js,ffd")->capture_default_str();
    v->add_option("--out", ev.out_json, "Output report JSON (a .csv row is written alongside)")->required();
    v->add_option("--floor-from", ev.floor_from, "Noise-floor JSON produced by `floor`");
    v->add_option("--label", ev.label, "Run label (default: candidate directory name)");
    ev.histogram.add_to(*v);
    v->add_option("--threshold", ev.threshold, "Binarization threshold")->capture_default_str();
    v->add_option("--search-radius", ev.search_radius, "Inscribed-disk search radius (px)")->capture_default_str();
    v->add_option("--feature-block", ev.feature_block, "Pooling block size for the ffd features")
        ->capture_default_str();

    FloorArgs fl;
    auto* f = app.add_subcommand("floor", "Noise floor from pairs of independent reference sets");
    fl.model.add_to(*f);
    f->add_option("--n", fl.n, "Images per set")->required();
    f->add_option("--reps", fl.reps, "Replicates")->capture_default_str();
    f->add_option("--metric", fl.metric, "kl, js or ffd")->required();
    f->add_option("--seed", fl.seed, "Master seed")->capture_default_str();
    f->add_option("--out", fl.out_json, "Output JSON")->required();
    fl.histogram.add_to(*f);
    f->add_option("--search-radius", fl.search_radius, "Inscribed-disk search radius (px)")->capture_default_str();
    f->add_option("--feature-block", fl.feature_block, "Pooling block size for the ffd features")
        ->capture_default_str();

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "Aggregate evaluate reports into one CSV table");
    r->add_option("--runs", rep.runs, "Glob matching report JSON files")->required();
    r->add_option("--out", rep.out_csv, "Output CSV")->required();

    std::vector<std::string> argv_storage{"angiosim"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& pe) {
        err << "error: " << pe.what() << "\n";
        auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kUsage;
    }

    try {
        if (g->parsed()) return cmd_generate(gen, out);
        if (e->parsed()) return cmd_estimate(est, out, err);
        if (v->parsed()) return cmd_evaluate(ev, out);
        if (f->parsed()) return cmd_floor(fl, out);
        if (r->parsed()) return cmd_report(rep, out, err);
    } catch (const UsageError& ue) {
        err << "usage error: " << ue.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace angiosim::cli
