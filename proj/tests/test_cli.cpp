#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "angiosim/cli.hpp"
#include "angiosim/dataset.hpp"
#include "angiosim/image_io.hpp"
#include "angiosim/morphology.hpp"
#include "angiosim/report.hpp"
#include "tempdir.hpp"

namespace angiosim {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = new testing::TempDir("cli");
        ASSERT_EQ(run({"generate", "--preset", "sim33", "--count", "150", "--seed", "7", "--out", path("ref")}).code, 0);
        ASSERT_EQ(run({"generate", "--preset", "sim33", "--count", "150", "--seed", "8", "--out", path("cand"),
                       "--perturb", "t0=-6"})
                      .code,
                  0);
    }
    static void TearDownTestSuite() {
        delete root_;
        root_ = nullptr;
    }
    static std::string path(const std::string& name) { return (*root_ / name).string(); }

    static testing::TempDir* root_;
};

testing::TempDir* CliTest::root_ = nullptr;

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"generate", "--preset", "sim33", "--count", "5"}).code, 2);  // missing --out
    EXPECT_EQ(run({"generate", "--count", "5", "--out", path("x")}).code, 2);
    EXPECT_EQ(run({"generate", "--preset", "sim33", "--config", "c.txt", "--count", "5", "--out", path("x")}).code, 2);
    EXPECT_EQ(run({"generate", "--preset", "sim99", "--count", "5", "--out", path("x")}).code, 2);
    EXPECT_EQ(run({"generate", "--preset", "sim33", "--count", "0", "--out", path("x")}).code, 2);
    EXPECT_EQ(run({"generate", "--preset", "sim33", "--count", "abc", "--out", path("x")}).code, 2);
    EXPECT_EQ(run({"generate", "--preset", "sim33", "--count", "5", "--out", path("x"), "--perturb", "w=1"}).code, 2);
    EXPECT_EQ(run({"estimate", "--in", path("ref")}).code, 2);
    EXPECT_EQ(run({"estimate", "--in", path("ref"), "--out", path("e.csv"), "--threshold", "2"}).code, 2);
    EXPECT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--metrics", "kl,fid", "--out",
                   path("bad.json")})
                  .code,
              2);
    EXPECT_EQ(run({"floor", "--preset", "sim27", "--n", "99", "--metric", "kl", "--out", path("f.json")}).code, 2);
    EXPECT_EQ(run({"floor", "--preset", "sim27", "--n", "100", "--reps", "0", "--metric", "kl", "--out", path("f.json")})
                  .code,
              2);
    EXPECT_EQ(run({"floor", "--preset", "sim27", "--n", "100", "--metric", "xx", "--out", path("f.json")}).code, 2);
    EXPECT_EQ(run({"report", "--runs", path("*.json")}).code, 2);
    EXPECT_FALSE(fs::exists(path("x")));
}

TEST_F(CliTest, GenerateSummaryAndPerturbation) {
    const Result r = run({"generate", "--preset", "sim33", "--count", "3", "--seed", "1", "--out", path("g")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("3"), std::string::npos);
    EXPECT_NE(r.out.find(preset("sim33").digest()), std::string::npos);
    EXPECT_EQ(SimConfig::load(fs::path(path("cand")) / kConfigName).t0, 27.0);
    EXPECT_EQ(DatasetManifest::load(fs::path(path("ref")) / kManifestName).entries.size(), 150u);
}

TEST_F(CliTest, GenerateFromConfigFile) {
    SimConfig c = preset("sim23");
    c.edge_noise_sigma = 0.0;
    c.save(path("custom.txt"));
    ASSERT_EQ(run({"generate", "--config", path("custom.txt"), "--count", "2", "--out", path("custom")}).code, 0);
    EXPECT_EQ(DatasetManifest::load(fs::path(path("custom")) / kManifestName).config_digest, c.digest());
    EXPECT_EQ(run({"generate", "--config", path("missing.txt"), "--count", "2", "--out", path("custom2")}).code, 1);
}

TEST_F(CliTest, GenerateUnwritable) {
    std::ofstream(path("plainfile")) << "x";
    const Result r = run({"generate", "--preset", "sim33", "--count", "2", "--out", path("plainfile") + "/sub"});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, Estimate) {
    const Result r = run({"estimate", "--in", path("ref"), "--out", path("ref.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const BatchEstimate b = read_thickness_csv(path("ref.csv"));
    EXPECT_EQ(b.rows.size(), 150u);
    int low = 0, high = 0;
    for (const auto& row : b.rows) {
        low += row.thickness < 25;
        high += row.thickness > 28;
    }
    EXPECT_GT(low, 40);
    EXPECT_GT(high, 40);

    fs::create_directories(path("empty"));
    const Result empty = run({"estimate", "--in", path("empty"), "--out", path("empty.csv")});
    EXPECT_EQ(empty.code, 1);
    EXPECT_FALSE(empty.err.empty());
    EXPECT_EQ(run({"estimate", "--in", path("nowhere"), "--out", path("n.csv")}).code, 1);
}

TEST_F(CliTest, EstimateGrayscalePng) {
    fs::create_directories(path("gray"));
    GrayImage img(64, 64, 0);
    for (int y = 0; y < 64; ++y)
        for (int x = 22; x < 43; ++x) img.at(x, y) = 200;  // 200/255 >= 0.5
    for (int y = 0; y < 64; ++y) img.at(10, y) = 100;  // below threshold
    write_png(fs::path(path("gray")) / "a.png", img);
    ASSERT_EQ(run({"estimate", "--in", path("gray"), "--out", path("gray.csv")}).code, 0);
    const BatchEstimate b = read_thickness_csv(path("gray.csv"));
    ASSERT_EQ(b.rows.size(), 1u);
    EXPECT_TRUE(b.rows[0].valid);
    EXPECT_GE(b.rows[0].thickness, 20.0);
    EXPECT_LE(b.rows[0].thickness, 22.0);
}

TEST_F(CliTest, EvaluateSameDirIsZero) {
    ASSERT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("ref"), "--out", path("same.json")}).code, 0);
    const Json j = read_json(path("same.json"));
    EXPECT_LT(j.at("kl_nats").get<double>(), 1e-9);
    EXPECT_LT(j.at("js_nats").get<double>(), 1e-9);
    EXPECT_FALSE(j.contains("frechet_sq"));
    EXPECT_EQ(j.at("n_ref").get<int>(), 150);
    EXPECT_TRUE(fs::exists(path("same.csv")));
}

TEST_F(CliTest, EvaluateFfdOnlyOmitsDivergences) {
    ASSERT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--metrics", "ffd", "--out",
                   path("ffd.json"), "--label", "ffd-run"})
                  .code,
              0);
    const Json j = read_json(path("ffd.json"));
    EXPECT_FALSE(j.contains("kl_nats"));
    EXPECT_FALSE(j.contains("js_nats"));
    EXPECT_GE(j.at("frechet_sq").get<double>(), 0.0);
    EXPECT_EQ(j.at("run_label"), "ffd-run");
    const std::string csv = slurp(path("ffd.csv"));
    EXPECT_EQ(csv.rfind(DivergenceReport::csv_header() + "\n", 0), 0u);
    EXPECT_NE(csv.find("ffd-run,150,150,,,"), std::string::npos);
}

TEST_F(CliTest, FloorAndAboveFloor) {
    const std::vector<std::string> args{"floor", "--preset", "sim33", "--n", "150", "--reps", "2", "--metric", "kl",
                                        "--seed", "3", "--out", path("floor.json")};
    ASSERT_EQ(run(args).code, 0);
    const std::string first = slurp(path("floor.json"));
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(path("floor.json")), first);
    const Json f = read_json(path("floor.json"));
    EXPECT_EQ(f.at("values").size(), 2u);
    EXPECT_EQ(f.at("metric"), "kl");
    EXPECT_FALSE(f.contains("warning"));

    ASSERT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--out", path("sep.json"), "--floor-from",
                   path("floor.json")})
                  .code,
              0);
    const Json j = read_json(path("sep.json"));
    EXPECT_TRUE(j.at("above_floor").get<bool>());
    EXPECT_GT(j.at("kl_nats").get<double>(), f.at("mean").get<double>() + 3 * f.at("std").get<double>());
    EXPECT_EQ(j.at("noise_floor").at("replicates"), 2);

    // A floor for a metric that was not evaluated is a usage error.
    EXPECT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--metrics", "js", "--out",
                   path("sep2.json"), "--floor-from", path("floor.json")})
                  .code,
              2);
    EXPECT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--out", path("sep3.json"),
                   "--floor-from", path("nope.json")})
                  .code,
              1);
}

TEST_F(CliTest, FloorJsRangeAndSingleReplicate) {
    ASSERT_EQ(run({"floor", "--preset", "sim27", "--n", "100", "--reps", "3", "--metric", "js", "--out",
                   path("fjs.json")})
                  .code,
              0);
    for (const auto& v : read_json(path("fjs.json")).at("values")) {
        EXPECT_GE(v.get<double>(), 0.0);
        EXPECT_LE(v.get<double>(), std::log(2.0));
    }
    ASSERT_EQ(run({"floor", "--preset", "sim27", "--n", "100", "--reps", "1", "--metric", "kl", "--out",
                   path("f1.json")})
                  .code,
              0);
    const Json one = read_json(path("f1.json"));
    EXPECT_EQ(one.at("std").get<double>(), 0.0);
    EXPECT_TRUE(one.contains("warning"));
}

TEST_F(CliTest, Report) {
    fs::create_directories(path("runs"));
    const auto runs = fs::path(path("runs"));
    ASSERT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--out", (runs / "c.json").string(),
                   "--label", "ckpt-c"})
                  .code,
              0);
    ASSERT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("ref"), "--metrics", "js", "--out",
                   (runs / "a.json").string(), "--label", "ckpt-a"})
                  .code,
              0);
    ASSERT_EQ(run({"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--metrics", "ffd,kl", "--out",
                   (runs / "b.json").string(), "--label", "ckpt-b"})
                  .code,
              0);
    ASSERT_EQ(run({"report", "--runs", (runs / "*.json").string(), "--out", path("table.csv")}).code, 0);
    std::istringstream csv(slurp(path("table.csv")));
    std::vector<std::string> lines;
    for (std::string line; std::getline(csv, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "run_label,n_ref,n_cand,kl_nats,js_nats,frechet_sq,floor_mean,floor_std");
    EXPECT_EQ(lines[1].rfind("ckpt-a,150,150,,", 0), 0u);  // js only: kl cell empty
    EXPECT_EQ(lines[2].rfind("ckpt-b,", 0), 0u);
    EXPECT_EQ(lines[3].rfind("ckpt-c,", 0), 0u);
    EXPECT_TRUE(lines[2].find(",,") != std::string::npos);  // no js for ckpt-b

    EXPECT_EQ(run({"report", "--runs", (runs / "*.nothing").string(), "--out", path("t2.csv")}).code, 1);
    std::ofstream(runs / "z.json") << "{ not json";
    const Result bad = run({"report", "--runs", (runs / "*.json").string(), "--out", path("t3.csv")});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("z.json"), std::string::npos);
}

TEST_F(CliTest, EvaluateDeterministic) {
    const std::vector<std::string> args{"evaluate", "--ref", path("ref"), "--cand", path("cand"), "--metrics",
                                        "kl,js,ffd", "--out", path("det.json")};
    ASSERT_EQ(run(args).code, 0);
    const std::string first = slurp(path("det.json"));
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(path("det.json")), first);
}

}  // namespace
}  // namespace angiosim
