#include <gtest/gtest.h>

#include <json.hpp>

#include <sstream>
#include <sys/wait.h>

#include "oracle.hpp"
#include "synthetic.hpp"
#include "xaieval/cli.hpp"
#include "xaieval/raster_io.hpp"
#include "xaieval/result_io.hpp"

using namespace xaieval;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "xaieval");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct CliTest : ::testing::Test {
    fs::path dir = testkit::fresh_temp_dir("cli");
    testkit::SyntheticDataset ds =
        testkit::make_synthetic_dataset(dir / "data", {.images = 4, .width = 12, .height = 10});

    fs::path manifest(const std::string& runner_json = R"({"mode": "builtin", "kind": "visibility-prob"})",
                      const std::string& extra = "") {
        const fs::path p = dir / "run.json";
        testkit::write_text(p, R"({"dataset": "data", "methods": ["camA", "camB"], "output": "out",
                                   "runner": )" + runner_json + extra + "}");
        return p;
    }
};

}  // namespace

TEST_F(CliTest, EvaluateWritesResultsAndReports) {
    const Outcome o = cli({"evaluate", "--manifest", manifest().string(), "--jobs", "4"});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    EXPECT_NE(o.out.find("cells: 32 (32 executed, 0 cached, 0 failed)"), std::string::npos) << o.out;
    const RunResult r = load_run_result(dir / "out");
    EXPECT_EQ(r.cells.size(), 32u);
    ASSERT_TRUE(r.baseline);
    for (const char* f : {"report_s1.md", "report_s2.csv", "report_s3gt.json", "report_s3pm.md"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / "reports" / f)) << f;
    }
    const auto csv = testkit::read_text(dir / "out" / "results" / "cells.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 34);

    const Outcome again = cli({"evaluate", "--manifest", manifest().string()});
    EXPECT_NE(again.out.find("(0 executed, 32 cached, 0 failed)"), std::string::npos) << again.out;
    EXPECT_NE(again.out.find("runner invocations: 0"), std::string::npos);
}

TEST_F(CliTest, EvaluateOverrides) {
    const Outcome o = cli({"evaluate", "--manifest", manifest().string(), "--thresholds", "0.3,0.5",
                           "--strategies", "s1,s3gt", "--focus-threshold", "0.5", "--format", "md",
                           "--no-cache", "--output", (dir / "elsewhere").string()});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    const RunResult r = load_run_result(dir / "elsewhere");
    EXPECT_EQ(r.cells.size(), 8u);
    EXPECT_EQ(r.metadata.thresholds, (std::vector<double>{0.3, 0.5}));
    EXPECT_TRUE(fs::exists(dir / "elsewhere" / "reports" / "report_s3gt.md"));
    EXPECT_FALSE(fs::exists(dir / "elsewhere" / "reports" / "report_s3gt.csv"));
    EXPECT_FALSE(fs::exists(dir / "elsewhere" / "cache"));
}

TEST_F(CliTest, MissingDirectoryIsConfigError) {
    fs::remove_all(ds.root / "gt");
    const Outcome o = cli({"evaluate", "--manifest", manifest().string()});
    EXPECT_EQ(o.code, kExitConfig);
    EXPECT_NE(o.err.find("missing directory: " + (ds.root / "gt").string()), std::string::npos) << o.err;
}

TEST_F(CliTest, BadManifestIsConfigError) {
    EXPECT_EQ(cli({"evaluate", "--manifest", manifest("{}", R"(, "bogus": 1)").string()}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate", "--manifest", (dir / "absent.json").string()}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate", "--manifest", manifest().string(), "--thresholds", "0.4,2"}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate", "--manifest", manifest().string(), "--strategies", "s7"}).code, kExitConfig);
}

TEST_F(CliTest, RunnerFailureExitsOne) {
    const std::string runner = std::string(R"({"mode": "subprocess", "command": [")") + FAKE_RUNNER_PATH +
                               R"(", "--fail-if", "/camA/0.4/s1"]})";
    const Outcome o = cli({"evaluate", "--manifest", manifest(runner).string(), "--thresholds", "0.4"});
    EXPECT_EQ(o.code, kExitFailedCells);
    EXPECT_NE(o.out.find("1 failed"), std::string::npos) << o.out;
    EXPECT_NE(o.err.find("failed: method 'camA', threshold 0.4, strategy s1"), std::string::npos) << o.err;
    EXPECT_TRUE(fs::exists(dir / "out" / "results" / "failures.json"));
    EXPECT_NE(testkit::read_text(dir / "out" / "reports" / "report_s1.md").find("failed"), std::string::npos);
}

TEST_F(CliTest, PerturbWritesEditedImage) {
    const std::string id = ds.ids[0];
    const fs::path img = ds.root / "images" / (id + ".png");
    const fs::path heat = ds.root / "heatmaps" / "camA" / (id + ".npy");
    const fs::path gt = ds.root / "gt" / (id + ".png");
    const fs::path out = dir / "edited.png";

    Outcome o = cli({"perturb", "--image", img.string(), "--heatmap", heat.string(), "--strategy", "s3gt",
                     "--reference", gt.string(), "--threshold", "0.6", "--fill", "9", "--out", out.string()});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    EXPECT_EQ(load_image(out), perturb_image(load_image(img), load_heatmap(heat), Threshold(0.6),
                                             Strategy::XaiGt, FillPolicy{9}, load_mask(gt)));

    o = cli({"perturb", "--image", img.string(), "--heatmap", heat.string(), "--strategy", "s2", "--threshold",
             "0", "--out", out.string()});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    EXPECT_EQ(read_file_bytes(out), encode_image_png(load_image(img)));

    EXPECT_EQ(cli({"perturb", "--image", img.string(), "--heatmap", heat.string(), "--strategy", "s3pm",
                   "--out", out.string()})
                  .code,
              kExitConfig);
    EXPECT_EQ(cli({"perturb", "--image", img.string(), "--heatmap", heat.string(), "--strategy", "s1",
                   "--reference", gt.string(), "--out", out.string()})
                  .code,
              kExitConfig);
    EXPECT_EQ(cli({"perturb", "--image", img.string(), "--heatmap", heat.string(), "--strategy", "s1",
                   "--threshold", "1.5", "--out", out.string()})
                  .code,
              kExitConfig);
    o = cli({"perturb", "--image", (dir / "nope.png").string(), "--heatmap", heat.string(), "--strategy", "s1",
             "--out", out.string()});
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.err.find("nope.png"), std::string::npos);
}

TEST_F(CliTest, MetricsOverMaskDirectories) {
    const fs::path pred = dir / "pred", ref = dir / "ref";
    store_mask(BinaryMask(2, 2, {1, 1, 0, 0}), pred / "a.png");
    store_mask(BinaryMask(2, 2, {1, 0, 1, 0}), ref / "a.png");
    store_mask(BinaryMask(3, 1, {0, 0, 0}), pred / "b.png");
    store_mask(BinaryMask(3, 1, {0, 0, 0}), ref / "b.png");

    Outcome o = cli({"metrics", "--pred", pred.string(), "--ref", ref.string(), "--format", "csv"});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    EXPECT_EQ(o.out,
              "image,tp,fp,fn,tn,precision,recall,f1,iou\n"
              "a,1,1,1,1,0.50,0.50,0.50,0.33\n"
              "b,0,0,0,3,—,—,—,—\n"
              "micro,1,1,1,4,0.50,0.50,0.50,0.33\n");

    o = cli({"metrics", "--pred", pred.string(), "--ref", ref.string(), "--decimals", "3"});
    ASSERT_EQ(o.code, kExitOk);
    EXPECT_NE(o.out.find("| a | 1 | 1 | 1 | 1 | 0.500 | 0.500 | 0.500 | 0.333 |"), std::string::npos) << o.out;

    store_mask(BinaryMask(2, 2, {1, 1, 0, 0}), pred / "c.png");
    o = cli({"metrics", "--pred", pred.string(), "--ref", ref.string()});
    EXPECT_EQ(o.code, kExitConfig);
    EXPECT_NE(o.err.find("c"), std::string::npos);
    fs::remove(pred / "c.png");

    store_mask(BinaryMask(1, 1, {1}), pred / "b.png");
    EXPECT_EQ(cli({"metrics", "--pred", pred.string(), "--ref", ref.string()}).code, 1);
}

TEST_F(CliTest, ReportAndSweepAreDeterministic) {
    ASSERT_EQ(cli({"evaluate", "--manifest", manifest().string()}).code, kExitOk);
    const fs::path a = dir / "rep_a", b = dir / "rep_b";
    ASSERT_EQ(cli({"report", "--results", (dir / "out").string(), "--out", a.string()}).code, kExitOk);
    ASSERT_EQ(cli({"report", "--manifest", manifest().string(), "--out", b.string()}).code, kExitOk);
    for (const auto& e : fs::directory_iterator(a)) {
        EXPECT_EQ(testkit::read_text(e.path()), testkit::read_text(b / e.path().filename()))
            << e.path().filename();
    }
    EXPECT_EQ(testkit::read_text(a / "report_s1.md"), testkit::read_text(dir / "out" / "reports" / "report_s1.md"));

    const fs::path s = dir / "sweep";
    const Outcome o = cli({"sweep", "--results", (dir / "out" / "results" / "results.json").string(), "--out",
                           s.string()});
    ASSERT_EQ(o.code, kExitOk) << o.err;
    EXPECT_TRUE(fs::exists(s / "sweep.md"));
    EXPECT_EQ(testkit::read_text(s / "sweep.csv"), testkit::read_text(dir / "out" / "results" / "cells.csv"));
    EXPECT_EQ(nlohmann::json::parse(testkit::read_text(s / "sweep.json")),
              nlohmann::json::parse(testkit::read_text(dir / "out" / "results" / "results.json")));

    EXPECT_EQ(cli({"report", "--results", (dir / "out").string(), "--focus-threshold", "0.5"}).code, 1);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, kExitConfig);
    EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate"}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate", "--manifest", "x.json", "--bogus"}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate", "--manifest", "x.json", "--jobs", "0"}).code, kExitConfig);
    EXPECT_EQ(cli({"report"}).code, kExitConfig);
    EXPECT_EQ(cli({"report", "--results", "a", "--manifest", "b"}).code, kExitConfig);
    const Outcome help = cli({"--help"});
    EXPECT_EQ(help.code, kExitOk);
    EXPECT_NE(help.out.find("evaluate"), std::string::npos);
    EXPECT_EQ(cli({"metrics", "--help"}).code, kExitOk);
}

TEST(Cli, ExecutableExitStatus) {
    const auto status = [](const std::string& args) {
        const int raw = std::system((std::string(XAIEVAL_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    EXPECT_EQ(status("--help"), 0);
    EXPECT_EQ(status("evaluate --manifest /nonexistent/run.json"), 2);
    EXPECT_EQ(status("evaluate --manifest x --bogus"), 2);
}
