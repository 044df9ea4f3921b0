#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgae/cli.hpp"
#include "support.hpp"

using namespace sgae;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run sgae_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Toy graph, features and split under `root`.
void toy_inputs(const fs::path& root) {
    REQUIRE(sgae_run({"synth", "--toy", "--out", (root / "synth").string()}).code == 0);
    REQUIRE(sgae_run({"split", "--graph", (root / "synth/graph.json").string(), "--out", (root / "split").string()}).code == 0);
}

std::vector<std::string> data_args(const fs::path& root) {
    return {"--graph", (root / "synth/graph.json").string(), "--features", (root / "synth/features").string(),
            "--split", (root / "split/split.json").string()};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("exit codes map error kinds") {
    CHECK(cli::exit_code(ErrorKind::InvalidArgument) == 2);
    CHECK(cli::exit_code(ErrorKind::NotFound) == 3);
    CHECK(cli::exit_code(ErrorKind::Format) == 4);
    CHECK(cli::exit_code(ErrorKind::Infeasible) == 5);
    CHECK(cli::exit_code(ErrorKind::Numerical) == 6);
}

TEST_CASE("help and usage errors") {
    CHECK(sgae_run({"--help"}).code == 0);
    CHECK(sgae_run({"train", "--help"}).code == 0);
    const Run none = sgae_run({});
    CHECK(none.code == 2);
    const Run bad = sgae_run({"train", "--frobnicate"});
    CHECK(bad.code == 2);
    CHECK(json::parse(bad.err)["error"] == "usage");
    CHECK(sgae_run({"synth", "--nodes", "many"}).code == 2);
}

TEST_CASE("summary line lists the command, seed and files") {
    const auto root = testing::scratch_dir("cli_summary");
    const Run r = sgae_run({"synth", "--toy", "--seed", "4", "--out", (root / "s").string()});
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s["command"] == "synth");
    CHECK(s["seed"] == 4);
    CHECK(s["files"].size() == 10);
    for (const auto& f : s["files"]) CHECK(fs::exists(f.get<std::string>()));
    CHECK(fs::exists(root / "s/features/framing_4.tsv"));
}

TEST_CASE("output root comes from the environment") {
    const auto root = testing::scratch_dir("cli_env");
    ::setenv(cli::kOutputRootEnv, root.string().c_str(), 1);
    const Run r = sgae_run({"synth", "--toy"});
    ::unsetenv(cli::kOutputRootEnv);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(root / "synth/graph.json"));
}

TEST_CASE("train, eval, analyze on the toy") {
    const auto root = testing::scratch_dir("cli_train");
    toy_inputs(root);
    const Run t = sgae_run(cat(cat({"train"}, data_args(root)), {"--epochs", "30", "--out", (root / "train").string()}));
    REQUIRE(t.code == 0);
    const json report = json::parse(testing::slurp(root / "train/train_report.json"));
    CHECK(report["config"]["epochs"] == 30);
    CHECK(report["seed"] == 0);
    CHECK(fs::exists(root / "train/checkpoint/w0.bin"));

    const Run e = sgae_run(cat(cat({"eval"}, data_args(root)),
                               {"--checkpoint", (root / "train/checkpoint").string(), "--out", (root / "eval").string()}));
    REQUIRE(e.code == 0);
    const json board = json::parse(testing::slurp(root / "eval/leaderboard.json"));
    CHECK(board["entries"].size() == 1);
    CHECK(board["entries"][0]["dev"]["auc"] == report["dev"]["auc"]);

    const Run a = sgae_run({"analyze", "--checkpoint", (root / "train/checkpoint").string(), "--features",
                            (root / "synth/features").string(), "--out", (root / "analyze").string()});
    REQUIRE(a.code == 0);
    CHECK(fs::exists(root / "analyze/gamma.tsv"));
    CHECK(fs::exists(root / "analyze/framing_strength.tsv"));
}

TEST_CASE("flags override the config file, which overrides defaults") {
    const auto root = testing::scratch_dir("cli_config");
    toy_inputs(root);
    std::ofstream(root / "cfg.json") << R"({"epochs": 7, "lambda": 0.003, "hidden1": 12})";
    const Run r = sgae_run(cat(cat({"train"}, data_args(root)), {"--config", (root / "cfg.json").string(), "--epochs", "5",
                                                                 "--out", (root / "t").string()}));
    REQUIRE(r.code == 0);
    const json cfg = json::parse(testing::slurp(root / "t/train_report.json"))["config"];
    CHECK(cfg["epochs"] == 5);
    CHECK(cfg["lambda"] == 0.003);
    CHECK(cfg["hidden1"] == 12);
    CHECK(cfg["hidden2"] == 10);

    std::ofstream(root / "bad.json") << R"({"epochs": 7, "epoch": 3})";
    const Run bad = sgae_run(cat(cat({"train"}, data_args(root)), {"--config", (root / "bad.json").string(), "--out",
                                                                   (root / "t2").string()}));
    CHECK(bad.code == 4);
    CHECK(json::parse(bad.err)["error"] == "format");
    CHECK_FALSE(fs::exists(root / "t2"));
}

TEST_CASE("failures leave no partial outputs") {
    const auto root = testing::scratch_dir("cli_fail");
    toy_inputs(root);
    const Run missing = sgae_run({"split", "--graph", (root / "nope.json").string(), "--out", (root / "x").string()});
    CHECK(missing.code == 3);
    CHECK_FALSE(fs::exists(root / "x"));

    const Run infeasible = sgae_run(cat(cat({"sweep"}, data_args(root)), {"--theta", "0", "--max-epochs", "3", "--lrs", "0.0001",
                                                                          "--lambdas", "0.0001", "--out", (root / "sw").string()}));
    CHECK(infeasible.code == 5);
    CHECK(json::parse(infeasible.err)["exit_code"] == 5);
    CHECK_FALSE(fs::exists(root / "sw"));

    std::ofstream(root / "broken.json") << "{\"nodes\": [";
    CHECK(sgae_run({"split", "--graph", (root / "broken.json").string(), "--out", (root / "y").string()}).code == 4);
    CHECK(sgae_run(cat(cat({"train"}, data_args(root)), {"--variant", "XYZ", "--out", (root / "z").string()})).code == 2);
}

TEST_CASE("sweep writes per-cell and per-epoch tables") {
    const auto root = testing::scratch_dir("cli_sweep");
    toy_inputs(root);
    const Run r = sgae_run(cat(cat({"sweep"}, data_args(root)), {"--theta", "3", "--max-epochs", "20", "--lrs", "0.001", "0.003",
                                                                 "--lambdas", "0.003", "--out", (root / "sw").string()}));
    REQUIRE(r.code == 0);
    const std::string cells = testing::slurp(root / "sw/cells.tsv");
    CHECK(std::count(cells.begin(), cells.end(), '\n') == 3);
    const std::string hist = testing::slurp(root / "sw/histories.tsv");
    CHECK(std::count(hist.begin(), hist.end(), '\n') == 41);
    const json rep = json::parse(testing::slurp(root / "sw/sweep_report.json"));
    CHECK(rep["theta"] == 3);
    CHECK(rep["best"]["n_active"].get<int>() <= 3);

    REQUIRE(sgae_run({"plot-data", "--kind", "threshold", "--input", (root / "sw").string(), "--out", (root / "pd").string()}).code == 0);
    const std::string curve = testing::slurp(root / "pd/threshold.tsv");
    CHECK(curve.rfind("theta\tbest_dev_auc\n", 0) == 0);
    CHECK(sgae_run({"plot-data", "--kind", "pie", "--input", (root / "sw").string(), "--out", (root / "pd2").string()}).code == 2);
}

TEST_CASE("backbone and dynamics commands") {
    const auto root = testing::scratch_dir("cli_bb");
    std::ofstream(root / "act.tsv") << "user\tnode\tcomments\n"
                                       "u1\ta\t20\nu1\tb\t20\nu2\ta\t20\nu2\tb\t20\nu3\tc\t20\nu3\td\t20\n"
                                       "u4\tc\t20\nu4\td\t20\nu5\ta\t20\nu5\tc\t20\nu6\tb\t12\nu6\td\t30\n";
    const Run r = sgae_run({"backbone", "--activity", (root / "act.tsv").string(), "--deltas", "0", "0.5", "1", "1.5",
                            "--shuffles", "0", "--out", (root / "bb").string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(root / "bb/backbone_report.json"));
    CHECK_FALSE(fs::exists(root / "bb/modularity.json"));
    CHECK(sgae_run({"backbone", "--out", (root / "bb2").string()}).code == 2);

    toy_inputs(root);
    for (const char* name : {"t1", "t2", "t3"})
        REQUIRE(sgae_run(cat(cat({"train"}, data_args(root)), {"--epochs", "10", "--seed", name[1] == '1' ? "1" : "2", "--out",
                                                               (root / name).string()}))
                    .code == 0);
    const Run d = sgae_run({"dynamics", "--checkpoint", (root / "t1/checkpoint").string(), (root / "t2/checkpoint").string(),
                            (root / "t3/checkpoint").string(), "--out", (root / "dyn").string()});
    REQUIRE(d.code == 0);
    CHECK(json::parse(d.out)["periods"] == 3);
    const std::string tsv = testing::slurp(root / "dyn/drift.tsv");
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 1 + 8 * 3);
    CHECK(sgae_run({"dynamics", "--checkpoint", (root / "t1/checkpoint").string(), "--labels", "a", "b", "--out",
                    (root / "dyn2").string()})
              .code == 2);
}

TEST_CASE("repeated pipelines are byte-identical") {
    auto pipeline = [](const fs::path& root) {
        toy_inputs(root);
        REQUIRE(sgae_run(cat(cat({"sweep"}, data_args(root)), {"--theta", "2", "--max-epochs", "15", "--jobs", "2", "--out",
                                                               (root / "sw").string()}))
                    .code == 0);
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testing::slurp(e.path());
        return files;
    };
    const auto a = pipeline(testing::scratch_dir("cli_det"));
    const auto b = pipeline(testing::scratch_dir("cli_det"));
    CHECK(a.size() == b.size());
    CHECK(a == b);
}
