#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dispref/blackbox/pipeline.hpp"
#include "dispref/cli/commands.hpp"
#include "dispref/core/image_io.hpp"
#include "dispref/eval/metrics.hpp"
#include "dispref/net/model.hpp"

namespace fs = std::filesystem;
using namespace dispref;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    setenv("DISPREF_LOG", "quiet", 1);
    args.insert(args.begin(), "dispref");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("dispref_cli_" + tag + "_" + std::to_string(getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

NetConfig tiny_net() {
    NetConfig c;
    c.levels = 2;
    c.channels = {3, 4};
    c.mlp_hidden = {8};
    return c;
}

}  // namespace

TEST_CASE("synth is bitwise deterministic") {
    TempDir t("synth");
    for (const char* d : {"a", "b"}) REQUIRE(cli({"synth", "--out-dir", t / d, "--seed", "7"}).code == kExitOk);
    for (const char* f : {"left.png", "right.png", "gt.pfm", "occlusion.png"}) {
        CHECK(!slurp(t.path / "a" / f).empty());
        CHECK(slurp(t.path / "a" / f) == slurp(t.path / "b" / f));
    }
    REQUIRE(cli({"synth", "--out-dir", t / "c", "--seed", "8"}).code == kExitOk);
    CHECK(slurp(t.path / "a" / "gt.pfm") != slurp(t.path / "c" / "gt.pfm"));
}

TEST_CASE("match reproduces the in-process blackbox") {
    TempDir t("match");
    REQUIRE(cli({"synth", "--out-dir", t.path.string(), "--seed", "3"}).code == kExitOk);
    const std::vector<std::string> args{"match", "--left", t / "left.png", "--right", t / "right.png", "--dmax", "24"};
    auto with_out = [&](const std::string& o) {
        auto a = args;
        a.insert(a.end(), {"--out", o});
        return cli(a).code;
    };
    REQUIRE(with_out(t / "raw.pfm") == kExitOk);
    REQUIRE(with_out(t / "raw2.pfm") == kExitOk);
    CHECK(slurp(t / "raw.pfm") == slurp(t / "raw2.pfm"));

    const DisparityMap raw = read_disparity_pfm(t / "raw.pfm");
    const StereoPair pair(read_image(t / "left.png"), read_image(t / "right.png"));
    CHECK(raw == run_blackbox(pair, BlackboxConfig::sgm_census(24)));
    CHECK(bad(fill_invalid_background(raw), read_disparity_pfm(t / "gt.pfm"), 3.0) < 35.0);
}

TEST_CASE("match on an unbalanced pair") {
    TempDir t("kappa");
    REQUIRE(cli({"synth", "--out-dir", t.path.string(), "--kappa", "2"}).code == kExitOk);
    const PixelGrid left = read_image(t / "left.png");
    CHECK(read_image(t / "right.png").width() * 2 == left.width());
    const std::vector<std::string> base{"match", "--left", t / "left.png", "--right", t / "right.png", "--out", t / "raw.pfm"};
    CHECK(cli(base).code == kExitConfig);
    auto aware = base;
    aware.push_back("--kappa-aware");
    REQUIRE(cli(aware).code == kExitOk);
    const DisparityMap raw = read_disparity_pfm(t / "raw.pfm");
    CHECK(raw.width() == left.width());
    CHECK(raw.height() == left.height());
}

TEST_CASE("exit codes") {
    TempDir t("codes");
    CHECK(cli({"match", "--left", t / "nope.png", "--right", t / "nope.png", "--out", t / "o.pfm"}).code == kExitInput);
    CHECK(cli({"eval", "--pred", t / "nope.pfm", "--gt", t / "nope.pfm"}).code == kExitInput);
    CHECK(cli({"--config", t / "missing.ini", "synth", "--out-dir", t / "s"}).code == kExitInput);

    std::ofstream(t / "bad.ini") << "[blackbox]\nno_such_key = 1\n";
    CHECK(cli({"--config", t / "bad.ini", "synth", "--out-dir", t / "s"}).code == kExitConfig);
    CHECK(cli({"synth", "--out-dir", t / "s", "--dmax", "-3"}).code == kExitConfig);
    CHECK(cli({"synth", "--out-dir", t / "s", "--no-such-flag"}).code == kExitConfig);
    CHECK(cli({}).code == kExitConfig);

    // The real binary maps to the same codes.
    const std::string cmd = std::string(DISPREF_BINARY) + " match --left " + (t / "nope.png") + " --right " +
                            (t / "nope.png") + " --out " + (t / "o.pfm") + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == kExitInput);
}

TEST_CASE("eval on identical maps reports zero error") {
    TempDir t("eval");
    REQUIRE(cli({"synth", "--out-dir", t.path.string()}).code == kExitOk);
    const Run r = cli({"eval", "--pred", t / "gt.pfm", "--gt", t / "gt.pfm", "--csv", t / "r.csv"});
    REQUIRE(r.code == kExitOk);
    CHECK(!r.out.empty());
    std::istringstream csv(slurp(t / "r.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
        ++rows;
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        for (int k = 0; k < 6; ++k) {
            std::getline(cells, cell, ',');
            CHECK(std::stod(cell) == 0.0);
        }
    }
    CHECK(rows == 3);
}

TEST_CASE("train with zero steps writes the initialization") {
    TempDir t("train");
    const Run r = cli({"train", "--ckpt", t / "m.ckpt", "--steps", "0", "--seed", "5", "--net.levels", "2",
                       "--net.channels", "3,4", "--net.mlp_hidden", "8"});
    REQUIRE(r.code == kExitOk);
    CHECK(fs::exists(t / "m.ckpt.run.ini"));
    const RefinementModel loaded = RefinementModel::load(t / "m.ckpt");
    const RefinementModel init(tiny_net(), 5);
    CHECK(loaded.config() == init.config());
    auto it = init.params().begin();
    for (const auto& p : loaded.params()) {
        CHECK(p.name == it->name);
        CHECK(std::equal(p.tensor.values().begin(), p.tensor.values().end(), it->tensor.values().begin()));
        ++it;
    }
}

TEST_CASE("refine at input size, at 2x, and with mismatched inputs") {
    TempDir t("refine");
    REQUIRE(cli({"synth", "--out-dir", t.path.string(), "--width", "32", "--height", "24", "--dmax", "5"}).code == kExitOk);
    REQUIRE(cli({"match", "--left", t / "left.png", "--right", t / "right.png", "--out", t / "raw.pfm", "--dmax", "8"})
                .code == kExitOk);
    RefinementModel(tiny_net(), 1).save(t / "m.ckpt");
    const std::vector<std::string> base{"refine", "--left", t / "left.png", "--right", t / "right.png", "--ckpt", t / "m.ckpt"};
    auto run = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return cli(a).code;
    };
    REQUIRE(run({"--raw", t / "raw.pfm", "--out", t / "r1.pfm"}) == kExitOk);
    CHECK(read_disparity_pfm(t / "r1.pfm").width() == 32);
    CHECK(read_disparity_pfm(t / "r1.pfm").height() == 24);
    REQUIRE(run({"--raw", t / "raw.pfm", "--out", t / "r2.pfm", "--out-w", "64", "--out-h", "48"}) == kExitOk);
    CHECK(read_disparity_pfm(t / "r2.pfm").width() == 64);
    CHECK(read_disparity_pfm(t / "r2.pfm").height() == 48);

    write_disparity_pfm(t / "small.pfm", DisparityMap(16, 12, 1.0));
    CHECK(run({"--raw", t / "small.pfm", "--out", t / "r3.pfm"}) == kExitConfig);

    std::ofstream(t / "m.ckpt.card", std::ios::trunc) << NetConfig{}.to_card();
    CHECK(run({"--raw", t / "raw.pfm", "--out", t / "r4.pfm"}) == kExitConfig);
}

TEST_CASE("export-ply writes one vertex per positive disparity") {
    TempDir t("ply");
    REQUIRE(cli({"synth", "--out-dir", t.path.string(), "--width", "32", "--height", "24", "--dmax", "5"}).code == kExitOk);
    const Run r = cli({"export-ply", "--disp", t / "gt.pfm", "--image", t / "left.png", "--out", t / "c.ply", "--ascii"});
    REQUIRE(r.code == kExitOk);
    const DisparityMap gt = read_disparity_pfm(t / "gt.pfm");
    std::size_t positive = 0;
    for (double v : gt.grid().data()) positive += v > 1e-3;
    CHECK(r.out.rfind(std::to_string(positive) + " vertices", 0) == 0);
    CHECK(slurp(t / "c.ply").find("element vertex " + std::to_string(positive)) != std::string::npos);
}
