#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fcm/cli.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out, err;
};

Run fcmbench(std::vector<std::string> args) {
    args.insert(args.begin(), "fcmbench");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = fcm::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("fcm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }
    void write_curve(const std::string& name, fcm::bd::RdSeries s) const {
        std::ofstream(p(name)) << fcm::bd::to_json(s).dump();
    }
};

const fcm::bd::RdSeries kCurve{"a", {{22, 8000, 44, 0.001}, {27, 5000, 41, 0.002}, {32, 3200, 38, 0.004}, {37, 2000, 35, 0.008}}};

TEST_F(Cli, UsageErrorsExitOne) {
    auto r = fcmbench({});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(fcmbench({"transcode"}).code, 1);
    EXPECT_EQ(fcmbench({"profiles", "list", "--colour"}).code, 1);
    EXPECT_EQ(fcmbench({"encode", "-i", p("x.pkv")}).code, 1);  // -o missing
    EXPECT_EQ(fcmbench({"encode", "--qp", "99", "-i", p("x"), "-o", p("y")}).code, 1);
    EXPECT_EQ(fcmbench({"profiles"}).code, 1);
}

TEST_F(Cli, HelpExitsZero) {
    const auto r = fcmbench({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("sweep"), std::string::npos);
    EXPECT_EQ(fcmbench({"sweep", "--help"}).code, 0);
}

TEST_F(Cli, ProfilesShowFastest) {
    const auto r = fcmbench({"profiles", "show", "fastest"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("parts: E"), std::string::npos);
    EXPECT_NE(r.out.find("enc time 4.34%"), std::string::npos);
    EXPECT_NE(r.out.find("avg BD-rate 1.71%"), std::string::npos);
    for (const char* g : {"G3", "G6", "G8", "G5", "G2", "G7"}) EXPECT_NE(r.out.find(g), std::string::npos) << g;
    const auto j = nlohmann::json::parse(fcmbench({"profiles", "show", "fastest", "--json"}).out);
    EXPECT_EQ(j["published"]["enc_time"], 4.34);
    EXPECT_EQ(j["delta"]["max_mtt_depth"], 1);
    EXPECT_EQ(fcmbench({"profiles", "show", "G9"}).code, 1);
}

TEST_F(Cli, ProfilesOverlayAndResolve) {
    EXPECT_EQ(fcmbench({"profiles", "overlay", "G6"}).out, "ALF=0\nDBF=0\nSAO=0\n");
    EXPECT_NE(fcmbench({"profiles", "overlay", "G2"}).out.find("MaxMTTHierarchyDepth=1"), std::string::npos);
    EXPECT_NE(fcmbench({"profiles", "resolve", "G8"}).out.find("search_range=16"), std::string::npos);
    EXPECT_EQ(fcmbench({"profiles", "list"}).code, 0);
}

TEST_F(Cli, BdrateIdentityPrintsZero) {
    write_curve("a.json", kCurve);
    const auto r = fcmbench({"bdrate", "--anchor", p("a.json"), "--test", p("a.json")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "0.00\n");
    auto half = kCurve;
    for (auto& s : half.points) s.rate_bits /= 2;
    write_curve("h.json", half);
    EXPECT_EQ(fcmbench({"bdrate", "--anchor", p("a.json"), "--test", p("h.json")}).out, "-50.00\n");
}

TEST_F(Cli, BdrateErrors) {
    write_curve("a.json", kCurve);
    std::ofstream(p("junk.json")) << "{ nope";
    EXPECT_EQ(fcmbench({"bdrate", "--anchor", p("a.json"), "--test", p("junk.json")}).code, 2);
    EXPECT_EQ(fcmbench({"bdrate", "--anchor", p("a.json"), "--test", p("none.json")}).code, 1);
    auto bent = kCurve;
    bent.points[1].psnr = 30;
    write_curve("bent.json", bent);
    EXPECT_EQ(fcmbench({"bdrate", "--anchor", p("a.json"), "--test", p("bent.json")}).code, 1);
}

TEST_F(Cli, CorruptInputsExitTwo) {
    std::ofstream(p("bad.fcb")) << "FCB1garbage";
    EXPECT_EQ(fcmbench({"decode", "-i", p("bad.fcb"), "-o", p("out.pkv")}).code, 2);
    std::ofstream(p("bad.pkv")) << "XXXX";
    EXPECT_EQ(fcmbench({"unpack", "-i", p("bad.pkv"), "-o", p("out.fct")}).code, 2);
    EXPECT_FALSE(fs::exists(p("out.pkv")));
}

TEST_F(Cli, PathsAreCheckedBeforeWork) {
    EXPECT_EQ(fcmbench({"pack", "--content", "synth:fpn", "-o", p("missing/dir/a.pkv")}).code, 1);
    EXPECT_EQ(fcmbench({"pack", "-o", p("a.pkv")}).code, 1);
    EXPECT_EQ(fcmbench({"pack", "--content", "synth:resnet", "-o", p("a.pkv")}).code, 1);
    EXPECT_EQ(fcmbench({"sweep", "--content", "synth:fpn", "--qp", "22,27,32", "--store", p("s")}).code, 1);
    EXPECT_EQ(fcmbench({"sweep", "--content", "synth:fpn", "--profiles", "G9", "--store", p("s")}).code, 1);
    EXPECT_FALSE(fs::exists(p("s")));
}

TEST_F(Cli, PartialSweepFailureExitsThree) {
    std::ofstream(p("blocker")) << "x";
    const auto r = fcmbench({"sweep", "--content", "synth:darknet_reduced", "--base", "8x8", "--frames", "1", "--store", p("blocker")});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("failed"), std::string::npos);
}

TEST_F(Cli, EndToEndPipeline) {
    const std::vector<std::string> synth = {"--content", "synth:darknet_reduced", "--base", "16x16", "--seed", "7"};
    auto with = [&](std::vector<std::string> a) {
        a.insert(a.end(), synth.begin(), synth.end());
        return a;
    };
    ASSERT_EQ(fcmbench(with({"pack", "-o", p("a.pkv")})).code, 0);
    ASSERT_EQ(fcmbench({"encode", "-i", p("a.pkv"), "-o", p("a.fcb"), "--qp", "32", "--cu-csv", p("a.csv"), "--profile", "G1"}).code, 0);
    ASSERT_EQ(fcmbench({"decode", "-i", p("a.fcb"), "-o", p("d.pkv"), "--layout", p("a.pkv")}).code, 0);
    ASSERT_EQ(fcmbench({"unpack", "-i", p("d.pkv"), "-o", p("d.fct")}).code, 0);
    EXPECT_EQ(fcm::load_tensor_set(p("d.fct")).tensors.size(), 3u);

    const auto st = fcmbench({"stats", "-i", p("a.csv"), "--json", "--map", p("m.ppm")});
    ASSERT_EQ(st.code, 0) << st.err;
    const auto rep = nlohmann::json::parse(st.out);
    EXPECT_GT(rep["cu_count"].get<int>(), 0);
    EXPECT_TRUE(fs::file_size(p("m.ppm")) > 0);

    const auto sw = with({"sweep", "--profiles", "default,G6", "--store", p("store"), "--export", p("exp"), "--json"});
    const auto first = fcmbench(sw);
    ASSERT_EQ(first.code, 0) << first.err;
    const auto j1 = nlohmann::json::parse(first.out);
    EXPECT_EQ(j1["cells"], 8);
    EXPECT_EQ(j1["encodes"], 8);
    EXPECT_EQ(j1["scale"], "mini-codec scale");
    EXPECT_TRUE(fs::exists(p("exp/default.json")));
    const auto again = nlohmann::json::parse(fcmbench(sw).out);
    EXPECT_EQ(again["encodes"], 0);
    EXPECT_EQ(again["store_hits"], 8);

    const auto pa = fcmbench({"pareto", "-i", p("exp/comparison.json"), "--json"});
    ASSERT_EQ(pa.code, 0) << pa.err;
    EXPECT_GE(nlohmann::json::parse(pa.out).size(), 1u);
    const auto bd = fcmbench({"bdrate", "--anchor", p("exp/default.json"), "--test", p("exp/default.json")});
    EXPECT_EQ(bd.out, "0.00\n");
}

}  // namespace
