#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kcmc/cli.hpp"

using namespace kcmc;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "kruskal-cmc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path tmp(const std::string& name) {
    const fs::path p = fs::path(KCMC_TEST_TMP) / "cli_unit" / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(CliSlice, CrossingSliceCsv) {
    const CliRun r = run({"slice", "--M", "1", "--H", "0", "--c", "1", "--branch", "minus", "--xmax", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    const Hypersurface s = read_slice_csv(in);
    EXPECT_NEAR(slice_T_at(s, 0.0), -0.6349270895, 1e-9);
    EXPECT_NE(r.out.find("\n0,-0.63492708951"), std::string::npos);
}

TEST(CliSlice, MaximalFromCurve) {
    const CliRun r = run({"slice", "--c", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    for (const auto& pt : read_slice_csv(in).samples) EXPECT_EQ(pt.T, 0.0);
}

TEST(CliSlice, NoRootExitsTwo) {
    const CliRun r = run({"slice", "--H", "0", "--c", "5"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("1.299038"), std::string::npos) << r.err;
}

TEST(CliSlice, JsonFormatAndFile) {
    const fs::path out = tmp("slice.json");
    const CliRun r = run({"slice", "--H", "-1", "--c", "6", "--format", "json", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const Hypersurface s = slice_from_json(read_json_file(out.string()));
    EXPECT_EQ(s.kind, SliceKind::InteriorPlus);
    EXPECT_EQ(s.params.c, 6.0);
}

TEST(CliFoliation, DefaultRun) {
    const fs::path dir = tmp("fol");
    const CliRun r = run({"foliation", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const FoliationIndex idx = index_from_json(read_json_file((dir / "index.json").string()));
    ASSERT_EQ(idx.leaves.size(), 41u);
    for (std::size_t i = 0; i < idx.leaves.size(); ++i) {
        EXPECT_TRUE(fs::exists(dir / idx.leaves[i].file));
        if (i > 0) {
            EXPECT_LT(idx.leaves[i].H, idx.leaves[i - 1].H);
            EXPECT_LT(idx.leaves[i].T_intercept, idx.leaves[i - 1].T_intercept);
        }
    }
    // pairing symmetry T(-c) = -T(c) for A = 0
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(idx.leaves[i].T_intercept, -idx.leaves[40 - i].T_intercept);
    }

    // a point from an emitted leaf locates back to that leaf
    const auto& e = idx.leaves[30];
    std::ifstream in(dir / e.file);
    const Hypersurface s = read_slice_csv(in);
    const SlicePoint pt = s.samples[s.samples.size() * 7 / 10];
    const CliRun loc = run({"locate", "--T", format_double(pt.T), "--X", format_double(pt.X)});
    ASSERT_EQ(loc.code, 0) << loc.err;
    EXPECT_NEAR(json::parse(loc.out).at("c").get<double>(), e.c, 1e-6 * std::max(1.0, std::abs(e.c)));

    // plot of the whole family, deterministic
    const fs::path svg1 = tmp("fol1.svg");
    const fs::path svg2 = tmp("fol2.svg");
    ASSERT_EQ(run({"plot", "--index", (dir / "index.json").string(), "--out", svg1.string()}).code, 0);
    ASSERT_EQ(run({"plot", "--index", (dir / "index.json").string(), "--out", svg2.string()}).code, 0);
    const std::string a = slurp(svg1);
    EXPECT_EQ(a, slurp(svg2));
    std::size_t count = 0;
    for (auto p = a.find("id=\"leaf-"); p != std::string::npos; p = a.find("id=\"leaf-", p + 1)) ++count;
    EXPECT_EQ(count, 41u);

    // same config, byte-identical leaf files
    const fs::path again = tmp("fol_again");
    ASSERT_EQ(run({"foliation", "--out", again.string()}).code, 0);
    EXPECT_EQ(slurp(dir / "leaf_0007.csv"), slurp(again / "leaf_0007.csv"));
}

TEST(CliFoliation, SingletonAndShifted) {
    const fs::path one = tmp("fol_one");
    ASSERT_EQ(run({"foliation", "--out", one.string(), "--c-list", "0"}).code, 0);
    const FoliationIndex idx = index_from_json(read_json_file((one / "index.json").string()));
    ASSERT_EQ(idx.leaves.size(), 1u);
    EXPECT_EQ(idx.leaves[0].H, 0.0);

    const fs::path sh = tmp("fol_shift");
    ASSERT_EQ(run({"foliation", "--out", sh.string(), "--A", "0.5", "--c-list", "-2", "2"}).code, 0);
    const FoliationIndex s = index_from_json(read_json_file((sh / "index.json").string()));
    ASSERT_EQ(s.leaves.size(), 2u);
    EXPECT_GT(std::abs(s.leaves[0].T_intercept + s.leaves[1].T_intercept), 1e-3);
}

TEST(CliLocate, Anchors) {
    CliRun r = run({"locate", "--T", "0", "--X", "1.2"});
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(r.out);
    EXPECT_EQ(j.at("c").get<double>(), 0.0);
    EXPECT_EQ(j.at("H").get<double>(), 0.0);
    EXPECT_EQ(j.at("branch").get<std::string>(), "maximal");
    for (const char* key : {"c", "H", "r", "branch", "residual_T"}) EXPECT_TRUE(j.contains(key)) << key;
    r = run({"locate", "--T", "0", "--X", "0"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out).at("c").get<double>(), 0.0);
    EXPECT_EQ(run({"locate", "--T", "2", "--X", "0.1"}).code, 2);
}

TEST(CliVerify, SuitesAndReport) {
    const fs::path rep = tmp("prop1.json");
    const CliRun r = run({"verify", "--suite", "prop1", "--report", rep.string()});
    EXPECT_EQ(r.code, 0) << r.out;
    const json j = read_json_file(rep.string());
    EXPECT_TRUE(j.at("pass").get<bool>());
    EXPECT_EQ(run({"verify", "--suite", "mo-family"}).code, 0);
    EXPECT_EQ(run({"verify", "--suite", "bogus"}).code, 2);
}

TEST(CliVerify, FailingCheckExitsOne) {
    // a curve whose decrease certificate fails
    const CliRun r = run({"verify", "--suite", "prop1", "--C", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("FAIL prop1.decreasing"), std::string::npos);
}

TEST(CliPlot, MissingInputsAndMoFamily) {
    EXPECT_EQ(run({"plot", "does/not/exist.csv"}).code, 2);
    EXPECT_EQ(run({"plot", "--index", "does/not/index.json"}).code, 2);
    EXPECT_EQ(run({"plot"}).code, 2);
    const CliRun r = run({"plot", "--mo-family"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("id=\"leaf-0004\""), std::string::npos);
}

TEST(CliConfig, Precedence) {
    const fs::path cfg = tmp("cfg.json");
    {
        std::ofstream os(cfg);
        os << R"({"M": 2.0, "grids": {"X_max": 2.0, "samples_per_side": 11}})";
    }
    // config supplies M and the grid
    CliRun r = run({"--config", cfg.string(), "slice", "--c", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    Hypersurface s = read_slice_csv(in, 2.0);
    EXPECT_EQ(s.samples.size(), 21u);
    EXPECT_EQ(s.samples.back().X, 2.0);
    EXPECT_NEAR(s.samples[10].r, 4.0, 1e-12);
    // flags override the file
    r = run({"slice", "--c", "0", "--config", cfg.string(), "--M", "1", "--xmax", "1.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in2(r.out);
    s = read_slice_csv(in2);
    EXPECT_EQ(s.samples.back().X, 1.5);
    EXPECT_NEAR(s.samples[10].r, 2.0, 1e-12);
}

TEST(CliConfig, InvalidInput) {
    const fs::path cfg = tmp("bad.json");
    {
        std::ofstream os(cfg);
        os << R"({"grids": {"count": 0}})";
    }
    EXPECT_EQ(run({"--config", cfg.string(), "foliation", "--out", tmp("bad_out").string()}).code, 2);
    EXPECT_EQ(run({"--config", "missing.json", "slice", "--c", "0"}).code, 2);
    EXPECT_EQ(run({"slice"}).code, 2);
    EXPECT_EQ(run({"slice", "--c", "0", "--bogus"}).code, 2);
    EXPECT_EQ(run({"--tol-ode", "-1", "slice", "--c", "0"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({}).code, 2);
}
