#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SIGNDIM_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("signdim_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir_;
};

const char* kSingleDown =
    "comment_id,voter_id,vote\n"
    "c1,v1,up\nc1,v2,up\nc1,v3,up\n"
    "c2,v1,up\nc2,v2,down\nc2,v3,up\n"
    "c3,v1,up\nc3,v2,up\nc3,v3,up\n";

}  // namespace

TEST_F(Cli, AnalyzeReportsTwo) {
    const auto r = run("analyze -i " + write("d.csv", kSingleDown));
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("dimension").at("r_estimate"), 2);
    EXPECT_EQ(j.at("schema_version"), 1);
}

TEST_F(Cli, ConflictExitsThreeAndNamesPair) {
    const auto r = run("analyze -i " + write("c.csv", "comment_id,voter_id,vote\nq9,bob,up\nq9,bob,down\n"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.out.find("q9"), std::string::npos);
    EXPECT_NE(r.out.find("bob"), std::string::npos);
}

TEST_F(Cli, EmptyFileExitsFour) { EXPECT_EQ(run("analyze -i " + write("e.csv", "")).code, 4); }

TEST_F(Cli, MissingFileExitsTwo) { EXPECT_EQ(run("analyze -i " + (dir_ / "nope.csv").string()).code, 2); }

TEST_F(Cli, BadHeaderExitsThree) { EXPECT_EQ(run("dim -i " + write("b.csv", "a,b,c\nx,y,up\n")).code, 3); }

TEST_F(Cli, DimMaxExactOneGivesRankOneWitness) {
    const auto r = run("dim --max-exact 1 -i " + write("u.csv", "comment_id,voter_id,vote\na,x,up\nb,x,down\n"));
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("method"), "ExactRankOne");
    EXPECT_EQ(j.at("rank_one_witness").at("comment_signs"), json({1, -1}));
}

TEST_F(Cli, ExportSmtThenValidateModel) {
    const std::string in = write("one.csv", "comment_id,voter_id,vote\na,x,up\n");
    const auto smt = run("export-smt --r 1 -i " + in);
    ASSERT_EQ(smt.code, 0);
    EXPECT_NE(smt.out.find("(assert (> (* c_0_0 v_0_0) 0.0))"), std::string::npos);
    const std::string model = write("m.txt", "sat\n((define-fun c_0_0 () Real 2.0)\n (define-fun v_0_0 () Real 0.5))\n");
    const auto ok = run("feas --r 1 -i " + in + " --model " + model);
    ASSERT_EQ(ok.code, 0) << ok.out;
    EXPECT_EQ(json::parse(ok.out).at("status"), "Feasible");
    const std::string bad = write("bad.txt", "((define-fun c_0_0 () Real 2.0) (define-fun v_0_0 () Real (- 1.0)))");
    EXPECT_EQ(run("feas --r 1 -i " + in + " --model " + bad).code, 4);
}

TEST_F(Cli, EmbedThenPredict) {
    const std::string emb = (dir_ / "emb.json").string();
    ASSERT_EQ(run("embed --r 2 --epochs 50 -i " + write("d.csv", kSingleDown) + " -o " + emb).code, 0);
    const auto r = run("predict --embedding " + emb + " --comment c2 --voter v2");
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = json::parse(r.out);
    EXPECT_GE(j.at("p_up").get<double>(), 0.0);
    EXPECT_LE(j.at("p_up").get<double>(), 1.0);
    EXPECT_EQ(run("predict --embedding " + emb + " --comment nobody --voter v2").code, 4);
}

TEST_F(Cli, SeededCommandsAreReproducible) {
    const std::string votes = (dir_ / "sim.csv").string();
    ASSERT_EQ(run("--seed 3 simulate --comments 12 --voters 10 --observe-prob 0.6 -o " + votes).code, 0);
    for (const std::string cmd : {"bound", "embed --epochs 40", "loo --max-holdouts 20 --epochs 40"}) {
        const auto a = run("--seed 9 " + cmd + " -i " + votes);
        const auto b = run("--seed 9 " + cmd + " -i " + votes);
        ASSERT_EQ(a.code, 0) << cmd << a.out;
        EXPECT_EQ(a.out, b.out) << cmd;
    }
}

TEST_F(Cli, ConfigFileAndFlagOverride) {
    const std::string votes = (dir_ / "sim.csv").string();
    ASSERT_EQ(run("simulate --comments 8 --voters 8 -o " + votes).code, 0);
    const std::string cfg = write("cfg.toml", "[fit]\nr = 3\nepochs = 5\n");
    EXPECT_EQ(json::parse(run("--config " + cfg + " embed -i " + votes).out).at("r"), 3);
    EXPECT_EQ(json::parse(run("--config " + cfg + " embed --r 1 -i " + votes).out).at("r"), 1);
}

TEST_F(Cli, BatchEmitsJsonLines) {
    const fs::path corpus = dir_ / "corpus";
    fs::create_directories(corpus);
    for (int k = 0; k < 3; ++k) {
        const std::string base = (corpus / ("d" + std::to_string(k))).string();
        ASSERT_EQ(run("--seed " + std::to_string(k) + " simulate --comments 10 --voters 12 --observe-prob 0.5 -o " +
                      base + ".csv --texts " + base + ".texts.csv")
                      .code,
                  0);
    }
    const auto r = run("analyze --batch-dir " + corpus.string());
    ASSERT_EQ(r.code, 0) << r.out;
    std::istringstream lines(r.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const json j = json::parse(line);
        EXPECT_TRUE(j.at("lexical_similarity").is_number());
        ++n;
    }
    EXPECT_EQ(n, 3);
}
