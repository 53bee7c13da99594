#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <array>
#include <cmath>
#include <sstream>

#include "cli.hpp"
#include "vtest/asymptotic.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "vtest");
    std::ostringstream out;
    std::ostringstream err;
    const int code = vtest::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("vtest-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& body) {
        const auto p = dir_ / name;
        std::ofstream(p) << body;
        return p.string();
    }
    std::string cache() const { return (dir_ / "cache").string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ExactOneSided) {
    const auto r = run({"test", "--x", file("x", "1.0\n"), "--y", file("y", "2.0\n"), "--json", "--cache-dir", cache()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["R"], 1);
    EXPECT_EQ(j["D"]["exact"], "1/1");
    EXPECT_EQ(j["T"], 1.0);
    EXPECT_EQ(j["p_value"]["exact"], "0/1");
    EXPECT_EQ(j["method"], "exact");
}

TEST_F(CliTest, ExactAtom) {
    const auto r = run({"test", "--x", file("x", "2.0\n"), "--y", file("y", "1.0\n"), "--json", "--no-cache"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["T"], 0.0);
    EXPECT_EQ(j["p_value"]["exact"], "1/2");
    EXPECT_EQ(j["p_value"]["float"], 0.5);
}

TEST_F(CliTest, TwoSidedIsAsymptotic) {
    const auto r = run({"test", "--x", file("x", "1.0\n"), "--y", file("y", "2.0\n"), "--two-sided", "--json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["method"], "asymptotic");
    EXPECT_DOUBLE_EQ(j["p_value"]["float"].get<double>(), 1.0 - vtest::two_sided_cdf(std::sqrt(2.0)));
    EXPECT_TRUE(j["p_value"]["exact"].is_null());
}

TEST_F(CliTest, AutoFallsBackForUnequalRatio) {
    const auto r = run({"test", "--x", file("x", "1\n2\n3\n"), "--y", file("y", "0.5\n1.5\n2.5\n3.5\n"), "--json"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["method"], "asymptotic");
    EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, AutoRespectsTableCap) {
    const auto r = run({"test", "--x", file("x", "1\n2\n"), "--y", file("y", "0.5\n1.5\n"), "--json", "--table-cap",
                        "3", "--no-cache"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["method"], "asymptotic");
}

TEST_F(CliTest, AlphaDecision) {
    const auto r = run({"test", "--x", file("x", "1\n2\n3\n"), "--y", file("y", "4\n5\n6\n"), "--alpha", "0.1",
                        "--json", "--no-cache"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["p_value"]["exact"], "0/1");
    EXPECT_TRUE(j["reject"].get<bool>());
    const auto text = run({"test", "--x", file("x", "1\n2\n3\n"), "--y", file("y", "4\n5\n6\n"), "--alpha", "0.1",
                           "--no-cache"});
    EXPECT_NE(text.out.find("reject H0"), std::string::npos);
}

TEST_F(CliTest, CommentsAndBlankLines) {
    const auto r = run({"test", "--x", file("x", "# header\n1.0\n\n  3.0  \n"), "--y", file("y", "2.0\n# c\n4.0\n"),
                        "--json", "--no-cache"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["n"], 2);
}

TEST_F(CliTest, InputErrors) {
    const auto bad = run({"test", "--x", file("x", "1.0\nabc\n2\nnan\n"), "--y", file("y", "2.0\n")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("line 2"), std::string::npos);
    EXPECT_NE(bad.err.find("line 4"), std::string::npos);
    EXPECT_TRUE(bad.out.empty());
    EXPECT_EQ(run({"test", "--x", file("x", "# nothing\n"), "--y", file("y", "1\n")}).code, 2);
    EXPECT_EQ(run({"test", "--x", (dir_ / "missing").string(), "--y", file("y", "1\n")}).code, 2);
    EXPECT_EQ(run({"test", "--x", file("x", "1\n")}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"test", "--x", file("x", "1\n"), "--y", file("y", "2\n"), "--method", "magic"}).code, 2);
}

TEST_F(CliTest, Ties) {
    const auto x = file("x", "1.0\n2.0\n");
    const auto y = file("y", "2.0\n3.0\n");
    const auto r = run({"test", "--x", x, "--y", y});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("tie"), std::string::npos);
    const auto ok = run({"test", "--x", x, "--y", y, "--tie-policy", "x-first", "--json", "--no-cache"});
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(nlohmann::json::parse(ok.out)["warnings"].size(), 1u);
}

TEST_F(CliTest, Help) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST_F(CliTest, DistSupport) {
    const auto r = run({"dist", "--n", "1", "--p", "1", "--support", "--no-cache"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, row1, row2, extra;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    EXPECT_FALSE(std::getline(in, extra));
    EXPECT_EQ(header, "x,x_squared,mass,cdf,cdf_float,pairs");
    EXPECT_EQ(row1.rfind("0,0/1,1/2,1/2,", 0), 0u) << row1;
    EXPECT_NE(row2.find(",2/1,1/2,1/1,1,"), std::string::npos) << row2;
}

TEST_F(CliTest, DistTerminalValueAndGrid) {
    const auto r = run({"dist", "--n", "2", "--p", "1", "--no-cache"});
    ASSERT_EQ(r.code, 0);
    const auto last = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
    EXPECT_NE(last.find(",1/1,1,"), std::string::npos) << last;

    const auto out = (dir_ / "j.csv").string();
    const auto g = run({"dist", "--n", "1", "--p", "1", "--grid", "-1,0.5,1", "--out", out, "--no-cache"});
    ASSERT_EQ(g.code, 0);
    EXPECT_TRUE(g.out.empty());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "x,cdf,cdf_float\n-1,0/1,0\n0.5,1/2,0.5\n1,1/1,1\n");
}

TEST_F(CliTest, DistFigureCase) {
    const auto r = run({"dist", "--n", "10", "--p", "2", "--cache-dir", cache()});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find(",1/1,1,"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "cache"));
}

TEST_F(CliTest, Curves) {
    const auto r = run({"curves", "--pairs", "10:20,60:60", "--grid-max", "4", "--grid-steps", "200", "--cache-dir",
                        cache()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,K_10_20,K_60_60,K");
    std::vector<std::array<double, 4>> rows;
    while (std::getline(in, line)) {
        std::array<double, 4> v{};
        std::istringstream ls(line);
        std::string cell;
        for (auto& c : v) {
            std::getline(ls, cell, ',');
            c = std::stod(cell);
        }
        rows.push_back(v);
    }
    ASSERT_EQ(rows.size(), 201u);
    EXPECT_EQ(rows[0][3], 0.0);
    EXPECT_GT(rows[0][1], 0.0);
    EXPECT_GT(rows[0][2], 0.0);
    double sup_small = 0.0;
    double sup_large = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 1; c <= 3; ++c) {
            EXPECT_GE(rows[i][c], 0.0);
            EXPECT_LE(rows[i][c], 1.0);
            if (i > 0) EXPECT_GE(rows[i][c], rows[i - 1][c]);
        }
        sup_small = std::max(sup_small, std::fabs(rows[i][1] - rows[i][3]));
        sup_large = std::max(sup_large, std::fabs(rows[i][2] - rows[i][3]));
    }
    EXPECT_LT(sup_large, sup_small);
    EXPECT_EQ(run({"curves", "--pairs", "3:4"}).code, 2);
}

TEST_F(CliTest, SimulateIsReproducible) {
    const std::vector<std::string> args{"simulate", "--n-list", "10,20", "--reps", "50", "--seed", "9", "--json",
                                        "--cache-dir", cache()};
    auto a1 = args;
    a1.insert(a1.end(), {"--threads", "1"});
    auto a3 = args;
    a3.insert(a3.end(), {"--threads", "3"});
    const auto r1 = run(a1);
    const auto r3 = run(a3);
    ASSERT_EQ(r1.code, 0) << r1.err;
    EXPECT_EQ(r1.out, r3.out);
    const auto j = nlohmann::json::parse(r1.out);
    EXPECT_EQ(j["rows"].size(), 2u);
    EXPECT_FALSE(j["rows"][0].contains("runtime_seconds"));
    const auto timed = run({"simulate", "--n-list", "10", "--reps", "5", "--json", "--timing", "--no-cache"});
    EXPECT_TRUE(nlohmann::json::parse(timed.out)["rows"][0].contains("runtime_seconds"));
}

TEST_F(CliTest, SimulateTextAndPower) {
    const auto r = run({"simulate", "--n-list", "10", "--reps", "1", "--alpha", "0.05", "--no-cache"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("p_V"), std::string::npos);
    EXPECT_NE(r.out.find("rate_V"), std::string::npos);
}

TEST_F(CliTest, SimulateExample1) {
    const auto r = run({"simulate", "--model", "example1", "--tau-q", "0.2", "--delta", "2", "--base", "normal",
                        "--n-list", "20", "--reps", "40", "--json", "--no-cache"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["config"]["beta"].get<double>(), 0.75);
    EXPECT_EQ(run({"simulate", "--model", "example1", "--delta", "0.5", "--no-cache"}).code, 2);
}

TEST_F(CliTest, OracleCases) {
    const auto r = run({"oracle", "--max-total", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* c : {"n=1 p=1 ", "n=2 p=1 ", "n=1 p=2 ", "n=1 p=3 "}) {
        EXPECT_NE(r.out.find(std::string("PASS ") + c), std::string::npos) << c;
    }
    EXPECT_EQ(r.out.find("n=1 p=4"), std::string::npos);
    const auto j = nlohmann::json::parse(run({"oracle", "--max-total", "12", "--json"}).out);
    EXPECT_TRUE(j["pass"].get<bool>());
}

TEST_F(CliTest, OracleBridge) {
    const auto r = run({"oracle", "--max-total", "2", "--bridge", "--grid", "1000", "--reps", "5000"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("PASS bridge K "), std::string::npos);
    EXPECT_NE(r.out.find("PASS bridge K* "), std::string::npos);
}
