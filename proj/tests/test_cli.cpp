#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "riesz/cli.hpp"

using namespace riesz;
using namespace riesz::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto p = fs::path(::testing::TempDir()) / ("cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_args(std::vector<std::string> args, std::string* out_text = nullptr) {
    std::vector<const char*> argv{"riesz"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str() + err.str();
    return code;
}

// Exit status of the installed binary, or -1 when it is not available.
int run_binary(const std::string& args) {
    const char* exe = std::getenv("RIESZ_CLI");
    if (!exe) return -1;
    const int status = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Parsing, Lists) {
    EXPECT_EQ(parse_int_list("dims", "4, 6,8"), (std::vector<int>{4, 6, 8}));
    EXPECT_THROW(parse_int_list("dims", ""), UsageError);
    EXPECT_THROW(parse_int_list("dims", " , "), UsageError);
    EXPECT_THROW(parse_int_list("dims", "4,x"), UsageError);
    EXPECT_THROW(parse_int("n", "3.5"), UsageError);
    EXPECT_EQ(parse_double_list("t", "0.1,1e-2"), (std::vector<double>{0.1, 0.01}));
}

TEST(Parsing, Grids) {
    const auto g = parse_t_grid("-2:3:1");
    EXPECT_EQ(g.n_min, -2);
    EXPECT_EQ(g.n_max, 3);
    EXPECT_EQ(g.depth, 1);
    EXPECT_THROW(parse_t_grid("1:2"), UsageError);
    EXPECT_THROW(parse_t_grid("3:1:2"), UsageError);
    const auto xs = parse_x_grid("log:1e-3:1e3:200");
    EXPECT_EQ(xs.size(), 200u);
    EXPECT_NEAR(xs.front(), 1e-3, 1e-18);
    EXPECT_EQ(parse_x_grid("lin:0:100:201")[1], 0.5);
    EXPECT_THROW(parse_x_grid("cubic:0:1:3"), UsageError);
    EXPECT_THROW(parse_x_grid("log:0:1:3"), UsageError);
    EXPECT_TRUE(parse_bool("x", "true"));
    EXPECT_THROW(parse_bool("x", "maybe"), UsageError);
}

TEST(Config, JsonFieldsAndUnknownKeys) {
    const auto c = config_from_json(nlohmann::json::parse(
        R"({"command":"norm-sweep","seed":7,"output_dir":"o","overrides":{"dims":[4,6],"trials":2,"band":2.5}})"));
    EXPECT_EQ(c.command, "norm-sweep");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.output_dir, "o");
    EXPECT_EQ(c.overrides.at("dims"), "4,6");
    EXPECT_EQ(c.overrides.at("trials"), "2");
    EXPECT_EQ(c.overrides.at("band"), "2.5");
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"cmd":"ineq"})")), UsageError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"seed":-1})")), UsageError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"([1,2])")), UsageError);
    RunConfig bad{"ineq", 42, "o", {{"trials", "3"}}};
    EXPECT_THROW(validate(bad), UsageError);
    RunConfig unknown{"explode", 42, "o", {}};
    EXPECT_THROW(validate(unknown), UsageError);
}

TEST(Config, FlagsOverrideFile) {
    const auto dir = fresh_dir("override");
    fs::create_directories(dir);
    const auto cfg = dir / "run.json";
    std::ofstream(cfg) << R"({"command":"ineq","seed":5,"output_dir":")" << (dir / "a").string()
                       << R"(","overrides":{"g":"const","lmax":8}})";
    const char* argv[] = {"riesz", "--config", cfg.c_str(), "--lmax", "3", "--seed", "9"};
    const auto c = parse_args(7, argv);
    EXPECT_EQ(c.command, "ineq");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.overrides.at("lmax"), "3");
    EXPECT_EQ(c.overrides.at("g"), "const");
    EXPECT_EQ(c.output_dir, (dir / "a").string());
    const char* sub[] = {"riesz", "--config", cfg.c_str(), "verify-specfun"};
    EXPECT_EQ(parse_args(4, sub).command, "verify-specfun");
}

TEST(Run, InequalityWritesFilesAndPasses) {
    const auto dir = fresh_dir("ineq");
    std::string text;
    EXPECT_EQ(run_args({"ineq", "--g", "linear", "--lmax", "10", "--output", dir.string()}, &text), kPass);
    EXPECT_TRUE(fs::exists(dir / "ineq.csv"));
    EXPECT_TRUE(fs::exists(dir / "ineq.json"));
    EXPECT_NE(text.find("rhs"), std::string::npos);
    EXPECT_NE(text.find("0 failed"), std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "ineq.json"));
    EXPECT_EQ(j["parameters"]["g"], "linear");
    EXPECT_FALSE(j["created_at"].get<std::string>().empty());
}

TEST(Run, RerunReproducesCsvBytes) {
    const auto a = fresh_dir("rep_a"), b = fresh_dir("rep_b");
    const std::vector<std::string> common{"poisson", "--dims", "3", "--grid-n", "8", "--trials", "2", "--seed", "11"};
    auto args_a = common, args_b = common;
    args_a.insert(args_a.end(), {"--output", a.string()});
    args_b.insert(args_b.end(), {"--output", b.string()});
    EXPECT_EQ(run_args(args_a), kPass);
    EXPECT_EQ(run_args(args_b), kPass);
    EXPECT_EQ(slurp(a / "poisson.csv"), slurp(b / "poisson.csv"));
    EXPECT_NE(slurp(a / "poisson.csv").find("poisson,11,3,8,"), std::string::npos);
}

TEST(Run, ExitCodes) {
    const auto dir = fresh_dir("codes").string();
    EXPECT_EQ(run_args({"norm-sweep", "--dims", "", "--output", dir}), kUsage);
    EXPECT_EQ(run_args({"ineq", "--trials", "2", "--output", dir}), kUsage);
    EXPECT_EQ(run_args({"ineq", "--g", "bogus", "--output", dir}), kUsage);
    EXPECT_EQ(run_args({"--output", dir}), kUsage);
    EXPECT_EQ(run_args({"frobnicate"}), kUsage);
    EXPECT_EQ(run_args({"factorization", "--dims", "4", "--grid-n", "4096", "--output", dir}), kResource);
    EXPECT_EQ(run_args({"factorization", "--dims", "4,6", "--output", dir}), kUsage);
    // A failing bound: the halving clause of the rotation check at 256 angles.
    EXPECT_EQ(run_args({"rotation", "--output", dir}), kBoundFailure);
    std::string help;
    EXPECT_EQ(run_args({"--help"}, &help), kPass);
    EXPECT_NE(help.find("norm-sweep"), std::string::npos);
}

TEST(Run, VerifyMultiplier) {
    const auto dir = fresh_dir("vm");
    EXPECT_EQ(run_args({"verify-multiplier", "--d", "4,8", "--x-grid", "log:1e-3:1e3:40", "--output", dir.string()}), kPass);
    EXPECT_TRUE(fs::exists(dir / "verify_multiplier.csv"));
}

TEST(Report, MergesAndDetectsConflicts) {
    const auto dir = fresh_dir("report");
    ASSERT_EQ(run_args({"ineq", "--output", (dir / "x").string()}), kPass);
    ASSERT_EQ(run_args({"ineq", "--g", "sin:8", "--output", (dir / "y").string()}), kPass);
    std::string text;
    EXPECT_EQ(run_args({"report", (dir / "x" / "ineq.csv").string(), "--output", (dir / "m").string()}, &text), kPass);
    EXPECT_NE(text.find("ineq.rhs"), std::string::npos);
    EXPECT_EQ(slurp(dir / "m" / "report.csv"), slurp(dir / "x" / "ineq.csv"));
    // Same id and seed with different values.
    EXPECT_EQ(run_args({"report", (dir / "x" / "ineq.csv").string(), (dir / "y" / "ineq.csv").string(), "--output",
                        (dir / "m").string()}),
              kUsage);
    EXPECT_EQ(run_args({"report", (dir / "missing.csv").string()}), kUsage);
}

TEST(Binary, ProcessExitStatus) {
    if (!std::getenv("RIESZ_CLI")) GTEST_SKIP() << "RIESZ_CLI not set";
    const auto dir = fresh_dir("bin").string();
    EXPECT_EQ(run_binary("ineq --output " + dir), 0);
    EXPECT_EQ(run_binary("norm-sweep --dims '' --output " + dir), 2);
    EXPECT_EQ(run_binary("factorization --grid-n 4096 --output " + dir), 3);
}
