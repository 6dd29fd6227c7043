#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path out_dir(const std::string& name) {
    const auto dir = fs::path(NFDE_WORK_DIR) / "cli" / name;
    fs::remove_all(dir);
    return dir;
}

int lab(const std::string& args) {
    const std::string cmd = std::string("\"") + NFDE_LAB + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int lab(const std::string& task, const fs::path& config, const fs::path& out) {
    return lab(task + " --config \"" + config.string() + "\" --out \"" + out.string() + "\"");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path kCases(NFDE_CASES_DIR);
const fs::path kConfigs(NFDE_CONFIGS_DIR);

}  // namespace

TEST(Cli, CheckPassingSelfLoop) {
    const auto out = out_dir("check");
    EXPECT_EQ(lab("check", kConfigs / "s1_check.json", out), 0);
    EXPECT_TRUE(fs::exists(out / "result.csv"));
    EXPECT_TRUE(fs::exists(out / "config.echo.json"));
    const std::string summary = slurp(out / "summary.txt");
    EXPECT_NE(summary.find("G5: PASS"), std::string::npos) << summary;
}

TEST(Cli, UnstableWeight) {
    const auto out = out_dir("unstable");
    EXPECT_EQ(lab("check", kCases / "unstable_weight.json", out), 3);
    EXPECT_NE(slurp(out / "summary.txt").find("UnstableMargin"), std::string::npos);
}

TEST(Cli, MissingAlpha) { EXPECT_EQ(lab("check", kCases / "missing_alpha.json", out_dir("alpha")), 2); }

TEST(Cli, FailingCondition) { EXPECT_EQ(lab("check", kCases / "failing_condition.json", out_dir("fail")), 1); }

TEST(Cli, BadArguments) {
    EXPECT_EQ(lab("check"), 2);
    EXPECT_EQ(lab("--config x.json"), 2);
    EXPECT_EQ(lab("check --config \"" + (kCases / "equilibrium.json").string() + "\" --bogus"), 2);
}

TEST(Cli, EquilibriumSimulate) {
    const auto out = out_dir("equilibrium");
    EXPECT_EQ(lab("simulate", kCases / "equilibrium.json", out), 0);
    const std::string csv = slurp(out / "result.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,z1,zhat1,M");
}

TEST(Cli, MassAudit) {
    const auto out = out_dir("mass");
    EXPECT_EQ(lab("mass-audit", kConfigs / "s1_mass_audit.json", out), 0);
    EXPECT_NE(slurp(out / "summary.txt").find("within threshold"), std::string::npos);
}

TEST(Cli, TightMassThresholdIsAnInvariantFailure) {
    const auto dir = out_dir("mass_tight");
    fs::create_directories(dir);
    std::string cfg = slurp(kConfigs / "s1_mass_audit.json");
    cfg.replace(cfg.find("1e-4"), 4, "1e-9");
    std::ofstream(dir / "cfg.json") << cfg;
    EXPECT_EQ(lab("mass-audit", dir / "cfg.json", dir / "out"), 4);
}

TEST(Cli, UnorderedPair) {
    const auto out = out_dir("unordered");
    EXPECT_EQ(lab("pair", kCases / "unordered_pair.json", out), 3);
    EXPECT_NE(slurp(out / "summary.txt").find("not ordered"), std::string::npos);
}

TEST(Cli, OrderedPair) {
    const auto out = out_dir("pair");
    EXPECT_EQ(lab("pair", kConfigs / "s1_pair.json", out), 0);
    const std::string csv = slurp(out / "result.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,zx1,zy1,zhatx1,zhaty1,Mx,My,dgap1,diff_now,diff_window,cone_margin");
}

TEST(Cli, Invert) { EXPECT_EQ(lab("invert", kConfigs / "s1_invert.json", out_dir("invert")), 0); }

TEST(Cli, OutputIsByteIdentical) {
    const auto a = out_dir("det_a");
    const auto b = out_dir("det_b");
    ASSERT_EQ(lab("simulate", kConfigs / "two_compartment_check.json", a), 0);
    ASSERT_EQ(lab("simulate", kConfigs / "two_compartment_check.json", b), 0);
    for (const char* f : {"result.csv", "summary.txt", "config.echo.json"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    const std::string csv = slurp(a / "result.csv");
    EXPECT_NE(csv.find("0.10000000000000001"), std::string::npos);  // 17 significant digits
}

TEST(Cli, ThreadCountDoesNotChangeResults) {
    const auto a = out_dir("thr_1");
    const auto b = out_dir("thr_4");
    const auto cfg = (kConfigs / "two_compartment_check.json").string();
    const std::string one = std::string("NFDE_THREADS=1 \"") + NFDE_LAB + "\" check --config \"" + cfg +
                            "\" --out \"" + a.string() + "\" >/dev/null 2>&1";
    const std::string four = std::string("NFDE_THREADS=4 \"") + NFDE_LAB + "\" check --config \"" + cfg +
                             "\" --out \"" + b.string() + "\" >/dev/null 2>&1";
    ASSERT_EQ(std::system(one.c_str()), 0);
    ASSERT_EQ(std::system(four.c_str()), 0);
    EXPECT_EQ(slurp(a / "result.csv"), slurp(b / "result.csv"));
}

TEST(Cli, InfiniteHorizonPairReportsTheGridLipschitzEstimate) {
    const auto dir = out_dir("pair_inf");
    fs::create_directories(dir);
    std::string cfg = slurp(kConfigs / "s1_pair.json");
    const std::string finite = "\"horizon\": 1.0";
    cfg.replace(cfg.find(finite), finite.size(), "\"horizon\": \"infinite\"");
    std::ofstream(dir / "cfg.json") << cfg;
    EXPECT_EQ(lab("pair", dir / "cfg.json", dir / "out"), 0);
    const std::string summary = slurp(dir / "out" / "summary.txt");
    // constant z against c = 0.3 + 0.2 sin: the lift oscillates with slope 0.2 * 2 pi * nu
    const auto at = summary.find("grid Lipschitz estimate of the initial zhat^x = ");
    ASSERT_NE(at, std::string::npos) << summary;
    const double slope = std::stod(summary.substr(at + 48));
    EXPECT_NEAR(slope, 0.2 * 2.0 * 3.141592653589793 * 0.6180339887498949, 1e-3);
}
