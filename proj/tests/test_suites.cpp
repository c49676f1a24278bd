#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>

#include <json.hpp>

#include "currents/suites.hpp"

using namespace currents;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CURRENTS_CLI_PATH;

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + kCli + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t k;
    while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "currents_suites_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    fs::remove(p);
    return p;
}

}  // namespace

TEST(Suites, EveryNamedSuiteHasChecks) {
    suites::RunConfig cfg;
    for (const auto& name : suites::suite_names()) EXPECT_FALSE(suites::checks_for(name, cfg).empty()) << name;
    EXPECT_THROW(suites::checks_for("nope", cfg), ConfigError);
    for (const auto& name : suites::rep_check_names()) EXPECT_FALSE(suites::rep_checks_for(name, cfg).empty()) << name;
}

TEST(Suites, CheckIdsAreUnique) {
    const auto all = suites::checks_for("all", suites::RunConfig{});
    std::set<std::string> ids;
    for (const auto& c : all) EXPECT_TRUE(ids.insert(c.id).second) << c.id;
}

TEST(Suites, PassMeansResidualWithinTolerance) {
    suites::RunConfig cfg;
    std::vector<suites::CheckSpec> specs{
        {"a", "x", 1.0, 0, [](Engine&) { return suites::CheckOutcome{0.5}; }},
        {"b", "x", 1.0, 0, [](Engine&) { return suites::CheckOutcome{2.0}; }},
        {"c", "x", 1.0, 0, [](Engine&) -> suites::CheckOutcome { throw DomainError("boom"); }},
        {"d", "x", 1.0, 3, [](Engine&) { return suites::CheckOutcome{0.0}; }},
    };
    auto rs = suites::run_checks(specs, cfg);
    ASSERT_EQ(rs.size(), 4u);
    EXPECT_TRUE(rs[0].pass);
    EXPECT_FALSE(rs[1].pass);
    EXPECT_FALSE(rs[2].pass);
    EXPECT_TRUE(std::isnan(rs[2].residual));
    EXPECT_EQ(rs[2].error, "boom");
    cfg.n = 2;
    cfg.tolerances["b"] = 3.0;
    rs = suites::run_checks(specs, cfg);
    ASSERT_EQ(rs.size(), 3u);  // the n = 3 check is skipped
    EXPECT_TRUE(rs[1].pass);
    cfg.tolerances["b"] = -1.0;
    EXPECT_THROW(suites::run_checks(specs, cfg), ConfigError);
}

TEST(Suites, StreamsDependOnCheckIdNotOrder) {
    suites::RunConfig cfg;
    auto draw = [](Engine& e) { return suites::CheckOutcome{static_cast<double>(e() % 1000003)}; };
    const std::vector<suites::CheckSpec> ab{{"a", "x", 1e9, 0, draw}, {"b", "x", 1e9, 0, draw}};
    const std::vector<suites::CheckSpec> ba{{"b", "x", 1e9, 0, draw}, {"a", "x", 1e9, 0, draw}};
    const auto r1 = suites::run_checks(ab, cfg), r2 = suites::run_checks(ba, cfg);
    EXPECT_EQ(r1[0].residual, r2[1].residual);
    EXPECT_EQ(r1[1].residual, r2[0].residual);
    EXPECT_NE(r1[0].residual, r1[1].residual);
}

TEST(Cli, SpecfunEval) {
    const auto r = run("specfun eval --fn V --rho 0.5 --x 1");
    EXPECT_EQ(r.status, 0);
    EXPECT_NEAR(std::stod(r.out), std::exp(2.0), 1e-12);
    EXPECT_NEAR(std::stod(run("specfun eval --fn psi --x 2 --lambda 1").out), std::pow(2.0, -0.5), 1e-15);
    EXPECT_EQ(run("specfun eval --fn Q --x 1").status, 2);
}

TEST(Cli, UnknownSuiteIsUsageErrorWithoutFile) {
    const auto out = scratch("bogus.json");
    EXPECT_EQ(run("check bogus --out " + out.string()).status, 2);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_EQ(run("check specfun --partition 0.5,-1 --out " + out.string()).status, 2);
    EXPECT_EQ(run("check specfun --format csv --out " + out.string()).status, 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, SpecfunSuiteReport) {
    const auto out = scratch("specfun.json");
    const auto r = run("check specfun --out " + out.string());
    // the unit-order small-argument branch misses its tolerance (leading order only)
    EXPECT_EQ(r.status, 1);
    const json j = json::parse(slurp(out));
    EXPECT_FALSE(j["pass"].get<bool>());
    long long total_ms = 0;
    for (const auto& c : j["checks"]) {
        EXPECT_EQ(c["pass"].get<bool>(), c["check_id"] != "specfun.v_small_x_branch.rho1") << c["check_id"];
        if (c["residual"].is_number()) EXPECT_EQ(c["pass"].get<bool>(), c["residual"].get<double>() <= c["tolerance"].get<double>());
        total_ms += j["runtime_ms"][c["check_id"].get<std::string>()].get<long long>();
    }
    EXPECT_LT(total_ms, 10000);
}

TEST(Cli, SphericalSuiteIsDeterministic) {
    const auto a = scratch("sph_a.json"), b = scratch("sph_b.json");
    ASSERT_EQ(run("check spherical --n 2 --seed 7 --out " + a.string()).status, 0);
    ASSERT_EQ(run("check spherical --n 2 --seed 7 --out " + b.string()).status, 0);
    const json ja = json::parse(slurp(a)), jb = json::parse(slurp(b));
    EXPECT_EQ(ja["checks"].dump(), jb["checks"].dump());
    EXPECT_EQ(ja["checks"].size(), 6u);
    const auto c = scratch("sph_c.json");
    run("check spherical --n 2 --seed 8 --out " + c.string());
    EXPECT_NE(json::parse(slurp(c))["checks"].dump(), ja["checks"].dump());
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    const auto cfg = scratch("cfg.json"), out = scratch("cfg_out.json");
    std::ofstream(cfg) << R"({"seed": 5, "n": 3, "tolerances": {"specfun.v_small_x_branch.rho1": 0.02}})";
    const auto r = run("check specfun --config " + cfg.string() + " --seed 6 --out " + out.string());
    EXPECT_EQ(r.status, 0);
    const json j = json::parse(slurp(out));
    EXPECT_EQ(j["seed"].get<int>(), 6);
    EXPECT_EQ(j["n"].get<int>(), 3);
    std::ofstream(cfg) << R"({"tolerances": {"x": 0}})";
    EXPECT_EQ(run("check specfun --config " + cfg.string() + " --out " + out.string() + "x").status, 2);
    EXPECT_FALSE(fs::exists(out.string() + "x"));
}

TEST(Cli, SampleFiles) {
    const auto empty = scratch("empty.jsonl");
    EXPECT_EQ(run("sample marginal --count 0 --out " + empty.string()).status, 0);
    ASSERT_TRUE(fs::exists(empty));
    EXPECT_EQ(fs::file_size(empty), 0u);

    const auto a = scratch("a.jsonl"), b = scratch("b.jsonl"), c = scratch("c.jsonl");
    run("sample marginal --n 3 --partition 0.5,0.7 --count 10 --seed 4 --out " + a.string());
    run("sample marginal --n 3 --partition 0.5,0.7 --count 10 --seed 4 --out " + b.string());
    run("sample marginal --n 3 --partition 0.5,0.7 --count 10 --seed 5 --out " + c.string());
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_NE(slurp(a), slurp(c));
    std::ifstream f(a);
    std::string line;
    int lines = 0;
    while (std::getline(f, line)) {
        const json j = json::parse(line);
        ASSERT_EQ(j["xi"].size(), 2u);
        EXPECT_EQ(j["xi"][0].size(), 2u);
        ++lines;
    }
    EXPECT_EQ(lines, 10);

    const auto e1 = run("sample marginal --count 3", "CURRENTS_SEED=11"), e2 = run("sample marginal --count 3 --seed 11");
    EXPECT_EQ(e1.out, e2.out);
}

TEST(Cli, ProcessRecordsCarryTruncationBound) {
    const auto r = run("sample process --n 2 --mass 1 --eps 1e-4 --count 3 --seed 2");
    ASSERT_EQ(r.status, 0);
    std::stringstream ss(r.out);
    std::string line;
    int lines = 0;
    while (std::getline(ss, line)) {
        const json j = json::parse(line);
        EXPECT_GT(j["truncation_bound"].get<double>(), 0.0);
        double prev = -1.0;
        for (const auto& a : j["atoms"]) {
            EXPECT_GE(a["x"].get<double>(), prev);
            prev = a["x"].get<double>();
            EXPECT_EQ(a["c"].size(), 1u);
        }
        ++lines;
    }
    EXPECT_EQ(lines, 3);
}

TEST(Cli, MeasureDensity) {
    const json mu = json::parse(run("measure density --which mu --n 2 --xi 0.5").out);
    EXPECT_NEAR(mu["value"].get<double>(), 0.268032, 1e-6);
    EXPECT_NEAR(std::log(mu["value"].get<double>()), mu["log_value"].get<double>(), 1e-14);
    const json nu = json::parse(run("measure density --which nu --n 2 --partition 0.5 --xi 2").out);
    // pi^{-1/2} C_{1/2} |xi|^{-1/2}, C_{1/2} = 2^{-1/2} Gamma(1/4) / Gamma(1/4)
    EXPECT_NEAR(nu["value"].get<double>(), std::pow(std::numbers::pi, -0.5) * std::pow(2.0, -0.5) * std::pow(2.0, -0.5), 1e-12);
    EXPECT_EQ(run("measure density --which v --n 2").status, 2);
    EXPECT_EQ(run("measure density --which mu --n 2 --xi 0.5,1").status, 2);
}

TEST(Cli, KernelTable) {
    const auto r = run("kernel tabulate --n 2 --lambda 0.5 --grid 2 --xmax 2");
    ASSERT_EQ(r.status, 0);
    std::stringstream ss(r.out);
    std::string header, row;
    std::getline(ss, header);
    EXPECT_EQ(header, "xi,xi_prime,value,err_est");
    int rows = 0;
    while (std::getline(ss, row)) {
        double a, b, v, e;
        ASSERT_EQ(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &v, &e), 4);
        EXPECT_NEAR(v, quadrature::kernel_A_closed_n2(0.5, a, b), 1e-8 * std::max(1.0, std::fabs(v)));
        ++rows;
    }
    EXPECT_EQ(rows, 4);
}

TEST(Cli, RepApplyAndCheck) {
    const json j = json::parse(run("rep apply --n 2 --lambda 0.5 --g 'z:1.0|d:2.0' --grid 4,5").out);
    const auto& el = j["element"];
    ASSERT_EQ(el.size(), 3u);
    EXPECT_EQ(el[0].size(), 3u);
    // |(U_z U_d f)(xi)| = 2^{1/4} exp(-(2 xi)^2 / 2)
    for (std::size_t k = 0; k < j["nodes"].size(); ++k) {
        const double x = j["nodes"][k].get<double>();
        EXPECT_NEAR(std::hypot(j["re"][k].get<double>(), j["im"][k].get<double>()), std::pow(2.0, 0.25) * std::exp(-2.0 * x * x), 1e-14);
    }
    EXPECT_EQ(run("rep apply --n 3 --g 's' --grid 4,5").status, 2);
    EXPECT_EQ(run("rep apply --n 2 --g 'q:1'").status, 2);

    const auto out = scratch("cocycle.json");
    EXPECT_EQ(run("rep check --suite cocycle --out " + out.string()).status, 0);
    const json r = json::parse(slurp(out));
    for (const auto& c : r["checks"]) {
        EXPECT_TRUE(c.contains("check"));
        EXPECT_TRUE(c["pass"].get<bool>()) << c["check"];
    }
    EXPECT_EQ(run("rep check --suite nope").status, 2);
}

TEST(Cli, GroupCheck) {
    const auto r = run("group check --n 3 --trials 20");
    EXPECT_EQ(r.status, 0);
    const json j = json::parse(r.out);
    EXPECT_EQ(j["checks"].size(), 6u);
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(run("group check --trials 0").status, 2);
}
