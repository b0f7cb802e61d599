#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "epj/cli.hpp"

using namespace epj;
using namespace epj::cli;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "ep-jordan");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("complex parsing")
{
    CHECK(parse_complex("1") == Complex(1.0, 0.0));
    CHECK(parse_complex("-2.5") == Complex(-2.5, 0.0));
    CHECK(parse_complex("2-3i") == Complex(2.0, -3.0));
    CHECK(parse_complex("i") == Complex(0.0, 1.0));
    CHECK(parse_complex("-i") == Complex(0.0, -1.0));
    CHECK(parse_complex("0.5+0.25i") == Complex(0.5, 0.25));
    CHECK(parse_complex("1e-3-2e-1i") == Complex(1e-3, -0.2));
    CHECK(parse_complex("3,4") == Complex(3.0, 4.0));
    CHECK_THROWS_AS(parse_complex("abc"), ConfigError);
    CHECK_THROWS_AS(parse_complex(""), ConfigError);
}

TEST_CASE("config files")
{
    const auto cfg = parse_config(R"(# two-level run
model = two
eps_a = -0.099
eps_b = 0.2   # upper level
alpha_a = 0.1
alpha_b = 0.1

c = 2-3i
eps_list = 1e-3, 1e-4
tol.jordan.gram = 1e-6
)");
    CHECK(cfg.model.kind == ModelKind::TwoLevel);
    CHECK(cfg.model.eps_a == -0.099);
    CHECK(cfg.model.eps_b == 0.2);
    CHECK(cfg.c == Complex(2.0, -3.0));
    CHECK(cfg.eps_list == std::vector<double>{1e-3, 1e-4});
    CHECK(cfg.tolerances.at("jordan.gram") == 1e-6);

    try {
        parse_config("model = two\nbogus = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("eps_a 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scan_steps = many\n"), ConfigError);

    RunConfig bad;
    bad.scan_steps = 1;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = RunConfig{};
    bad.c = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("exit codes and error reports")
{
    CHECK(invoke({}).code == kConfigError);
    CHECK(invoke({"frobnicate"}).code == kConfigError);
    CHECK(invoke({"scan", "--param", "scan_steps=1"}).code == kConfigError);
    CHECK(invoke({"scan", "--config", "/nonexistent/cfg"}).code == kConfigError);
    const auto r = invoke({"jordan", "--param", "c=0"});
    CHECK(r.code == kConfigError);
    const auto err = Json::parse(r.err);
    CHECK(err["error"] == "ConfigError");
    CHECK(err["message"].get<std::string>().find("c") != std::string::npos);

    // uncoupled level: no EP to build a Jordan basis on
    const auto solver = invoke({"jordan", "--param", "alpha_a=0"});
    CHECK(solver.code == kSolverFailure);
    CHECK(Json::parse(solver.err)["error"] == "NonConvergence");
}

TEST_CASE("find-ep reports the coalescence")
{
    const auto r = invoke({"find-ep"});
    REQUIRE(r.code == kOk);
    const auto j = Json::parse(r.out);
    const auto& ep = j["exceptional_points"].at(0);
    const double s = std::cbrt(std::pow(std::numbers::pi * 0.01 / 4.0, 2.0));
    CHECK(std::abs(ep["kappa_star"].get<double>() - (-3.0 * s - 0.01)) <= 1e-12);
    CHECK(std::abs(ep["z0"][0].get<double>() + s) <= 1e-12);
    CHECK(ep["sheet"] == "second");

    const auto r2 = invoke({"find-ep", "--param", "model=two", "--param", "eps_a=-0.099", "--param", "eps_b=0.2",
                            "--param", "alpha_a=0.1", "--param", "alpha_b=0.1"});
    REQUIRE(r2.code == kOk);
    const auto j2 = Json::parse(r2.out);
    const auto& ep2 = j2["exceptional_points"].at(0);
    CHECK(std::abs(ep2["kappa_star"].get<double>() - (-0.098087186836502724209)) <= 1e-10);
    CHECK(std::abs(ep2["z0"][0].get<double>() - (-0.020504137017888964629)) <= 1e-10);
}

TEST_CASE("every JSON command emits parseable output")
{
    for (const char* cmd : {"scan", "find-ep", "jordan", "extended", "puiseux", "verify"}) {
        const auto r = invoke({cmd, "--format", "json"});
        CHECK_MESSAGE(r.code == kOk, cmd);
        Json parsed;
        CHECK_NOTHROW(parsed = Json::parse(r.out));
    }
}

TEST_CASE("verify")
{
    const auto ok = invoke({"verify"});
    CHECK(ok.code == kOk);
    const auto j = Json::parse(ok.out);
    CHECK(j["passed"] == true);
    CHECK(j["checks"].size() >= 16);

    const auto strict = invoke({"verify", "--param", "tol.all=1e-30"});
    CHECK(strict.code == kVerifyFailed);
    CHECK(Json::parse(strict.out)["passed"] == false);

    // no EP: every check is skipped, which is not a failure
    const auto none = invoke({"verify", "--param", "alpha_a=0", "--format", "csv"});
    CHECK(none.code == kOk);
    CHECK(none.out.find("pass\n") == std::string::npos);
    CHECK(none.out.find(",skipped") != std::string::npos);
}

TEST_CASE("scan output is independent of the thread count")
{
    RunConfig cfg;
    cfg.model = ModelParams::two_level(-0.12, 0.2, 0.1, 0.1);
    cfg.scan_start = -0.15;
    cfg.scan_stop = -0.05;
    cfg.scan_steps = 41;
    std::ostringstream one, many;
    write_scan_csv(one, run_scan(cfg, 1));
    write_scan_csv(many, run_scan(cfg, 8));
    CHECK(one.str() == many.str());
    CHECK(scan_threads() >= 1);
}

TEST_CASE("output file")
{
    const auto path = std::filesystem::temp_directory_path() / "ep_jordan_cli_test.csv";
    const auto r = invoke({"scan", "--out", path.string(), "--param", "scan_steps=3"});
    CHECK(r.code == kOk);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "param,branch_id,sheet,re_z,im_z,re_full_norm,im_full_norm,is_extraneous");
    in.close();
    std::filesystem::remove(path);
}
