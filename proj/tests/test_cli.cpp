#include "doctest.h"

#include "trimap/commands.hpp"
#include "trimap/config.hpp"
#include "trimap/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace trimap;

namespace {

report::Document run_to_document(commands::Command c, const config::RunConfig& cfg, commands::ExitCode* code = nullptr) {
    std::ostringstream os;
    commands::ExitCode rc{};
    switch (c) {
        case commands::Command::Simulate: rc = commands::run_simulate(cfg, os); break;
        case commands::Command::Analyze: rc = commands::run_analyze(cfg, os); break;
        case commands::Command::RegionScan: rc = commands::run_region_scan(cfg, os); break;
        case commands::Command::VerifyGlobal: rc = commands::run_verify_global(cfg, os); break;
    }
    if (code) *code = rc;
    std::istringstream is(os.str());
    return report::read(is, cfg.format);
}

struct TempDir {
    std::filesystem::path path;
    TempDir() : path(std::filesystem::temp_directory_path() / ("trimap_cli_" + std::to_string(::getpid()))) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::filesystem::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

int run_binary(const std::string& args, const TempDir& dir) {
    const std::string cmd = std::string(TRIMAP_BINARY) + " " + args + " > " + (dir.path / "stdout").string() + " 2> " +
                            (dir.path / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("double formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
        CHECK(std::stod(report::format_double(v)) == v);
    }
    CHECK(report::format_double(NAN) == "nan");
    CHECK(report::format_double(-INFINITY) == "-inf");
}

TEST_CASE("report round-trip in both formats") {
    for (auto fmt : {report::Format::Csv, report::Format::Json}) {
        std::ostringstream os;
        {
            report::Writer w(os, fmt, {{"command", "test"}, {"note", "a,b \"q\""}});
            w.begin_table("t", {"i", "x", "flag", "label", "empty"});
            w.row({1LL, 0.1, true, std::string("saddle, weak"), std::monostate{}});
            w.row({2LL, NAN, false, std::string("line"), std::monostate{}});
            w.end_table();
            w.begin_table("u", {"v"});
            w.end_table();
        }
        std::istringstream is(os.str());
        const auto doc = report::read(is, fmt);
        CHECK(doc.schema_version == report::kSchemaVersion);
        CHECK(doc.meta_value("note") == "a,b \"q\"");
        const auto& t = doc.table("t");
        REQUIRE(t.rows.size() == 2);
        CHECK(t.number(0, "x") == 0.1);
        CHECK(t.text(0, "label") == "saddle, weak");
        CHECK(t.text(0, "flag") == "true");
        CHECK(std::isnan(t.number(1, "x")));
        CHECK(std::isnan(t.number(0, "empty")));
        CHECK(doc.has_table("u"));
        CHECK(doc.table("u").rows.empty());
        CHECK_THROWS_AS((void)t.column("missing"), std::out_of_range);
    }
    CHECK_THROWS_AS((void)report::parse_format("xml"), std::invalid_argument);
}

TEST_CASE("strict config parsing reports the offending field") {
    auto field_of = [](const std::string& text) {
        try {
            (void)config::parse_config_text(text);
        } catch (const config::ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(R"({"modle":"ricker"})") == "modle");
    CHECK(field_of(R"({"tolerances":{"newton":-1}})") == "tolerances.newton");
    CHECK(field_of(R"({"model":"logistic","params":{"mu":[1,2,3]}})") == "params.mu");
    CHECK(field_of(R"({"model":"ricker","params":{"r":[1,1,1],"rates":[[1]]}})") == "params");
    CHECK(field_of(R"({"grid":1})") == "grid");
    CHECK(field_of(R"({"scan":{"axes":[{"name":"mu","min":1,"max":2,"n":2}]}})") == "scan.axes");
    CHECK(field_of(R"({"model":"leslie-gower","params":{"beta":1.5}})") == "params");
    CHECK(field_of(R"({"output":{"format":"xml"}})") == "output.format");
    CHECK(field_of("{not json") != "<none>");
    CHECK(field_of(R"({"model":"ricker","params":{"rates":[[1.0],[1.5,1.2]],"weights":[0.3]}})") == "<none>");
}

TEST_CASE("scan parameters by name") {
    auto cfg = config::parse_config_text(R"({"model":"logistic"})");
    config::set_parameter(cfg, "mu1", 3.0);
    config::set_parameter(cfg, "nu0", 0.7);
    CHECK(cfg.logistic.mu[1] == 3.0);
    CHECK(cfg.logistic.nu[0] == 0.7);
    CHECK_THROWS_AS(config::set_parameter(cfg, "mu2", 1.0), config::ConfigError);
    CHECK_THROWS_AS(config::set_parameter(cfg, "alpha", 1.0), config::ConfigError);
    config::ScanAxis axis{"mu0", 1.0, 3.0, 5};
    CHECK(axis.value(0) == 1.0);
    CHECK(axis.value(4) == 3.0);
    CHECK(axis.value(2) == 2.0);
}

TEST_CASE("overrides follow the command") {
    auto cfg = config::parse_config_text("{}");
    commands::Overrides o;
    o.tol = 1e-5;
    o.grid = std::vector<std::size_t>{20};
    auto a = cfg;
    commands::apply(a, o, commands::Command::VerifyGlobal);
    CHECK(a.tol.convergence == 1e-5);
    CHECK(a.grid == std::vector<std::size_t>{20});
    auto b = cfg;
    commands::apply(b, o, commands::Command::Analyze);
    CHECK(b.tol.newton == 1e-5);
    CHECK(b.search_grid == std::vector<std::size_t>{20});
    o.tol = -1.0;
    CHECK_THROWS_AS(commands::apply(cfg, o, commands::Command::Simulate), config::ConfigError);
}

TEST_CASE("analyze lists the leslie-gower two-cycle") {
    const auto cfg = config::parse_config_text("{}");
    commands::ExitCode code{};
    const auto doc = run_to_document(commands::Command::Analyze, cfg, &code);
    CHECK(code == commands::ExitCode::Ok);
    const auto& t = doc.table("cycles");
    REQUIRE(t.rows.size() == 4);
    std::size_t sinks = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CHECK(t.number(r, "max_residual") < 1e-12);
        CHECK(t.number(r, "closed_form_delta") < 1e-12);
        if (t.text(r, "verdict") == "sink") {
            ++sinks;
            CHECK(t.number(r, "x1") == doctest::Approx(1.5));
            CHECK(t.number(r, "x2") == doctest::Approx(0.75));
            CHECK(t.text(r, "scenario") == "geometric-cycle");
        }
    }
    CHECK(sinks == 1);
}

TEST_CASE("verify-global verdicts map to exit codes") {
    commands::ExitCode code{};
    auto doc = run_to_document(commands::Command::VerifyGlobal, config::parse_config_text("{}"), &code);
    CHECK(code == commands::ExitCode::Ok);
    CHECK(doc.table("summary").text(0, "verdict") == "criterion-satisfied");

    const auto cyc = config::parse_config_text(R"({"model":"custom","params":{"kind":"logistic-1d","mu":3.3},"grid":40})");
    doc = run_to_document(commands::Command::VerifyGlobal, cyc, &code);
    CHECK(code == commands::ExitCode::CriterionViolated);
    CHECK(doc.table("summary").text(0, "verdict") == "criterion-violated");
    CHECK(doc.table("witnesses").rows.size() == 2);
}

TEST_CASE("simulate reports convergence and clusters") {
    const auto cfg = config::parse_config_text(R"({"model":"ricker","x0":[0.3,0.2],"steps":5000})");
    const auto doc = run_to_document(commands::Command::Simulate, cfg);
    const auto& clusters = doc.table("clusters");
    REQUIRE(clusters.rows.size() == 1);
    CHECK(clusters.number(0, "x1") == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(clusters.number(0, "x2") == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("region scan marks logistic cells") {
    auto cfg = config::parse_config_text(
        R"({"model":"logistic","scan":{"axes":[{"name":"mu0","min":0.5,"max":3.5,"n":4},{"name":"mu1","min":0.5,"max":3.5,"n":3}]},)"
        R"("output":{"format":"json"}})");
    const auto doc = run_to_document(commands::Command::RegionScan, cfg);
    const auto& t = doc.table("cells");
    REQUIRE(t.rows.size() == 12);
    CHECK(t.number(0, "mu0") == 0.5);
    CHECK(t.number(11, "mu1") == 3.5);
    CHECK(t.text(0, "status") == "ok");
    CHECK(t.text(0, "e0_predicate") == "true");
}

TEST_CASE("command-line tool") {
    TempDir dir;
    SUBCASE("bad flag value") {
        CHECK(run_binary("analyze --grid 0,x", dir) == 2);
    }
    SUBCASE("validation errors are one-line JSON") {
        const auto cfg = dir.write("bad.json", R"({"tolerances":{"orbit":0}})");
        CHECK(run_binary("simulate --config " + cfg.string(), dir) == 2);
        const std::string err = slurp(dir.path / "stderr");
        CHECK(err.find("\"field\":\"tolerances.orbit\"") != std::string::npos);
        CHECK(std::count(err.begin(), err.end(), '\n') == 1);
    }
    SUBCASE("missing config file") {
        CHECK(run_binary("simulate --config " + (dir.path / "nope.json").string(), dir) == 6);
    }
    SUBCASE("output file and format") {
        const auto out = dir.path / "r.json";
        CHECK(run_binary("analyze --format json --out " + out.string(), dir) == 0);
        std::ifstream in(out);
        const auto doc = report::read(in, report::Format::Json);
        CHECK(doc.table("cycles").rows.size() == 4);
    }
    SUBCASE("violated criterion") {
        const auto cfg = dir.write("l.json", R"({"model":"custom","params":{"mu":3.3}})");
        CHECK(run_binary("verify-global --grid 20 --config " + cfg.string(), dir) == 4);
    }
}
