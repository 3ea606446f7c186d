#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mdlab/errors.hpp"
#include "mdlab/runner.hpp"

using namespace mdlab;
using namespace mdlab::runner;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("mdlab_test_runner_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

std::string domain_message(const json& j) {
    try {
        (void)parse_config(j);
    } catch (const DomainError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config validation names the precondition") {
    CHECK(domain_message({{"model", "antivoter"}, {"grid", {{"points", 1}}}}).find("grid.points") !=
          std::string::npos);
    CHECK(domain_message({{"model", "potts"}}).find("model must be one of") != std::string::npos);
    CHECK(domain_message(json::object()).find("model is required") != std::string::npos);
    CHECK(domain_message({{"model", "antivoter"}, {"mc", {{"seed", 1}, {"samples", 0}}}})
              .find("mc.samples") != std::string::npos);
    CHECK(domain_message({{"model", "antivoter"}, {"output", {{"format", "xml"}}}})
              .find("output.format") != std::string::npos);
    CHECK(domain_message({{"model", "antivoter"}, {"grid", {{"x_max", "big"}}}}).find("grid.x_max") !=
          std::string::npos);
    CHECK(domain_message({{"model", "antivoter"}, {"extra", 1}}).find("unknown key") != std::string::npos);

    const auto c = parse_config({{"model", "curieweiss"},
                                 {"model_params", {{"n", 100}, {"beta", 0.5}}},
                                 {"grid", {{"x_max", "auto"}, {"points", 5}}},
                                 {"mc", {{"seed", 18446744073709551615ULL}, {"samples", 10}}},
                                 {"workers", 3}});
    CHECK(c.model == Model::CurieWeiss);
    CHECK_FALSE(c.grid.x_max.has_value());
    CHECK(c.grid.points == 5);
    REQUIRE(c.mc);
    CHECK(c.mc->seed == 18446744073709551615ULL);
    CHECK(c.mc->burnin == 0);
    CHECK(*c.workers == 3);
}

TEST_CASE("auto grid for the anti-voter stops at n^(1/6)") {
    const auto c = parse_config({{"model", "antivoter"},
                                 {"model_params", {{"n", 1000}}},
                                 {"grid", {{"x_max", "auto"}, {"points", 21}}}});
    CHECK(auto_x_max(c) == doctest::Approx(3.1622776601683795).epsilon(1e-14));
    const auto r = run_experiment(c);
    REQUIRE(r.report.table.rows.size() == 21);
    CHECK(r.report.table.rows.back().x <= std::pow(1000.0, 1.0 / 6.0) + 1e-12);
    for (const auto& row : r.report.table.rows) CHECK(row.in_range);

    std::ostringstream out, err;
    CHECK(run(c, out, err) == 0);
    const auto csv = out.str();
    CHECK(csv.rfind("x,log_tail,log_normal_tail,ratio,band_halfwidth_unit,in_range\n", 0) == 0);
}

TEST_CASE("exit codes") {
    std::ostringstream out, err;
    const auto case3 = parse_config({{"model", "curieweiss"}, {"model_params", {{"n", 100}, {"beta", 1.0}, {"h", 0.0}}}});
    CHECK(run(case3, out, err) == 2);
    CHECK(err.str().find("beta = 1, h = 0") != std::string::npos);

    err.str("");
    const auto perturbed = parse_config({{"model", "binarycode"},
                                         {"model_params", {{"n", 37}, {"kernel_bound_shift", 1}}}});
    CHECK(run(perturbed, out, err) == 3);
    CHECK(err.str().find("identity") != std::string::npos);

    const auto unperturbed = parse_config({{"model", "binarycode"},
                                           {"model_params", {{"n", 37}, {"kernel_bound_shift", 0}}}});
    CHECK(run(unperturbed, out, err) == 0);

    const auto huge = parse_config({{"model", "curieweiss"}, {"model_params", {{"n", 2'000'000}, {"beta", 0.5}}}});
    CHECK(run(huge, out, err) == 4);

    const auto no_sampler = parse_config({{"model", "binarycode"},
                                          {"model_params", {{"n", 37}}},
                                          {"mc", {{"seed", 1}, {"samples", 10}}}});
    CHECK(run(no_sampler, out, err) == 2);

    const auto missing = parse_config({{"model", "antivoter"}, {"model_params", json::object()}});
    err.str("");
    CHECK(run(missing, out, err) == 2);
    CHECK(err.str().find("model_params.n") != std::string::npos);
}

TEST_CASE("csv and json artifacts") {
    const auto dir = scratch("artifacts");
    json cfg = {{"model", "independent"},
                {"model_params", {{"rademacher", 64}, {"band", "rate"}}},
                {"grid", {{"x_max", 2.0}, {"points", 9}}},
                {"output", {{"format", "csv"}, {"path", (dir / "t.csv").string()}}}};
    std::ostringstream out, err;
    REQUIRE(run(parse_config(cfg), out, err) == 0);
    const auto csv = slurp(dir / "t.csv");
    const auto diag = json::parse(slurp(dir / "t.csv.diagnostics.json"));
    CHECK(diag["model"] == "independent");
    CHECK(diag["grid"]["points"] == 9);
    for (const char* key : {"model", "n", "budget", "fitted_constant", "identity_residuals", "pass"}) {
        CHECK(diag.contains(key));
    }

    // Every real round-trips through its 17-digit text.
    const auto r = run_experiment(parse_config(cfg));
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    for (const auto& row : r.report.table.rows) {
        REQUIRE(std::getline(lines, line));
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        CHECK(std::strtod(cell.c_str(), nullptr) == row.x);
        std::getline(cells, cell, ',');
        CHECK(std::strtod(cell.c_str(), nullptr) == row.log_tail);
        std::getline(cells, cell, ',');
        CHECK(std::strtod(cell.c_str(), nullptr) == row.log_normal_tail);
        std::getline(cells, cell, ',');
        CHECK(std::strtod(cell.c_str(), nullptr) == row.ratio);
    }

    cfg["output"] = {{"format", "json"}, {"path", (dir / "t.json").string()}};
    REQUIRE(run(parse_config(cfg), out, err) == 0);
    const auto doc = json::parse(slurp(dir / "t.json"));
    CHECK(doc.contains("table"));
    CHECK(doc["diagnostics"]["model"] == "independent");
}

TEST_CASE("every model runs from a config") {
    const double h = std::log(0.5);
    const json coin = {{"support", {-0.5, 0.5}}, {"logp", {h, h}}};
    json tree = {{"n", 6}, {"system", "custom-tree"}};
    tree["labels"] = json::array({{0}, {0, 1}, {0, 1, 1, 0}, {0, 1, 1, 0, 1, 0, 0, 1}});
    const json cases = json::array({
        {{"model", "combinatorial"}, {"model_params", {{"kind", "product"}, {"n", 5}}}},
        {{"model", "combinatorial"},
         {"model_params", {{"array", {{1.0, -1.0}, {-1.0, 1.0}}}}},
         {"grid", {{"x_max", 1.0}}}},
        {{"model", "antivoter"}, {"model_params", {{"n", 20}}}},
        {{"model", "binarycode"}, {"model_params", {{"n", 100}, {"system", "reflected-extreme"}}}},
        {{"model", "binarycode"}, {"model_params", tree}},
        {{"model", "curieweiss"}, {"model_params", {{"n", 500}, {"beta", 1.5}, {"sign", "-"}}}},
        {{"model", "curieweiss"}, {"model_params", {{"n", 500}, {"beta", 0.7}, {"h", 0.2}}}},
        {{"model", "independent"}, {"model_params", {{"rademacher", 50}}}},
        {{"model", "independent"},
         {"model_params", {{"components", json::array({coin, coin, coin, coin})}}},
         {"grid", {{"x_max", 2.0}}}},
    });
    for (const auto& j : cases) {
        CAPTURE(j.dump());
        const auto c = parse_config(j);
        const auto r = run_experiment(c);
        CHECK(r.report.table.rows.size() == 61);
        CHECK(std::isfinite(r.grid.back()));
        const auto law = model_law(c);
        const auto m = moments(law);
        CHECK(std::abs(m.mean) <= 0.2);
    }
}

TEST_CASE("seeded sampling is reproducible and worker count is honoured") {
    const json base = {{"model", "antivoter"},
                       {"model_params", {{"n", 50}}},
                       {"grid", {{"x_max", 1.0}, {"points", 2}}},
                       {"mc", {{"seed", 99}, {"samples", 20000}, {"burnin", 5}}},
                       {"workers", 2}};
    const auto c = parse_config(base);
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    REQUIRE(a.mc);
    CHECK(a.mc->workers == 2);
    CHECK(a.mc->fingerprint == b.mc->fingerprint);
    CHECK(a.mc->tv == b.mc->tv);
    auto other = base;
    other["mc"]["seed"] = 100;
    CHECK(run_experiment(parse_config(other)).mc->fingerprint != a.mc->fingerprint);

    ::setenv("MDLAB_WORKERS", "3", 1);
    const auto e = run_experiment(c);
    ::unsetenv("MDLAB_WORKERS");
    CHECK(e.mc->workers == 3);
}

TEST_CASE("smoke suite") {
    const auto dir = scratch("suite");
    SuiteOptions o;
    o.out_dir = dir.string();
    std::ostringstream log;
    const auto r = suite(o, log);
    const auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary == r.summary);
    CHECK(summary["models"].size() >= 5);
    for (const auto& m : summary["models"]) {
        CAPTURE(m.dump());
        CHECK(m["monotone_bounded"] == true);
        CHECK(m["entries"].size() >= 2);
        for (const auto& e : m["entries"]) CHECK(e["fitted_constant"].is_number());
    }
    CHECK(summary["mc"].size() == 3);
    CHECK(r.pass);

    const auto first = slurp(dir / "antivoter_100.csv");
    CHECK_FALSE(first.empty());
    const auto dir2 = scratch("suite2");
    o.out_dir = dir2.string();
    (void)suite(o, log);
    CHECK(slurp(dir2 / "antivoter_100.csv") == first);
    CHECK(slurp(dir2 / "summary.json") == slurp(dir / "summary.json"));
}
