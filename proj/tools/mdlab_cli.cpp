// mdlab: run | suite | dump-dist
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mdlab/dist_json.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/runner.hpp"

namespace {

using namespace mdlab;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
};

runner::ExperimentConfig load(const Overrides& o) {
    auto c = runner::load_config(o.config);
    if (o.seed) {
        if (!c.mc) throw DomainError("--seed given but the config has no mc section");
        c.mc->seed = *o.seed;
    }
    if (!o.out.empty()) c.output.path = o.out;
    if (!o.format.empty()) {
        if (o.format == "csv") {
            c.output.format = runner::Format::Csv;
        } else if (o.format == "json") {
            c.output.format = runner::Format::Json;
        } else {
            throw DomainError("--format must be csv or json (got '" + o.format + "')");
        }
    }
    return c;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::cerr << "mdlab: " << e.what() << "\n";
        return runner::exit_code_of(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moderate-deviation experiments on exact discrete laws"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run = app.add_subcommand("run", "Ratio table and diagnostics for one config");
    run->add_option("--config", run_opts.config, "JSON experiment config")->required();
    run->add_option("--seed", run_opts.seed, "Override mc.seed");
    run->add_option("--out", run_opts.out, "Override output.path");
    run->add_option("--format", run_opts.format, "Override output.format (csv|json)");

    std::string size = "smoke";
    std::string suite_out;
    std::uint64_t suite_seed = runner::SuiteOptions{}.seed;
    int suite_workers = 1;
    auto* suite = app.add_subcommand("suite", "Band-stability schedules and sampler checks");
    suite->add_option("--size", size, "smoke or full");
    suite->add_option("--out", suite_out, "Directory for CSVs and summary.json");
    suite->add_option("--seed", suite_seed, "Sampler seed");
    suite->add_option("--workers", suite_workers, "Sampler threads (MDLAB_WORKERS wins)");

    Overrides dump_opts;
    auto* dump = app.add_subcommand("dump-dist", "Write the model's standardized law as JSON");
    dump->add_option("--config", dump_opts.config, "JSON experiment config")->required();
    dump->add_option("--out", dump_opts.out, "Output path (stdout if empty)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) {
        return guarded([&] { return runner::run(load(run_opts), std::cout, std::cerr); });
    }
    if (*suite) {
        return guarded([&] {
            runner::SuiteOptions o;
            o.size = runner::parse_suite_size(size);
            o.out_dir = suite_out;
            o.seed = suite_seed;
            o.workers = suite_workers;
            const auto r = runner::suite(o, std::cerr);
            if (suite_out.empty()) std::cout << r.summary.dump(2) << "\n";
            return r.pass ? 0 : 1;
        });
    }
    return guarded([&] {
        const auto c = runner::load_config(dump_opts.config);
        const auto body = to_json(runner::model_law(c)).dump() + "\n";
        if (dump_opts.out.empty()) {
            std::cout << body;
        } else {
            std::ofstream f(dump_opts.out);
            if (!f) throw ResourceError("dump-dist: cannot write '" + dump_opts.out + "'");
            f << body;
        }
        return 0;
    });
}
