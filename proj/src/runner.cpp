#include "mdlab/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdlab/antivoter.hpp"
#include "mdlab/binary_code.hpp"
#include "mdlab/combinatorial.hpp"
#include "mdlab/curie_weiss.hpp"
#include "mdlab/dist_json.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/independent.hpp"
#include "mdlab/rng.hpp"
#include "mdlab/stein_core.hpp"

namespace mdlab::runner {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw DomainError("config: " + what); }

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where + "." + key + " is required");
    return obj.at(key);
}

std::int64_t as_int(const json& v, const std::string& name) {
    if (!v.is_number_integer()) fail(name + " must be an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        fail(name + " is out of range");
    }
    return v.get<std::int64_t>();
}

std::uint64_t as_uint(const json& v, const std::string& name) {
    if (!v.is_number_integer()) fail(name + " must be an integer");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto i = v.get<std::int64_t>();
    if (i < 0) fail(name + " must be >= 0");
    return static_cast<std::uint64_t>(i);
}

double as_real(const json& v, const std::string& name) {
    if (!v.is_number()) fail(name + " must be a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& name) {
    if (!v.is_string()) fail(name + " must be a string");
    return v.get<std::string>();
}

int param_int(const json& p, const char* key, std::int64_t lo, std::int64_t hi) {
    const std::string name = std::string("model_params.") + key;
    const auto v = as_int(require(p, key, "model_params"), name);
    if (v < lo || v > hi) {
        std::ostringstream os;
        os << name << " must be in [" << lo << ", " << hi << "] (got " << v << ")";
        fail(os.str());
    }
    return static_cast<int>(v);
}

double param_real(const json& p, const char* key, std::optional<double> dflt = std::nullopt) {
    if (!p.contains(key)) {
        if (dflt) return *dflt;
        fail(std::string("model_params.") + key + " is required");
    }
    return as_real(p.at(key), std::string("model_params.") + key);
}

std::string param_string(const json& p, const char* key, const std::string& dflt) {
    if (!p.contains(key)) return dflt;
    return as_string(p.at(key), std::string("model_params.") + key);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail("'" + path + "' is not valid JSON: " + e.what());
    }
}

combinatorial::CombArray comb_array(const json& p) {
    if (p.contains("array")) {
        const auto& a = p.at("array");
        if (!a.is_array()) fail("model_params.array must be an array of rows");
        std::vector<std::vector<double>> rows;
        for (const auto& r : a) {
            if (!r.is_array()) fail("model_params.array must be an array of rows");
            std::vector<double> row;
            for (const auto& v : r) row.push_back(as_real(v, "model_params.array entry"));
            rows.push_back(std::move(row));
        }
        return combinatorial::validate_and_sigma(rows);
    }
    if (p.contains("array_csv")) {
        const auto path = as_string(p.at("array_csv"), "model_params.array_csv");
        std::ifstream in(path);
        if (!in) fail("cannot open array_csv '" + path + "'");
        return combinatorial::validate_and_sigma(combinatorial::read_array_csv(in));
    }
    const auto kind = param_string(p, "kind", "");
    const int n = param_int(p, "n", 2, 9);
    if (kind == "product") return combinatorial::product_array(n);
    if (kind == "random") {
        const std::uint64_t seed = p.contains("seed") ? as_uint(p.at("seed"), "model_params.seed") : 1;
        return combinatorial::random_array(n, seed);
    }
    fail("combinatorial needs model_params.array, array_csv, or kind = product|random");
}

std::uint64_t binary_n(const json& p) {
    const auto n = as_uint(require(p, "n", "model_params"), "model_params.n");
    if (n < 2) fail("model_params.n must be >= 2");
    if (n >> 62) fail("model_params.n must be below 2^62");
    return n;
}

binary_code::TreeLabeling custom_tree(const json& p) {
    const auto& t = require(p, "labels", "model_params");
    if (!t.is_array() || t.size() < 2) fail("model_params.labels must list depth 0..k label rows");
    binary_code::TreeLabeling tree;
    tree.depth = static_cast<int>(t.size()) - 1;
    if (tree.depth > 22) throw ResourceError("binarycode: custom tree depth must be <= 22");
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (!t[j].is_array() || t[j].size() != (std::size_t{1} << j)) {
            fail("model_params.labels[" + std::to_string(j) + "] must hold 2^" + std::to_string(j) +
                 " labels");
        }
        std::vector<std::uint8_t> row;
        for (const auto& v : t[j]) {
            const auto l = as_int(v, "model_params.labels entry");
            if (l != 0 && l != 1) fail("model_params.labels entries must be 0 or 1");
            row.push_back(static_cast<std::uint8_t>(l));
        }
        tree.labels.push_back(std::move(row));
    }
    tree.validate();
    return tree;
}

curie_weiss::CWParams cw_params(const json& p) {
    const int n = param_int(p, "n", 2, 1'000'000'000);
    return curie_weiss::make_params(n, param_real(p, "beta"), param_real(p, "h", 0.0));
}

curie_weiss::Sign cw_sign(const json& p) {
    return curie_weiss::parse_sign(param_string(p, "sign", "none"));
}

independent::ComponentList indep_components(const json& p) {
    if (p.contains("rademacher")) {
        const auto n = as_int(p.at("rademacher"), "model_params.rademacher");
        if (n < 1 || n > 10'000'000) fail("model_params.rademacher must be in [1, 10000000]");
        return independent::rademacher(static_cast<int>(n));
    }
    json comps;
    if (p.contains("components")) {
        comps = p.at("components");
    } else if (p.contains("components_path")) {
        comps = read_json_file(as_string(p.at("components_path"), "model_params.components_path"));
    } else {
        fail("independent needs model_params.rademacher, components, or components_path");
    }
    auto laws = distributions_from_json(comps);
    if (p.contains("truncate_c1")) {
        return independent::truncate_and_standardize(laws, param_real(p, "truncate_c1")).result;
    }
    return independent::make_components(std::move(laws));
}

independent::BandKind indep_band(const json& p) {
    return independent::parse_band(param_string(p, "band", "gamma"));
}

// Largest x with 4 x^3 gamma(x) < 10; the gamma band is uninformative past it.
double gamma_edge(const independent::ComponentList& c) {
    auto over = [&](double x) { return 4.0 * x * x * x * independent::gamma(c, x) >= 10.0; };
    double hi = 1.0;
    while (!over(hi) && hi < 1e6) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (over(mid) ? hi : lo) = mid;
    }
    return lo;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class T>
std::uint64_t fingerprint(const std::vector<T>& v) {
    return fnv1a(v.data(), v.size() * sizeof(T), 0xcbf29ce484222325ULL);
}

std::optional<McSummary> run_mc(const ExperimentConfig& c, int workers) {
    if (!c.mc) return std::nullopt;
    const auto& mc = *c.mc;
    const auto& p = c.model_params;
    McSummary s;
    s.samples = mc.samples;
    s.workers = workers;
    switch (c.model) {
        case Model::Combinatorial: {
            const auto arr = comb_array(p);
            const auto w = combinatorial::sample(arr, mc.seed, mc.samples, workers);
            s.fingerprint = fingerprint(w);
            s.tv = total_variation(empirical_law(w), combinatorial::exact_law(arr));
            break;
        }
        case Model::Antivoter: {
            const auto chain = antivoter::transition_rates(param_int(p, "n", 4, 1'000'000));
            const auto t = antivoter::sample(chain, mc.seed, mc.samples, mc.burnin, workers);
            s.fingerprint = fingerprint(t);
            std::vector<double> w;
            w.reserve(t.size());
            for (int v : t) w.push_back(chain.w_of(v));
            s.tv = total_variation(empirical_law(w), antivoter::stationary_law(chain));
            break;
        }
        case Model::CurieWeiss: {
            const auto cw = cw_params(p);
            const auto t = curie_weiss::sample(cw, mc.seed, mc.samples, mc.burnin, workers);
            s.fingerprint = fingerprint(t);
            std::vector<double> w(t.begin(), t.end());
            s.tv = total_variation(empirical_law(w), curie_weiss::exact_spin_sum_law(cw));
            break;
        }
        case Model::BinaryCode:
        case Model::Independent:
            fail(std::string("mc: model ") + to_string(c.model) + " has no sampler");
    }
    return s;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("output: cannot write '" + path + "'");
    out << body;
    if (!out) throw ResourceError("output: write to '" + path + "' failed");
}

std::string csv_of(const RatioTable& t) {
    std::ostringstream os;
    write_ratio_csv(os, t);
    return os.str();
}

}  // namespace

const char* to_string(Model m) {
    switch (m) {
        case Model::Combinatorial: return "combinatorial";
        case Model::Antivoter: return "antivoter";
        case Model::BinaryCode: return "binarycode";
        case Model::CurieWeiss: return "curieweiss";
        case Model::Independent: return "independent";
    }
    return "?";
}

Model parse_model(const std::string& s) {
    for (Model m : {Model::Combinatorial, Model::Antivoter, Model::BinaryCode, Model::CurieWeiss,
                    Model::Independent}) {
        if (s == to_string(m)) return m;
    }
    fail("model must be one of combinatorial, antivoter, binarycode, curieweiss, independent (got '" +
         s + "')");
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) fail("top level must be an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "model" && key != "model_params" && key != "grid" && key != "mc" &&
            key != "output" && key != "workers") {
            fail("unknown key '" + key + "'");
        }
    }
    ExperimentConfig c;
    c.model = parse_model(as_string(require(j, "model", "config"), "model"));
    if (j.contains("model_params")) {
        c.model_params = j.at("model_params");
        if (!c.model_params.is_object()) fail("model_params must be an object");
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (!g.is_object()) fail("grid must be an object");
        if (g.contains("x_max")) {
            const auto& x = g.at("x_max");
            if (x.is_string()) {
                if (x.get<std::string>() != "auto") fail("grid.x_max must be a number or \"auto\"");
            } else {
                const double v = as_real(x, "grid.x_max");
                if (!(v > 0.0) || !std::isfinite(v)) fail("grid.x_max must be positive and finite");
                c.grid.x_max = v;
            }
        }
        if (g.contains("points")) {
            const auto pts = as_int(g.at("points"), "grid.points");
            if (pts < 2) fail("grid.points must be >= 2 (got " + std::to_string(pts) + ")");
            if (pts > 1'000'000) fail("grid.points must be <= 1000000");
            c.grid.points = static_cast<int>(pts);
        }
    }
    if (j.contains("mc") && !j.at("mc").is_null()) {
        const auto& m = j.at("mc");
        if (!m.is_object()) fail("mc must be an object");
        McSpec s;
        s.seed = as_uint(require(m, "seed", "mc"), "mc.seed");
        s.samples = as_uint(require(m, "samples", "mc"), "mc.samples");
        if (s.samples < 1) fail("mc.samples must be >= 1");
        if (m.contains("burnin")) s.burnin = as_uint(m.at("burnin"), "mc.burnin");
        c.mc = s;
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (!o.is_object()) fail("output must be an object");
        if (o.contains("format")) {
            const auto f = as_string(o.at("format"), "output.format");
            if (f == "csv") {
                c.output.format = Format::Csv;
            } else if (f == "json") {
                c.output.format = Format::Json;
            } else {
                fail("output.format must be csv or json (got '" + f + "')");
            }
        }
        if (o.contains("path")) c.output.path = as_string(o.at("path"), "output.path");
    }
    if (j.contains("workers")) {
        const auto w = as_int(j.at("workers"), "workers");
        if (w < 1 || w > 1024) fail("workers must be in [1, 1024]");
        c.workers = static_cast<int>(w);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

double auto_x_max(const ExperimentConfig& c) {
    const auto& p = c.model_params;
    switch (c.model) {
        case Model::Combinatorial:
            return range_cap(combinatorial::budget(comb_array(p)));
        case Model::Antivoter:
            return antivoter::range_cap(param_int(p, "n", 4, 1'000'000));
        case Model::BinaryCode:
            return std::pow(static_cast<double>(binary_code::bit_length(binary_n(p))), 1.0 / 6.0);
        case Model::CurieWeiss:
            return std::pow(static_cast<double>(cw_params(p).n), 1.0 / 6.0);
        case Model::Independent: {
            const auto comps = indep_components(p);
            if (indep_band(p) == independent::BandKind::Rate) {
                return std::pow(static_cast<double>(comps.components.size()), 1.0 / 6.0);
            }
            return gamma_edge(comps);
        }
    }
    return 0.0;
}

ExactDistribution model_law(const ExperimentConfig& c) {
    const auto& p = c.model_params;
    switch (c.model) {
        case Model::Combinatorial:
            return combinatorial::exact_law(comb_array(p));
        case Model::Antivoter:
            return antivoter::stationary_law(antivoter::transition_rates(param_int(p, "n", 4, 1'000'000)));
        case Model::BinaryCode: {
            const auto n = binary_n(p);
            const int k = binary_code::bit_length(n);
            switch (binary_code::parse_system(param_string(p, "system", "binary-expansion"))) {
                case binary_code::System::BinaryExpansion:
                    return binary_code::standardized(binary_code::digit_sum_law(n), k);
                case binary_code::System::ReflectedExtreme:
                    return binary_code::standardized(binary_code::reflected_law(n), k);
                case binary_code::System::CustomTree:
                    return binary_code::standardized(binary_code::tree_law(custom_tree(p), n), k);
            }
            break;
        }
        case Model::CurieWeiss:
            return curie_weiss::conditional_standardized_law(cw_params(p), cw_sign(p)).law;
        case Model::Independent:
            return independent::sum_law(indep_components(p));
    }
    fail("unreachable model");
}

RunResult run_experiment(const ExperimentConfig& c) {
    const auto& p = c.model_params;
    RunResult r;
    const double x_max = c.grid.x_max ? *c.grid.x_max : auto_x_max(c);
    if (!(x_max > 0.0) || !std::isfinite(x_max)) {
        fail("grid.x_max resolved to " + format_real(x_max) + "; give an explicit positive value");
    }
    r.grid = uniform_grid(x_max, c.grid.points);
    switch (c.model) {
        case Model::Combinatorial:
            r.report = combinatorial::band_report(comb_array(p), r.grid);
            break;
        case Model::Antivoter: {
            const int n = param_int(p, "n", 4, 1'000'000);
            // The identity report throws IntegrityError when a pair identity fails.
            const auto ids = antivoter::exact_pair_identities(antivoter::transition_rates(n));
            r.report = antivoter::band_report(n, r.grid);
            r.report.diagnostics.identity_residuals["regression"] = ids.regression_residual;
            r.report.diagnostics.identity_residuals["d"] = ids.d_residual;
            break;
        }
        case Model::BinaryCode: {
            const auto n = binary_n(p);
            if (p.contains("kernel_bound_shift")) {
                binary_code::IdentityOptions opts;
                opts.kernel_bound_shift = as_int(p.at("kernel_bound_shift"), "model_params.kernel_bound_shift");
                (void)binary_code::pair_identities_report(n, opts);
            }
            const auto sys = binary_code::parse_system(param_string(p, "system", "binary-expansion"));
            if (sys == binary_code::System::CustomTree) {
                r.report = binary_code::band_report(custom_tree(p), n, r.grid);
            } else {
                auto both = binary_code::band_report(n, r.grid);
                r.report = sys == binary_code::System::BinaryExpansion ? std::move(both.expansion)
                                                                      : std::move(both.reflected);
            }
            break;
        }
        case Model::CurieWeiss:
            r.report = curie_weiss::band_report(cw_params(p), cw_sign(p), r.grid);
            break;
        case Model::Independent:
            r.report = independent::band_report(indep_components(p), r.grid, indep_band(p));
            break;
    }
    r.mc = run_mc(c, rng::resolve_workers(c.workers));
    return r;
}

json diagnostics_json(const ExperimentConfig& c, const RunResult& r) {
    json j = to_json(r.report.diagnostics);
    j["model_params"] = c.model_params;
    j["grid"] = {{"x_max", r.grid.empty() ? 0.0 : r.grid.back()},
                 {"points", r.grid.size()},
                 {"auto", !c.grid.x_max.has_value()},
                 {"x_cap", format_real(r.report.x_cap)}};
    j["band"] = r.report.table.band;
    if (r.mc) {
        j["mc"] = {{"seed", c.mc->seed},
                   {"samples", r.mc->samples},
                   {"burnin", c.mc->burnin},
                   {"workers", r.mc->workers},
                   {"tv", r.mc->tv},
                   {"fingerprint", r.mc->fingerprint}};
    }
    return j;
}

void write_artifacts(const ExperimentConfig& c, const RunResult& r, std::ostream& fallback) {
    const auto diag = diagnostics_json(c, r);
    if (c.output.format == Format::Json) {
        json doc = {{"diagnostics", diag}, {"table", to_json(r.report.table)}};
        const auto body = doc.dump(2) + "\n";
        if (c.output.path.empty()) {
            fallback << body;
        } else {
            write_file(c.output.path, body);
        }
        return;
    }
    if (c.output.path.empty()) {
        write_ratio_csv(fallback, r.report.table);
        return;
    }
    write_file(c.output.path, csv_of(r.report.table));
    write_file(c.output.path + ".diagnostics.json", diag.dump(2) + "\n");
}

int exit_code_of(const std::exception& e) {
    if (dynamic_cast<const DomainError*>(&e)) return 2;
    if (dynamic_cast<const IntegrityError*>(&e)) return 3;
    if (dynamic_cast<const ResourceError*>(&e)) return 4;
    return 1;
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
    try {
        const auto r = run_experiment(c);
        write_artifacts(c, r, out);
        return 0;
    } catch (const std::exception& e) {
        err << "mdlab: " << e.what() << "\n";
        return exit_code_of(e);
    }
}

SuiteSize parse_suite_size(const std::string& s) {
    if (s == "smoke") return SuiteSize::Smoke;
    if (s == "full") return SuiteSize::Full;
    throw DomainError("suite: size must be smoke or full (got '" + s + "')");
}

namespace {

struct Member {
    std::string label;
    Model model;
    std::vector<json> params;  // one per n, in schedule order
    std::vector<double> rate_n;  // n in the 5/sqrt(n) check (k for binary codes)
    bool sup_check = true;
};

std::vector<Member> schedule(SuiteSize size) {
    const bool full = size == SuiteSize::Full;
    std::vector<Member> ms;
    auto take = [&](std::vector<double> v) {
        if (!full) v.pop_back();
        return v;
    };
    {
        Member m{"combinatorial-product", Model::Combinatorial, {}, {}, false};
        for (double n : take({6, 7, 8, 9})) {
            m.params.push_back({{"kind", "product"}, {"n", static_cast<int>(n)}});
            m.rate_n.push_back(n);
        }
        ms.push_back(std::move(m));
    }
    {
        Member m{"antivoter", Model::Antivoter, {}, {}, true};
        for (double n : take({1e2, 1e3, 1e4})) {
            m.params.push_back({{"n", static_cast<int>(n)}});
            m.rate_n.push_back(n);
        }
        ms.push_back(std::move(m));
    }
    for (const char* sys : {"binary-expansion", "reflected-extreme"}) {
        Member m{std::string("binarycode-") + sys, Model::BinaryCode, {}, {}, true};
        for (double k : take({10, 14, 20})) {
            const auto n = static_cast<std::uint64_t>(std::ldexp(1.0, static_cast<int>(k)) * 2.0 / 3.0);
            m.params.push_back({{"n", n}, {"system", sys}});
            m.rate_n.push_back(k);
        }
        ms.push_back(std::move(m));
    }
    {
        Member m{"curieweiss-case1", Model::CurieWeiss, {}, {}, true};
        for (double n : take({1e3, 1e4, 1e5})) {
            m.params.push_back({{"n", static_cast<int>(n)}, {"beta", 0.5}, {"h", 0.0}});
            m.rate_n.push_back(n);
        }
        ms.push_back(std::move(m));
    }
    {
        Member m{"curieweiss-case2-plus", Model::CurieWeiss, {}, {}, true};
        for (double n : take({1e3, 1e4, 1e5})) {
            m.params.push_back({{"n", static_cast<int>(n)}, {"beta", 1.5}, {"h", 0.0}, {"sign", "+"}});
            m.rate_n.push_back(n);
        }
        ms.push_back(std::move(m));
    }
    {
        Member m{"independent-rademacher", Model::Independent, {}, {}, true};
        for (double n : take({100, 400, 1600})) {
            m.params.push_back({{"rademacher", static_cast<int>(n)}, {"band", "rate"}});
            m.rate_n.push_back(n);
        }
        ms.push_back(std::move(m));
    }
    return ms;
}

}  // namespace

SuiteResult suite(const SuiteOptions& o, std::ostream& log) {
    namespace fs = std::filesystem;
    const bool write = !o.out_dir.empty();
    if (write) fs::create_directories(o.out_dir);
    SuiteResult res;
    json models = json::array();
    const auto grid = uniform_grid(4.0, 81);
    for (const auto& m : schedule(o.size)) {
        json entry = {{"model", to_string(m.model)}, {"label", m.label}};
        json rows = json::array();
        std::vector<double> fitted;
        bool ok = true;
        std::string error;
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            ExperimentConfig c;
            c.model = m.model;
            c.model_params = m.params[i];
            c.grid.x_max = grid.back();
            c.grid.points = static_cast<int>(grid.size());
            try {
                const auto r = run_experiment(c);
                const double fc = r.report.diagnostics.fitted_constant;
                const double sup = max_ratio_deviation(r.report.table, 1.0);
                fitted.push_back(fc);
                rows.push_back({{"n", r.report.diagnostics.n},
                                {"fitted_constant", fc},
                                {"sup_x_le_1", sup},
                                {"x_cap", r.report.x_cap},
                                {"pass", r.report.diagnostics.pass}});
                ok = ok && r.report.diagnostics.pass;
                if (write) {
                    std::ostringstream name;
                    name << m.label << "_" << static_cast<std::uint64_t>(r.report.diagnostics.n) << ".csv";
                    write_file((fs::path(o.out_dir) / name.str()).string(), csv_of(r.report.table));
                }
                log << m.label << " n=" << format_real(r.report.diagnostics.n)
                    << " C=" << format_real(fc) << " sup=" << format_real(sup) << "\n";
            } catch (const std::exception& e) {
                ok = false;
                error = e.what();
                log << m.label << " failed: " << e.what() << "\n";
                break;
            }
        }
        bool monotone = fitted.size() == m.params.size();
        for (std::size_t i = 1; i < fitted.size(); ++i) {
            monotone = monotone && std::isfinite(fitted[i]) && fitted[i] <= 2.0 * fitted[i - 1];
        }
        entry["entries"] = rows;
        entry["monotone_bounded"] = monotone;
        ok = ok && monotone;
        if (m.sup_check && rows.size() == m.params.size()) {
            const double bound = 5.0 / std::sqrt(m.rate_n.back());
            const bool sup_ok = rows.back()["sup_x_le_1"].get<double>() <= bound;
            entry["sup_bound"] = bound;
            entry["sup_ok"] = sup_ok;
            ok = ok && sup_ok;
        }
        if (!error.empty()) entry["error"] = error;
        entry["pass"] = ok;
        res.pass = res.pass && ok;
        models.push_back(std::move(entry));
    }

    // Seeded sampler checks; the TV threshold scales as 1/sqrt(samples) from 0.01 at 10^6.
    const std::uint64_t samples = o.size == SuiteSize::Full ? 1'000'000 : 100'000;
    const double tv_bound = 0.01 * std::sqrt(1e6 / static_cast<double>(samples));
    json mc = json::array();
    const std::vector<std::pair<Model, json>> samplers{
        {Model::Combinatorial, {{"kind", "product"}, {"n", 6}}},
        {Model::Antivoter, {{"n", 50}}},
        {Model::CurieWeiss, {{"n", 100}, {"beta", 0.5}, {"h", 0.0}}}};
    for (const auto& [model, params] : samplers) {
        ExperimentConfig c;
        c.model = model;
        c.model_params = params;
        c.grid.x_max = 1.0;
        c.grid.points = 2;
        c.mc = McSpec{o.seed, samples, 20};
        c.workers = o.workers;
        try {
            const auto s = *run_mc(c, rng::resolve_workers(o.workers));
            const bool ok = s.tv <= tv_bound;
            mc.push_back({{"model", to_string(model)},
                          {"model_params", params},
                          {"samples", samples},
                          {"workers", s.workers},
                          {"tv", s.tv},
                          {"tv_bound", tv_bound},
                          {"fingerprint", s.fingerprint},
                          {"pass", ok}});
            res.pass = res.pass && ok;
            log << "mc " << to_string(model) << " tv=" << format_real(s.tv) << "\n";
        } catch (const std::exception& e) {
            mc.push_back({{"model", to_string(model)}, {"error", e.what()}, {"pass", false}});
            res.pass = false;
            log << "mc " << to_string(model) << " failed: " << e.what() << "\n";
        }
    }
    res.summary = {{"size", o.size == SuiteSize::Full ? "full" : "smoke"},
                   {"seed", o.seed},
                   {"workers", o.workers},
                   {"models", models},
                   {"mc", mc},
                   {"pass", res.pass}};
    if (write) write_file((fs::path(o.out_dir) / "summary.json").string(), res.summary.dump(2) + "\n");
    return res;
}

}  // namespace mdlab::runner
