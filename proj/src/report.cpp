#include "mdlab/report.hpp"

#include <cmath>
#include <cstdio>

namespace mdlab {
namespace {

// JSON has no infinities; they are written as strings.
nlohmann::json real(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

}  // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json to_json(const SteinBudget& b) {
    nlohmann::json j;
    j["delta"] = real(b.delta);
    j["delta1"] = real(b.delta1);
    j["delta2"] = real(b.delta2);
    j["theta"] = real(b.theta);
    j["alpha"] = b.alpha ? nlohmann::json(*b.alpha) : nlohmann::json(nullptr);
    j["variant"] = to_string(b.variant);
    j["provenance"] = b.provenance;
    return j;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
    nlohmann::json j;
    j["model"] = r.model;
    j["n"] = real(r.n);
    j["budget"] = to_json(r.budget);
    j["fitted_constant"] = real(r.fitted_constant);
    nlohmann::json res = nlohmann::json::object();
    for (const auto& [k, v] : r.identity_residuals) res[k] = real(v);
    j["identity_residuals"] = res;
    j["pass"] = r.pass;
    if (!r.extras.empty()) j["extras"] = r.extras;
    return j;
}

nlohmann::json to_json(const RatioTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json row;
        row["x"] = r.x;
        row["log_tail"] = real(r.log_tail);
        row["log_normal_tail"] = real(r.log_normal_tail);
        row["ratio"] = real(r.ratio);
        row["band_halfwidth_unit"] = real(r.band_halfwidth_unit);
        row["in_range"] = r.in_range;
        if (r.at_atom) {
            row["at_atom"] = true;
            row["log_tail_inclusive"] = real(r.log_tail_inclusive);
        }
        if (r.low_information) row["low_information"] = true;
        rows.push_back(row);
    }
    return {{"band", t.band}, {"rows", rows}};
}

void write_ratio_csv(std::ostream& os, const RatioTable& t) {
    os << "x,log_tail,log_normal_tail,ratio,band_halfwidth_unit,in_range\n";
    for (const auto& r : t.rows) {
        os << format_real(r.x) << ',' << format_real(r.log_tail) << ','
           << format_real(r.log_normal_tail) << ',' << format_real(r.ratio) << ','
           << format_real(r.band_halfwidth_unit) << ',' << (r.in_range ? 1 : 0) << '\n';
    }
}

}  // namespace mdlab
