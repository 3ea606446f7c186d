#pragma once

#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

#include "mdlab/stein_core.hpp"

namespace mdlab {

/// Per-model record of a band run: budget, fitted constant, identity
/// residuals and whatever else the model wants to expose.
struct DiagnosticsReport {
    std::string model;
    double n = 0.0;
    SteinBudget budget;
    double fitted_constant = 0.0;
    std::map<std::string, double> identity_residuals;
    bool pass = true;
    nlohmann::json extras = nlohmann::json::object();
};

/// A ratio table together with its diagnostics.
struct ModelBandReport {
    RatioTable table;
    DiagnosticsReport diagnostics;
    double x_cap = 0.0;
};

nlohmann::json to_json(const SteinBudget& b);
nlohmann::json to_json(const DiagnosticsReport& r);
nlohmann::json to_json(const RatioTable& t);

/// Columns x, log_tail, log_normal_tail, ratio, band_halfwidth_unit, in_range;
/// reals with 17 significant digits.
void write_ratio_csv(std::ostream& os, const RatioTable& t);

/// %.17g, with inf and nan spelled out.
std::string format_real(double v);

}  // namespace mdlab
