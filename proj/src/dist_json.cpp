#include "mdlab/dist_json.hpp"

#include "mdlab/errors.hpp"

namespace mdlab {

nlohmann::json to_json(const ExactDistribution& d) {
    nlohmann::json j;
    j["support"] = std::vector<double>(d.support().begin(), d.support().end());
    j["logp"] = std::vector<double>(d.logp().begin(), d.logp().end());
    if (!d.meta().empty()) j["meta"] = d.meta();
    return j;
}

ExactDistribution distribution_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("support") || !j.contains("logp")) {
        throw DomainError("distribution JSON needs \"support\" and \"logp\" arrays");
    }
    try {
        auto support = j.at("support").get<std::vector<double>>();
        auto logp = j.at("logp").get<std::vector<double>>();
        std::string meta = j.value("meta", std::string{});
        return ExactDistribution(std::move(support), std::move(logp), std::move(meta));
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("distribution JSON: ") + e.what());
    }
}

std::vector<ExactDistribution> distributions_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DomainError("component list JSON must be an array");
    std::vector<ExactDistribution> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(distribution_from_json(item));
    return out;
}

}  // namespace mdlab
