#include "sage/sustainability.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "sage/errors.hpp"

namespace sage::carbon {

using nlohmann::json;

void EnergyProfile::validate() const {
    if (!(train_hours >= 0.0) || !std::isfinite(train_hours)) {
        throw ConfigError("carbon: train_hours must be non-negative");
    }
    if (num_gpus < 1) throw ConfigError("carbon: num_gpus must be at least 1");
    if (!(tdp_watts > 0.0) || !std::isfinite(tdp_watts)) {
        throw ConfigError("carbon: tdp_watts must be positive");
    }
    if (!(sys_overhead >= 1.0) || !std::isfinite(sys_overhead)) {
        throw ConfigError("carbon: sys_overhead must be at least 1.0");
    }
    if (!(pue >= 1.0) || !std::isfinite(pue)) {
        throw ConfigError("carbon: pue must be at least 1.0");
    }
    if (!(carbon_intensity > 0.0) || !std::isfinite(carbon_intensity)) {
        throw ConfigError("carbon: carbon_intensity must be positive");
    }
}

EmissionsReport estimate_emissions(const EnergyProfile& profile) {
    profile.validate();
    EmissionsReport report;
    report.p_sys_kw =
        static_cast<double>(profile.num_gpus) * profile.tdp_watts * profile.sys_overhead / 1000.0;
    report.energy_kwh = report.p_sys_kw * profile.train_hours * profile.pue;
    report.co2_kg = report.energy_kwh * profile.carbon_intensity;
    return report;
}

double percent_reduction(double baseline_kg, double treatment_kg) {
    if (!(baseline_kg > 0.0) || !std::isfinite(baseline_kg)) {
        throw ConfigError("percent_reduction: baseline must be positive");
    }
    if (!(treatment_kg >= 0.0) || !std::isfinite(treatment_kg)) {
        throw ConfigError("percent_reduction: treatment must be non-negative");
    }
    return 100.0 * (baseline_kg - treatment_kg) / baseline_kg;
}

std::string format_reduction(double percent) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", percent);
    return buf;
}

EnergyProfile profile_from_json(const json& obj) {
    if (!obj.is_object()) throw SchemaError("carbon profile: expected a JSON object");
    EnergyProfile p;
    try {
        p.train_hours = obj.at("train_hours").get<double>();
        p.num_gpus = obj.at("num_gpus").get<std::int64_t>();
        if (obj.contains("tdp_watts")) p.tdp_watts = obj["tdp_watts"].get<double>();
        if (obj.contains("sys_overhead")) p.sys_overhead = obj["sys_overhead"].get<double>();
        if (obj.contains("pue")) p.pue = obj["pue"].get<double>();
        if (obj.contains("carbon_intensity")) {
            p.carbon_intensity = obj["carbon_intensity"].get<double>();
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("carbon profile: ") + e.what());
    }
    p.validate();
    return p;
}

json profile_to_json(const EnergyProfile& p) {
    return json{{"train_hours", p.train_hours},     {"num_gpus", p.num_gpus},
                {"tdp_watts", p.tdp_watts},         {"sys_overhead", p.sys_overhead},
                {"pue", p.pue},                     {"carbon_intensity", p.carbon_intensity}};
}

json report_to_json(const EmissionsReport& r) {
    return json{{"p_sys_kw", r.p_sys_kw}, {"energy_kwh", r.energy_kwh}, {"co2_kg", r.co2_kg}};
}

}  // namespace sage::carbon
