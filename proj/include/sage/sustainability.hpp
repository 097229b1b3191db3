#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace sage::carbon {

// Inputs to the training-emissions estimate. Defaults follow the hardware
// assumptions used throughout: 10% system overhead on GPU TDP, PUE 1.1,
// grid intensity 0.475 kgCO2e per kWh.
//
// The estimate is TDP-based and therefore an upper bound on draw: 8 GPUs
// at 400 W for 55 h with these defaults evaluates to 101.156 kg CO2e.
// Reported figures of ~85.6 kg for the same footprint imply average draw
// around 85% of TDP; this module deliberately reports the TDP-based
// number and leaves utilization scaling to the caller.
struct EnergyProfile {
    double train_hours = 0.0;        // T
    std::int64_t num_gpus = 1;       // N_GPU
    double tdp_watts = 400.0;        // per-GPU TDP
    double sys_overhead = 1.1;       // gamma_sys multiplier
    double pue = 1.1;                // datacenter PUE
    double carbon_intensity = 0.475; // kgCO2e per kWh

    void validate() const;  // ConfigError on non-physical values
};

struct EmissionsReport {
    double p_sys_kw = 0.0;    // N_GPU * TDP * gamma_sys / 1000
    double energy_kwh = 0.0;  // p_sys_kw * T * PUE
    double co2_kg = 0.0;      // energy_kwh * intensity
};

EmissionsReport estimate_emissions(const EnergyProfile& profile);

// 100 * (baseline - treatment) / baseline. baseline must be positive ->
// ConfigError; negative inputs -> ConfigError.
double percent_reduction(double baseline_kg, double treatment_kg);

// One-decimal fixed formatting ("95.1").
std::string format_reduction(double percent);

EnergyProfile profile_from_json(const nlohmann::json& obj);
nlohmann::json profile_to_json(const EnergyProfile& profile);
nlohmann::json report_to_json(const EmissionsReport& report);

}  // namespace sage::carbon
