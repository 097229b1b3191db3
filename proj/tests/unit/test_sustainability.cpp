#include <cmath>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "sage/errors.hpp"
#include "sage/sustainability.hpp"

using namespace sage;
using namespace sage::carbon;

TEST_CASE("default profile on the 8-gpu 55-hour footprint") {
    EnergyProfile p;
    p.train_hours = 55.0;
    p.num_gpus = 8;
    auto r = estimate_emissions(p);
    CHECK(r.p_sys_kw == doctest::Approx(3.52).epsilon(1e-12));
    CHECK(r.energy_kwh == doctest::Approx(212.96).epsilon(1e-12));
    CHECK(r.co2_kg == doctest::Approx(101.156).epsilon(1e-9));
}

TEST_CASE("single-gpu curated run footprint") {
    EnergyProfile p;
    p.train_hours = 20.0;
    p.num_gpus = 1;
    auto r = estimate_emissions(p);
    // 0.44 kW * 20 h * 1.1 = 9.68 kWh; * 0.475 = 4.598 kg
    CHECK(r.p_sys_kw == doctest::Approx(0.44).epsilon(1e-12));
    CHECK(r.co2_kg == doctest::Approx(4.598).epsilon(1e-9));
}

TEST_CASE("emissions are linear in training time") {
    EnergyProfile p;
    p.num_gpus = 4;
    for (double t : {1.0, 7.5, 333.0}) {
        p.train_hours = t;
        double unit = [&] {
            EnergyProfile q = p;
            q.train_hours = 1.0;
            return estimate_emissions(q).co2_kg;
        }();
        CHECK(std::abs(estimate_emissions(p).co2_kg - t * unit) < 1e-12 * std::max(1.0, t * unit));
    }
}

TEST_CASE("zero hours means zero emissions") {
    EnergyProfile p;
    auto r = estimate_emissions(p);
    CHECK(r.energy_kwh == 0.0);
    CHECK(r.co2_kg == 0.0);
}

TEST_CASE("profile validation") {
    EnergyProfile p;
    p.validate();
    EnergyProfile bad = p;
    bad.train_hours = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.num_gpus = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.pue = 0.99;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.carbon_intensity = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("percent reduction and display formatting") {
    CHECK(percent_reduction(100.0, 25.0) == doctest::Approx(75.0));
    double r = percent_reduction(85.6, 4.2);
    CHECK(format_reduction(r) == "95.1");
    CHECK(format_reduction(0.0) == "0.0");
    CHECK(format_reduction(100.0) == "100.0");
    CHECK_THROWS_AS(percent_reduction(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(percent_reduction(10.0, -1.0), ConfigError);
}

TEST_CASE("profile json round trip") {
    EnergyProfile p;
    p.train_hours = 12.5;
    p.num_gpus = 2;
    p.tdp_watts = 300.0;
    auto j = profile_to_json(p);
    auto rt = profile_from_json(j);
    CHECK(rt.train_hours == p.train_hours);
    CHECK(rt.num_gpus == p.num_gpus);
    CHECK(rt.tdp_watts == p.tdp_watts);
    CHECK(rt.pue == p.pue);

    auto rj = report_to_json(estimate_emissions(p));
    CHECK(rj.contains("co2_kg"));
    CHECK(rj.contains("energy_kwh"));
    CHECK(rj.contains("p_sys_kw"));
}
