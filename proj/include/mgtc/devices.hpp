#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mgtc/common.hpp"

namespace mgtc {

/// s_load = s_zip[t] * (|v| / v_nom)^alpha on each phase it occupies.
/// `s_zip` is the total over phases; `shares` splits it per phase (sums to 1).
struct ExponentialLoad {
    std::string name;
    std::size_t node = 0;
    std::vector<cplx> s_zip;  // pu, one entry per period
    double alpha = 0.0;
    std::array<double, 3> shares{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

struct PvUnit {
    std::string name;
    std::size_t node = 0;
    double rho = 0.0;    // pu per W/m^2
    double s_max = 0.0;  // pu
};

struct WindTurbine {
    std::string name;
    std::size_t node = 0;
    double p_nom = 0.0;  // pu
    double w_nom = 0.0;  // m/s
    double w_max = 0.0;  // m/s
    double s_max = 0.0;  // pu
};

/// n = a p^2 + b p + c
struct QuadraticLoss {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double p) const { return (a * p + b) * p + c; }
};

struct Battery {
    std::string name;
    std::size_t node = 0;
    double e_min = 0.0;   // pu*h
    double e_max = 0.0;   // pu*h
    double e_init = 0.0;  // pu*h
    QuadraticLoss loss_char;
    QuadraticLoss loss_disch;
    double p_char_max = 0.0;   // pu
    double p_disch_max = 0.0;  // pu
    double s_max = 0.0;        // pu
};

/// Devices connect balanced three-phase: each phase carries one third of the device power.
struct DeviceFleet {
    std::vector<ExponentialLoad> loads;
    std::vector<PvUnit> pv;
    std::vector<WindTurbine> wind;
    std::vector<Battery> batteries;
};

struct TimeSeriesSet {
    std::size_t horizon = 24;
    double dt = 1.0;                  // h
    std::vector<double> irradiance;   // W/m^2 (psi_t)
    std::vector<double> wind_speed;   // m/s
    std::vector<double> demand_scale; // unitless
    std::vector<double> price;        // $/kWh
};

enum class BatteryMode { charge, discharge };

/// Exact exponential-load power at voltage v for period t (all phases of the load).
cplx load_power_exact(ExponentialLoad const& load, cplx v, std::size_t t, double v_nom);

/// Per-phase exact load power.
cplx load_power_exact(ExponentialLoad const& load, cplx v, std::size_t t, double v_nom, Phase phase);

/// Upper bound rho * psi_t on PV active power.
double pv_bound(PvUnit const& pv, double psi);

/// Cubic below w_nom, p_nom on [w_nom, w_max], zero above w_max.
double wind_bound(WindTurbine const& wt, double w);

/// a p^2 + b p + c using the mode's coefficients; p must be non-negative.
double battery_loss(Battery const& bat, double p, BatteryMode mode);

/// Validates device parameters against the fleet invariants and the series horizon.
void validate(DeviceFleet const& fleet, TimeSeriesSet const& series);
void validate(TimeSeriesSet const& series);

}  // namespace mgtc
