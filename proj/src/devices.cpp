#include "mgtc/devices.hpp"

#include <cmath>

namespace mgtc {

cplx load_power_exact(ExponentialLoad const& load, cplx v, std::size_t t, double v_nom) {
    if (t >= load.s_zip.size()) throw InputError("load '" + load.name + "': period out of range");
    if (load.alpha == 0.0) return load.s_zip[t];
    return load.s_zip[t] * std::pow(std::abs(v) / v_nom, load.alpha);
}

cplx load_power_exact(ExponentialLoad const& load, cplx v, std::size_t t, double v_nom, Phase phase) {
    return load.shares[static_cast<int>(phase)] * load_power_exact(load, v, t, v_nom);
}

double pv_bound(PvUnit const& pv, double psi) {
    if (psi < 0.0) throw InputError("irradiance must be non-negative");
    return pv.rho * psi;
}

double wind_bound(WindTurbine const& wt, double w) {
    if (w < 0.0) throw InputError("wind speed must be non-negative");
    if (w <= wt.w_nom) {
        double const r = w / wt.w_nom;
        return wt.p_nom * r * r * r;
    }
    if (w <= wt.w_max) return wt.p_nom;
    return 0.0;
}

double battery_loss(Battery const& bat, double p, BatteryMode mode) {
    if (p < 0.0) throw InputError("battery power must be non-negative");
    return mode == BatteryMode::charge ? bat.loss_char(p) : bat.loss_disch(p);
}

void validate(TimeSeriesSet const& s) {
    if (s.horizon == 0) throw InputError("horizon must be positive");
    if (!(s.dt > 0.0)) throw InputError("dt must be positive");
    auto check = [&](std::vector<double> const& v, char const* name, bool required) {
        if (v.empty() && !required) return;
        if (v.size() != s.horizon)
            throw InputError(std::string("series '") + name + "' has " + std::to_string(v.size()) +
                             " entries, horizon is " + std::to_string(s.horizon));
        for (double x : v)
            if (!std::isfinite(x)) throw InputError(std::string("series '") + name + "' has a non-finite entry");
    };
    check(s.price, "price", true);
    check(s.demand_scale, "demand_scale", false);
    check(s.irradiance, "irradiance", false);
    check(s.wind_speed, "wind_speed", false);
    for (double c : s.price)
        if (!(c > 0.0)) throw InputError("prices must be positive");
    for (double x : s.irradiance)
        if (x < 0.0) throw InputError("irradiance must be non-negative");
    for (double x : s.wind_speed)
        if (x < 0.0) throw InputError("wind speed must be non-negative");
}

void validate(DeviceFleet const& fleet, TimeSeriesSet const& series) {
    validate(series);
    for (auto const& l : fleet.loads) {
        if (l.s_zip.size() != series.horizon) throw InputError("load '" + l.name + "' series length != horizon");
        if (!std::isfinite(l.alpha) || l.alpha < 0.0 || l.alpha > 2.0)
            throw InputError("load '" + l.name + "': alpha must lie in [0, 2]");
        double sum = 0.0;
        for (double s : l.shares) {
            if (s < 0.0) throw InputError("load '" + l.name + "': negative phase share");
            sum += s;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InputError("load '" + l.name + "': phase shares must sum to 1");
    }
    if (!fleet.pv.empty() && series.irradiance.empty()) throw InputError("PV units need an irradiance series");
    for (auto const& pv : fleet.pv) {
        if (!(pv.rho >= 0.0)) throw InputError("PV '" + pv.name + "': rho must be non-negative");
        if (!(pv.s_max > 0.0)) throw InputError("PV '" + pv.name + "': s_max must be positive");
    }
    if (!fleet.wind.empty() && series.wind_speed.empty()) throw InputError("wind turbines need a wind_speed series");
    for (auto const& w : fleet.wind) {
        if (!(w.w_nom > 0.0 && w.w_nom < w.w_max)) throw InputError("wind '" + w.name + "': need 0 < w_nom < w_max");
        if (!(w.p_nom > 0.0 && w.p_nom <= w.s_max)) throw InputError("wind '" + w.name + "': need 0 < p_nom <= s_max");
    }
    for (auto const& b : fleet.batteries) {
        std::string const who = "battery '" + b.name + "': ";
        if (!(b.e_min <= b.e_init && b.e_init <= b.e_max)) throw InputError(who + "need e_min <= e_init <= e_max");
        if (b.loss_char.a < 0.0 || b.loss_disch.a < 0.0) throw InputError(who + "quadratic loss coefficient must be >= 0");
        if (b.loss_char.c < 0.0 || b.loss_disch.c < 0.0) throw InputError(who + "standby loss must be >= 0");
        if (b.p_char_max < 0.0 || b.p_disch_max < 0.0) throw InputError(who + "power limits must be >= 0");
        if (!(b.s_max > 0.0)) throw InputError(who + "s_max must be positive");
    }
}

}  // namespace mgtc
