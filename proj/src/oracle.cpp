#include "mgtc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgtc/wirtinger.hpp"

namespace mgtc {

PowerFlowSolution solve_power_flow(AdmittancePartition const& part, CVector const& vs, InjectionMap const& injection,
                                   PowerFlowOptions const& opts) {
    Eigen::PartialPivLU<CMatrix> const lu(part.ynn);
    CVector const slack_term = part.yns * vs;

    PowerFlowSolution sol;
    sol.vn = flat_voltage(part, std::abs(vs(0)));
    for (int it = 1; it <= opts.max_iter; ++it) {
        CVector const s = injection(sol.vn);
        CVector const current = s.cwiseQuotient(sol.vn).conjugate();
        CVector const next = lu.solve(current - slack_term);
        double const step = (next - sol.vn).cwiseAbs().maxCoeff();
        sol.vn = next;
        sol.iterations = it;
        if (!sol.vn.allFinite()) break;
        if (step <= opts.step_tol) {
            CVector const mismatch = injection(sol.vn) - nodal_power(part, vs, sol.vn);
            sol.residual = mismatch.cwiseAbs().maxCoeff();
            sol.converged = sol.residual <= opts.mismatch_tol;
            return sol;
        }
    }
    sol.residual = sol.vn.allFinite() ? (injection(sol.vn) - nodal_power(part, vs, sol.vn)).cwiseAbs().maxCoeff()
                                      : std::numeric_limits<double>::infinity();
    sol.converged = false;
    return sol;
}

InjectionMap exponential_injection(std::vector<ExponentialLoad> const& loads, AdmittancePartition const& part,
                                   double v_nom, std::size_t t, CVector s_gen) {
    return [loads, &part, v_nom, t, s_gen = std::move(s_gen)](CVector const& v) -> CVector {
        return s_gen - exact_load_power(loads, part, v_nom, t, v);
    };
}

PowerFlowSolution solve_period(ThreePhaseNetwork const& net, AdmittancePartition const& part,
                               std::vector<ExponentialLoad> const& loads, std::size_t t, CVector const& s_gen,
                               PowerFlowOptions const& opts) {
    CVector const vs = slack_voltage(net.v_nom());
    return solve_power_flow(part, vs, exponential_injection(loads, part, net.v_nom(), t, s_gen), opts);
}

std::optional<BruteForceResult> brute_force_dispatch(BruteForceProblem const& pb, std::size_t max_evaluations) {
    auto const& net = pb.network;
    if (net.num_nodes() > 2) throw InputError("brute force dispatch handles at most 2 hypernodes");
    std::size_t const periods = pb.price.size();
    if (periods == 0 || periods > 4) throw InputError("brute force dispatch handles 1 to 4 periods");
    if (pb.load.s_zip.size() < periods) throw InputError("load series shorter than the price series");
    if (!(pb.step_fraction > 0.0 && pb.step_fraction <= 0.05))
        throw InputError("grid step must be at most 5% of the battery power rating");

    auto const& bat = pb.battery;
    double const p_ref = std::max(bat.p_char_max, bat.p_disch_max);
    double const step = pb.step_fraction * p_ref;
    long const n_char = step > 0.0 ? static_cast<long>(std::floor(bat.p_char_max / step + 1e-9)) : 0;
    long const n_disch = step > 0.0 ? static_cast<long>(std::floor(bat.p_disch_max / step + 1e-9)) : 0;
    std::size_t const levels = static_cast<std::size_t>(n_char + n_disch + 1);

    double total = 1.0;
    for (std::size_t t = 0; t < periods; ++t) total *= static_cast<double>(levels);
    if (total > static_cast<double>(max_evaluations))
        throw BudgetExceeded("brute force would need " + std::to_string(static_cast<long long>(total)) +
                             " evaluations (budget " + std::to_string(max_evaluations) + ")");

    AdmittancePartition const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    double const inf = std::numeric_limits<double>::infinity();

    // Per-period cost and energy change for each power level; infeasible levels get +inf cost.
    std::vector<double> level_power(levels);
    for (std::size_t i = 0; i < levels; ++i) level_power[i] = step * (static_cast<double>(i) - static_cast<double>(n_char));
    std::vector<std::vector<double>> cost(periods, std::vector<double>(levels, inf));
    std::vector<double> de(levels);
    for (std::size_t i = 0; i < levels; ++i) {
        double const p = level_power[i];
        double const pc = p < 0.0 ? -p : 0.0;
        double const pd = p > 0.0 ? p : 0.0;
        de[i] = (pc - bat.loss_char(pc) - pd - bat.loss_disch(pd)) * pb.dt;
    }

    double lipschitz = 0.0;
    for (std::size_t t = 0; t < periods; ++t) {
        for (std::size_t i = 0; i < levels; ++i) {
            CVector s_gen = CVector::Zero(static_cast<Eigen::Index>(part.size()));
            for (Phase ph : kPhases) {
                long const k = part.index_of(bat.node, ph);
                if (k >= 0) s_gen(k) += level_power[i] / 3.0;
            }
            auto const pf = solve_power_flow(part, vs, exponential_injection({pb.load}, part, net.v_nom(), t, s_gen));
            if (!pf.converged) continue;
            bool volt_ok = true;
            for (std::size_t k = 0; k < part.size(); ++k) {
                cplx const ref = net.v_nom() * phase_rotation(part.nonslack[k].phase);
                if (std::abs(pf.vn(static_cast<Eigen::Index>(k)) - ref) > pb.delta_v * net.v_nom() + 1e-12) volt_ok = false;
            }
            if (!volt_ok) continue;
            cost[t][i] = pb.price[t] * pb.dt * pb.cost_scale * grid_power(part, vs, pf.vn).real();
        }
        double lt = 0.0;
        for (std::size_t i = 0; i + 1 < levels; ++i)
            if (std::isfinite(cost[t][i]) && std::isfinite(cost[t][i + 1]))
                lt = std::max(lt, std::abs(cost[t][i + 1] - cost[t][i]));
        lipschitz += lt;
    }

    BruteForceResult best;
    best.objective = inf;
    best.step = step;
    best.lipschitz_bound = lipschitz;
    std::vector<std::size_t> idx(periods, 0);
    std::size_t evaluations = 0;
    double const tol = 1e-12 * std::max(1.0, bat.e_max);
    while (true) {
        ++evaluations;
        double e = bat.e_init;
        double c = 0.0;
        bool ok = true;
        for (std::size_t t = 0; t < periods && ok; ++t) {
            e += de[idx[t]];
            c += cost[t][idx[t]];
            ok = e >= bat.e_min - tol && e <= bat.e_max + tol && std::isfinite(c);
        }
        if (ok && c < best.objective) {
            best.objective = c;
            best.battery_power.clear();
            best.energy.clear();
            double et = bat.e_init;
            for (std::size_t t = 0; t < periods; ++t) {
                best.battery_power.push_back(level_power[idx[t]]);
                et += de[idx[t]];
                best.energy.push_back(et);
            }
        }
        std::size_t d = 0;
        while (d < periods && ++idx[d] == levels) idx[d++] = 0;
        if (d == periods) break;
    }
    best.evaluations = evaluations;
    if (!std::isfinite(best.objective)) return std::nullopt;
    return best;
}

std::vector<SweepRow> linearization_error_sweep(ThreePhaseNetwork const& net, std::vector<ExponentialLoad> const& loads,
                                                std::size_t t, std::vector<double> const& scales) {
    AdmittancePartition const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    CVector const v0 = flat_voltage(part, net.v_nom());
    LinearFlowModel const model = linearize_power_flow(part, vs, v0);
    CVector const no_gen = CVector::Zero(static_cast<Eigen::Index>(part.size()));

    std::vector<SweepRow> rows;
    for (double scale : scales) {
        std::vector<ExponentialLoad> scaled = loads;
        for (auto& l : scaled)
            for (auto& s : l.s_zip) s *= scale;
        auto const pf = solve_period(net, part, scaled, t, no_gen);
        if (!pf.converged) throw Error("oracle power flow did not converge at load scale " + std::to_string(scale));
        CVector const v_lin = solve_linear_flow(model, load_surrogate(scaled, part, net.v_nom(), t, v0), no_gen);
        rows.push_back({scale, (v_lin - pf.vn).cwiseAbs().maxCoeff(), pf.iterations});
    }
    return rows;
}

}  // namespace mgtc
