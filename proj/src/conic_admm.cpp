#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "mgtc/common.hpp"
#include "mgtc/conic.hpp"
#include "mgtc/conic_detail.hpp"

namespace mgtc {
namespace detail {

Eigen::VectorXd project_cone(ConeDims const& dims, Eigen::VectorXd const& v) {
    Eigen::VectorXd r = v;
    auto const l = static_cast<Eigen::Index>(dims.nonneg);
    r.head(l) = v.head(l).cwiseMax(0.0);
    Eigen::Index o = l;
    for (auto qs : dims.soc) {
        auto const q = static_cast<Eigen::Index>(qs);
        double const t = v(o);
        double const nx = v.segment(o + 1, q - 1).norm();
        if (nx <= t) {
            // already inside
        } else if (nx <= -t) {
            r.segment(o, q).setZero();
        } else {
            double const k = 0.5 * (t + nx);
            r(o) = k;
            r.segment(o + 1, q - 1) = (k / nx) * v.segment(o + 1, q - 1);
        }
        o += q;
    }
    return r;
}

}  // namespace detail

namespace {

using Eigen::Index;
using Eigen::VectorXd;

// Operator splitting on  min c^T x  s.t.  [A; G] x + s = [b; h],  s in {0} x K.
ConicSolution admm(ConicProgram const& original, SolverSettings const& set) {
    auto const t_start = std::chrono::steady_clock::now();
    original.validate();
    ConicProgram p = original;
    auto const eq = detail::equilibrate(p, 15);

    auto const n = static_cast<Index>(p.num_vars());
    auto const np = static_cast<Index>(p.num_eq());
    auto const m = np + static_cast<Index>(p.num_cone_rows());
    SparseMatrix a(m, n);
    {
        std::vector<Eigen::Triplet<double, int>> trip;
        for (Index j = 0; j < n; ++j) {
            for (SparseMatrix::InnerIterator it(p.a, j); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(j), it.value());
            for (SparseMatrix::InnerIterator it(p.g, j); it; ++it)
                trip.emplace_back(static_cast<int>(np + it.row()), static_cast<int>(j), it.value());
        }
        a.setFromTriplets(trip.begin(), trip.end());
    }
    SparseMatrix const at = a.transpose();
    VectorXd bb(m);
    bb << p.b, p.h;

    double const sigma = 1e-6;
    double const relax = 1.6;
    double rho = 0.1;
    auto rho_vec = [&] {
        VectorXd r = VectorXd::Constant(m, rho);
        r.head(np).setConstant(1e3 * rho);
        return r;
    };
    VectorXd rv = rho_vec();

    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    auto factor = [&] {
        std::vector<Eigen::Triplet<double, int>> trip;
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, sigma);
        for (Index j = 0; j < n; ++j)
            for (SparseMatrix::InnerIterator it(a, j); it; ++it)
                trip.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(j), it.value());
        for (Index i = 0; i < m; ++i) trip.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i), -1.0 / rv(i));
        SparseMatrix k(n + m, n + m);
        k.setFromTriplets(trip.begin(), trip.end());
        ldlt.compute(k);
        return ldlt.info() == Eigen::Success;
    };

    ConicSolution out;
    if (!factor()) {
        out.status = SolverStatus::numerical_failure;
        return out;
    }

    auto project = [&](VectorXd const& v) {
        VectorXd r(m);
        r.head(np).setZero();
        r.tail(m - np) = detail::project_cone(p.cones, v.tail(m - np));
        return r;
    };

    VectorXd x = VectorXd::Zero(n), s = VectorXd::Zero(m), y = VectorXd::Zero(m);
    double const eps_abs = 1e-6, eps_rel = 1e-6;
    int const max_iter = std::max(set.max_iter * 100, 5000);
    bool done = false;
    int iter = 0;
    VectorXd rhs(n + m);
    for (iter = 1; iter <= max_iter; ++iter) {
        rhs << sigma * x - p.c, bb - s + y.cwiseQuotient(rv);
        VectorXd const sol = ldlt.solve(rhs);
        VectorXd const xt = sol.head(n);
        VectorXd const nu = sol.tail(m);
        VectorXd const st = s - (y + nu).cwiseQuotient(rv);
        VectorXd const s_rel = relax * st + (1.0 - relax) * s;
        x = relax * xt + (1.0 - relax) * x;
        VectorXd const s_new = project(s_rel + y.cwiseQuotient(rv));
        y += rv.cwiseProduct(s_rel - s_new);
        s = s_new;

        if (iter % 25 != 0) continue;
        VectorXd const ax = a * x;
        VectorXd const aty = at * (-y);
        double const rp = (ax + s - bb).lpNorm<Eigen::Infinity>();
        double const rd = (p.c + aty).lpNorm<Eigen::Infinity>();
        double const sp = std::max({ax.lpNorm<Eigen::Infinity>(), s.lpNorm<Eigen::Infinity>(), bb.lpNorm<Eigen::Infinity>()});
        double const sd = std::max(aty.lpNorm<Eigen::Infinity>(), p.c.lpNorm<Eigen::Infinity>());
        double const gap = std::abs(p.c.dot(x) + bb.dot(-y));
        double const sg = std::max({1.0, std::abs(p.c.dot(x)), std::abs(bb.dot(y))});
        if (rp <= eps_abs + eps_rel * sp && rd <= eps_abs + eps_rel * sd && gap <= eps_abs + eps_rel * sg) {
            done = true;
            break;
        }
        if (iter % 100 == 0 && rp > 0.0 && rd > 0.0) {
            double const ratio = std::sqrt((rp / std::max(sp, 1e-12)) / (rd / std::max(sd, 1e-12)));
            if (ratio > 5.0 || ratio < 0.2) {
                rho = std::clamp(rho * ratio, 1e-6, 1e6);
                rv = rho_vec();
                if (!factor()) break;
            }
        }
    }

    // Report in the same scaled residual measures as the interior-point adapter.
    VectorXd const z_all = -y;
    VectorXd const zy = z_all.head(np);
    VectorXd const zz = z_all.tail(m - np);
    VectorXd const sk = s.tail(m - np);
    double const pres = std::max((p.a * x - p.b).norm() / std::max(1.0, p.b.norm()),
                                 (p.g * x + sk - p.h).norm() / std::max(1.0, p.h.norm()));
    double const dres = (p.a.transpose() * zy + p.g.transpose() * zz + p.c).norm() / std::max(1.0, p.c.norm());
    double const gap = sk.dot(zz);
    double const pcost = p.c.dot(x);
    double const relgap = gap / std::max(1e-12, std::abs(pcost));
    if (done && pres < set.feastol && dres < set.feastol && (gap < set.abstol || relgap < set.reltol))
        out.status = SolverStatus::optimal;
    else if (pres < set.feastol_inaccurate && dres < set.feastol_inaccurate &&
             (std::abs(gap) < set.abstol_inaccurate || std::abs(relgap) < set.reltol_inaccurate))
        out.status = SolverStatus::inaccurate;
    else
        out.status = SolverStatus::max_iterations;

    out.iterations = std::min(iter, max_iter);
    out.x = eq.col.cwiseProduct(x);
    out.y = eq.eq_row.cwiseProduct(zy);
    out.z = eq.cone_row.cwiseProduct(zz);
    out.s = sk.cwiseQuotient(eq.cone_row);
    out.primal_objective = original.c.dot(out.x) + original.c0;
    out.dual_objective = -(original.b.dot(out.y) + original.h.dot(out.z)) + original.c0;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

class AdmmAdapter final : public SolverAdapter {
  public:
    std::string name() const override { return "admm"; }
    SolverCapabilities capabilities() const override { return {true, true, true}; }
    ConicSolution solve(ConicProgram const& program, SolverSettings const& settings) const override {
        return admm(program, settings);
    }
};

}  // namespace

std::unique_ptr<SolverAdapter> make_admm_adapter() { return std::make_unique<AdmmAdapter>(); }

}  // namespace mgtc
