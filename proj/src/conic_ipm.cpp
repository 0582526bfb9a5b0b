#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/SparseCholesky>

#include "mgtc/common.hpp"
#include "mgtc/conic.hpp"
#include "mgtc/conic_detail.hpp"

namespace mgtc {
namespace detail {

using Eigen::Index;
using Eigen::VectorXd;

ConeOps::ConeOps(ConeDims const& d) : dims_(d) {
    Index off = static_cast<Index>(d.nonneg);
    for (auto q : d.soc) {
        soc_off_.push_back(off);
        off += static_cast<Index>(q);
    }
    rows_ = off;
    lin_w_ = VectorXd::Ones(static_cast<Index>(d.nonneg));
    soc_w_.resize(d.soc.size());
    soc_winv_.resize(d.soc.size());
    set_identity_scaling();
}

void ConeOps::set_identity_scaling() {
    lin_w_.setOnes();
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        soc_w_[k] = Eigen::MatrixXd::Identity(q, q);
        soc_winv_[k] = Eigen::MatrixXd::Identity(q, q);
    }
    lambda_ = VectorXd::Zero(rows_);
}

VectorXd ConeOps::identity() const {
    VectorXd e = VectorXd::Zero(rows_);
    e.head(static_cast<Index>(dims_.nonneg)).setOnes();
    for (auto off : soc_off_) e(off) = 1.0;
    return e;
}

double ConeOps::min_eig(VectorXd const& u) const {
    double m = std::numeric_limits<double>::infinity();
    auto const l = static_cast<Index>(dims_.nonneg);
    if (l > 0) m = u.head(l).minCoeff();
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        auto const seg = u.segment(soc_off_[k], q);
        m = std::min(m, seg(0) - seg.tail(q - 1).norm());
    }
    return m;
}

VectorXd ConeOps::circ(VectorXd const& u, VectorXd const& v) const {
    VectorXd r(rows_);
    auto const l = static_cast<Index>(dims_.nonneg);
    r.head(l) = u.head(l).cwiseProduct(v.head(l));
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        auto const o = soc_off_[k];
        r(o) = u.segment(o, q).dot(v.segment(o, q));
        r.segment(o + 1, q - 1) = u(o) * v.segment(o + 1, q - 1) + v(o) * u.segment(o + 1, q - 1);
    }
    return r;
}

VectorXd ConeOps::divide(VectorXd const& lam, VectorXd const& d) const {
    VectorXd r(rows_);
    auto const l = static_cast<Index>(dims_.nonneg);
    r.head(l) = d.head(l).cwiseQuotient(lam.head(l));
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        auto const o = soc_off_[k];
        double const l0 = lam(o);
        auto const l1 = lam.segment(o + 1, q - 1);
        auto const d1 = d.segment(o + 1, q - 1);
        double const det = l0 * l0 - l1.squaredNorm();
        double const x0 = (l0 * d(o) - l1.dot(d1)) / det;
        r(o) = x0;
        r.segment(o + 1, q - 1) = (d1 - x0 * l1) / l0;
    }
    return r;
}

namespace {

// Largest alpha >= 0 keeping (u0, u1) + alpha (d0, d1) in the second-order cone.
double soc_step(double u0, Eigen::Ref<VectorXd const> u1, double d0, Eigen::Ref<VectorXd const> d1) {
    double const inf = std::numeric_limits<double>::infinity();
    double const a = d0 * d0 - d1.squaredNorm();
    double const b = u0 * d0 - u1.dot(d1);
    double const c = std::max(u0 * u0 - u1.squaredNorm(), 0.0);
    double alpha = inf;
    if (std::abs(a) < 1e-300) {
        if (b < 0.0) alpha = -c / (2.0 * b);
    } else {
        double const disc = b * b - a * c;
        if (disc >= 0.0) {
            double const sq = std::sqrt(disc);
            double const qq = -(b + (b >= 0.0 ? sq : -sq));
            for (double r : {qq / a, qq != 0.0 ? c / qq : inf})
                if (r > 0.0) alpha = std::min(alpha, r);
        }
    }
    // The cone axis itself must not cross zero.
    if (d0 < 0.0) alpha = std::min(alpha, -u0 / d0);
    return alpha;
}

}  // namespace

double ConeOps::max_step(VectorXd const& u, VectorXd const& d) const {
    double alpha = std::numeric_limits<double>::infinity();
    auto const l = static_cast<Index>(dims_.nonneg);
    for (Index i = 0; i < l; ++i)
        if (d(i) < 0.0) alpha = std::min(alpha, -u(i) / d(i));
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        auto const o = soc_off_[k];
        alpha = std::min(alpha, soc_step(u(o), u.segment(o + 1, q - 1), d(o), d.segment(o + 1, q - 1)));
    }
    return alpha;
}

bool ConeOps::update_scaling(VectorXd const& s, VectorXd const& z) {
    auto const l = static_cast<Index>(dims_.nonneg);
    for (Index i = 0; i < l; ++i) {
        if (!(s(i) > 0.0 && z(i) > 0.0)) return false;
        lin_w_(i) = std::sqrt(s(i) / z(i));
    }
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        auto const o = soc_off_[k];
        auto const sk = s.segment(o, q);
        auto const zk = z.segment(o, q);
        double const sn1 = sk.tail(q - 1).norm();
        double const zn1 = zk.tail(q - 1).norm();
        double const sres = (sk(0) - sn1) * (sk(0) + sn1);
        double const zres = (zk(0) - zn1) * (zk(0) + zn1);
        if (!(sres > 0.0 && zres > 0.0 && sk(0) > 0.0 && zk(0) > 0.0)) return false;
        double const snorm = std::sqrt(sres);
        double const znorm = std::sqrt(zres);
        VectorXd const sb = sk / snorm;
        VectorXd const zb = zk / znorm;
        double const gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
        VectorXd wb(q);
        wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
        wb.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (2.0 * gamma);
        double const eta = std::sqrt(snorm / znorm);

        // W = eta [w0 w1^T; w1 I + w1 w1^T/(1 + w0)],  W^{-1} = J W J / eta^2.
        Eigen::MatrixXd w(q, q);
        w(0, 0) = wb(0);
        w.block(0, 1, 1, q - 1) = wb.tail(q - 1).transpose();
        w.block(1, 0, q - 1, 1) = wb.tail(q - 1);
        w.block(1, 1, q - 1, q - 1) = Eigen::MatrixXd::Identity(q - 1, q - 1) +
                                      wb.tail(q - 1) * wb.tail(q - 1).transpose() / (1.0 + wb(0));
        Eigen::MatrixXd winv = w;
        winv.block(0, 1, 1, q - 1) *= -1.0;
        winv.block(1, 0, q - 1, 1) *= -1.0;
        soc_w_[k] = eta * w;
        soc_winv_[k] = winv / eta;
    }
    lambda_ = apply_w(z);
    return lambda_.allFinite();
}

VectorXd ConeOps::apply_w(VectorXd const& v) const {
    VectorXd r(rows_);
    auto const l = static_cast<Index>(dims_.nonneg);
    r.head(l) = lin_w_.cwiseProduct(v.head(l));
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        r.segment(soc_off_[k], q) = soc_w_[k] * v.segment(soc_off_[k], q);
    }
    return r;
}

VectorXd ConeOps::apply_winv(VectorXd const& v) const {
    VectorXd r(rows_);
    auto const l = static_cast<Index>(dims_.nonneg);
    r.head(l) = v.head(l).cwiseQuotient(lin_w_);
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        r.segment(soc_off_[k], q) = soc_winv_[k] * v.segment(soc_off_[k], q);
    }
    return r;
}

void ConeOps::append_w2(std::vector<Eigen::Triplet<double, int>>& trip, int row0, double reg) const {
    auto const l = static_cast<Index>(dims_.nonneg);
    for (Index i = 0; i < l; ++i) trip.emplace_back(row0 + i, row0 + i, -lin_w_(i) * lin_w_(i) - reg);
    for (std::size_t k = 0; k < dims_.soc.size(); ++k) {
        auto const q = static_cast<Index>(dims_.soc[k]);
        Eigen::MatrixXd const w2 = soc_w_[k] * soc_w_[k];
        int const o = row0 + static_cast<int>(soc_off_[k]);
        for (Index j = 0; j < q; ++j)
            for (Index i = j; i < q; ++i)
                trip.emplace_back(o + static_cast<int>(i), o + static_cast<int>(j), -w2(i, j) - (i == j ? reg : 0.0));
    }
}

Equilibration equilibrate(ConicProgram& p, int passes) {
    auto const n = static_cast<Index>(p.num_vars());
    Equilibration e{VectorXd::Ones(n), VectorXd::Ones(p.a.rows()), VectorXd::Ones(p.g.rows())};
    std::vector<Index> block_of(static_cast<std::size_t>(p.g.rows()));
    std::vector<std::pair<Index, Index>> blocks;  // (offset, size) of each uniform-scaling block
    for (Index i = 0; i < static_cast<Index>(p.cones.nonneg); ++i) blocks.emplace_back(i, 1);
    Index off = static_cast<Index>(p.cones.nonneg);
    for (auto q : p.cones.soc) {
        blocks.emplace_back(off, static_cast<Index>(q));
        off += static_cast<Index>(q);
    }
    auto clamp = [](double v) { return v == 0.0 ? 1.0 : std::clamp(v, 1e-4, 1e4); };

    for (int pass = 0; pass < passes; ++pass) {
        VectorXd col = VectorXd::Zero(n);
        VectorXd arow = VectorXd::Zero(p.a.rows());
        VectorXd grow = VectorXd::Zero(p.g.rows());
        for (Index j = 0; j < n; ++j) {
            for (SparseMatrix::InnerIterator it(p.a, j); it; ++it) {
                double const v = std::abs(it.value());
                col(j) = std::max(col(j), v);
                arow(it.row()) = std::max(arow(it.row()), v);
            }
            for (SparseMatrix::InnerIterator it(p.g, j); it; ++it) {
                double const v = std::abs(it.value());
                col(j) = std::max(col(j), v);
                grow(it.row()) = std::max(grow(it.row()), v);
            }
        }
        VectorXd dc(n), da(p.a.rows()), dg(p.g.rows());
        for (Index j = 0; j < n; ++j) dc(j) = 1.0 / std::sqrt(clamp(col(j)));
        for (Index i = 0; i < p.a.rows(); ++i) da(i) = 1.0 / std::sqrt(clamp(arow(i)));
        for (auto const& [o, q] : blocks) {
            double const v = 1.0 / std::sqrt(clamp(grow.segment(o, q).maxCoeff()));
            dg.segment(o, q).setConstant(v);
        }
        p.a = da.asDiagonal() * p.a * dc.asDiagonal();
        p.g = dg.asDiagonal() * p.g * dc.asDiagonal();
        e.col = e.col.cwiseProduct(dc);
        e.eq_row = e.eq_row.cwiseProduct(da);
        e.cone_row = e.cone_row.cwiseProduct(dg);
    }
    p.c = p.c.cwiseProduct(e.col);
    p.b = p.b.cwiseProduct(e.eq_row);
    p.h = p.h.cwiseProduct(e.cone_row);
    return e;
}

}  // namespace detail

namespace {

using detail::ConeOps;
using Eigen::Index;
using Eigen::VectorXd;

class KktSystem {
  public:
    KktSystem(SparseMatrix const& a, SparseMatrix const& g, ConeOps const& cones, double reg)
        : a_(a), g_(g), cones_(cones), base_reg_(reg), reg_(reg), n_(a.cols()), p_(a.rows()), m_(g.rows()) {
        at_ = a.transpose();
        gt_ = g.transpose();
    }

    // Retries with stronger regularization when a pivot vanishes or the factor cannot solve a probe
    // system accurately; refinement runs on the exact system.
    bool factor() {
        for (double reg : {base_reg_, 1e2 * base_reg_, 1e4 * base_reg_, 1e6 * base_reg_}) {
            reg_ = reg;
            if (factor_once() && probe()) return true;
        }
        return false;
    }

    bool factor_once() {
        std::vector<Eigen::Triplet<double, int>> trip;
        trip.reserve(static_cast<std::size_t>(n_ + p_ + m_ + a_.nonZeros() + g_.nonZeros()) * 2);
        for (int i = 0; i < n_; ++i) trip.emplace_back(i, i, reg_);
        for (Index j = 0; j < n_; ++j) {
            for (SparseMatrix::InnerIterator it(a_, j); it; ++it)
                trip.emplace_back(static_cast<int>(n_ + it.row()), static_cast<int>(j), it.value());
            for (SparseMatrix::InnerIterator it(g_, j); it; ++it)
                trip.emplace_back(static_cast<int>(n_ + p_ + it.row()), static_cast<int>(j), it.value());
        }
        for (Index i = 0; i < p_; ++i) trip.emplace_back(static_cast<int>(n_ + i), static_cast<int>(n_ + i), -reg_);
        cones_.append_w2(trip, static_cast<int>(n_ + p_), reg_);
        auto const dim = n_ + p_ + m_;
        SparseMatrix k(dim, dim);
        k.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(k);
            analyzed_ = true;
        }
        ldlt_.factorize(k);
        return ldlt_.info() == Eigen::Success;
    }

    // Solves [0 A^T G^T; A 0 0; G 0 -W^2] u = rhs with iterative refinement on the unregularized system.
    VectorXd solve(VectorXd const& rhs) const {
        VectorXd u = ldlt_.solve(rhs);
        double const scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        VectorXd r = rhs - multiply(u);
        double err = r.allFinite() ? r.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
        for (int it = 0; it < 8 && err > 1e-14 * scale; ++it) {
            VectorXd const next = u + ldlt_.solve(r);
            VectorXd const r_next = rhs - multiply(next);
            double const err_next = r_next.allFinite() ? r_next.lpNorm<Eigen::Infinity>()
                                                       : std::numeric_limits<double>::infinity();
            // Stop as soon as refinement stops helping.
            if (!(err_next < err)) break;
            u = next;
            r = r_next;
            err = err_next;
        }
        last_error_ = err / scale;
        return u;
    }

  private:
    // A factor with a near-zero pivot solves nothing: the residual of a unit right-hand side exceeds it.
    bool probe() const {
        VectorXd const u = solve(VectorXd::Ones(n_ + p_ + m_));
        return u.allFinite() && last_error_ <= 1.0;
    }

    VectorXd multiply(VectorXd const& u) const {
        VectorXd r(u.size());
        auto const x = u.head(n_);
        auto const y = u.segment(n_, p_);
        VectorXd const z = u.tail(m_);
        r.head(n_) = at_ * y + gt_ * z;
        r.segment(n_, p_) = a_ * x;
        r.tail(m_) = g_ * x - cones_.apply_w(cones_.apply_w(z));
        return r;
    }

    SparseMatrix const& a_;
    SparseMatrix const& g_;
    SparseMatrix at_;
    SparseMatrix gt_;
    ConeOps const& cones_;
    double base_reg_;
    double reg_;
    Index n_, p_, m_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool analyzed_ = false;
    mutable double last_error_ = 0.0;
};

struct Iterate {
    VectorXd x, y, z, s;
    double tau = 1.0;
    double kappa = 1.0;
};

struct Measures {
    double pres = 0.0, dres = 0.0, pcost = 0.0, dcost = 0.0, gap = 0.0, relgap = 0.0;
    double pinf = std::numeric_limits<double>::infinity();
    double dinf = std::numeric_limits<double>::infinity();
};

ConicSolution interior_point(ConicProgram const& original, SolverSettings const& set, bool embed) {
    auto const t_start = std::chrono::steady_clock::now();
    original.validate();
    ConicProgram p = original;
    auto const eq = detail::equilibrate(p, 15);

    auto const n = static_cast<Index>(p.num_vars());
    auto const np = static_cast<Index>(p.num_eq());
    auto const m = static_cast<Index>(p.num_cone_rows());
    ConeOps cones(p.cones);
    double const degree = static_cast<double>(p.cones.degree());
    KktSystem kkt(p.a, p.g, cones, 1e-9);
    SparseMatrix const at = p.a.transpose();
    SparseMatrix const gt = p.g.transpose();
    double const nc = std::max(1.0, p.c.norm());
    double const nb = std::max(1.0, p.b.norm());
    double const nh = std::max(1.0, p.h.norm());

    auto split = [&](VectorXd const& u, VectorXd& x, VectorXd& y, VectorXd& z) {
        x = u.head(n);
        y = u.segment(n, np);
        z = u.tail(m);
    };
    auto stack = [&](VectorXd const& x, VectorXd const& y, VectorXd const& z) {
        VectorXd u(n + np + m);
        u << x, y, z;
        return u;
    };

    ConicSolution out;
    Iterate it;
    cones.set_identity_scaling();
    if (!kkt.factor()) {
        out.status = SolverStatus::numerical_failure;
        return out;
    }
    {
        VectorXd x, y, z;
        split(kkt.solve(stack(VectorXd::Zero(n), p.b, p.h)), x, y, z);
        it.x = x;
        it.s = -z;
        double const ap = -cones.min_eig(it.s);
        if (ap >= -1e-8) it.s += (1.0 + std::max(ap, 0.0)) * cones.identity();
        split(kkt.solve(stack(-p.c, VectorXd::Zero(np), VectorXd::Zero(m))), x, y, z);
        it.y = y;
        it.z = z;
        double const ad = -cones.min_eig(it.z);
        if (ad >= -1e-8) it.z += (1.0 + std::max(ad, 0.0)) * cones.identity();
    }
    if (m == 0) {
        it.s.resize(0);
        it.z.resize(0);
    }
    it.tau = 1.0;
    it.kappa = embed ? 1.0 : 0.0;

    auto measure = [&](Iterate const& w, VectorXd& rx, VectorXd& ry, VectorXd& rz, double& rt) {
        rx = at * w.y + gt * w.z + p.c * w.tau;
        ry = p.a * w.x - p.b * w.tau;
        rz = p.g * w.x + w.s - p.h * w.tau;
        double const cx = p.c.dot(w.x);
        double const hz_by = p.h.dot(w.z) + p.b.dot(w.y);
        rt = w.kappa + cx + hz_by;
        Measures ms;
        ms.pres = std::max(ry.norm() / nb, rz.norm() / nh) / w.tau;
        ms.dres = rx.norm() / nc / w.tau;
        ms.pcost = cx / w.tau;
        ms.dcost = -hz_by / w.tau;
        ms.gap = w.s.dot(w.z) / (w.tau * w.tau);
        ms.relgap = std::numeric_limits<double>::infinity();
        if (ms.pcost < 0.0) ms.relgap = ms.gap / -ms.pcost;
        else if (ms.dcost > 0.0) ms.relgap = ms.gap / ms.dcost;
        if (hz_by < 0.0) ms.pinf = (at * w.y + gt * w.z).norm() / -hz_by;
        if (cx < 0.0) ms.dinf = std::max((p.a * w.x).norm(), (p.g * w.x + w.s).norm()) / -cx;
        return ms;
    };

    auto converged = [&](Measures const& ms, double feastol, double abstol, double reltol) {
        return ms.pres < feastol && ms.dres < feastol && (ms.gap < abstol || ms.relgap < reltol);
    };

    SolverStatus status = SolverStatus::max_iterations;
    Measures ms;
    int iter = 0;
    VectorXd const e = cones.identity();
    for (;; ++iter) {
        VectorXd rx, ry, rz;
        double rt = 0.0;
        ms = measure(it, rx, ry, rz, rt);
        if (set.verbose)
            std::fprintf(stderr, "%3d pcost %+.6e dcost %+.6e gap %.2e pres %.2e dres %.2e k/t %.2e\n", iter,
                         ms.pcost, ms.dcost, ms.gap, ms.pres, ms.dres, it.kappa / it.tau);
        if (converged(ms, set.feastol, set.abstol, set.reltol)) {
            status = SolverStatus::optimal;
            break;
        }
        if (embed && ms.pinf < set.feastol && it.kappa > it.tau) {
            status = SolverStatus::primal_infeasible;
            break;
        }
        if (embed && ms.dinf < set.feastol && it.kappa > it.tau) {
            status = SolverStatus::dual_infeasible;
            break;
        }
        if (iter >= set.max_iter) break;

        bool const scaled = cones.update_scaling(it.s, it.z);
        if (!scaled || !kkt.factor()) {
            if (set.verbose) std::fprintf(stderr, scaled ? "factorization failed\n" : "scaling failed\n");
            status = SolverStatus::numerical_failure;
            break;
        }
        VectorXd const& lam = cones.lambda();
        VectorXd x1, y1, z1;
        split(kkt.solve(stack(-p.c, p.b, p.h)), x1, y1, z1);
        double const den = p.c.dot(x1) + p.b.dot(y1) + p.h.dot(z1) - it.kappa / it.tau;

        struct Dir {
            VectorXd dx, dy, dz, ds;
            double dtau = 0.0, dkappa = 0.0;
        };
        auto direction = [&](VectorXd const& bx, VectorXd const& by, VectorXd const& bz, VectorXd const& bs,
                             double bt, double bk) {
            VectorXd const ls = cones.divide(lam, bs);
            VectorXd x2, y2, z2;
            split(kkt.solve(stack(bx, by, bz - cones.apply_w(ls))), x2, y2, z2);
            Dir d;
            if (embed) d.dtau = (bt - bk / it.tau - p.c.dot(x2) - p.b.dot(y2) - p.h.dot(z2)) / den;
            d.dx = x2 + d.dtau * x1;
            d.dy = y2 + d.dtau * y1;
            d.dz = z2 + d.dtau * z1;
            d.ds = cones.apply_w(ls - cones.apply_w(d.dz));
            if (embed) d.dkappa = (bk - it.kappa * d.dtau) / it.tau;
            return d;
        };
        auto max_step = [&](Dir const& d) {
            double a = std::min(cones.max_step(it.s, d.ds), cones.max_step(it.z, d.dz));
            if (embed) {
                if (d.dtau < 0.0) a = std::min(a, -it.tau / d.dtau);
                if (d.dkappa < 0.0) a = std::min(a, -it.kappa / d.dkappa);
            }
            return a;
        };

        double const mu = (it.s.dot(it.z) + it.tau * it.kappa) / (degree + (embed ? 1.0 : 0.0));
        VectorXd const lam2 = cones.circ(lam, lam);
        Dir const aff = direction(-rx, -ry, -rz, -lam2, -rt, -it.tau * it.kappa);
        double const a_aff = std::min(1.0, max_step(aff));
        double const sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);

        double const keep = embed ? 1.0 - sigma : 1.0;
        VectorXd const corr = cones.circ(cones.apply_winv(aff.ds), cones.apply_w(aff.dz));
        Dir const d = direction(-keep * rx, -keep * ry, -keep * rz, -lam2 - corr + sigma * mu * e, -keep * rt,
                                -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu);
        double alpha = std::min(1.0, 0.99 * max_step(d));
        // Rounding can put a full step on the cone boundary; back off until strictly interior.
        for (int back = 0; back < 30 && alpha > 1e-12; ++back) {
            if (cones.min_eig(it.s + alpha * d.ds) > 0.0 && cones.min_eig(it.z + alpha * d.dz) > 0.0) break;
            alpha *= 0.8;
        }
        if (!(alpha > 1e-12) || !d.dx.allFinite()) {
            if (set.verbose) std::fprintf(stderr, "step length collapsed\n");
            status = SolverStatus::numerical_failure;
            break;
        }
        it.x += alpha * d.dx;
        it.y += alpha * d.dy;
        it.z += alpha * d.dz;
        it.s += alpha * d.ds;
        if (embed) {
            it.tau += alpha * d.dtau;
            it.kappa += alpha * d.dkappa;
        }
    }

    if (status == SolverStatus::max_iterations || status == SolverStatus::numerical_failure) {
        if (converged(ms, set.feastol_inaccurate, set.abstol_inaccurate, set.reltol_inaccurate))
            status = SolverStatus::inaccurate;
    }

    bool const certificate = status == SolverStatus::primal_infeasible || status == SolverStatus::dual_infeasible;
    double const scale = certificate ? 1.0 : 1.0 / it.tau;
    out.status = status;
    out.iterations = iter;
    out.x = eq.col.cwiseProduct(it.x) * scale;
    out.y = eq.eq_row.cwiseProduct(it.y) * scale;
    out.z = eq.cone_row.cwiseProduct(it.z) * scale;
    out.s = it.s.cwiseQuotient(eq.cone_row) * scale;
    out.primal_objective = original.c.dot(out.x) + original.c0;
    out.dual_objective = -(original.b.dot(out.y) + original.h.dot(out.z)) + original.c0;
    out.primal_residual = ms.pres;
    out.dual_residual = ms.dres;
    out.gap = ms.gap;
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

class IpmAdapter final : public SolverAdapter {
  public:
    explicit IpmAdapter(bool embed) : embed_(embed) {}
    std::string name() const override { return embed_ ? "ipm" : "ipm-infeasible-start"; }
    SolverCapabilities capabilities() const override { return {true, true, true}; }
    ConicSolution solve(ConicProgram const& program, SolverSettings const& settings) const override {
        return interior_point(program, settings, embed_);
    }

  private:
    bool embed_;
};

}  // namespace

std::unique_ptr<SolverAdapter> make_ipm_adapter() { return std::make_unique<IpmAdapter>(true); }
std::unique_ptr<SolverAdapter> make_ipm_infeasible_start_adapter() { return std::make_unique<IpmAdapter>(false); }

}  // namespace mgtc
