#include "mgtc/wirtinger.hpp"

#include <cmath>

namespace mgtc {

CVector LinearFlowModel::conj_power(CVector const& v) const {
    return k.cwiseProduct(v.conjugate()) + l * v + u;
}

LinearFlowModel linearize_power_flow(AdmittancePartition const& part, CVector const& vs, CVector const& expansion) {
    if (expansion.size() != static_cast<Eigen::Index>(part.size()))
        throw InputError("expansion point does not match the non-slack layout");
    for (Eigen::Index i = 0; i < expansion.size(); ++i)
        if (expansion(i) == cplx{0.0, 0.0}) throw InputError("expansion point has a zero entry");

    LinearFlowModel m;
    m.expansion = expansion;
    CVector const y_v0 = part.ynn * expansion;
    m.k = part.yns * vs + y_v0;
    m.l = expansion.conjugate().asDiagonal() * part.ynn;
    // Constant term of the expansion: -conj(v_k0) sum_m y_km v_m0.
    m.u = -expansion.conjugate().cwiseProduct(y_v0);
    return m;
}

LinearFlowModel linearize_power_flow(AdmittancePartition const& part, CVector const& vs, double v_nom) {
    return linearize_power_flow(part, vs, flat_voltage(part, v_nom));
}

CVector LoadLinearization::bracket(CVector const& v) const {
    return m.cast<cplx>() + h.cwiseProduct(v) + t.cwiseProduct(v.conjugate());
}

LoadLinearization linearize_loads(Eigen::VectorXd const& alpha, double v_nom, CVector const& expansion) {
    if (!(v_nom > 0.0)) throw InputError("v_nom must be positive");
    if (alpha.size() != expansion.size()) throw InputError("alpha and expansion sizes differ");
    auto const n = alpha.size();
    LoadLinearization lin{Eigen::VectorXd(n), CVector(n), CVector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        double const a = alpha(i);
        cplx const v0 = expansion(i);
        double const mag2 = std::norm(v0);
        if (mag2 == 0.0) throw InputError("expansion point has a zero entry");
        // (|v|/vn)^a ~= r0 + (a/2) r0/|v0|^2 (conj(v0) dv + v0 conj(dv)),  r0 = (|v0|/vn)^a
        double const r0 = std::pow(std::sqrt(mag2) / v_nom, a);
        double const g = 0.5 * a * r0 / mag2;
        lin.h(i) = g * std::conj(v0);
        lin.t(i) = g * v0;
        lin.m(i) = r0 - 2.0 * g * mag2;  // = r0 (1 - a)
    }
    return lin;
}

LoadLinearization linearize_loads(Eigen::VectorXd const& alpha, double v_nom, std::vector<PhaseNode> const& layout) {
    CVector v0(static_cast<Eigen::Index>(layout.size()));
    for (std::size_t i = 0; i < layout.size(); ++i)
        v0(static_cast<Eigen::Index>(i)) = v_nom * phase_rotation(layout[i].phase);
    return linearize_loads(alpha, v_nom, v0);
}

CVector LoadSurrogate::evaluate(CVector const& v) const {
    return constant + coef_v.cwiseProduct(v) + coef_conj.cwiseProduct(v.conjugate());
}

LoadSurrogate load_surrogate(std::vector<ExponentialLoad> const& loads, AdmittancePartition const& part,
                             double v_nom, std::size_t t, CVector const& expansion) {
    auto const n = static_cast<Eigen::Index>(part.size());
    LoadSurrogate s{CVector::Zero(n), CVector::Zero(n), CVector::Zero(n)};
    for (auto const& load : loads) {
        for (Phase p : kPhases) {
            double const share = load.shares[static_cast<int>(p)];
            if (share == 0.0) continue;
            long const i = part.index_of(load.node, p);
            if (i < 0) throw InputError("load '" + load.name + "' sits on a phase that is not energized");
            Eigen::VectorXd a(1);
            a(0) = load.alpha;
            CVector v0(1);
            v0(0) = expansion(i);
            auto const lin = linearize_loads(a, v_nom, v0);
            cplx const sz = share * load.s_zip.at(t);
            s.constant(i) += sz * lin.m(0);
            s.coef_v(i) += sz * lin.h(0);
            s.coef_conj(i) += sz * lin.t(0);
        }
    }
    return s;
}

CVector exact_load_power(std::vector<ExponentialLoad> const& loads, AdmittancePartition const& part, double v_nom,
                         std::size_t t, CVector const& v) {
    CVector s = CVector::Zero(static_cast<Eigen::Index>(part.size()));
    for (auto const& load : loads) {
        for (Phase p : kPhases) {
            if (load.shares[static_cast<int>(p)] == 0.0) continue;
            long const i = part.index_of(load.node, p);
            if (i < 0) throw InputError("load '" + load.name + "' sits on a phase that is not energized");
            s(i) += load_power_exact(load, v(i), t, v_nom, p);
        }
    }
    return s;
}

CVector solve_linear_flow(LinearFlowModel const& model, LoadSurrogate const& loads, CVector const& s_gen) {
    // K conj V + L V + U = conj(S_gen) - conj(c0 + cv V + cc conj V)
    // => P conj V + Q V = r
    auto const n = static_cast<Eigen::Index>(model.size());
    CMatrix p = CMatrix::Zero(n, n);
    p.diagonal() = model.k + loads.coef_v.conjugate();
    CMatrix q = model.l;
    q.diagonal() += loads.coef_conj.conjugate();
    CVector const r = s_gen.conjugate() - loads.constant.conjugate() - model.u;

    // V = x + j y: (P + Q) x + j (Q - P) y = r
    CMatrix const cx = p + q;
    CMatrix const cy = cplx{0.0, 1.0} * (q - p);
    Eigen::MatrixXd a(2 * n, 2 * n);
    a << cx.real(), cy.real(), cx.imag(), cy.imag();
    Eigen::VectorXd rhs(2 * n);
    rhs << r.real(), r.imag();
    Eigen::VectorXd const xy = a.partialPivLu().solve(rhs);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx{xy(i), xy(n + i)};
    return v;
}

double wirtinger_residual(ComplexMap const& f_exact, ComplexMap const& surrogate, CVector const& v) {
    CVector const d = f_exact(v) - surrogate(v);
    return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

std::pair<cplx, cplx> wirtinger_derivatives(std::function<cplx(cplx)> const& f, cplx z0, double step) {
    cplx const fx = (f(z0 + cplx{step, 0.0}) - f(z0 - cplx{step, 0.0})) / (2.0 * step);
    cplx const fy = (f(z0 + cplx{0.0, step}) - f(z0 - cplx{0.0, step})) / (2.0 * step);
    // df/dz = (f_x - j f_y)/2, df/dz-bar = (f_x + j f_y)/2
    cplx const j{0.0, 1.0};
    return {0.5 * (fx - j * fy), 0.5 * (fx + j * fy)};
}

}  // namespace mgtc
