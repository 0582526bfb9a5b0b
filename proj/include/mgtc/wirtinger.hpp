#pragma once

#include <functional>
#include <utility>

#include "mgtc/devices.hpp"
#include "mgtc/network.hpp"

namespace mgtc {

/// Affine surrogate of the nodal power equations around an expansion point:
///
///     conj(S_N) ~= K conj(V_N) + L V_N + U
///
/// with K diagonal (stored as a vector).
struct LinearFlowModel {
    CVector k;
    CMatrix l;
    CVector u;
    CVector expansion;

    std::size_t size() const { return static_cast<std::size_t>(u.size()); }

    /// Evaluates the surrogate of conj(S_N) at v.
    CVector conj_power(CVector const& v) const;
};

/// Builds K, L, U at `expansion` (entrywise nonzero).
LinearFlowModel linearize_power_flow(AdmittancePartition const& part, CVector const& vs, CVector const& expansion);

/// Flat-start expansion v_nom e^{j phi}.
LinearFlowModel linearize_power_flow(AdmittancePartition const& part, CVector const& vs, double v_nom);

/// Diagonal load coefficients: (|v|/v_nom)^alpha ~= M + H v + T conj(v).
struct LoadLinearization {
    Eigen::VectorXd m;
    CVector h;
    CVector t;

    /// M + H v + T conj(v), entrywise.
    CVector bracket(CVector const& v) const;
};

/// General first-order expansion of (|v|/v_nom)^alpha around `expansion`.
LoadLinearization linearize_loads(Eigen::VectorXd const& alpha, double v_nom, CVector const& expansion);

/// Expansion at v_nom e^{j phi}: M = 1 - alpha, H = alpha / (2 v_nom e^{j phi}), T = conj(H).
LoadLinearization linearize_loads(Eigen::VectorXd const& alpha, double v_nom, std::vector<PhaseNode> const& layout);

/// Aggregate load at each non-slack phase, written as
/// S_load(V) = constant + coef_v o V + coef_conj o conj(V).
struct LoadSurrogate {
    CVector constant;
    CVector coef_v;
    CVector coef_conj;

    CVector evaluate(CVector const& v) const;
};

/// Linearized load of the whole fleet at period t, around `expansion`.
LoadSurrogate load_surrogate(std::vector<ExponentialLoad> const& loads, AdmittancePartition const& part,
                             double v_nom, std::size_t t, CVector const& expansion);

/// Exact aggregate load per non-slack phase at period t.
CVector exact_load_power(std::vector<ExponentialLoad> const& loads, AdmittancePartition const& part,
                         double v_nom, std::size_t t, CVector const& v);

/// Solves the affine power flow K conj(V) + L V + U = conj(S_gen - S_load(V)) for V,
/// with fixed generation injections and linearized loads.
CVector solve_linear_flow(LinearFlowModel const& model, LoadSurrogate const& loads, CVector const& s_gen);

using ComplexMap = std::function<CVector(CVector const&)>;

/// max_k |f_exact(v)_k - surrogate(v)_k|
double wirtinger_residual(ComplexMap const& f_exact, ComplexMap const& surrogate, CVector const& v);

/// Numerical Wirtinger derivatives (df/dz, df/dz-bar) of a scalar map by central differences.
std::pair<cplx, cplx> wirtinger_derivatives(std::function<cplx(cplx)> const& f, cplx z0, double step = 1e-6);

}  // namespace mgtc
