#include "mgtc/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace mgtc {

namespace {

bool is_finite(Matrix3c const& m) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

// Union-find connectivity over hypernodes.
bool connected(std::size_t n, std::vector<HyperBranch> const& branches) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto const& b : branches) parent[find(b.from)] = find(b.to);
    std::size_t root = find(0);
    for (std::size_t i = 1; i < n; ++i)
        if (find(i) != root) return false;
    return true;
}

}  // namespace

ThreePhaseNetwork::ThreePhaseNetwork(NetworkSpec spec)
    : node_ids_(std::move(spec.node_ids)),
      branches_(std::move(spec.branches)),
      base_power_(spec.base_power),
      base_voltage_(spec.base_voltage),
      v_nom_(spec.v_nom) {
    if (node_ids_.size() < 2) throw StructuralError("network needs a slack and at least one other hypernode");
    if (branches_.empty()) throw StructuralError("network has no hyperbranches");
    if (!(base_power_ > 0.0) || !(base_voltage_ > 0.0)) throw InputError("base quantities must be positive");
    if (!(v_nom_ > 0.0)) throw InputError("v_nom must be positive");

    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < node_ids_.size(); ++i)
        if (!seen.emplace(node_ids_[i], i).second) throw InputError("duplicate hypernode id '" + node_ids_[i] + "'");

    active_.assign(node_ids_.size(), PhaseMask{false, false, false});
    active_[0] = kAllPhases;
    for (std::size_t l = 0; l < branches_.size(); ++l) {
        auto const& b = branches_[l];
        std::string const where = "hyperbranch " + std::to_string(l);
        if (b.from >= node_ids_.size() || b.to >= node_ids_.size())
            throw StructuralError(where + " references an unknown hypernode");
        if (b.from == b.to) throw StructuralError(where + " is a self loop");
        if (!is_finite(b.admittance)) throw InputError(where + " has a non-finite admittance");
        if (b.admittance.cwiseAbs().maxCoeff() == 0.0) throw InputError(where + " has an all-zero admittance");
        for (int p = 0; p < 3; ++p) {
            if (b.phases[p]) continue;
            if (b.admittance.row(p).cwiseAbs().maxCoeff() != 0.0 || b.admittance.col(p).cwiseAbs().maxCoeff() != 0.0)
                throw InputError(where + ": absent phase " + std::string(1, "ABC"[p]) + " has nonzero admittance");
        }
        for (int p = 0; p < 3; ++p) {
            if (!b.phases[p]) continue;
            active_[b.from][p] = true;
            active_[b.to][p] = true;
        }
    }
    if (!connected(node_ids_.size(), branches_)) throw StructuralError("hypergraph is not connected");
}

std::size_t ThreePhaseNetwork::node_index(std::string const& id) const {
    auto it = std::find(node_ids_.begin(), node_ids_.end(), id);
    if (it == node_ids_.end()) throw InputError("unknown hypernode id '" + id + "'");
    return static_cast<std::size_t>(it - node_ids_.begin());
}

Eigen::MatrixXd ThreePhaseNetwork::incidence() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes(), num_branches());
    for (std::size_t l = 0; l < branches_.size(); ++l) {
        a(branches_[l].from, l) = 1.0;
        a(branches_[l].to, l) = -1.0;
    }
    return a;
}

CMatrix build_admittance(ThreePhaseNetwork const& net) {
    auto const n = static_cast<Eigen::Index>(net.num_nodes());
    auto const e = static_cast<Eigen::Index>(net.num_branches());
    Eigen::MatrixXd const a = net.incidence();

    // I3 (x) A, phase-major on both sides.
    Eigen::MatrixXd ia = Eigen::MatrixXd::Zero(3 * n, 3 * e);
    for (int p = 0; p < 3; ++p) ia.block(p * n, p * e, n, e) = a;

    // Y_E: entry ((p,l),(q,l)) = Y_l(p,q).
    CMatrix ye = CMatrix::Zero(3 * e, 3 * e);
    for (Eigen::Index l = 0; l < e; ++l) {
        auto const& y = net.branches()[static_cast<std::size_t>(l)].admittance;
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) ye(p * e + l, q * e + l) = y(p, q);
    }
    CMatrix const iac = ia.cast<cplx>();
    return iac * ye * iac.transpose();
}

AdmittancePartition partition(CMatrix const& y_full, ThreePhaseNetwork const& net) {
    auto const n = net.num_nodes();
    if (y_full.rows() != static_cast<Eigen::Index>(3 * n) || y_full.cols() != y_full.rows())
        throw InputError("admittance matrix does not match the network size");

    AdmittancePartition part;
    part.num_nodes = n;
    for (Phase p : kPhases)
        for (std::size_t k = 1; k < n; ++k)
            if (net.is_active({k, p})) part.nonslack.push_back({k, p});

    std::vector<Eigen::Index> s_idx, n_idx;
    for (Phase p : kPhases) s_idx.push_back(static_cast<Eigen::Index>(net.phase_major_index({0, p})));
    for (auto const& pn : part.nonslack) n_idx.push_back(static_cast<Eigen::Index>(net.phase_major_index(pn)));

    part.yss = y_full(s_idx, s_idx);
    part.ysn = y_full(s_idx, n_idx);
    part.yns = y_full(n_idx, s_idx);
    part.ynn = y_full(n_idx, n_idx);
    part.build_lookup();
    return part;
}

AdmittancePartition partition(ThreePhaseNetwork const& net) { return partition(build_admittance(net), net); }

CVector slack_voltage(double v_nom) {
    if (!(v_nom > 0.0)) throw InputError("v_nom must be positive");
    CVector vs(3);
    for (Phase p : kPhases) vs(static_cast<int>(p)) = v_nom * phase_rotation(p);
    return vs;
}

CVector flat_voltage(AdmittancePartition const& part, double v_nom) {
    CVector v(static_cast<Eigen::Index>(part.size()));
    for (std::size_t i = 0; i < part.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = v_nom * phase_rotation(part.nonslack[i].phase);
    return v;
}

CVector nodal_power(AdmittancePartition const& part, CVector const& vs, CVector const& vn) {
    CVector const i = part.yns * vs + part.ynn * vn;
    return vn.cwiseProduct(i.conjugate());
}

double total_losses(AdmittancePartition const& part, CVector const& vs, CVector const& vn) {
    cplx const s = vs.dot(part.yss * vs + part.ysn * vn) + vn.dot(part.yns * vs + part.ynn * vn);
    return s.real();
}

cplx grid_power(AdmittancePartition const& part, CVector const& vs, CVector const& vn) {
    CVector const is = part.yss * vs + part.ysn * vn;
    return vs.cwiseProduct(is.conjugate()).sum();
}

CVector assemble_full_voltage(ThreePhaseNetwork const& net, AdmittancePartition const& part, CVector const& vs,
                              CVector const& vn) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(3 * net.num_nodes()));
    for (Phase p : kPhases) v(static_cast<Eigen::Index>(net.phase_major_index({0, p}))) = vs(static_cast<int>(p));
    for (std::size_t i = 0; i < part.size(); ++i)
        v(static_cast<Eigen::Index>(net.phase_major_index(part.nonslack[i]))) = vn(static_cast<Eigen::Index>(i));
    return v;
}

double branch_losses(ThreePhaseNetwork const& net, AdmittancePartition const& part, CVector const& vs,
                     CVector const& vn) {
    CVector const v = assemble_full_voltage(net, part, vs, vn);
    double loss = 0.0;
    for (auto const& b : net.branches()) {
        Eigen::Vector3cd dv;
        for (Phase p : kPhases)
            dv(static_cast<int>(p)) = v(static_cast<Eigen::Index>(net.phase_major_index({b.from, p}))) -
                                      v(static_cast<Eigen::Index>(net.phase_major_index({b.to, p})));
        Eigen::Vector3cd const current = b.admittance * dv;
        loss += dv.cwiseProduct(current.conjugate()).sum().real();
    }
    return loss;
}

Eigen::MatrixXd branch_loss_factor(HyperBranch const& branch) {
    Matrix3c const herm = 0.5 * (branch.admittance + branch.admittance.adjoint());
    Eigen::Matrix<double, 6, 6> q;
    q << herm.real(), -herm.imag(), herm.imag(), herm.real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(q);
    double const scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < 6; ++i)
        if (eig.eigenvalues()(i) > 1e-12 * scale) keep.push_back(i);
    Eigen::MatrixXd r(static_cast<Eigen::Index>(keep.size()), 6);
    for (std::size_t k = 0; k < keep.size(); ++k)
        r.row(static_cast<Eigen::Index>(k)) =
            std::sqrt(eig.eigenvalues()(keep[k])) * eig.eigenvectors().col(keep[k]).transpose();
    return r;
}

Matrix3c admittance_from_impedance(Matrix3c const& z_ohm, PhaseMask const& phases, double base_voltage,
                                   double base_power) {
    double const z_base = base_voltage * base_voltage / base_power;
    std::vector<int> idx;
    for (int p = 0; p < 3; ++p)
        if (phases[p]) idx.push_back(p);
    if (idx.empty()) throw InputError("branch has no phases");
    CMatrix z(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z_ohm(idx[i], idx[j]) / z_base;
    Eigen::FullPivLU<CMatrix> lu(z);
    if (!lu.isInvertible()) throw InputError("branch impedance is singular");
    CMatrix const y = lu.inverse();
    Matrix3c out = Matrix3c::Zero();
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out(idx[i], idx[j]) = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

}  // namespace mgtc
