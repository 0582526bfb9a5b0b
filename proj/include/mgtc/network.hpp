#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mgtc/common.hpp"

namespace mgtc {

using PhaseMask = std::array<bool, 3>;

inline constexpr PhaseMask kAllPhases{true, true, true};

/// A three-phase line section between two hypernodes. The admittance is in
/// per-unit siemens; rows/columns of absent phases must be zero.
struct HyperBranch {
    std::size_t from = 0;
    std::size_t to = 0;
    Matrix3c admittance = Matrix3c::Zero();
    PhaseMask phases = kAllPhases;
};

/// One scalar phase of a hypernode.
struct PhaseNode {
    std::size_t node = 0;
    Phase phase = Phase::A;

    friend bool operator==(PhaseNode const&, PhaseNode const&) = default;
};

/// Everything needed to construct a ThreePhaseNetwork. Node 0 is the slack.
struct NetworkSpec {
    std::vector<std::string> node_ids;
    std::vector<HyperBranch> branches;
    double base_power = 1.0;    // VA per phase
    double base_voltage = 1.0;  // V phase-to-neutral
    double v_nom = 1.0;         // pu
};

/// Connected hypergraph of three-phase nodes and branches. Immutable once
/// built; the constructor validates every structural invariant.
class ThreePhaseNetwork {
  public:
    explicit ThreePhaseNetwork(NetworkSpec spec);

    std::size_t num_nodes() const { return node_ids_.size(); }
    std::size_t num_branches() const { return branches_.size(); }
    std::vector<std::string> const& node_ids() const { return node_ids_; }
    std::vector<HyperBranch> const& branches() const { return branches_; }
    std::string const& slack_id() const { return node_ids_.front(); }
    double base_power() const { return base_power_; }
    double base_voltage() const { return base_voltage_; }
    double v_nom() const { return v_nom_; }

    /// Phases energized at a node (union of incident branch phases; all three at the slack).
    PhaseMask const& active_phases(std::size_t node) const { return active_[node]; }
    bool is_active(PhaseNode pn) const { return active_[pn.node][static_cast<int>(pn.phase)]; }

    /// Position of a scalar phase in the phase-major layout (all A, then all B, then all C).
    std::size_t phase_major_index(PhaseNode pn) const {
        return static_cast<std::size_t>(pn.phase) * num_nodes() + pn.node;
    }

    /// Node index for an id, throws InputError when unknown.
    std::size_t node_index(std::string const& id) const;

    /// Incidence matrix A (nodes x branches), +1 at the sending node, -1 at the receiving node.
    Eigen::MatrixXd incidence() const;

  private:
    std::vector<std::string> node_ids_;
    std::vector<HyperBranch> branches_;
    std::vector<PhaseMask> active_;
    double base_power_;
    double base_voltage_;
    double v_nom_;
};

/// Y_H = (I3 (x) A) Y_E (I3 (x) A)^T in phase-major order (3|H| x 3|H|).
CMatrix build_admittance(ThreePhaseNetwork const& net);

/// Slack / non-slack blocks of Y_H restricted to energized phases.
///
/// `nonslack` lists the energized non-slack phases in phase-major order; it
/// is the layout of every V_N / S_N vector in the library.
struct AdmittancePartition {
    CMatrix yss;
    CMatrix ysn;
    CMatrix yns;
    CMatrix ynn;
    std::vector<PhaseNode> nonslack;
    std::size_t num_nodes = 0;

    std::size_t size() const { return nonslack.size(); }

    /// Row of (node, phase) in the non-slack layout, or -1 when absent or slack.
    long index_of(std::size_t node, Phase phase) const {
        return lookup_[static_cast<std::size_t>(phase) * num_nodes + node];
    }

    void build_lookup() {
        lookup_.assign(3 * num_nodes, -1);
        for (std::size_t i = 0; i < nonslack.size(); ++i)
            lookup_[static_cast<std::size_t>(nonslack[i].phase) * num_nodes + nonslack[i].node] = static_cast<long>(i);
    }

  private:
    std::vector<long> lookup_;
};

AdmittancePartition partition(CMatrix const& y_full, ThreePhaseNetwork const& net);

/// Convenience: build_admittance followed by partition.
AdmittancePartition partition(ThreePhaseNetwork const& net);

/// v_nom * (1, e^{-2pi j/3}, e^{2pi j/3}).
CVector slack_voltage(double v_nom);

/// Balanced flat profile v_nom e^{j phi} over the non-slack layout.
CVector flat_voltage(AdmittancePartition const& part, double v_nom);

/// Exact complex power s_k = v_k conj(i_k) injected at each non-slack phase.
CVector nodal_power(AdmittancePartition const& part, CVector const& vs, CVector const& vn);

/// real(V_H^H Y_H V_H): total active losses.
double total_losses(AdmittancePartition const& part, CVector const& vs, CVector const& vn);

/// Complex power supplied by the main grid, sum over slack phases of v_s conj(i_s).
cplx grid_power(AdmittancePartition const& part, CVector const& vs, CVector const& vn);

/// Full-network voltage vector in phase-major order (inactive phases zero).
CVector assemble_full_voltage(ThreePhaseNetwork const& net, AdmittancePartition const& part,
                              CVector const& vs, CVector const& vn);

/// Active losses summed branch by branch: sum real(dV^T conj(Y_l dV)).
double branch_losses(ThreePhaseNetwork const& net, AdmittancePartition const& part,
                     CVector const& vs, CVector const& vn);

/// Real factor R of a branch loss form: loss = ||R [Re dV; Im dV]||^2.
/// Rows belonging to zero eigenvalues of the Hermitian part are dropped.
Eigen::MatrixXd branch_loss_factor(HyperBranch const& branch);

/// Converts a series impedance (ohm) into a per-unit admittance, honoring absent phases.
Matrix3c admittance_from_impedance(Matrix3c const& z_ohm, PhaseMask const& phases,
                                   double base_voltage, double base_power);

}  // namespace mgtc
