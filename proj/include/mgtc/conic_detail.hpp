#pragma once

// Cone algebra shared by the conic solvers. Exposed for unit tests.

#include <vector>

#include "mgtc/conic.hpp"

namespace mgtc::detail {

class ConeOps {
  public:
    explicit ConeOps(ConeDims const& dims);

    Eigen::Index rows() const { return rows_; }
    Eigen::VectorXd identity() const;
    /// Smallest cone eigenvalue: u_i on the orthant, u0 - ||u1|| on each second-order cone.
    double min_eig(Eigen::VectorXd const& u) const;
    /// Jordan product u o v.
    Eigen::VectorXd circ(Eigen::VectorXd const& u, Eigen::VectorXd const& v) const;
    /// x with lam o x = d.
    Eigen::VectorXd divide(Eigen::VectorXd const& lam, Eigen::VectorXd const& d) const;
    /// Largest alpha with u + alpha d in the cone (infinity when unbounded). u must be interior.
    double max_step(Eigen::VectorXd const& u, Eigen::VectorXd const& d) const;

    void set_identity_scaling();
    /// Nesterov-Todd scaling W (symmetric) with W z = W^{-1} s = lambda. False if s or z is not interior.
    bool update_scaling(Eigen::VectorXd const& s, Eigen::VectorXd const& z);
    Eigen::VectorXd const& lambda() const { return lambda_; }
    Eigen::VectorXd apply_w(Eigen::VectorXd const& v) const;
    Eigen::VectorXd apply_winv(Eigen::VectorXd const& v) const;
    /// Lower triangle of -(W^2 + reg I) placed at (row0, row0).
    void append_w2(std::vector<Eigen::Triplet<double, int>>& trip, int row0, double reg) const;

  private:
    ConeDims dims_;
    std::vector<Eigen::Index> soc_off_;
    Eigen::Index rows_ = 0;
    Eigen::VectorXd lin_w_;
    std::vector<Eigen::MatrixXd> soc_w_;
    std::vector<Eigen::MatrixXd> soc_winv_;
    Eigen::VectorXd lambda_;
};

struct Equilibration {
    Eigen::VectorXd col;       // x = col .* x_scaled
    Eigen::VectorXd eq_row;    // y = eq_row .* y_scaled
    Eigen::VectorXd cone_row;  // z = cone_row .* z_scaled, s = s_scaled ./ cone_row
};

/// Ruiz equilibration in place; second-order cone rows share one factor per cone.
Equilibration equilibrate(ConicProgram& program, int passes);

/// Euclidean projection onto the cone.
Eigen::VectorXd project_cone(ConeDims const& dims, Eigen::VectorXd const& v);

}  // namespace mgtc::detail
