#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mgtc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Cone layout of the slack vector s: `nonneg` nonnegative orthant rows followed by
/// second-order cones of the listed sizes, each ordered (t, x_1 .. x_k) with t >= ||x||.
struct ConeDims {
    std::size_t nonneg = 0;
    std::vector<std::size_t> soc;

    std::size_t rows() const;
    std::size_t degree() const { return nonneg + soc.size(); }
};

/// Canonical conic program:
///
///     minimize    c^T x + c0
///     subject to  A x = b
///                 G x + s = h,  s in K
struct ConicProgram {
    Eigen::VectorXd c;
    double c0 = 0.0;
    SparseMatrix a;
    Eigen::VectorXd b;
    SparseMatrix g;
    Eigen::VectorXd h;
    ConeDims cones;

    std::size_t num_vars() const { return static_cast<std::size_t>(c.size()); }
    std::size_t num_eq() const { return static_cast<std::size_t>(b.size()); }
    std::size_t num_cone_rows() const { return static_cast<std::size_t>(h.size()); }

    /// Throws InputError on inconsistent dimensions or non-finite data.
    void validate() const;
};

enum class SolverStatus { optimal, primal_infeasible, dual_infeasible, inaccurate, max_iterations, numerical_failure };

std::string_view to_string(SolverStatus s);

struct SolverSettings {
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    // Thresholds under which a non-converged run is reported as inaccurate.
    double feastol_inaccurate = 1e-4;
    double abstol_inaccurate = 5e-5;
    double reltol_inaccurate = 5e-5;
    int max_iter = 100;
    bool verbose = false;
};

struct ConicSolution {
    SolverStatus status = SolverStatus::numerical_failure;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd z;
    Eigen::VectorXd s;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;  // scaled, max over equality and cone rows
    double dual_residual = 0.0;    // scaled
    double gap = 0.0;
    int iterations = 0;
    double wall_time = 0.0;  // s
};

struct SolverCapabilities {
    bool affine_equalities = false;
    bool quadratic_inequalities = false;  // via rotated second-order cones
    bool second_order_cones = false;
};

/// Narrow contract between the scheduler and a conic solver.
class SolverAdapter {
  public:
    virtual ~SolverAdapter() = default;
    virtual std::string name() const = 0;
    virtual SolverCapabilities capabilities() const = 0;
    virtual ConicSolution solve(ConicProgram const& program, SolverSettings const& settings) const = 0;
};

/// Names accepted by make_adapter, in the order `compare` runs them.
std::vector<std::string> adapter_names();

/// "ipm" (homogeneous self-dual interior point), "ipm-infeasible-start"
/// (Mehrotra path following without embedding) or "admm" (operator splitting).
std::unique_ptr<SolverAdapter> make_adapter(std::string_view name);

/// Sparse affine expression sum coef_i x_i + constant.
struct LinearExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    LinearExpr() = default;
    LinearExpr(double c) : constant(c) {}  // NOLINT: implicit constant
    static LinearExpr var(int index, double coef = 1.0) {
        LinearExpr e;
        e.terms.emplace_back(index, coef);
        return e;
    }

    LinearExpr& add(int index, double coef) {
        if (coef != 0.0) terms.emplace_back(index, coef);
        return *this;
    }
    LinearExpr& operator+=(LinearExpr const& o);
    LinearExpr& operator-=(LinearExpr const& o);
    LinearExpr& operator*=(double k);

    /// Value at a point.
    double evaluate(Eigen::VectorXd const& x) const;
};

LinearExpr operator+(LinearExpr a, LinearExpr const& b);
LinearExpr operator-(LinearExpr a, LinearExpr const& b);
LinearExpr operator*(double k, LinearExpr a);

/// Incrementally collects variables, constraints and a linear objective, then
/// emits a ConicProgram with nonnegative rows ahead of the second-order cones.
class ProgramBuilder {
  public:
    int add_variable();
    int add_variables(int count);
    int num_variables() const { return num_vars_; }

    void add_equality(LinearExpr const& e);          // e == 0
    void add_nonnegative(LinearExpr const& e);       // e >= 0
    void add_second_order(std::vector<LinearExpr> e);  // e[0] >= ||e[1..]||
    /// ||x||^2 <= u * v with u, v >= 0, as the cone ||(2x, u - v)|| <= u + v.
    void add_rotated(LinearExpr const& u, LinearExpr const& v, std::vector<LinearExpr> const& x);
    void add_objective(LinearExpr const& e);

    std::size_t num_equalities() const { return eq_.size(); }
    std::size_t num_nonnegative() const { return nonneg_.size(); }
    std::size_t num_cones() const { return soc_.size(); }

    ConicProgram build() const;

  private:
    int num_vars_ = 0;
    LinearExpr objective_;
    std::vector<LinearExpr> eq_;
    std::vector<LinearExpr> nonneg_;
    std::vector<std::vector<LinearExpr>> soc_;
};

}  // namespace mgtc
