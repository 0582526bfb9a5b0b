#include "mgtc/conic.hpp"

#include <cmath>
#include <numeric>

#include "mgtc/common.hpp"

namespace mgtc {

std::unique_ptr<SolverAdapter> make_ipm_adapter();
std::unique_ptr<SolverAdapter> make_ipm_infeasible_start_adapter();
std::unique_ptr<SolverAdapter> make_admm_adapter();

std::size_t ConeDims::rows() const { return std::accumulate(soc.begin(), soc.end(), nonneg); }

void ConicProgram::validate() const {
    auto const n = c.size();
    if (a.cols() != n || g.cols() != n) throw InputError("constraint matrices do not match the variable count");
    if (a.rows() != b.size()) throw InputError("A and b row counts differ");
    if (g.rows() != h.size()) throw InputError("G and h row counts differ");
    if (cones.rows() != static_cast<std::size_t>(h.size())) throw InputError("cone dimensions do not cover h");
    for (auto q : cones.soc)
        if (q < 1) throw InputError("second-order cone of size zero");
    if (!c.allFinite() || !b.allFinite() || !h.allFinite()) throw InputError("program data is not finite");
}

std::string_view to_string(SolverStatus s) {
    switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::primal_infeasible: return "infeasible";
    case SolverStatus::dual_infeasible: return "unbounded";
    case SolverStatus::inaccurate: return "inaccurate";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

std::vector<std::string> adapter_names() { return {"ipm", "ipm-infeasible-start", "admm"}; }

std::unique_ptr<SolverAdapter> make_adapter(std::string_view name) {
    if (name == "ipm") return make_ipm_adapter();
    if (name == "ipm-infeasible-start") return make_ipm_infeasible_start_adapter();
    if (name == "admm") return make_admm_adapter();
    throw ConfigError("unknown solver adapter '" + std::string(name) + "'");
}

LinearExpr& LinearExpr::operator+=(LinearExpr const& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
}

LinearExpr& LinearExpr::operator-=(LinearExpr const& o) {
    for (auto const& [i, v] : o.terms) terms.emplace_back(i, -v);
    constant -= o.constant;
    return *this;
}

LinearExpr& LinearExpr::operator*=(double k) {
    for (auto& t : terms) t.second *= k;
    constant *= k;
    return *this;
}

double LinearExpr::evaluate(Eigen::VectorXd const& x) const {
    double v = constant;
    for (auto const& [i, coef] : terms) v += coef * x(i);
    return v;
}

LinearExpr operator+(LinearExpr a, LinearExpr const& b) { return a += b; }
LinearExpr operator-(LinearExpr a, LinearExpr const& b) { return a -= b; }
LinearExpr operator*(double k, LinearExpr a) { return a *= k; }

int ProgramBuilder::add_variable() { return num_vars_++; }

int ProgramBuilder::add_variables(int count) {
    int const first = num_vars_;
    num_vars_ += count;
    return first;
}

void ProgramBuilder::add_equality(LinearExpr const& e) { eq_.push_back(e); }
void ProgramBuilder::add_nonnegative(LinearExpr const& e) { nonneg_.push_back(e); }

void ProgramBuilder::add_second_order(std::vector<LinearExpr> e) {
    if (e.empty()) throw InputError("empty second-order cone");
    soc_.push_back(std::move(e));
}

void ProgramBuilder::add_rotated(LinearExpr const& u, LinearExpr const& v, std::vector<LinearExpr> const& x) {
    std::vector<LinearExpr> cone;
    cone.reserve(x.size() + 2);
    cone.push_back(u + v);
    for (auto const& xi : x) cone.push_back(2.0 * xi);
    cone.push_back(u - v);
    soc_.push_back(std::move(cone));
}

void ProgramBuilder::add_objective(LinearExpr const& e) { objective_ += e; }

ConicProgram ProgramBuilder::build() const {
    ConicProgram p;
    auto const n = num_vars_;
    p.c = Eigen::VectorXd::Zero(n);
    for (auto const& [i, v] : objective_.terms) p.c(i) += v;
    p.c0 = objective_.constant;

    using Triplet = Eigen::Triplet<double, int>;
    std::vector<Triplet> trip;
    p.b.resize(static_cast<Eigen::Index>(eq_.size()));
    for (std::size_t r = 0; r < eq_.size(); ++r) {
        for (auto const& [i, v] : eq_[r].terms) trip.emplace_back(static_cast<int>(r), i, v);
        p.b(static_cast<Eigen::Index>(r)) = -eq_[r].constant;
    }
    p.a.resize(static_cast<Eigen::Index>(eq_.size()), n);
    p.a.setFromTriplets(trip.begin(), trip.end());
    p.a.prune(0.0);

    // s = e = -G x + h  =>  G = -coef, h = constant
    trip.clear();
    std::vector<double> h;
    int row = 0;
    auto emit = [&](LinearExpr const& e) {
        for (auto const& [i, v] : e.terms) trip.emplace_back(row, i, -v);
        h.push_back(e.constant);
        ++row;
    };
    for (auto const& e : nonneg_) emit(e);
    p.cones.nonneg = nonneg_.size();
    for (auto const& cone : soc_) {
        for (auto const& e : cone) emit(e);
        p.cones.soc.push_back(cone.size());
    }
    p.g.resize(row, n);
    p.g.setFromTriplets(trip.begin(), trip.end());
    p.g.prune(0.0);
    p.h = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    return p;
}

}  // namespace mgtc
