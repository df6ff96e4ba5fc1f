#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "minjoint/tolerance.hpp"

namespace minjoint {

/// One row `a . x (= or >=) alpha`.
struct Constraint {
    Eigen::VectorXd a;
    double alpha = 0;
};

/// Real system of equalities a.x = alpha and inequalities a.x >= alpha.
class LinearSystem {
  public:
    explicit LinearSystem(Eigen::Index n = 0) : n_(n) {}

    Eigen::Index n() const { return n_; }
    const std::vector<Constraint>& equalities() const { return eq_; }
    const std::vector<Constraint>& inequalities() const { return ineq_; }

    void add_equality(Eigen::VectorXd a, double alpha);
    void add_inequality(Eigen::VectorXd a, double alpha);

    bool is_homogeneous() const;

    /// Largest violation: |a.x - alpha| over equalities, alpha - a.x over
    /// inequalities (0 when all hold).
    double max_violation(const Eigen::VectorXd& x) const;

  private:
    Eigen::Index n_;
    std::vector<Constraint> eq_;
    std::vector<Constraint> ineq_;
};

/// Caps for the combinatorial enumerations.
struct EnumerationLimits {
    Eigen::Index max_dim = 12;
    std::size_t max_inequalities = 40;
    double max_subsets = 5e6;
    double dedup = 1e-7;
    bool check_bounded = true;
};

/// Solutions of the equalities written as offset + basis * z.
struct AffineReduction {
    bool empty = false;
    LinearSystem reduced;  // inequalities in z coordinates, no equalities
    Eigen::VectorXd offset;
    Eigen::MatrixXd basis;  // n x n'

    Eigen::Index reduced_dim() const { return basis.cols(); }
    Eigen::VectorXd embed(const Eigen::VectorXd& z) const { return offset + basis * z; }
};

AffineReduction affine_reduce(const LinearSystem& sys, const Tolerance& tol = {});

struct VertexSet {
    std::vector<Eigen::VectorXd> vertices;
    double dedup_tolerance = 1e-7;
    Eigen::Index reduced_dim = 0;
    std::size_t subsets_examined = 0;
};

/// Extreme points of a bounded system, by unique-solution active subsets in
/// the affine hull of the equalities.
VertexSet enumerate_vertices(const LinearSystem& sys, const Tolerance& tol = {},
                             const EnumerationLimits& limits = {});

struct RaySet {
    std::vector<Eigen::VectorXd> rays;       // unit generators of the pointed part
    std::vector<Eigen::VectorXd> lineality;  // orthonormal basis of the lineality space
    Eigen::Index reduced_dim = 0;
};

RaySet enumerate_rays(const LinearSystem& sys, const Tolerance& tol = {}, const EnumerationLimits& limits = {});

struct ConeCheck {
    bool trivial = false;
    bool trivial_by_rays = false;
    bool trivial_by_lp = false;
    RaySet rays;
    std::optional<Eigen::VectorXd> witness;  // nonzero cone element when nontrivial
};

/// Decides C = {0} by ray enumeration and cross-checks with one LP per
/// signed coordinate; disagreement throws ConsistencyError.
ConeCheck check_cone(const LinearSystem& sys, const Tolerance& tol = {}, const EnumerationLimits& limits = {});

bool cone_is_trivial(const LinearSystem& sys, const Tolerance& tol = {}, const EnumerationLimits& limits = {});

struct LpResult {
    bool feasible = false;
    Eigen::VectorXd point;
    double phase_one_objective = 0;
    double max_violation = 0;
    int iterations = 0;
};

/// Phase-one simplex with Bland's rule.
LpResult lp_feasible(const LinearSystem& sys, const Tolerance& tol = {});

/// Active rows at x (all equalities plus inequalities within tol) span R^n.
bool is_extreme_point(const LinearSystem& sys, const Eigen::VectorXd& x, const Tolerance& tol = {});

}  // namespace minjoint
