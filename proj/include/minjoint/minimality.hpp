#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "minjoint/observables.hpp"
#include "minjoint/polyhedra.hpp"

namespace minjoint {

/// Marginals A_1..A_n together with a joint observable on their product set.
struct JointInstance {
    std::vector<Observable> marginals;
    Observable joint;
    Tolerance tol;

    const OutcomeSet& product_set() const { return joint.outcomes(); }
};

/// Relabels `joint` onto the product of the marginal outcome sets (row-major)
/// and checks that it is a joint observable of `marginals`.
JointInstance make_joint_instance(std::vector<Observable> marginals, const Observable& joint,
                                  const Tolerance& tol = {});

enum class Decision { Minimal, NotMinimal, Boundary };
enum class Method { Independent, Cones, PStar, QStar, ZeroElement, DepCondition, Wmin };

const char* to_string(Decision d);
const char* to_string(Method m);
Decision decision_from_string(const std::string& s);
Method method_from_string(const std::string& s);

/// Output outcome x' and two inputs x1, x2 with linearly independent effects
/// that a kernel mixes into x'.
struct SupportTriple {
    std::size_t out = 0;
    std::size_t in1 = 0;
    std::size_t in2 = 0;
    double product = 0;
};

struct Certificate {
    MarkovKernel kernel;
    std::optional<SupportTriple> triple;
    double kg_residual = 0;  // max violation of the K_G system
};

struct VerdictTrace {
    bool linearly_independent = false;  // nonzero effects of G
    bool has_zero_effect = false;
    bool pairwise_independent = false;
    std::optional<Decision> via_q_star;
    std::optional<Decision> via_p_star;
    std::optional<Decision> via_cones;
    std::size_t kg_vertices = 0;
    std::vector<std::size_t> q_vertices;
    double q_star_max_product = 0;
    double p_star_max_product = 0;
    std::string note;
};

struct MinimalityVerdict {
    Decision decision = Decision::Boundary;
    Method method = Method::QStar;
    bool maximal = false;  // set only by the linear-independence criterion
    std::optional<Certificate> certificate;
    VerdictTrace trace;
};

/// K(A, B): variables p(x, y) at index x * |Omega_B| + y.
LinearSystem build_K_system(const Observable& a, const Observable& b);

/// K_G: variables p(x', x) at index x' * |Omega~| + x.
LinearSystem build_KG_system(const JointInstance& inst);

/// C_l(G): variables u(x'_l, x) at index x'_l * |Omega~| + x.
LinearSystem build_cone_system(const JointInstance& inst, std::size_t l);

/// Kernel from a point of a K-type system, clamping entries within tol.norm of 0.
MarkovKernel kernel_from_point(const Eigen::VectorXd& x, const OutcomeSet& out, const OutcomeSet& in,
                               const Tolerance& tol = {});
Eigen::VectorXd kernel_to_point(const MarkovKernel& p);

/// Average of the extreme points of K_G.
MarkovKernel p_star(const JointInstance& inst, const EnumerationLimits& limits = {},
                    std::size_t* vertex_count = nullptr);

/// Average of the extreme points of K(A_l, G).
MarkovKernel q_bar(const JointInstance& inst, std::size_t l, const EnumerationLimits& limits = {},
                   std::size_t* vertex_count = nullptr);

/// Product of the q_bar kernels; asserted to lie in K_G.
MarkovKernel q_star(const JointInstance& inst, const EnumerationLimits& limits = {},
                    std::vector<std::size_t>* vertex_counts = nullptr);

enum class SupportStatus { Holds, Violated, Boundary };

struct SupportCheck {
    SupportStatus status = SupportStatus::Holds;
    std::optional<SupportTriple> triple;  // worst offending triple when not Holds
    double max_product = 0;
};

/// Products kernel(x', x1) kernel(x', x2) over linearly independent pairs:
/// all <= boundary holds, any > 10 * boundary is violated, otherwise boundary.
SupportCheck check_support_condition(const MarkovKernel& kernel, const Observable& g, const Tolerance& tol = {});

struct MinimalityOptions {
    bool cross_check = true;         // run every applicable route and demand agreement
    bool verify_certificate = true;  // LP strictness check of k * G below G
    EnumerationLimits limits;
};

MinimalityVerdict is_minimal(const JointInstance& inst, const MinimalityOptions& opts = {});

enum class DescendStatus { Converged, NotConverged, Boundary };
const char* to_string(DescendStatus s);

struct DescendResult {
    Observable joint;
    std::vector<MinimalityVerdict> history;
    DescendStatus status = DescendStatus::NotConverged;
    std::size_t steps = 0;  // number of p_* applications
};

/// Repeats G <- p_* * G until G is minimal, at most `cap` applications.
DescendResult descend_to_minimal(const JointInstance& inst, std::size_t cap = 64, const MinimalityOptions& opts = {});

}  // namespace minjoint
