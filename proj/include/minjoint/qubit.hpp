#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "minjoint/minimality.hpp"

namespace minjoint::qubit {

using Vec3 = Eigen::Vector3d;

/// E(+-) = (alpha I +- a.sigma) / 2.
struct BlochObservable {
    double alpha = 1;
    Vec3 a = Vec3::Zero();
};

/// G(+,+) = (gamma I + g.sigma) / 2; the other three elements follow from
/// the marginals.
struct JointParams {
    double gamma = 0;
    Vec3 g = Vec3::Zero();
};

struct QubitInstance {
    BlochObservable first;
    BlochObservable second;
    JointParams joint;
};

/// Thrown by joint_from_params when some G element is not positive.
class PositivityError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

void validate_bloch(const BlochObservable& obs, const Tolerance& tol = {});

Observable bloch_to_observable(const BlochObservable& obs, const Tolerance& tol = {});

/// Slack of each positivity inequality, in the order
/// ||g|| <= gamma, ||a-g|| <= alpha-gamma, ||b-g|| <= beta-gamma,
/// ||a+b-g|| <= 2+gamma-alpha-beta.
struct PositivityReport {
    std::array<double, 4> slack{};

    double min_slack() const;
    bool ok(double tol) const { return min_slack() >= -tol; }
};

PositivityReport joint_positivity(const BlochObservable& A, const BlochObservable& B, const JointParams& jp);

/// Four-outcome joint observable over {+,-} x {+,-}.
Observable joint_from_params(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                             const Tolerance& tol = {});

/// Bloch parameters (gamma, g) read off G(+,+) of a qubit joint observable.
JointParams params_from_joint(const Observable& g);

/// Busch criterion ||a-b|| + ||a+b|| <= 2 for unbiased pairs.
bool unbiased_compatible(const Vec3& a, const Vec3& b, double boundary = 1e-7);

bool vectors_independent(const Vec3& a, const Vec3& b, const Tolerance& tol = {});

struct SpanCoefficients {
    double c1 = 0;
    double c2 = 0;
    double residual = 0;
};

/// Solves g = c1 a + c2 b by the 2x2 Gram system; nullopt when g leaves the
/// span (residual > tol.rank * ||g||). Throws std::domain_error when a, b
/// are dependent.
std::optional<SpanCoefficients> span_coefficients(const Vec3& g, const Vec3& a, const Vec3& b,
                                                  const Tolerance& tol = {});

struct WVector {
    double pp = 0;
    double pm = 0;
    double mp = 0;
    double mm = 0;
};

WVector w_vector(double c1, double c2, double alpha, double beta, double gamma);

Decision wmin_condition(const WVector& w, double boundary);

/// Which pairwise-dependence lines (index 0 = dep1 .. 5 = dep6) hold.
struct DepSet {
    std::array<bool, 6> holds{};

    bool any() const;
    bool any_minimal() const { return holds[0] || holds[1] || holds[4] || holds[5]; }
    bool any_non_minimal() const { return holds[2] || holds[3]; }
    std::vector<int> satisfied() const;  // 1-based numbers
};

DepSet dep_conditions(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                      const SpanCoefficients& coeffs, const Tolerance& tol = {});

/// Closed-form decision for linearly independent a, b.
MinimalityVerdict qubit_is_minimal(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                                   const Tolerance& tol = {});

/// Specialization to alpha = beta = 1.
MinimalityVerdict unbiased_is_minimal(const Vec3& a, const Vec3& b, const JointParams& jp,
                                      const Tolerance& tol = {});

/// Smallest distance from zero over the closed-form decision quantities
/// (effect sizes, span residual, dep-line distances, w products, pairwise
/// Gram ratios, positivity slacks).
double decision_margin(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                       const Tolerance& tol = {});

enum class CellVerdict { Invalid, Minimal, NotMinimal, Boundary };
const char* to_string(CellVerdict v);

struct RegionCell {
    double c1 = 0;
    double c2 = 0;
    CellVerdict verdict = CellVerdict::Invalid;
    std::array<double, 4> slack{};
};

struct RegionGrid {
    std::size_t grid_n = 0;
    std::vector<RegionCell> cells;  // row-major: c1 index outer, c2 index inner

    const RegionCell& at(std::size_t i, std::size_t j) const { return cells.at(i * grid_n + j); }
    std::string to_csv() const;
};

/// Unbiased (c1, c2) grid with g = c1 a + c2 b.
RegionGrid region_scan(const Vec3& a, const Vec3& b, double gamma, std::pair<double, double> c1_range,
                       std::pair<double, double> c2_range, std::size_t grid_n, const Tolerance& tol = {});

/// Deterministic uniform [0, 1) from a 64-bit engine (independent of the
/// standard library's distribution implementations).
double uniform01(std::mt19937_64& rng);

struct SampleOptions {
    bool biased = false;           // alpha, beta drawn from [0.6, 1.4]
    double off_span_fraction = 0;  // probability of g leaving span{a, b}
    double min_margin = 1e-6;      // decision_margin lower bound
    int max_attempts = 100000;
};

/// Rejection sampler for compatible instances with valid joint parameters.
QubitInstance sample_instance(std::mt19937_64& rng, const SampleOptions& opts = {}, const Tolerance& tol = {});

}  // namespace minjoint::qubit
