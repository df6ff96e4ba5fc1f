#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minjoint/linalg.hpp"
#include "minjoint/tolerance.hpp"

namespace minjoint {

/// Ordered finite label set, optionally carrying product structure.
///
/// Product sets are stored row-major: the last factor varies fastest, and the
/// label of a product outcome is the factor labels joined with ','.
class OutcomeSet {
  public:
    OutcomeSet() = default;
    explicit OutcomeSet(std::vector<std::string> labels);

    static OutcomeSet product(std::vector<std::vector<std::string>> factors);
    static OutcomeSet product(const std::vector<OutcomeSet>& factors);
    static OutcomeSet numbered(std::size_t n);  // "1".."n"

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    bool is_product() const { return !factors_.empty(); }
    std::size_t factor_count() const { return factors_.size(); }
    const std::vector<std::string>& factor(std::size_t l) const { return factors_.at(l); }

    /// Index of outcome `i` in factor `l`.
    std::size_t coordinate(std::size_t i, std::size_t l) const;
    /// Inverse of coordinate(): flat index of a coordinate tuple.
    std::size_t flat_index(const std::vector<std::size_t>& coords) const;

    /// Equality compares labels only; product structure is a view on them.
    bool operator==(const OutcomeSet& other) const { return labels_ == other.labels_; }

  private:
    std::vector<std::string> labels_;
    std::vector<std::vector<std::string>> factors_;
    std::vector<std::size_t> strides_;
};

/// A finite-outcome POVM. Construction checks shapes only; positivity and
/// normalization are checked by validate_observable.
class Observable {
  public:
    Observable(OutcomeSet outcomes, std::vector<Operator> effects);

    std::size_t size() const { return effects_.size(); }
    Eigen::Index dim() const { return effects_.front().rows(); }
    const OutcomeSet& outcomes() const { return outcomes_; }
    const std::vector<Operator>& effects() const { return effects_; }
    const Operator& operator[](std::size_t i) const { return effects_.at(i); }

    /// Same effects over a relabeled outcome set of equal size.
    Observable relabeled(OutcomeSet outcomes) const;

    /// n outcomes, each I/n.
    static Observable trivial(Eigen::Index dim, std::size_t n);

  private:
    OutcomeSet outcomes_;
    std::vector<Operator> effects_;
};

/// Column-stochastic nonnegative matrix p(x, y), rows indexed by the output
/// set, columns by the input set. Entries in [-tol.norm, 0) are clamped to 0.
class MarkovKernel {
  public:
    MarkovKernel(OutcomeSet out, OutcomeSet in, Eigen::MatrixXd entries, const Tolerance& tol = {});

    const OutcomeSet& out_set() const { return out_; }
    const OutcomeSet& in_set() const { return in_; }
    const Eigen::MatrixXd& entries() const { return entries_; }
    double operator()(std::size_t x, std::size_t y) const { return entries_(Eigen::Index(x), Eigen::Index(y)); }

    static MarkovKernel identity(const OutcomeSet& set);
    static MarkovKernel constant(const OutcomeSet& out, const OutcomeSet& in);
    /// Deterministic kernel sending input y to output f[y].
    static MarkovKernel deterministic(const OutcomeSet& out, const OutcomeSet& in, const std::vector<std::size_t>& f);

  private:
    OutcomeSet out_;
    OutcomeSet in_;
    Eigen::MatrixXd entries_;
};

struct EffectReport {
    double hermiticity_error = 0;
    double min_eigenvalue = 0;
    bool hermitian = false;
    bool positive = false;
};

struct ValidationReport {
    std::vector<EffectReport> effects;
    double normalization_residual = 0;  // max entrywise |sum - I|
    bool normalized = false;

    bool ok() const;
};

ValidationReport validate_observable(const Observable& a, const Tolerance& tol = {});

/// (p * A)(x) = sum_y p(x, y) A(y). The result takes the kernel's output set.
Observable post_process(const MarkovKernel& p, const Observable& a);

/// (p * q)(x, x') = sum_y p(x, y) q(y, x').
MarkovKernel compose_kernels(const MarkovKernel& p, const MarkovKernel& q);

/// l-th coordinate marginal (0-based) of an observable on a product set.
Observable marginal(const Observable& g, std::size_t l);

bool is_joint_observable(const Observable& g, const std::vector<Observable>& marginals, const Tolerance& tol = {});

/// p((x_1..x_n), y) = prod_l p_l(x_l, y).
MarkovKernel product_kernel(const std::vector<MarkovKernel>& kernels);

/// G = product_kernel(kernels) * C. When `declared` is given, each declared
/// marginal must equal kernels[l] * C.
Observable joint_from_common(const Observable& common, const std::vector<MarkovKernel>& kernels,
                             const std::vector<Observable>* declared = nullptr, const Tolerance& tol = {});

bool pair_linearly_independent(const Operator& e1, const Operator& e2, const Tolerance& tol = {});

bool is_zero_effect(const Operator& e, const Tolerance& tol = {});

/// True iff no two distinct outcomes carry linearly dependent effects
/// (zero effects count as dependent on everything).
bool is_pairwise_linearly_independent(const Observable& a, const Tolerance& tol = {});

struct PairwiseReduction {
    Observable reduced;
    MarkovKernel forward;   // reduced = forward * original
    MarkovKernel backward;  // original = backward * reduced
};

/// Drops zero effects and merges proportional classes into their sums.
PairwiseReduction pairwise_reduce(const Observable& a, const Tolerance& tol = {});

/// True exactly when p * A is post-processing equivalent to A.
bool kernel_preserves_equivalence(const MarkovKernel& p, const Observable& a, const Tolerance& tol = {});

struct PostprocessingResult {
    bool holds = false;
    std::optional<MarkovKernel> witness;
    double phase_one_objective = 0;
};

/// Decides A = p * B for some Markov kernel p.
PostprocessingResult is_postprocessing_of(const Observable& a, const Observable& b, const Tolerance& tol = {});

/// Maximum entrywise |A(x) - B(x)| over outcomes; throws on shape mismatch.
double max_effect_distance(const Observable& a, const Observable& b);

}  // namespace minjoint
