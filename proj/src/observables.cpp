#include "minjoint/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "minjoint/minimality.hpp"

namespace minjoint {

// ---------------------------------------------------------------- linalg

Eigen::VectorXd flatten_hermitian(const Operator& op) {
    const Eigen::Index d = op.rows();
    Eigen::VectorXd out(d * d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) out[k++] = op(i, i).real();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            out[k++] = op(i, j).real();
            out[k++] = op(i, j).imag();
        }
    }
    return out;
}

Operator unflatten_hermitian(const Eigen::VectorXd& coords, Eigen::Index dim) {
    if (coords.size() != dim * dim) throw std::invalid_argument("unflatten_hermitian: size mismatch");
    Operator op = Operator::Zero(dim, dim);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < dim; ++i) op(i, i) = coords[k++];
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = i + 1; j < dim; ++j) {
            std::complex<double> z(coords[k], coords[k + 1]);
            k += 2;
            op(i, j) = z;
            op(j, i) = std::conj(z);
        }
    }
    return op;
}

double hs_inner(const Operator& a, const Operator& b) {
    return (a.adjoint() * b).trace().real();
}

double hs_norm(const Operator& a) { return a.norm(); }

Eigen::VectorXd hs_coordinates(const Operator& op) {
    Eigen::VectorXd v = flatten_hermitian(op);
    const Eigen::Index d = op.rows();
    v.tail(d * d - d) *= std::sqrt(2.0);
    return v;
}

Eigen::Index family_rank(std::span<const Operator> ops, double rel_tol) {
    if (ops.empty()) return 0;
    const Eigen::Index d = ops.front().rows();
    Eigen::MatrixXd m(d * d, Eigen::Index(ops.size()));
    for (std::size_t i = 0; i < ops.size(); ++i) m.col(Eigen::Index(i)) = hs_coordinates(ops[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > rel_tol * s[0]) ++r;
    }
    return r;
}

double min_eigenvalue(const Operator& op) {
    Operator h = 0.5 * (op + op.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Operator pauli(int k) {
    using C = std::complex<double>;
    Operator s(2, 2);
    switch (k) {
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, C(0, -1), C(0, 1), 0; break;
        case 3: s << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli index must be 1, 2 or 3");
    }
    return s;
}

Operator identity2() { return Operator::Identity(2, 2); }

// ---------------------------------------------------------------- OutcomeSet

OutcomeSet::OutcomeSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::vector<std::string> sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("outcome labels must be distinct");
    }
}

OutcomeSet OutcomeSet::product(std::vector<std::vector<std::string>> factors) {
    if (factors.empty()) throw std::invalid_argument("product of zero outcome sets");
    std::vector<std::string> labels{""};
    for (std::size_t l = 0; l < factors.size(); ++l) {
        if (factors[l].empty()) throw std::invalid_argument("empty factor in product outcome set");
        std::vector<std::string> next;
        next.reserve(labels.size() * factors[l].size());
        for (const auto& prefix : labels) {
            for (const auto& x : factors[l]) next.push_back(l == 0 ? x : prefix + "," + x);
        }
        labels = std::move(next);
    }
    OutcomeSet set(std::move(labels));
    set.strides_.assign(factors.size(), 1);
    for (std::size_t l = factors.size() - 1; l-- > 0;) {
        set.strides_[l] = set.strides_[l + 1] * factors[l + 1].size();
    }
    set.factors_ = std::move(factors);
    return set;
}

OutcomeSet OutcomeSet::product(const std::vector<OutcomeSet>& factors) {
    std::vector<std::vector<std::string>> labels;
    labels.reserve(factors.size());
    for (const auto& f : factors) labels.push_back(f.labels());
    return product(std::move(labels));
}

OutcomeSet OutcomeSet::numbered(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
    return OutcomeSet(std::move(labels));
}

std::size_t OutcomeSet::coordinate(std::size_t i, std::size_t l) const {
    if (!is_product()) throw std::logic_error("outcome set has no product structure");
    return (i / strides_.at(l)) % factors_[l].size();
}

std::size_t OutcomeSet::flat_index(const std::vector<std::size_t>& coords) const {
    if (!is_product() || coords.size() != factors_.size()) {
        throw std::logic_error("flat_index: coordinate count mismatch");
    }
    std::size_t idx = 0;
    for (std::size_t l = 0; l < coords.size(); ++l) idx += coords[l] * strides_[l];
    return idx;
}

// ---------------------------------------------------------------- Observable

Observable::Observable(OutcomeSet outcomes, std::vector<Operator> effects)
    : outcomes_(std::move(outcomes)), effects_(std::move(effects)) {
    if (effects_.empty()) throw std::invalid_argument("observable needs at least one outcome");
    if (outcomes_.size() != effects_.size()) {
        throw std::invalid_argument("observable: label count differs from effect count");
    }
    const Eigen::Index d = effects_.front().rows();
    if (d == 0) throw std::invalid_argument("observable: zero-dimensional effect");
    for (const auto& e : effects_) {
        if (e.rows() != d || e.cols() != d) throw std::invalid_argument("observable: effect dimension mismatch");
    }
}

Observable Observable::relabeled(OutcomeSet outcomes) const {
    return Observable(std::move(outcomes), effects_);
}

Observable Observable::trivial(Eigen::Index dim, std::size_t n) {
    std::vector<Operator> effects(n, Operator::Identity(dim, dim) / double(n));
    return Observable(OutcomeSet::numbered(n), std::move(effects));
}

// ---------------------------------------------------------------- MarkovKernel

MarkovKernel::MarkovKernel(OutcomeSet out, OutcomeSet in, Eigen::MatrixXd entries, const Tolerance& tol)
    : out_(std::move(out)), in_(std::move(in)), entries_(std::move(entries)) {
    if (entries_.rows() != Eigen::Index(out_.size()) || entries_.cols() != Eigen::Index(in_.size())) {
        throw std::invalid_argument("kernel entries do not match label sets");
    }
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
            double& v = entries_(i, j);
            if (!std::isfinite(v)) throw std::invalid_argument("kernel entry is not finite");
            if (v < -tol.norm) throw std::invalid_argument("kernel entry is negative");
            if (v < 0) v = 0;
        }
    }
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
        if (std::abs(entries_.col(j).sum() - 1.0) > tol.norm) {
            throw std::invalid_argument("kernel column " + in_.label(std::size_t(j)) + " does not sum to 1");
        }
    }
}

MarkovKernel MarkovKernel::identity(const OutcomeSet& set) {
    const auto n = Eigen::Index(set.size());
    return MarkovKernel(set, set, Eigen::MatrixXd::Identity(n, n));
}

MarkovKernel MarkovKernel::constant(const OutcomeSet& out, const OutcomeSet& in) {
    const auto r = Eigen::Index(out.size());
    return MarkovKernel(out, in, Eigen::MatrixXd::Constant(r, Eigen::Index(in.size()), 1.0 / double(r)));
}

MarkovKernel MarkovKernel::deterministic(const OutcomeSet& out, const OutcomeSet& in,
                                         const std::vector<std::size_t>& f) {
    if (f.size() != in.size()) throw std::invalid_argument("deterministic kernel: map size mismatch");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(out.size()), Eigen::Index(in.size()));
    for (std::size_t y = 0; y < f.size(); ++y) m(Eigen::Index(f[y]), Eigen::Index(y)) = 1.0;
    return MarkovKernel(out, in, std::move(m));
}

// ---------------------------------------------------------------- operations

bool ValidationReport::ok() const {
    return normalized && std::all_of(effects.begin(), effects.end(),
                                     [](const EffectReport& r) { return r.hermitian && r.positive; });
}

ValidationReport validate_observable(const Observable& a, const Tolerance& tol) {
    ValidationReport report;
    Operator sum = Operator::Zero(a.dim(), a.dim());
    for (const auto& e : a.effects()) {
        EffectReport r;
        r.hermiticity_error = (e - e.adjoint()).cwiseAbs().maxCoeff();
        r.hermitian = r.hermiticity_error <= tol.herm;
        r.min_eigenvalue = min_eigenvalue(e);
        r.positive = r.min_eigenvalue >= -tol.pos;
        report.effects.push_back(r);
        sum += e;
    }
    report.normalization_residual = (sum - Operator::Identity(a.dim(), a.dim())).cwiseAbs().maxCoeff();
    report.normalized = report.normalization_residual <= tol.norm;
    return report;
}

Observable post_process(const MarkovKernel& p, const Observable& a) {
    if (!(p.in_set() == a.outcomes())) throw std::invalid_argument("post_process: kernel input set != outcomes");
    std::vector<Operator> out;
    out.reserve(p.out_set().size());
    for (std::size_t x = 0; x < p.out_set().size(); ++x) {
        Operator e = Operator::Zero(a.dim(), a.dim());
        for (std::size_t y = 0; y < a.size(); ++y) {
            if (p(x, y) != 0.0) e += p(x, y) * a[y];
        }
        out.push_back(std::move(e));
    }
    return Observable(p.out_set(), std::move(out));
}

MarkovKernel compose_kernels(const MarkovKernel& p, const MarkovKernel& q) {
    if (!(p.in_set() == q.out_set())) throw std::invalid_argument("compose_kernels: label-set mismatch");
    Tolerance loose;
    loose.norm = 1e-8;
    return MarkovKernel(p.out_set(), q.in_set(), p.entries() * q.entries(), loose);
}

Observable marginal(const Observable& g, std::size_t l) {
    const auto& set = g.outcomes();
    if (!set.is_product()) throw std::invalid_argument("marginal: outcome set has no product structure");
    if (l >= set.factor_count()) throw std::out_of_range("marginal: index out of range");
    const auto& labels = set.factor(l);
    std::vector<Operator> effects(labels.size(), Operator::Zero(g.dim(), g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) effects[set.coordinate(i, l)] += g[i];
    return Observable(OutcomeSet(labels), std::move(effects));
}

bool is_joint_observable(const Observable& g, const std::vector<Observable>& marginals, const Tolerance& tol) {
    const auto& set = g.outcomes();
    if (!set.is_product() || set.factor_count() != marginals.size()) return false;
    for (std::size_t l = 0; l < marginals.size(); ++l) {
        if (marginals[l].dim() != g.dim()) throw std::invalid_argument("is_joint_observable: dimension mismatch");
        if (set.factor(l).size() != marginals[l].size()) return false;
    }
    if (!validate_observable(g, tol).ok()) return false;
    for (std::size_t l = 0; l < marginals.size(); ++l) {
        Observable m = marginal(g, l);
        for (std::size_t x = 0; x < m.size(); ++x) {
            if ((m[x] - marginals[l][x]).cwiseAbs().maxCoeff() > tol.norm) return false;
        }
    }
    return true;
}

MarkovKernel product_kernel(const std::vector<MarkovKernel>& kernels) {
    if (kernels.empty()) throw std::invalid_argument("product_kernel: empty list");
    const OutcomeSet& in = kernels.front().in_set();
    std::vector<OutcomeSet> outs;
    for (const auto& k : kernels) {
        if (!(k.in_set() == in)) throw std::invalid_argument("product_kernel: mismatched input sets");
        outs.push_back(k.out_set());
    }
    OutcomeSet out = OutcomeSet::product(outs);
    Eigen::MatrixXd m(Eigen::Index(out.size()), Eigen::Index(in.size()));
    for (std::size_t x = 0; x < out.size(); ++x) {
        for (std::size_t y = 0; y < in.size(); ++y) {
            double v = 1.0;
            for (std::size_t l = 0; l < kernels.size(); ++l) v *= kernels[l](out.coordinate(x, l), y);
            m(Eigen::Index(x), Eigen::Index(y)) = v;
        }
    }
    Tolerance loose;
    loose.norm = 1e-9 * double(kernels.size());
    return MarkovKernel(std::move(out), in, std::move(m), loose);
}

Observable joint_from_common(const Observable& common, const std::vector<MarkovKernel>& kernels,
                             const std::vector<Observable>* declared, const Tolerance& tol) {
    for (const auto& k : kernels) {
        if (!(k.in_set() == common.outcomes())) {
            throw std::invalid_argument("joint_from_common: kernel input set differs from common outcomes");
        }
    }
    if (declared != nullptr) {
        if (declared->size() != kernels.size()) throw std::invalid_argument("joint_from_common: marginal count");
        for (std::size_t l = 0; l < kernels.size(); ++l) {
            if (max_effect_distance(post_process(kernels[l], common), (*declared)[l]) > tol.norm) {
                throw std::invalid_argument("joint_from_common: declared marginal " + std::to_string(l + 1) +
                                            " is not p_l * C");
            }
        }
    }
    Observable g = post_process(product_kernel(kernels), common);
    for (std::size_t l = 0; l < kernels.size(); ++l) {
        if (max_effect_distance(marginal(g, l), post_process(kernels[l], common)) > tol.norm) {
            throw NumericalError("joint_from_common: marginal identity failed");
        }
    }
    return g;
}

bool is_zero_effect(const Operator& e, const Tolerance& tol) { return hs_norm(e) <= tol.rank; }

bool pair_linearly_independent(const Operator& e1, const Operator& e2, const Tolerance& tol) {
    if (e1.rows() != e2.rows()) throw std::invalid_argument("pair_linearly_independent: dimension mismatch");
    if (is_zero_effect(e1, tol) || is_zero_effect(e2, tol)) return false;
    const double n11 = hs_inner(e1, e1);
    const double n22 = hs_inner(e2, e2);
    const double n12 = hs_inner(e1, e2);
    return n11 * n22 - n12 * n12 > tol.rank * n11 * n22;
}

bool is_pairwise_linearly_independent(const Observable& a, const Tolerance& tol) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if (!pair_linearly_independent(a[i], a[j], tol)) return false;
        }
    }
    return a.size() > 1 || !is_zero_effect(a[0], tol);
}

PairwiseReduction pairwise_reduce(const Observable& a, const Tolerance& tol) {
    const std::size_t n = a.size();
    std::vector<std::size_t> group(n, n);  // n marks a zero effect
    std::vector<std::size_t> roots;
    // Union by first-seen root; merging through any member gives the
    // transitive closure of pairwise proportionality.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    std::vector<bool> zero(n);
    for (std::size_t i = 0; i < n; ++i) zero[i] = is_zero_effect(a[i], tol);
    for (std::size_t i = 0; i < n; ++i) {
        if (zero[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (zero[j]) continue;
            if (!pair_linearly_independent(a[i], a[j], tol)) {
                std::size_t ri = find(i), rj = find(j);
                if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (zero[i]) continue;
        std::size_t r = find(i);
        auto it = std::find(roots.begin(), roots.end(), r);
        if (it == roots.end()) {
            group[i] = roots.size();
            roots.push_back(r);
        } else {
            group[i] = std::size_t(it - roots.begin());
        }
    }
    if (roots.empty()) throw std::invalid_argument("pairwise_reduce: all effects are zero");

    const std::size_t m = roots.size();
    std::vector<std::string> labels;
    std::vector<Operator> effects(m, Operator::Zero(a.dim(), a.dim()));
    std::vector<double> weight(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) labels.push_back(a.outcomes().label(roots[k]));
    Eigen::MatrixXd forward = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (group[i] == n) {
            forward(0, Eigen::Index(i)) = 1.0;  // zero effects go anywhere
            continue;
        }
        forward(Eigen::Index(group[i]), Eigen::Index(i)) = 1.0;
        effects[group[i]] += a[i];
    }
    // A(i) = (tr A(i) / tr B(k)) B(k) for i in group k.
    Eigen::MatrixXd backward = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(m));
    for (std::size_t k = 0; k < m; ++k) weight[k] = effects[k].trace().real();
    for (std::size_t i = 0; i < n; ++i) {
        if (group[i] == n) continue;
        backward(Eigen::Index(i), Eigen::Index(group[i])) = a[i].trace().real() / weight[group[i]];
    }
    OutcomeSet reduced_set(std::move(labels));
    Observable reduced(reduced_set, std::move(effects));
    Tolerance loose;
    loose.norm = std::max(tol.norm, 1e-8);
    return PairwiseReduction{reduced, MarkovKernel(reduced_set, a.outcomes(), forward),
                             MarkovKernel(a.outcomes(), reduced_set, backward, loose)};
}

bool kernel_preserves_equivalence(const MarkovKernel& p, const Observable& a, const Tolerance& tol) {
    if (!(p.in_set() == a.outcomes())) throw std::invalid_argument("kernel_preserves_equivalence: label mismatch");
    for (std::size_t x1 = 0; x1 < a.size(); ++x1) {
        for (std::size_t x2 = x1 + 1; x2 < a.size(); ++x2) {
            if (!pair_linearly_independent(a[x1], a[x2], tol)) continue;
            for (std::size_t y = 0; y < p.out_set().size(); ++y) {
                if (p(y, x1) * p(y, x2) > tol.rank) return false;
            }
        }
    }
    return true;
}

PostprocessingResult is_postprocessing_of(const Observable& a, const Observable& b, const Tolerance& tol) {
    if (a.dim() != b.dim()) throw std::invalid_argument("is_postprocessing_of: dimension mismatch");
    LinearSystem sys = build_K_system(a, b);
    LpResult lp = lp_feasible(sys, tol);
    PostprocessingResult result;
    result.phase_one_objective = lp.phase_one_objective;
    result.holds = lp.feasible;
    if (lp.feasible) {
        Tolerance loose = tol;
        loose.norm = std::max(tol.norm, 1e-8);
        result.witness = kernel_from_point(lp.point, a.outcomes(), b.outcomes(), loose);
    }
    return result;
}

double max_effect_distance(const Observable& a, const Observable& b) {
    if (a.size() != b.size() || a.dim() != b.dim()) throw std::invalid_argument("observables differ in shape");
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace minjoint
