#include "minjoint/minimality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace minjoint {

namespace {

// Column-sum and nonnegativity rows are shared by every kernel polytope.
void add_kernel_rows(LinearSystem& sys, std::size_t rows, std::size_t cols) {
    const Eigen::Index n = sys.n();
    for (std::size_t y = 0; y < cols; ++y) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (std::size_t x = 0; x < rows; ++x) a[Eigen::Index(x * cols + y)] = 1.0;
        sys.add_equality(std::move(a), 1.0);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        a[i] = 1.0;
        sys.add_inequality(std::move(a), 0.0);
    }
}

std::vector<Eigen::VectorXd> flattened(const Observable& a) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(a.size());
    for (const auto& e : a.effects()) out.push_back(flatten_hermitian(e));
    return out;
}

MarkovKernel average_vertices(const VertexSet& vs, const OutcomeSet& out, const OutcomeSet& in,
                              const char* what) {
    if (vs.vertices.empty()) throw NumericalError(std::string(what) + ": polytope has no vertices");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(vs.vertices.front().size());
    for (const auto& v : vs.vertices) sum += v;
    Tolerance loose;
    loose.norm = 1e-8;
    return kernel_from_point(sum / double(vs.vertices.size()), out, in, loose);
}

Decision from_support(SupportStatus s) {
    switch (s) {
        case SupportStatus::Holds: return Decision::Minimal;
        case SupportStatus::Violated: return Decision::NotMinimal;
        case SupportStatus::Boundary: break;
    }
    return Decision::Boundary;
}

}  // namespace

const char* to_string(Decision d) {
    switch (d) {
        case Decision::Minimal: return "MINIMAL";
        case Decision::NotMinimal: return "NOT_MINIMAL";
        case Decision::Boundary: return "BOUNDARY";
    }
    return "?";
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Independent: return "independent";
        case Method::Cones: return "cones";
        case Method::PStar: return "p_star";
        case Method::QStar: return "q_star";
        case Method::ZeroElement: return "zero_element";
        case Method::DepCondition: return "dep";
        case Method::Wmin: return "wmin";
    }
    return "?";
}

Decision decision_from_string(const std::string& s) {
    for (Decision d : {Decision::Minimal, Decision::NotMinimal, Decision::Boundary}) {
        if (s == to_string(d)) return d;
    }
    throw std::invalid_argument("unknown decision: " + s);
}

Method method_from_string(const std::string& s) {
    for (Method m : {Method::Independent, Method::Cones, Method::PStar, Method::QStar, Method::ZeroElement,
                     Method::DepCondition, Method::Wmin}) {
        if (s == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown method: " + s);
}

const char* to_string(DescendStatus s) {
    switch (s) {
        case DescendStatus::Converged: return "CONVERGED";
        case DescendStatus::NotConverged: return "NOT_CONVERGED";
        case DescendStatus::Boundary: return "BOUNDARY";
    }
    return "?";
}

JointInstance make_joint_instance(std::vector<Observable> marginals, const Observable& joint, const Tolerance& tol) {
    if (marginals.empty()) throw std::invalid_argument("joint instance needs at least one marginal");
    std::vector<OutcomeSet> sets;
    for (const auto& m : marginals) sets.push_back(m.outcomes());
    OutcomeSet product = OutcomeSet::product(sets);
    if (product.size() != joint.size()) {
        throw std::invalid_argument("joint observable size does not match the product of marginal outcome sets");
    }
    JointInstance inst{std::move(marginals), joint.relabeled(std::move(product)), tol};
    if (!is_joint_observable(inst.joint, inst.marginals, tol)) {
        throw std::invalid_argument("observable is not a joint observable of the given marginals");
    }
    return inst;
}

LinearSystem build_K_system(const Observable& a, const Observable& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("build_K_system: dimension mismatch");
    const std::size_t na = a.size(), nb = b.size();
    const Eigen::Index d2 = a.dim() * a.dim();
    LinearSystem sys(Eigen::Index(na * nb));
    add_kernel_rows(sys, na, nb);
    auto fb = flattened(b);
    auto fa = flattened(a);
    for (std::size_t x = 0; x < na; ++x) {
        for (Eigen::Index c = 0; c < d2; ++c) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.n());
            for (std::size_t y = 0; y < nb; ++y) row[Eigen::Index(x * nb + y)] = fb[y][c];
            sys.add_equality(std::move(row), fa[x][c]);
        }
    }
    return sys;
}

LinearSystem build_KG_system(const JointInstance& inst) {
    const Observable& g = inst.joint;
    const OutcomeSet& set = inst.product_set();
    const std::size_t n = g.size();
    const Eigen::Index d2 = g.dim() * g.dim();
    LinearSystem sys(Eigen::Index(n * n));
    add_kernel_rows(sys, n, n);
    auto fg = flattened(g);
    for (std::size_t l = 0; l < inst.marginals.size(); ++l) {
        auto fa = flattened(inst.marginals[l]);
        for (std::size_t xl = 0; xl < inst.marginals[l].size(); ++xl) {
            for (Eigen::Index c = 0; c < d2; ++c) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.n());
                for (std::size_t xp = 0; xp < n; ++xp) {
                    if (set.coordinate(xp, l) != xl) continue;
                    for (std::size_t x = 0; x < n; ++x) row[Eigen::Index(xp * n + x)] = fg[x][c];
                }
                sys.add_equality(std::move(row), fa[xl][c]);
            }
        }
    }
    return sys;
}

LinearSystem build_cone_system(const JointInstance& inst, std::size_t l) {
    if (l >= inst.marginals.size()) throw std::out_of_range("build_cone_system: marginal index");
    const Observable& g = inst.joint;
    const OutcomeSet& set = inst.product_set();
    const std::size_t n = g.size();
    const std::size_t nl = inst.marginals[l].size();
    const Eigen::Index d2 = g.dim() * g.dim();
    LinearSystem sys(Eigen::Index(nl * n));
    auto fg = flattened(g);
    for (std::size_t xl = 0; xl < nl; ++xl) {
        for (Eigen::Index c = 0; c < d2; ++c) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.n());
            for (std::size_t x = 0; x < n; ++x) row[Eigen::Index(xl * n + x)] = fg[x][c];
            sys.add_equality(std::move(row), 0.0);
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.n());
        for (std::size_t xl = 0; xl < nl; ++xl) row[Eigen::Index(xl * n + x)] = 1.0;
        sys.add_equality(std::move(row), 0.0);
    }
    for (std::size_t xl = 0; xl < nl; ++xl) {
        for (std::size_t x = 0; x < n; ++x) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.n());
            row[Eigen::Index(xl * n + x)] = set.coordinate(x, l) == xl ? -1.0 : 1.0;
            sys.add_inequality(std::move(row), 0.0);
        }
    }
    return sys;
}

MarkovKernel kernel_from_point(const Eigen::VectorXd& x, const OutcomeSet& out, const OutcomeSet& in,
                               const Tolerance& tol) {
    const auto r = Eigen::Index(out.size()), c = Eigen::Index(in.size());
    if (x.size() != r * c) throw std::invalid_argument("kernel_from_point: size mismatch");
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) m.row(i) = x.segment(i * c, c).transpose();
    return MarkovKernel(out, in, std::move(m), tol);
}

Eigen::VectorXd kernel_to_point(const MarkovKernel& p) {
    const auto& e = p.entries();
    Eigen::VectorXd x(e.size());
    for (Eigen::Index i = 0; i < e.rows(); ++i) x.segment(i * e.cols(), e.cols()) = e.row(i).transpose();
    return x;
}

MarkovKernel p_star(const JointInstance& inst, const EnumerationLimits& limits, std::size_t* vertex_count) {
    VertexSet vs = enumerate_vertices(build_KG_system(inst), inst.tol, limits);
    if (vertex_count) *vertex_count = vs.vertices.size();
    return average_vertices(vs, inst.product_set(), inst.product_set(), "p_star");
}

MarkovKernel q_bar(const JointInstance& inst, std::size_t l, const EnumerationLimits& limits,
                   std::size_t* vertex_count) {
    if (l >= inst.marginals.size()) throw std::out_of_range("q_bar: marginal index");
    VertexSet vs = enumerate_vertices(build_K_system(inst.marginals[l], inst.joint), inst.tol, limits);
    if (vertex_count) *vertex_count = vs.vertices.size();
    return average_vertices(vs, inst.marginals[l].outcomes(), inst.product_set(), "q_bar");
}

MarkovKernel q_star(const JointInstance& inst, const EnumerationLimits& limits,
                    std::vector<std::size_t>* vertex_counts) {
    std::vector<MarkovKernel> bars;
    for (std::size_t l = 0; l < inst.marginals.size(); ++l) {
        std::size_t count = 0;
        bars.push_back(q_bar(inst, l, limits, &count));
        if (vertex_counts) vertex_counts->push_back(count);
    }
    MarkovKernel q = product_kernel(bars);
    if (build_KG_system(inst).max_violation(kernel_to_point(q)) > 1e-8) {
        throw NumericalError("q_star: product kernel left K_G");
    }
    return q;
}

SupportCheck check_support_condition(const MarkovKernel& kernel, const Observable& g, const Tolerance& tol) {
    if (!(kernel.in_set() == g.outcomes())) throw std::invalid_argument("check_support_condition: label mismatch");
    SupportCheck check;
    for (std::size_t x1 = 0; x1 < g.size(); ++x1) {
        for (std::size_t x2 = x1 + 1; x2 < g.size(); ++x2) {
            if (!pair_linearly_independent(g[x1], g[x2], tol)) continue;
            for (std::size_t xp = 0; xp < kernel.out_set().size(); ++xp) {
                double prod = kernel(xp, x1) * kernel(xp, x2);
                if (prod > check.max_product) {
                    check.max_product = prod;
                    check.triple = SupportTriple{xp, x1, x2, prod};
                }
            }
        }
    }
    if (check.max_product <= tol.boundary) {
        check.status = SupportStatus::Holds;
        check.triple.reset();
    } else if (check.max_product > 10 * tol.boundary) {
        check.status = SupportStatus::Violated;
    } else {
        check.status = SupportStatus::Boundary;
    }
    return check;
}

MinimalityVerdict is_minimal(const JointInstance& inst, const MinimalityOptions& opts) {
    const Observable& g = inst.joint;
    const Tolerance& tol = inst.tol;
    MinimalityVerdict verdict;
    VerdictTrace& trace = verdict.trace;

    std::vector<Operator> nonzero;
    for (const auto& e : g.effects()) {
        if (!is_zero_effect(e, tol)) nonzero.push_back(e);
    }
    trace.has_zero_effect = nonzero.size() < g.size();
    trace.linearly_independent = family_rank(nonzero, tol.rank) == Eigen::Index(nonzero.size());
    trace.pairwise_independent = is_pairwise_linearly_independent(g, tol);

    const bool run_all = opts.cross_check || !trace.linearly_independent;

    std::optional<MarkovKernel> q;
    std::optional<SupportCheck> q_check;
    if (run_all) {
        q = q_star(inst, opts.limits, &trace.q_vertices);
        q_check = check_support_condition(*q, g, tol);
        trace.q_star_max_product = q_check->max_product;
        trace.via_q_star = from_support(q_check->status);
    }

    std::optional<MarkovKernel> p;
    std::optional<SupportCheck> p_check;
    if (run_all && opts.cross_check) {
        try {
            p = p_star(inst, opts.limits, &trace.kg_vertices);
            p_check = check_support_condition(*p, g, tol);
            trace.p_star_max_product = p_check->max_product;
            trace.via_p_star = from_support(p_check->status);
        } catch (const CapExceeded& e) {
            trace.note = std::string("p_star cross-check skipped: ") + e.what();
        }
    }

    if (trace.pairwise_independent && run_all) {
        bool all_trivial = true;
        for (std::size_t l = 0; l < inst.marginals.size(); ++l) {
            if (!check_cone(build_cone_system(inst, l), tol, opts.limits).trivial) all_trivial = false;
        }
        trace.via_cones = all_trivial ? Decision::Minimal : Decision::NotMinimal;
    }

    if (trace.linearly_independent) {
        verdict.method = Method::Independent;
        verdict.decision = Decision::Minimal;
        verdict.maximal = !trace.has_zero_effect;
    } else if (trace.pairwise_independent) {
        verdict.method = Method::Cones;
        verdict.decision = *trace.via_cones;
    } else {
        verdict.method = Method::QStar;
        verdict.decision = *trace.via_q_star;
    }

    std::vector<std::optional<Decision>> routes{verdict.decision, trace.via_q_star, trace.via_p_star, trace.via_cones};
    bool boundary = false;
    for (const auto& r : routes) boundary = boundary || (r && *r == Decision::Boundary);
    if (boundary) {
        verdict.decision = Decision::Boundary;
        verdict.maximal = false;
        return verdict;
    }
    for (const auto& r : routes) {
        if (r && *r != verdict.decision) {
            throw ConsistencyError(std::string("minimality routes disagree: ") + to_string(verdict.method) +
                                   " says " + to_string(verdict.decision));
        }
    }

    if (verdict.decision == Decision::NotMinimal) {
        const bool use_q = q.has_value();
        const MarkovKernel& k = use_q ? *q : *p;
        const SupportCheck& sc = use_q ? *q_check : *p_check;
        Certificate cert{k, sc.triple, build_KG_system(inst).max_violation(kernel_to_point(k))};
        if (cert.kg_residual > tol.norm) throw NumericalError("certificate kernel is not in K_G");
        if (kernel_preserves_equivalence(k, g, tol)) {
            throw ConsistencyError("certificate kernel preserves post-processing equivalence");
        }
        if (opts.verify_certificate) {
            Observable lower = post_process(k, g);
            if (is_postprocessing_of(g, lower, tol).holds || !is_postprocessing_of(lower, g, tol).holds) {
                throw ConsistencyError("certificate does not give a strictly lower joint observable");
            }
        }
        verdict.certificate = std::move(cert);
    }
    return verdict;
}

DescendResult descend_to_minimal(const JointInstance& inst, std::size_t cap, const MinimalityOptions& opts) {
    JointInstance cur = inst;
    DescendResult result{cur.joint, {}, DescendStatus::NotConverged, 0};
    for (;;) {
        MinimalityVerdict v = is_minimal(cur, opts);
        const Decision d = v.decision;
        result.history.push_back(std::move(v));
        result.joint = cur.joint;
        if (d == Decision::Minimal) {
            result.status = DescendStatus::Converged;
            return result;
        }
        if (d == Decision::Boundary) {
            result.status = DescendStatus::Boundary;
            return result;
        }
        if (result.steps >= cap) return result;
        MarkovKernel p = p_star(cur, opts.limits);
        Observable next = post_process(p, cur.joint);
        JointInstance next_inst = make_joint_instance(cur.marginals, next, cur.tol);
        if (!is_postprocessing_of(next_inst.joint, cur.joint, cur.tol).holds) {
            throw NumericalError("descend_to_minimal: iterate is not below its predecessor");
        }
        cur = std::move(next_inst);
        ++result.steps;
    }
}

}  // namespace minjoint
