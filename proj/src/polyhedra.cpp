#include "minjoint/polyhedra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace minjoint {

namespace {

double binomial(std::size_t m, std::size_t k) {
    if (k > m) return 0;
    double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * double(m - k + i) / double(i);
    return r;
}

// Advances `idx` (strictly increasing, values < m) to the next k-subset in
// lexicographic order; false after the last one.
bool next_combination(std::vector<std::size_t>& idx, std::size_t m) {
    const std::size_t k = idx.size();
    for (std::size_t i = k; i-- > 0;) {
        if (idx[i] < m - k + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Inequalities B z >= beta with unit-norm rows; zero rows dropped after
// checking they hold, duplicate rows merged.
struct NormalizedRows {
    Eigen::MatrixXd b;
    Eigen::VectorXd beta;
    bool infeasible = false;
};

NormalizedRows normalize_rows(const std::vector<Constraint>& rows, Eigen::Index k, const Tolerance& tol) {
    std::vector<Eigen::VectorXd> as;
    std::vector<double> alphas;
    NormalizedRows out;
    for (const auto& c : rows) {
        double s = c.a.norm();
        if (s <= tol.rank) {
            if (c.alpha > tol.norm) out.infeasible = true;
            continue;
        }
        Eigen::VectorXd a = c.a / s;
        double alpha = c.alpha / s;
        bool dup = false;
        for (std::size_t i = 0; i < as.size() && !dup; ++i) {
            dup = (as[i] - a).cwiseAbs().maxCoeff() <= 1e-12 && std::abs(alphas[i] - alpha) <= 1e-12;
        }
        if (!dup) {
            as.push_back(std::move(a));
            alphas.push_back(alpha);
        }
    }
    out.b.resize(Eigen::Index(as.size()), k);
    out.beta.resize(Eigen::Index(as.size()));
    for (std::size_t i = 0; i < as.size(); ++i) {
        out.b.row(Eigen::Index(i)) = as[i].transpose();
        out.beta[Eigen::Index(i)] = alphas[i];
    }
    return out;
}

Eigen::Index numerical_rank(const Eigen::VectorXd& singular_values, double rel_tol) {
    if (singular_values.size() == 0 || singular_values[0] == 0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        if (singular_values[i] > rel_tol * singular_values[0]) ++r;
    }
    return r;
}

void check_caps(Eigen::Index dim, std::size_t rows, std::size_t subset_size, const EnumerationLimits& limits,
                const char* what) {
    if (dim > limits.max_dim) {
        throw CapExceeded(std::string(what) + ": reduced dimension " + std::to_string(dim) + " exceeds cap " +
                          std::to_string(limits.max_dim));
    }
    if (rows > limits.max_inequalities) {
        throw CapExceeded(std::string(what) + ": " + std::to_string(rows) + " inequalities exceed cap " +
                          std::to_string(limits.max_inequalities));
    }
    if (binomial(rows, subset_size) > limits.max_subsets) {
        throw CapExceeded(std::string(what) + ": subset budget exceeded");
    }
}

bool recession_cone_nontrivial(const NormalizedRows& rows, Eigen::Index k, const Tolerance& tol) {
    for (Eigen::Index i = 0; i < k; ++i) {
        for (double s : {1.0, -1.0}) {
            LinearSystem cone(k);
            for (Eigen::Index r = 0; r < rows.b.rows(); ++r) cone.add_inequality(rows.b.row(r).transpose(), 0.0);
            Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
            e[i] = s;
            cone.add_inequality(e, 1.0);
            if (lp_feasible(cone, tol).feasible) return true;
        }
    }
    return false;
}

}  // namespace

void LinearSystem::add_equality(Eigen::VectorXd a, double alpha) {
    if (a.size() != n_) throw std::invalid_argument("equality row has wrong dimension");
    eq_.push_back({std::move(a), alpha});
}

void LinearSystem::add_inequality(Eigen::VectorXd a, double alpha) {
    if (a.size() != n_) throw std::invalid_argument("inequality row has wrong dimension");
    ineq_.push_back({std::move(a), alpha});
}

bool LinearSystem::is_homogeneous() const {
    auto zero = [](const Constraint& c) { return c.alpha == 0.0; };
    return std::all_of(eq_.begin(), eq_.end(), zero) && std::all_of(ineq_.begin(), ineq_.end(), zero);
}

double LinearSystem::max_violation(const Eigen::VectorXd& x) const {
    double v = 0;
    for (const auto& c : eq_) v = std::max(v, std::abs(c.a.dot(x) - c.alpha));
    for (const auto& c : ineq_) v = std::max(v, c.alpha - c.a.dot(x));
    return v;
}

AffineReduction affine_reduce(const LinearSystem& sys, const Tolerance& tol) {
    const Eigen::Index n = sys.n();
    AffineReduction out;
    const auto& eqs = sys.equalities();
    if (eqs.empty()) {
        out.offset = Eigen::VectorXd::Zero(n);
        out.basis = Eigen::MatrixXd::Identity(n, n);
    } else {
        Eigen::MatrixXd a(Eigen::Index(eqs.size()), n);
        Eigen::VectorXd b(Eigen::Index(eqs.size()));
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            a.row(Eigen::Index(i)) = eqs[i].a.transpose();
            b[Eigen::Index(i)] = eqs[i].alpha;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        const Eigen::Index r = numerical_rank(s, tol.rank);
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < r; ++i) {
            x0 += (svd.matrixU().col(i).dot(b) / s[i]) * svd.matrixV().col(i);
        }
        double scale = std::max(1.0, a.rowwise().norm().maxCoeff());
        if ((a * x0 - b).cwiseAbs().maxCoeff() > tol.norm * scale) {
            out.empty = true;
            out.reduced = LinearSystem(0);
            out.offset = x0;
            out.basis = Eigen::MatrixXd::Zero(n, 0);
            return out;
        }
        out.offset = x0;
        out.basis = svd.matrixV().rightCols(n - r);
    }
    const Eigen::Index k = out.basis.cols();
    out.reduced = LinearSystem(k);
    for (const auto& c : sys.inequalities()) {
        out.reduced.add_inequality(out.basis.transpose() * c.a, c.alpha - c.a.dot(out.offset));
    }
    return out;
}

VertexSet enumerate_vertices(const LinearSystem& sys, const Tolerance& tol, const EnumerationLimits& limits) {
    VertexSet result;
    result.dedup_tolerance = limits.dedup;
    AffineReduction red = affine_reduce(sys, tol);
    if (red.empty) return result;
    const Eigen::Index k = red.reduced_dim();
    result.reduced_dim = k;

    NormalizedRows rows = normalize_rows(red.reduced.inequalities(), k, tol);
    if (rows.infeasible) return result;
    if (k == 0) {
        if (sys.max_violation(red.offset) <= tol.norm) result.vertices.push_back(red.offset);
        return result;
    }
    const auto m = std::size_t(rows.b.rows());
    if (m < std::size_t(k)) {
        // Fewer than k facets cannot bound a k-dimensional polyhedron.
        if (lp_feasible(red.reduced, tol).feasible) throw NumericalError("enumerate_vertices: system is unbounded");
        return result;
    }
    check_caps(k, m, std::size_t(k), limits, "enumerate_vertices");
    if (limits.check_bounded && recession_cone_nontrivial(rows, k, tol)) {
        if (lp_feasible(red.reduced, tol).feasible) throw NumericalError("enumerate_vertices: system is unbounded");
        return result;
    }

    std::vector<std::size_t> idx(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Eigen::MatrixXd sub(k, k);
    Eigen::VectorXd rhs(k);
    do {
        ++result.subsets_examined;
        for (Eigen::Index i = 0; i < k; ++i) {
            sub.row(i) = rows.b.row(Eigen::Index(idx[std::size_t(i)]));
            rhs[i] = rows.beta[Eigen::Index(idx[std::size_t(i)])];
        }
        // Cheap LU candidate first; the singular-value rank test only runs
        // on subsets whose candidate is feasible.
        Eigen::VectorXd z = sub.partialPivLu().solve(rhs);
        if (!z.allFinite()) continue;
        if ((sub * z - rhs).cwiseAbs().maxCoeff() > tol.norm) continue;
        if ((rows.b * z - rows.beta).minCoeff() < -tol.norm) continue;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
        if (numerical_rank(svd.singularValues(), tol.rank) < k) continue;
        Eigen::VectorXd x = red.embed(z);
        if (sys.max_violation(x) > tol.norm) continue;
        bool seen = false;
        for (const auto& v : result.vertices) {
            if ((v - x).norm() <= limits.dedup) {
                seen = true;
                break;
            }
        }
        if (!seen) result.vertices.push_back(std::move(x));
    } while (next_combination(idx, m));
    return result;
}

RaySet enumerate_rays(const LinearSystem& sys, const Tolerance& tol, const EnumerationLimits& limits) {
    if (!sys.is_homogeneous()) throw std::invalid_argument("enumerate_rays: system is not homogeneous");
    RaySet result;
    AffineReduction red = affine_reduce(sys, tol);
    const Eigen::Index k = red.reduced_dim();
    result.reduced_dim = k;
    if (k == 0) return result;

    NormalizedRows rows = normalize_rows(red.reduced.inequalities(), k, tol);
    // Lineality space: null space of the inequality rows inside the subspace.
    Eigen::MatrixXd pointed_basis;  // k x r, orthonormal complement of lineality
    if (rows.b.rows() == 0) {
        for (Eigen::Index i = 0; i < k; ++i) result.lineality.push_back(red.basis.col(i));
        return result;
    }
    {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows.b, Eigen::ComputeFullV);
        const Eigen::Index r = numerical_rank(svd.singularValues(), tol.rank);
        for (Eigen::Index i = r; i < k; ++i) result.lineality.push_back(red.basis * svd.matrixV().col(i));
        pointed_basis = svd.matrixV().leftCols(r);
    }
    const Eigen::Index r = pointed_basis.cols();
    if (r == 0) return result;

    Eigen::MatrixXd bp = rows.b * pointed_basis;
    for (Eigen::Index i = 0; i < bp.rows(); ++i) {
        double s = bp.row(i).norm();
        if (s > tol.rank) bp.row(i) /= s;
    }
    const auto m = std::size_t(bp.rows());
    auto add_ray = [&](const Eigen::VectorXd& d) {
        Eigen::VectorXd x = red.basis * (pointed_basis * d);
        x.normalize();
        for (const auto& v : result.rays) {
            if ((v - x).norm() <= limits.dedup) return;
        }
        result.rays.push_back(std::move(x));
    };
    auto in_cone = [&](const Eigen::VectorXd& d) { return (bp * d).minCoeff() >= -tol.norm; };

    if (r == 1) {
        Eigen::VectorXd d = Eigen::VectorXd::Ones(1);
        if (in_cone(d)) add_ray(d);
        if (in_cone(-d)) add_ray(-d);
        return result;
    }
    check_caps(r, m, std::size_t(r - 1), limits, "enumerate_rays");
    if (m < std::size_t(r - 1)) return result;
    std::vector<std::size_t> idx(static_cast<std::size_t>(r - 1));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Eigen::MatrixXd sub(r - 1, r);
    do {
        for (Eigen::Index i = 0; i < r - 1; ++i) sub.row(i) = bp.row(Eigen::Index(idx[std::size_t(i)]));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
        if (numerical_rank(svd.singularValues(), tol.rank) < r - 1) continue;
        Eigen::VectorXd d = svd.matrixV().col(r - 1);
        if (in_cone(d)) {
            add_ray(d);
        } else if (in_cone(-d)) {
            add_ray(-d);
        }
    } while (next_combination(idx, m));
    return result;
}

ConeCheck check_cone(const LinearSystem& sys, const Tolerance& tol, const EnumerationLimits& limits) {
    ConeCheck check;
    check.rays = enumerate_rays(sys, tol, limits);
    check.trivial_by_rays = check.rays.rays.empty() && check.rays.lineality.empty();

    std::optional<Eigen::VectorXd> lp_witness;
    for (Eigen::Index i = 0; i < sys.n() && !lp_witness; ++i) {
        for (double s : {1.0, -1.0}) {
            LinearSystem probe = sys;
            Eigen::VectorXd e = Eigen::VectorXd::Zero(sys.n());
            e[i] = s;
            probe.add_inequality(e, 1.0);
            LpResult lp = lp_feasible(probe, tol);
            if (lp.feasible) {
                lp_witness = lp.point;
                break;
            }
        }
    }
    check.trivial_by_lp = !lp_witness.has_value();
    if (check.trivial_by_rays != check.trivial_by_lp) {
        throw ConsistencyError("cone triviality: ray enumeration and LP cross-check disagree");
    }
    check.trivial = check.trivial_by_rays;
    if (!check.trivial) {
        if (!check.rays.lineality.empty()) {
            check.witness = check.rays.lineality.front();
        } else if (!check.rays.rays.empty()) {
            check.witness = check.rays.rays.front();
        } else {
            check.witness = lp_witness;
        }
    }
    return check;
}

bool cone_is_trivial(const LinearSystem& sys, const Tolerance& tol, const EnumerationLimits& limits) {
    return check_cone(sys, tol, limits).trivial;
}

bool is_extreme_point(const LinearSystem& sys, const Eigen::VectorXd& x, const Tolerance& tol) {
    const Eigen::Index n = sys.n();
    if (n == 0) return true;
    std::vector<Eigen::VectorXd> active;
    for (const auto& c : sys.equalities()) {
        if (c.a.norm() > 0) active.push_back(c.a.normalized());
    }
    for (const auto& c : sys.inequalities()) {
        double s = c.a.norm();
        if (s > 0 && std::abs(c.a.dot(x) - c.alpha) <= 1e-7 * std::max(1.0, s)) active.push_back(c.a / s);
    }
    if (active.size() < std::size_t(n)) return false;
    Eigen::MatrixXd m(Eigen::Index(active.size()), n);
    for (std::size_t i = 0; i < active.size(); ++i) m.row(Eigen::Index(i)) = active[i].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return numerical_rank(svd.singularValues(), tol.rank) == n;
}

}  // namespace minjoint
