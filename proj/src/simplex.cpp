// Dense phase-one simplex for small feasibility problems.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "minjoint/polyhedra.hpp"

namespace minjoint {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-12;

}  // namespace

LpResult lp_feasible(const LinearSystem& sys, const Tolerance& tol) {
    const Eigen::Index n = sys.n();
    const auto& eqs = sys.equalities();
    const auto& ineqs = sys.inequalities();
    const Eigen::Index me = Eigen::Index(eqs.size());
    const Eigen::Index mi = Eigen::Index(ineqs.size());
    const Eigen::Index m = me + mi;

    LpResult result;
    if (m == 0) {
        result.feasible = true;
        result.point = Eigen::VectorXd::Zero(n);
        return result;
    }

    // Columns: x+ (n), x- (n), surplus (mi), artificial (m), rhs.
    const Eigen::Index art0 = 2 * n + mi;
    const Eigen::Index cols = art0 + m;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols + 1);
    std::vector<Eigen::Index> basis(std::size_t(m), 0);

    auto load_row = [&](Eigen::Index r, const Constraint& c, Eigen::Index surplus) {
        double scale = c.a.size() ? c.a.cwiseAbs().maxCoeff() : 0.0;
        if (scale == 0.0) scale = 1.0;
        double sign = c.alpha < 0 ? -1.0 : 1.0;
        double f = sign / scale;
        t.row(r).segment(0, n) = f * c.a.transpose();
        t.row(r).segment(n, n) = -f * c.a.transpose();
        if (surplus >= 0) t(r, 2 * n + surplus) = -f;
        t(r, art0 + r) = 1.0;
        t(r, cols) = f * c.alpha;
        basis[std::size_t(r)] = art0 + r;
    };
    for (Eigen::Index r = 0; r < me; ++r) load_row(r, eqs[std::size_t(r)], -1);
    for (Eigen::Index r = 0; r < mi; ++r) load_row(me + r, ineqs[std::size_t(r)], r);

    // Objective row holds reduced costs of minimizing the artificial sum.
    for (Eigen::Index j = 0; j <= cols; ++j) {
        if (j >= art0 && j < cols) continue;
        t(m, j) = -t.topRows(m).col(j).sum();
    }

    const int max_iter = int(50 * (m + cols) + 1000);
    int iter = 0;
    for (;; ++iter) {
        if (iter > max_iter) throw NumericalError("lp_feasible: cycling guard exceeded");
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (t(m, j) < -kCostTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < m; ++r) {
            double piv = t(r, enter);
            if (piv <= kPivotTol) continue;
            double ratio = t(r, cols) / piv;
            if (leave < 0 || ratio < best - 1e-15) {
                best = ratio;
                leave = r;
            } else if (ratio <= best + 1e-15 && basis[std::size_t(r)] < basis[std::size_t(leave)]) {
                leave = r;  // Bland tie-break on the basic variable index
            }
        }
        if (leave < 0) {
            // Phase-one objective is bounded below; an unbounded column has
            // a negligible cost that slipped past kCostTol.
            t(m, enter) = 0.0;
            continue;
        }
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index r = 0; r <= m; ++r) {
            if (r == leave) continue;
            double f = t(r, enter);
            if (f != 0.0) t.row(r) -= f * t.row(leave);
        }
        basis[std::size_t(leave)] = enter;
    }

    Eigen::VectorXd z = Eigen::VectorXd::Zero(cols);
    for (Eigen::Index r = 0; r < m; ++r) z[basis[std::size_t(r)]] = std::max(0.0, t(r, cols));
    result.iterations = iter;
    result.phase_one_objective = z.segment(art0, m).sum();
    result.point = z.segment(0, n) - z.segment(n, n);
    result.max_violation = sys.max_violation(result.point);
    result.feasible = result.phase_one_objective <= tol.norm && result.max_violation <= tol.norm;
    return result;
}

}  // namespace minjoint
