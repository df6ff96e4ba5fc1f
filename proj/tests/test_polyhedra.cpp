#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "minjoint/polyhedra.hpp"
#include "test_support.hpp"

using namespace minjoint;
using minjoint::testing::uniform;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

bool contains(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& p, double tol = 1e-9) {
    return std::any_of(pts.begin(), pts.end(), [&](const Eigen::VectorXd& q) { return (q - p).norm() <= tol; });
}

LinearSystem unit_square() {
    LinearSystem s(2);
    s.add_inequality(vec({1, 0}), 0);
    s.add_inequality(vec({0, 1}), 0);
    s.add_inequality(vec({-1, 0}), -1);
    s.add_inequality(vec({0, -1}), -1);
    return s;
}

LinearSystem orthant(Eigen::Index n) {
    LinearSystem s(n);
    for (Eigen::Index i = 0; i < n; ++i) s.add_inequality(Eigen::VectorXd::Unit(n, i), 0);
    return s;
}

// Random polytope: a box [-1,1]^n cut by random half-spaces through points
// near the origin, optionally placed inside an affine subspace.
LinearSystem random_bounded(std::mt19937_64& rng, Eigen::Index n, int cuts, int eqs) {
    LinearSystem s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.add_inequality(Eigen::VectorXd::Unit(n, i), -1);
        s.add_inequality(-Eigen::VectorXd::Unit(n, i), -1);
    }
    for (int c = 0; c < cuts; ++c) {
        Eigen::VectorXd a(n);
        for (Eigen::Index i = 0; i < n; ++i) a[i] = 2 * uniform(rng) - 1;
        s.add_inequality(a, -0.5 * uniform(rng));
    }
    for (int e = 0; e < eqs; ++e) {
        Eigen::VectorXd a(n);
        for (Eigen::Index i = 0; i < n; ++i) a[i] = 2 * uniform(rng) - 1;
        s.add_equality(a, 0.1 * (2 * uniform(rng) - 1));
    }
    return s;
}

}  // namespace

TEST(AffineReduce, NoEqualities) {
    AffineReduction r = affine_reduce(unit_square());
    EXPECT_FALSE(r.empty);
    EXPECT_EQ(r.reduced_dim(), 2);
    EXPECT_EQ(r.reduced.inequalities().size(), 4u);
}

TEST(AffineReduce, SimplexEdge) {
    LinearSystem s(2);
    s.add_equality(vec({1, 1}), 1);
    s.add_inequality(vec({1, 0}), 0);
    s.add_inequality(vec({0, 1}), 0);
    AffineReduction r = affine_reduce(s);
    ASSERT_EQ(r.reduced_dim(), 1);
    VertexSet vs = enumerate_vertices(s);
    ASSERT_EQ(vs.vertices.size(), 2u);
    EXPECT_TRUE(contains(vs.vertices, vec({1, 0})));
    EXPECT_TRUE(contains(vs.vertices, vec({0, 1})));
    // Embedding maps reduced solutions into the equality hyperplane.
    for (double z : {-0.3, 0.0, 0.8}) {
        Eigen::VectorXd x = r.embed(Eigen::VectorXd::Constant(1, z));
        EXPECT_NEAR(x.sum(), 1.0, 1e-12);
    }
}

TEST(AffineReduce, UniquePointAndEmpty) {
    LinearSystem s(2);
    s.add_equality(vec({1, 1}), 1);
    s.add_equality(vec({1, -1}), 1);
    AffineReduction r = affine_reduce(s);
    EXPECT_EQ(r.reduced_dim(), 0);
    EXPECT_LT((r.offset - vec({1, 0})).norm(), 1e-12);
    VertexSet vs = enumerate_vertices(s);
    ASSERT_EQ(vs.vertices.size(), 1u);

    s.add_equality(vec({2, 2}), 3);
    EXPECT_TRUE(affine_reduce(s).empty);
    EXPECT_TRUE(enumerate_vertices(s).vertices.empty());
}

TEST(Vertices, UnitSquare) {
    VertexSet vs = enumerate_vertices(unit_square());
    ASSERT_EQ(vs.vertices.size(), 4u);
    for (auto p : {vec({0, 0}), vec({1, 0}), vec({0, 1}), vec({1, 1})}) EXPECT_TRUE(contains(vs.vertices, p));
}

TEST(Vertices, StandardSimplex) {
    LinearSystem s = orthant(3);
    s.add_equality(vec({1, 1, 1}), 1);
    VertexSet vs = enumerate_vertices(s);
    ASSERT_EQ(vs.vertices.size(), 3u);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_TRUE(contains(vs.vertices, Eigen::VectorXd::Unit(3, i)));
}

TEST(Vertices, DegenerateApexDeduplicated) {
    // Square pyramid: the apex lies on four facets.
    LinearSystem s(3);
    s.add_inequality(vec({0, 0, 1}), 0);
    for (double sx : {1.0, -1.0}) {
        s.add_inequality(vec({-sx, 0, -1}), -1);
        s.add_inequality(vec({0, -sx, -1}), -1);
    }
    VertexSet vs = enumerate_vertices(s);
    EXPECT_EQ(vs.vertices.size(), 5u);
    EXPECT_TRUE(contains(vs.vertices, vec({0, 0, 1})));
}

TEST(Vertices, UnboundedRejected) {
    EXPECT_THROW(enumerate_vertices(orthant(2)), NumericalError);
    LinearSystem half(1);
    half.add_inequality(vec({1}), 0);
    EXPECT_THROW(enumerate_vertices(half), NumericalError);
}

TEST(Vertices, InfeasibleIsEmpty) {
    LinearSystem s = unit_square();
    s.add_inequality(vec({1, 1}), 3);
    EXPECT_TRUE(enumerate_vertices(s).vertices.empty());
}

TEST(Vertices, CapsEnforced) {
    EnumerationLimits tight;
    tight.max_dim = 1;
    EXPECT_THROW(enumerate_vertices(unit_square(), {}, tight), CapExceeded);
    EnumerationLimits few;
    few.max_inequalities = 3;
    EXPECT_THROW(enumerate_vertices(unit_square(), {}, few), CapExceeded);
    EnumerationLimits budget;
    budget.max_subsets = 2;
    EXPECT_THROW(enumerate_vertices(unit_square(), {}, budget), CapExceeded);
}

TEST(Vertices, RandomBoundedOracle) {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 60; ++t) {
        const Eigen::Index n = 2 + t % 4;
        LinearSystem s = random_bounded(rng, n, 2 + t % 3, t % 2);
        VertexSet vs = enumerate_vertices(s);
        LpResult lp = lp_feasible(s);
        EXPECT_EQ(lp.feasible, !vs.vertices.empty()) << "trial " << t;
        for (const auto& v : vs.vertices) {
            EXPECT_LE(s.max_violation(v), 1e-9);
            EXPECT_TRUE(is_extreme_point(s, v));
        }
        for (std::size_t i = 0; i < vs.vertices.size(); ++i) {
            for (std::size_t j = i + 1; j < vs.vertices.size(); ++j) {
                EXPECT_GT((vs.vertices[i] - vs.vertices[j]).norm(), vs.dedup_tolerance);
            }
        }
        if (!lp.feasible) continue;
        // The LP point lies in the convex hull of the vertices: solve for
        // nonnegative weights summing to one.
        const Eigen::Index k = Eigen::Index(vs.vertices.size());
        LinearSystem hull(k);
        for (Eigen::Index i = 0; i < k; ++i) hull.add_inequality(Eigen::VectorXd::Unit(k, i), 0);
        hull.add_equality(Eigen::VectorXd::Ones(k), 1);
        for (Eigen::Index c = 0; c < n; ++c) {
            Eigen::VectorXd row(k);
            for (Eigen::Index i = 0; i < k; ++i) row[i] = vs.vertices[std::size_t(i)][c];
            hull.add_equality(row, lp.point[c]);
        }
        EXPECT_TRUE(lp_feasible(hull).feasible) << "trial " << t;
    }
}

TEST(Rays, DiagonalRay) {
    LinearSystem s = orthant(2);
    s.add_equality(vec({1, -1}), 0);
    RaySet rs = enumerate_rays(s);
    ASSERT_EQ(rs.rays.size(), 1u);
    EXPECT_TRUE(rs.lineality.empty());
    EXPECT_LT((rs.rays[0] - vec({1, 1}) / std::sqrt(2.0)).norm(), 1e-12);
}

TEST(Rays, TrivialLine) {
    LinearSystem s(1);
    s.add_inequality(vec({1}), 0);
    s.add_inequality(vec({-1}), 0);
    RaySet rs = enumerate_rays(s);
    EXPECT_TRUE(rs.rays.empty());
    EXPECT_TRUE(rs.lineality.empty());
    EXPECT_TRUE(cone_is_trivial(s));
}

TEST(Rays, Octant) {
    RaySet rs = enumerate_rays(orthant(3));
    ASSERT_EQ(rs.rays.size(), 3u);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_TRUE(contains(rs.rays, Eigen::VectorXd::Unit(3, i)));
}

TEST(Rays, LinealityReported) {
    // {x >= 0} in R^2: the y axis is a lineality direction.
    LinearSystem s(2);
    s.add_inequality(vec({1, 0}), 0);
    ConeCheck c = check_cone(s);
    EXPECT_FALSE(c.trivial);
    ASSERT_EQ(c.rays.lineality.size(), 1u);
    EXPECT_NEAR(std::abs(c.rays.lineality[0][1]), 1.0, 1e-12);
    ASSERT_TRUE(c.witness);
}

TEST(Rays, NonHomogeneousRejected) {
    EXPECT_THROW(enumerate_rays(unit_square()), std::invalid_argument);
}

TEST(Cone, Examples) {
    LinearSystem zero(1);
    zero.add_equality(vec({1}), 0);
    EXPECT_TRUE(cone_is_trivial(zero));
    EXPECT_FALSE(cone_is_trivial(orthant(2)));
}

TEST(Cone, RandomAgreesWithLp) {
    std::mt19937_64 rng(202);
    int trivial = 0;
    for (int t = 0; t < 80; ++t) {
        const Eigen::Index n = 2 + t % 3;
        LinearSystem s(n);
        const int m = int(n) + int(rng() % 4);
        for (int r = 0; r < m; ++r) {
            Eigen::VectorXd a(n);
            for (Eigen::Index i = 0; i < n; ++i) a[i] = 2 * uniform(rng) - 1;
            s.add_inequality(a, 0);
        }
        ConeCheck c;
        ASSERT_NO_THROW(c = check_cone(s)) << "trial " << t;
        EXPECT_EQ(c.trivial_by_rays, c.trivial_by_lp);
        trivial += c.trivial;
        for (const auto& r : c.rays.rays) EXPECT_LE(s.max_violation(r), 1e-9);
    }
    EXPECT_GT(trivial, 0);
    EXPECT_LT(trivial, 80);
}

TEST(Lp, Examples) {
    LinearSystem s(1);
    s.add_inequality(vec({1}), 0);
    s.add_inequality(vec({-1}), -1);
    LpResult r = lp_feasible(s);
    EXPECT_TRUE(r.feasible);
    EXPECT_LE(s.max_violation(r.point), 1e-9);

    LinearSystem bad(1);
    bad.add_inequality(vec({1}), 1);
    bad.add_inequality(vec({-1}), 0);
    EXPECT_FALSE(lp_feasible(bad).feasible);
}

TEST(Lp, FreeVariablesAndEqualities) {
    LinearSystem s(3);
    s.add_equality(vec({1, 1, 1}), -2);
    s.add_equality(vec({1, -1, 0}), 0.5);
    s.add_inequality(vec({0, 0, -1}), 1);  // z <= -1
    LpResult r = lp_feasible(s);
    ASSERT_TRUE(r.feasible);
    EXPECT_LE(s.max_violation(r.point), 1e-9);
    EXPECT_LE(r.point[2], -1 + 1e-9);
}

TEST(Lp, DegenerateSystemsTerminate) {
    // Many redundant constraints through one vertex exercise Bland's rule.
    LinearSystem s(3);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 30; ++i) {
        Eigen::VectorXd a(3);
        for (Eigen::Index k = 0; k < 3; ++k) a[k] = uniform(rng);
        s.add_inequality(a, 0);
    }
    s.add_equality(vec({1, 1, 1}), 0);
    LpResult r;
    ASSERT_NO_THROW(r = lp_feasible(s));
    EXPECT_TRUE(r.feasible);
}

TEST(ExtremePoint, SquareEdgeMidpointIsNot) {
    LinearSystem s = unit_square();
    EXPECT_TRUE(is_extreme_point(s, vec({1, 1})));
    EXPECT_FALSE(is_extreme_point(s, vec({0.5, 0})));
    EXPECT_FALSE(is_extreme_point(s, vec({0.5, 0.5})));
}
