#include <gtest/gtest.h>

#include <random>

#include "minjoint/minimality.hpp"
#include "minjoint/qubit.hpp"
#include "test_support.hpp"

using namespace minjoint;
using qubit::BlochObservable;
using qubit::JointParams;
using qubit::Vec3;

namespace {

JointInstance qubit_instance(const BlochObservable& a, const BlochObservable& b, const JointParams& jp) {
    return make_joint_instance({qubit::bloch_to_observable(a), qubit::bloch_to_observable(b)},
                               qubit::joint_from_params(a, b, jp));
}

const BlochObservable kA{1, Vec3(0.3, 0, 0)};
const BlochObservable kB{1, Vec3(0, 0.3, 0)};

JointInstance f1_min() { return qubit_instance(kA, kB, {0.5, Vec3(0.15, 0.15, 0)}); }
JointInstance f1_nonmin() { return qubit_instance(kA, kB, {0.5, Vec3(0.15, -0.03, 0)}); }
JointInstance f1_indep() { return qubit_instance(kA, kB, {0.5, Vec3(0.1, 0.1, 0.1)}); }

JointInstance example_trivial() {
    const Operator i2 = identity2();
    const Operator t = 0.5 * (i2 + 0.5 * pauli(3));
    Observable g(OutcomeSet::product({{"1", "2"}, {"1", "2"}}), {t / 2, (i2 - t) / 2, (i2 - t) / 2, t / 2});
    Observable half = Observable::trivial(2, 2).relabeled(OutcomeSet({"1", "2"}));
    return make_joint_instance({half, half}, g);
}

bool all_multiples_of_identity(const Observable& g) {
    for (const auto& e : g.effects()) {
        Operator r = e - (e.trace() / double(e.rows())) * Operator::Identity(e.rows(), e.cols());
        if (r.norm() > 1e-9) return false;
    }
    return true;
}

void expect_sound_certificate(const JointInstance& inst, const MinimalityVerdict& v) {
    ASSERT_EQ(v.decision, Decision::NotMinimal);
    ASSERT_TRUE(v.certificate);
    const MarkovKernel& k = v.certificate->kernel;
    EXPECT_LE(build_KG_system(inst).max_violation(kernel_to_point(k)), 1e-9);
    EXPECT_LE(v.certificate->kg_residual, 1e-9);
    EXPECT_FALSE(kernel_preserves_equivalence(k, inst.joint));
    Observable lower = post_process(k, inst.joint);
    EXPECT_TRUE(is_joint_observable(lower, inst.marginals));
    EXPECT_TRUE(is_postprocessing_of(lower, inst.joint).holds);
    EXPECT_FALSE(is_postprocessing_of(inst.joint, lower).holds);
    ASSERT_TRUE(v.certificate->triple);
    const auto& t = *v.certificate->triple;
    EXPECT_GT(k(t.out, t.in1) * k(t.out, t.in2), 1e-6);
    EXPECT_TRUE(pair_linearly_independent(inst.joint[t.in1], inst.joint[t.in2]));
}

}  // namespace

TEST(JointInstance, Validation) {
    JointInstance inst = f1_min();
    EXPECT_EQ(inst.product_set().labels(), (std::vector<std::string>{"+,+", "+,-", "-,+", "-,-"}));
    Observable g = inst.joint;
    EXPECT_THROW(make_joint_instance({inst.marginals[0]}, g), std::invalid_argument);
    Observable sharp(OutcomeSet({"+", "-"}), {0.5 * (identity2() + pauli(3)), 0.5 * (identity2() - pauli(3))});
    EXPECT_THROW(make_joint_instance({inst.marginals[0], sharp}, g), std::invalid_argument);
}

TEST(KSystem, SameObservableHasOnlyIdentity) {
    Observable a = qubit::bloch_to_observable(kA);
    VertexSet vs = enumerate_vertices(build_K_system(a, a));
    ASSERT_EQ(vs.vertices.size(), 1u);
    EXPECT_LT((vs.vertices[0] - kernel_to_point(MarkovKernel::identity(a.outcomes()))).norm(), 1e-9);
}

TEST(KSystem, TrivialTargetAdmitsConstant) {
    Observable a = Observable::trivial(2, 2);
    Observable b = qubit::bloch_to_observable(kB).relabeled(OutcomeSet::numbered(2));
    LinearSystem k = build_K_system(a, b);
    EXPECT_LE(k.max_violation(kernel_to_point(MarkovKernel::constant(a.outcomes(), b.outcomes()))), 1e-12);
    EXPECT_THROW(build_K_system(a, Observable::trivial(3, 2)), std::invalid_argument);
}

TEST(KSystem, CoordinateProjectionIntoJoint) {
    JointInstance inst = f1_min();
    LinearSystem k = build_K_system(inst.marginals[0], inst.joint);
    auto proj = MarkovKernel::deterministic(inst.marginals[0].outcomes(), inst.product_set(), {0, 0, 1, 1});
    EXPECT_LE(k.max_violation(kernel_to_point(proj)), 1e-12);
    EXPECT_TRUE(lp_feasible(k).feasible);
}

TEST(KGSystem, IdentityAndConstant) {
    for (const JointInstance& inst : {f1_min(), f1_nonmin(), example_trivial()}) {
        LinearSystem kg = build_KG_system(inst);
        EXPECT_LE(kg.max_violation(kernel_to_point(MarkovKernel::identity(inst.product_set()))), 1e-12);
    }
    JointInstance triv = example_trivial();
    auto c = MarkovKernel::constant(triv.product_set(), triv.product_set());
    EXPECT_LE(build_KG_system(triv).max_violation(kernel_to_point(c)), 1e-12);
}

TEST(KGSystem, ExampleTrivialVerticesAreJointPreserving) {
    JointInstance inst = example_trivial();
    LinearSystem kg = build_KG_system(inst);
    VertexSet vs = enumerate_vertices(kg);
    ASSERT_FALSE(vs.vertices.empty());
    Eigen::VectorXd center = Eigen::VectorXd::Zero(vs.vertices[0].size());
    for (const auto& v : vs.vertices) {
        MarkovKernel p = kernel_from_point(v, inst.product_set(), inst.product_set());
        EXPECT_TRUE(is_joint_observable(post_process(p, inst.joint), inst.marginals));
        EXPECT_TRUE(is_extreme_point(kg, v));
        center += v;
    }
    center /= double(vs.vertices.size());
    EXPECT_LE(kg.max_violation(center), 1e-9);
    // Random convex combinations of vertices stay inside K_G.
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd w(Eigen::Index(vs.vertices.size()));
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = minjoint::testing::uniform(rng);
        w /= w.sum();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(center.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) x += w[i] * vs.vertices[std::size_t(i)];
        EXPECT_LE(kg.max_violation(x), 1e-9);
    }
}

TEST(PStar, SingletonPolytopeGivesIdentity) {
    JointInstance inst = f1_min();
    std::size_t count = 0;
    MarkovKernel p = p_star(inst, {}, &count);
    EXPECT_EQ(count, 1u);
    EXPECT_LT((p.entries() - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-9);
    EXPECT_EQ(check_support_condition(p, inst.joint).status, SupportStatus::Holds);
}

TEST(PStar, ExampleTrivialHasSupportCollision) {
    JointInstance inst = example_trivial();
    MarkovKernel p = p_star(inst);
    EXPECT_LE(build_KG_system(inst).max_violation(kernel_to_point(p)), 1e-9);
    SupportCheck sc = check_support_condition(p, inst.joint);
    EXPECT_EQ(sc.status, SupportStatus::Violated);
    ASSERT_TRUE(sc.triple);
    EXPECT_TRUE(pair_linearly_independent(inst.joint[sc.triple->in1], inst.joint[sc.triple->in2]));
}

TEST(QStar, SingleMarginalEqualsQBar) {
    Observable a = qubit::bloch_to_observable(kA);
    JointInstance inst = make_joint_instance({a}, a);
    MarkovKernel q1 = q_bar(inst, 0);
    MarkovKernel qs = q_star(inst);
    EXPECT_LT((q1.entries() - qs.entries()).norm(), 1e-12);
    EXPECT_LT((qs.entries() - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-9);
}

TEST(QStar, TrivialMarginalIsRowOfOnes) {
    Observable one(OutcomeSet({"*"}), {identity2()});
    Observable a = qubit::bloch_to_observable(kA);
    Observable g = a.relabeled(OutcomeSet::product({{"*"}, {"+", "-"}}));
    JointInstance inst = make_joint_instance({one, a}, g);
    MarkovKernel q0 = q_bar(inst, 0);
    EXPECT_LT((q0.entries() - Eigen::MatrixXd::Ones(1, 2)).norm(), 1e-12);
    EXPECT_LT((q_star(inst).entries() - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-9);
}

TEST(QStar, IndependentJointGivesIdentity) {
    JointInstance inst = f1_indep();
    EXPECT_LT((q_star(inst).entries() - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-9);
}

TEST(QStar, NonMinimalFixtureCollides) {
    JointInstance inst = f1_nonmin();
    MarkovKernel q = q_star(inst);
    EXPECT_LE(build_KG_system(inst).max_violation(kernel_to_point(q)), 1e-9);
    EXPECT_EQ(check_support_condition(q, inst.joint).status, SupportStatus::Violated);
}

TEST(QBar, Dep1MidpointFamily) {
    // g = (gamma/alpha) a: K(B, G) is a segment and q_bar sits at its middle.
    JointInstance inst = qubit_instance(kA, kB, {0.5, Vec3(0.15, 0, 0)});
    std::size_t count = 0;
    MarkovKernel q2 = q_bar(inst, 1, {}, &count);
    EXPECT_EQ(count, 2u);
    VertexSet vs = enumerate_vertices(build_K_system(inst.marginals[1], inst.joint));
    ASSERT_EQ(vs.vertices.size(), 2u);
    EXPECT_LT((kernel_to_point(q2) - 0.5 * (vs.vertices[0] + vs.vertices[1])).norm(), 1e-12);
    EXPECT_LE(build_K_system(inst.marginals[1], inst.joint).max_violation(kernel_to_point(q2)), 1e-9);
}

TEST(Support, IdentityAndConstant) {
    JointInstance inst = f1_min();
    EXPECT_EQ(check_support_condition(MarkovKernel::identity(inst.product_set()), inst.joint).status,
              SupportStatus::Holds);
    SupportCheck c =
        check_support_condition(MarkovKernel::constant(inst.product_set(), inst.product_set()), inst.joint);
    EXPECT_EQ(c.status, SupportStatus::Violated);
    ASSERT_TRUE(c.triple);
    EXPECT_NEAR(c.max_product, 1.0 / 16, 1e-15);
}

TEST(Support, BoundaryBand) {
    JointInstance inst = f1_min();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
    const double eps = 5e-7;  // product with m(0,0) = 1 lies between delta and 10 delta
    m(0, 1) = eps;
    m(1, 1) = 1 - eps;
    m(0, 0) = 1;
    MarkovKernel k(inst.product_set(), inst.product_set(), m);
    SupportCheck c = check_support_condition(k, inst.joint);
    EXPECT_EQ(c.status, SupportStatus::Boundary);
}

TEST(Cones, MinimalFixtureTrivial) {
    JointInstance inst = f1_min();
    for (std::size_t l = 0; l < 2; ++l) {
        ConeCheck c = check_cone(build_cone_system(inst, l));
        EXPECT_TRUE(c.trivial);
        EXPECT_TRUE(c.rays.rays.empty());
    }
}

TEST(Cones, NonMinimalGeneratorGivesMarginalKernel) {
    JointInstance inst = f1_nonmin();
    bool found = false;
    for (std::size_t l = 0; l < 2; ++l) {
        ConeCheck c = check_cone(build_cone_system(inst, l));
        if (c.trivial) continue;
        found = true;
        ASSERT_TRUE(c.witness);
        Eigen::VectorXd u = *c.witness;
        u /= 2 * u.cwiseAbs().maxCoeff();
        const std::size_t n = inst.product_set().size();
        std::vector<std::size_t> proj(n);
        for (std::size_t x = 0; x < n; ++x) proj[x] = inst.product_set().coordinate(x, l);
        auto d = MarkovKernel::deterministic(inst.marginals[l].outcomes(), inst.product_set(), proj);
        Eigen::VectorXd r = kernel_to_point(d) + u;
        EXPECT_LE(build_K_system(inst.marginals[l], inst.joint).max_violation(r), 1e-9);
        EXPECT_GT(u.norm(), 0.1);
    }
    EXPECT_TRUE(found);
}

TEST(Cones, Dep3BiasedNontrivial) {
    // alpha = beta = 0.8 and g = gamma (a + b) / (alpha + beta - 2).
    BlochObservable a{0.8, Vec3(0.2, 0, 0)}, b{0.8, Vec3(0, 0.2, 0)};
    JointParams jp{0.2, -0.5 * (a.a + b.a)};
    JointInstance inst = qubit_instance(a, b, jp);
    bool nontrivial = false;
    for (std::size_t l = 0; l < 2; ++l) nontrivial = nontrivial || !cone_is_trivial(build_cone_system(inst, l));
    EXPECT_TRUE(nontrivial);
    MinimalityVerdict v = is_minimal(inst);
    EXPECT_EQ(v.decision, Decision::NotMinimal);
    EXPECT_EQ(v.method, Method::QStar);
    expect_sound_certificate(inst, v);
}

TEST(IsMinimal, IndependentFixture) {
    JointInstance inst = f1_indep();
    MinimalityVerdict v = is_minimal(inst);
    EXPECT_EQ(v.decision, Decision::Minimal);
    EXPECT_EQ(v.method, Method::Independent);
    EXPECT_TRUE(v.maximal);
    EXPECT_FALSE(v.certificate);
}

TEST(IsMinimal, MinimalFixtureViaCones) {
    MinimalityVerdict v = is_minimal(f1_min());
    EXPECT_EQ(v.decision, Decision::Minimal);
    EXPECT_EQ(v.method, Method::Cones);
    EXPECT_FALSE(v.maximal);
    EXPECT_EQ(v.trace.via_q_star, Decision::Minimal);
    EXPECT_EQ(v.trace.via_p_star, Decision::Minimal);
}

TEST(IsMinimal, NonMinimalFixture) {
    JointInstance inst = f1_nonmin();
    MinimalityVerdict v = is_minimal(inst);
    EXPECT_EQ(v.decision, Decision::NotMinimal);
    EXPECT_EQ(v.method, Method::Cones);
    expect_sound_certificate(inst, v);
}

TEST(IsMinimal, ExampleTrivial) {
    JointInstance inst = example_trivial();
    MinimalityVerdict v = is_minimal(inst);
    EXPECT_EQ(v.decision, Decision::NotMinimal);
    EXPECT_EQ(v.method, Method::QStar);
    expect_sound_certificate(inst, v);
    // For trivial marginals q* is the constant kernel and q* * G is trivial.
    const auto& k = v.certificate->kernel.entries();
    EXPECT_LT((k.array() - 0.25).abs().maxCoeff(), 1e-9);
    EXPECT_TRUE(all_multiples_of_identity(post_process(v.certificate->kernel, inst.joint)));
}

TEST(IsMinimal, ZeroEffectQubitJointIsRigid) {
    // G(+,-) = 0: g = a and gamma = alpha.
    BlochObservable a{0.6, Vec3(0.2, 0, 0)}, b{1.2, Vec3(0.2, 0.3, 0)};
    JointInstance inst = qubit_instance(a, b, {0.6, a.a});
    EXPECT_TRUE(is_zero_effect(inst.joint[1]));
    VertexSet vs = enumerate_vertices(build_KG_system(inst));
    ASSERT_FALSE(vs.vertices.empty());
    for (const auto& v : vs.vertices) {
        EXPECT_TRUE(kernel_preserves_equivalence(kernel_from_point(v, inst.product_set(), inst.product_set()),
                                                 inst.joint));
    }
    MinimalityVerdict v = is_minimal(inst);
    EXPECT_EQ(v.decision, Decision::Minimal);
    EXPECT_EQ(v.method, Method::Independent);
    EXPECT_FALSE(v.maximal);
    EXPECT_TRUE(v.trace.has_zero_effect);
}

TEST(IsMinimal, RandomIndependentJointsAreMinimal) {
    std::mt19937_64 rng(77);
    const OutcomeSet prod = OutcomeSet::product({{"0", "1"}, {"0", "1"}});
    for (int t = 0; t < 25; ++t) {
        Observable g = minjoint::testing::random_observable(rng, 2 + t % 2, 4).relabeled(prod);
        JointInstance inst = make_joint_instance({marginal(g, 0), marginal(g, 1)}, g);
        MinimalityVerdict v = is_minimal(inst);
        EXPECT_EQ(v.decision, Decision::Minimal);
        EXPECT_EQ(v.method, Method::Independent);
        EXPECT_TRUE(v.maximal);
    }
}

TEST(IsMinimal, ThreeMarginals) {
    // Joint of three trivial marginals built from a common two-outcome
    // observable through identical kernels; it collapses onto a trivial joint.
    const Operator i2 = identity2();
    Observable c(OutcomeSet({"0", "1"}), {0.5 * (i2 + 0.4 * pauli(1)), 0.5 * (i2 - 0.4 * pauli(1))});
    Eigen::MatrixXd m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    MarkovKernel p(OutcomeSet({"0", "1"}), c.outcomes(), m);
    Observable g = joint_from_common(c, {p, p, p});
    Observable half = Observable::trivial(2, 2).relabeled(OutcomeSet({"0", "1"}));
    JointInstance inst = make_joint_instance({half, half, half}, g);
    MinimalityVerdict v = is_minimal(inst);
    EXPECT_EQ(v.decision, Decision::Minimal);
}

TEST(Descend, MinimalInputUnchanged) {
    JointInstance inst = f1_min();
    DescendResult r = descend_to_minimal(inst);
    EXPECT_EQ(r.status, DescendStatus::Converged);
    EXPECT_EQ(r.steps, 0u);
    EXPECT_EQ(r.history.size(), 1u);
    EXPECT_EQ(max_effect_distance(r.joint, inst.joint), 0.0);
}

TEST(Descend, ExampleTrivialCollapses) {
    JointInstance inst = example_trivial();
    DescendResult r = descend_to_minimal(inst);
    EXPECT_EQ(r.status, DescendStatus::Converged);
    EXPECT_LE(r.steps, 2u);
    for (const auto& e : r.joint.effects()) EXPECT_LT((e - 0.25 * identity2()).norm(), 1e-9);
    EXPECT_TRUE(is_postprocessing_of(r.joint, inst.joint).holds);
}

TEST(Descend, NonMinimalFixtureReachesClosedFormMinimum) {
    JointInstance inst = f1_nonmin();
    DescendResult r = descend_to_minimal(inst);
    ASSERT_EQ(r.status, DescendStatus::Converged);
    EXPECT_GE(r.steps, 1u);
    EXPECT_TRUE(is_postprocessing_of(r.joint, inst.joint).holds);
    JointInstance out = make_joint_instance(inst.marginals, r.joint);
    EXPECT_EQ(is_minimal(out).decision, Decision::Minimal);
    JointParams jp = qubit::params_from_joint(r.joint);
    EXPECT_NE(qubit::qubit_is_minimal(kA, kB, jp).decision, Decision::NotMinimal);
}

TEST(Descend, CapReportsNotConverged) {
    DescendResult r = descend_to_minimal(f1_nonmin(), 0);
    EXPECT_EQ(r.status, DescendStatus::NotConverged);
    EXPECT_EQ(r.steps, 0u);
}

TEST(Strings, RoundTrip) {
    for (Decision d : {Decision::Minimal, Decision::NotMinimal, Decision::Boundary}) {
        EXPECT_EQ(decision_from_string(to_string(d)), d);
    }
    for (Method m : {Method::Independent, Method::Cones, Method::PStar, Method::QStar, Method::ZeroElement,
                     Method::DepCondition, Method::Wmin}) {
        EXPECT_EQ(method_from_string(to_string(m)), m);
    }
    EXPECT_THROW(decision_from_string("maybe"), std::invalid_argument);
}
