#include "minjoint/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace minjoint::qubit {

namespace {

Operator bloch_operator(double scalar, const Vec3& v) {
    Operator op = scalar * identity2();
    for (int k = 0; k < 3; ++k) op += v[k] * pauli(k + 1);
    return 0.5 * op;
}

// Scalar and vector parts of the four joint effects in product order
// (+,+), (+,-), (-,+), (-,-).
struct JointParts {
    std::array<double, 4> scalar;
    std::array<Vec3, 4> vec;
};

JointParts joint_parts(const BlochObservable& A, const BlochObservable& B, const JointParams& jp) {
    JointParts p;
    p.scalar = {jp.gamma, A.alpha - jp.gamma, B.alpha - jp.gamma, 2 + jp.gamma - A.alpha - B.alpha};
    p.vec = {jp.g, A.a - jp.g, B.a - jp.g, jp.g - A.a - B.a};
    return p;
}

std::size_t zero_count(const JointParts& p, double boundary) {
    std::size_t n = 0;
    for (int i = 0; i < 4; ++i) {
        if (std::abs(p.scalar[i]) <= boundary && p.vec[i].norm() <= boundary) ++n;
    }
    return n;
}

// Coefficient targets of dep1..dep6 in (c1, c2); nullopt when the
// prerequisite of the condition fails.
std::array<std::optional<std::pair<double, double>>, 6> dep_targets(double alpha, double beta, double gamma,
                                                                    double boundary) {
    std::array<std::optional<std::pair<double, double>>, 6> t;
    if (alpha > boundary) t[0] = std::pair{gamma / alpha, 0.0};
    if (beta > boundary) t[1] = std::pair{0.0, gamma / beta};
    if (std::abs(alpha + beta - 2) > boundary) {
        double c = gamma / (alpha + beta - 2);
        t[2] = std::pair{c, c};
    }
    if (std::abs(alpha - beta) > boundary) {
        t[3] = std::pair{(gamma - beta) / (alpha - beta), (gamma - alpha) / (beta - alpha)};
    }
    if (std::abs(2 - beta) > boundary) t[4] = std::pair{1.0, (alpha - gamma) / (2 - beta)};
    if (std::abs(2 - alpha) > boundary) t[5] = std::pair{(beta - gamma) / (2 - alpha), 1.0};
    return t;
}

double sin2(const Vec3& u, const Vec3& v) {
    double nu = u.squaredNorm(), nv = v.squaredNorm();
    if (nu == 0 || nv == 0) return 0;
    return u.cross(v).squaredNorm() / (nu * nv);
}

std::string describe(const SpanCoefficients& c, const WVector& w) {
    std::ostringstream os;
    os.precision(17);
    os << "c1=" << c.c1 << " c2=" << c.c2 << " w=(" << w.pp << "," << w.pm << "," << w.mp << "," << w.mm << ")";
    return os.str();
}

void check_positivity(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                      const Tolerance& tol) {
    PositivityReport r = joint_positivity(A, B, jp);
    if (r.ok(tol.norm)) return;
    std::ostringstream os;
    os << "joint parameters violate positivity:";
    for (int i = 0; i < 4; ++i) {
        if (r.slack[i] < -tol.norm) os << " (g" << i + 1 << ") by " << -r.slack[i];
    }
    throw PositivityError(os.str());
}

void require_independent(const Vec3& a, const Vec3& b, const Tolerance& tol) {
    if (!vectors_independent(a, b, tol)) {
        throw std::domain_error("a and b are linearly dependent; use the general minimality test");
    }
}

MinimalityVerdict verdict(Decision d, Method m) {
    MinimalityVerdict v;
    v.decision = d;
    v.method = m;
    return v;
}

}  // namespace

void validate_bloch(const BlochObservable& obs, const Tolerance& tol) {
    if (obs.alpha < -tol.norm || obs.alpha > 2 + tol.norm) {
        throw std::invalid_argument("Bloch observable: alpha outside [0, 2]");
    }
    if (obs.a.norm() > std::min(obs.alpha, 2 - obs.alpha) + tol.norm) {
        throw std::invalid_argument("Bloch observable: |a| exceeds min(alpha, 2 - alpha)");
    }
}

Observable bloch_to_observable(const BlochObservable& obs, const Tolerance& tol) {
    validate_bloch(obs, tol);
    return Observable(OutcomeSet({"+", "-"}), {bloch_operator(obs.alpha, obs.a), bloch_operator(2 - obs.alpha, -obs.a)});
}

double PositivityReport::min_slack() const { return *std::min_element(slack.begin(), slack.end()); }

PositivityReport joint_positivity(const BlochObservable& A, const BlochObservable& B, const JointParams& jp) {
    JointParts p = joint_parts(A, B, jp);
    PositivityReport r;
    for (int i = 0; i < 4; ++i) r.slack[i] = p.scalar[i] - p.vec[i].norm();
    return r;
}

Observable joint_from_params(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                             const Tolerance& tol) {
    validate_bloch(A, tol);
    validate_bloch(B, tol);
    check_positivity(A, B, jp, tol);
    JointParts p = joint_parts(A, B, jp);
    std::vector<Operator> effects;
    for (int i = 0; i < 4; ++i) effects.push_back(bloch_operator(p.scalar[i], p.vec[i]));
    return Observable(OutcomeSet::product({{"+", "-"}, {"+", "-"}}), std::move(effects));
}

JointParams params_from_joint(const Observable& g) {
    if (g.size() != 4 || g.dim() != 2) throw std::invalid_argument("params_from_joint: need a 4-outcome qubit joint");
    JointParams jp;
    jp.gamma = g[0].trace().real();
    for (int k = 0; k < 3; ++k) jp.g[k] = (g[0] * pauli(k + 1)).trace().real();
    return jp;
}

bool unbiased_compatible(const Vec3& a, const Vec3& b, double boundary) {
    return (a - b).norm() + (a + b).norm() <= 2 + boundary;
}

bool vectors_independent(const Vec3& a, const Vec3& b, const Tolerance& tol) {
    return a.norm() > tol.rank && b.norm() > tol.rank && sin2(a, b) > tol.rank;
}

std::optional<SpanCoefficients> span_coefficients(const Vec3& g, const Vec3& a, const Vec3& b,
                                                  const Tolerance& tol) {
    require_independent(a, b, tol);
    Eigen::Matrix2d gram;
    gram << a.dot(a), a.dot(b), a.dot(b), b.dot(b);
    Eigen::Vector2d c = gram.ldlt().solve(Eigen::Vector2d(a.dot(g), b.dot(g)));
    SpanCoefficients s{c[0], c[1], (g - c[0] * a - c[1] * b).norm()};
    if (s.residual > tol.rank * g.norm()) return std::nullopt;
    return s;
}

WVector w_vector(double c1, double c2, double alpha, double beta, double gamma) {
    return WVector{(2 - alpha) * c1 + (2 - beta) * c2 + gamma - 2, (2 - alpha) * c1 - beta * c2 + gamma,
                   -alpha * c1 + (2 - beta) * c2 + gamma, -alpha * c1 - beta * c2 + gamma};
}

Decision wmin_condition(const WVector& w, double boundary) {
    double p1 = w.pp * w.mm, p2 = w.pm * w.mp;
    if (p1 > boundary || p2 > boundary) return Decision::Minimal;
    if (p1 < -boundary && p2 < -boundary) return Decision::NotMinimal;
    return Decision::Boundary;
}

bool DepSet::any() const { return std::any_of(holds.begin(), holds.end(), [](bool b) { return b; }); }

std::vector<int> DepSet::satisfied() const {
    std::vector<int> out;
    for (int i = 0; i < 6; ++i) {
        if (holds[i]) out.push_back(i + 1);
    }
    return out;
}

DepSet dep_conditions(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                      const SpanCoefficients& coeffs, const Tolerance& tol) {
    DepSet d;
    auto targets = dep_targets(A.alpha, B.alpha, jp.gamma, tol.boundary);
    for (int i = 0; i < 6; ++i) {
        if (!targets[i]) continue;
        d.holds[i] = std::abs(coeffs.c1 - targets[i]->first) <= tol.boundary &&
                     std::abs(coeffs.c2 - targets[i]->second) <= tol.boundary;
    }
    return d;
}

MinimalityVerdict qubit_is_minimal(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                                   const Tolerance& tol) {
    validate_bloch(A, tol);
    validate_bloch(B, tol);
    require_independent(A.a, B.a, tol);
    check_positivity(A, B, jp, tol);

    auto span = span_coefficients(jp.g, A.a, B.a, tol);
    if (!span) {
        MinimalityVerdict v = verdict(Decision::Minimal, Method::Independent);
        v.maximal = true;
        v.trace.linearly_independent = true;
        v.trace.pairwise_independent = true;
        return v;
    }

    std::size_t zeros = zero_count(joint_parts(A, B, jp), tol.boundary);
    if (zeros > 1) throw ConsistencyError("qubit joint has more than one zero effect");
    WVector w = w_vector(span->c1, span->c2, A.alpha, B.alpha, jp.gamma);
    if (zeros == 1) {
        MinimalityVerdict v = verdict(Decision::Minimal, Method::ZeroElement);
        v.trace.has_zero_effect = true;
        v.trace.note = describe(*span, w);
        return v;
    }

    DepSet dep = dep_conditions(A, B, jp, *span, tol);
    MinimalityVerdict v;
    if (dep.any()) {
        if (dep.any_minimal() && dep.any_non_minimal()) {
            throw ConsistencyError("qubit joint satisfies both minimal and non-minimal dependence conditions");
        }
        v = verdict(dep.any_minimal() ? Decision::Minimal : Decision::NotMinimal, Method::DepCondition);
    } else {
        v = verdict(wmin_condition(w, tol.boundary), Method::Wmin);
        v.trace.pairwise_independent = true;
    }
    std::ostringstream os;
    os << describe(*span, w) << " dep={";
    for (int i : dep.satisfied()) os << " dep" << i;
    os << " }";
    v.trace.note = os.str();
    return v;
}

MinimalityVerdict unbiased_is_minimal(const Vec3& a, const Vec3& b, const JointParams& jp, const Tolerance& tol) {
    const BlochObservable A{1, a}, B{1, b};
    validate_bloch(A, tol);
    validate_bloch(B, tol);
    require_independent(a, b, tol);
    check_positivity(A, B, jp, tol);
    if (!(jp.gamma > 0 && jp.gamma < 1)) {
        throw ConsistencyError("unbiased joint with independent a, b must have 0 < gamma < 1");
    }
    if (zero_count(joint_parts(A, B, jp), tol.boundary) != 0) {
        throw ConsistencyError("unbiased joint with independent a, b has a zero effect");
    }

    auto span = span_coefficients(jp.g, a, b, tol);
    if (!span) {
        MinimalityVerdict v = verdict(Decision::Minimal, Method::Independent);
        v.maximal = true;
        v.trace.linearly_independent = true;
        v.trace.pairwise_independent = true;
        return v;
    }
    DepSet dep = dep_conditions(A, B, jp, *span, tol);
    if (dep.any_non_minimal()) throw ConsistencyError("dep3/dep4 cannot hold for unbiased marginals");
    WVector w = w_vector(span->c1, span->c2, 1, 1, jp.gamma);
    MinimalityVerdict v;
    if (dep.any_minimal()) {
        v = verdict(Decision::Minimal, Method::DepCondition);
    } else {
        const double g = jp.gamma, s = span->c1 + span->c2, d = span->c1 - span->c2;
        const double strip_sum = std::min(s - g, 2 - g - s);
        const double strip_diff = g - std::abs(d);
        Decision dec = Decision::Boundary;
        if (strip_sum > tol.boundary || strip_diff > tol.boundary) {
            dec = Decision::Minimal;
        } else if (strip_sum < -tol.boundary && strip_diff < -tol.boundary) {
            dec = Decision::NotMinimal;
        }
        v = verdict(dec, Method::Wmin);
        v.trace.pairwise_independent = true;
    }
    v.trace.note = describe(*span, w);
    return v;
}

double decision_margin(const BlochObservable& A, const BlochObservable& B, const JointParams& jp,
                       const Tolerance& tol) {
    double m = std::min(1.0, sin2(A.a, B.a));
    m = std::min(m, joint_positivity(A, B, jp).min_slack());
    JointParts p = joint_parts(A, B, jp);
    for (int i = 0; i < 4; ++i) m = std::min(m, std::max(std::abs(p.scalar[i]), p.vec[i].norm()));
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            Eigen::Vector4d u(p.scalar[i], p.vec[i][0], p.vec[i][1], p.vec[i][2]);
            Eigen::Vector4d v(p.scalar[j], p.vec[j][0], p.vec[j][1], p.vec[j][2]);
            double c = u.dot(v);
            double gram = 1 - c * c / (u.squaredNorm() * v.squaredNorm());
            if (gram > tol.rank) m = std::min(m, gram);
        }
    }
    if (m <= 0 || !vectors_independent(A.a, B.a, tol)) return std::min(m, 0.0);

    auto span = span_coefficients(jp.g, A.a, B.a, tol);
    if (!span) {
        Eigen::Vector2d c = Eigen::Matrix2d{{A.a.dot(A.a), A.a.dot(B.a)}, {A.a.dot(B.a), B.a.dot(B.a)}}
                                .ldlt()
                                .solve(Eigen::Vector2d(A.a.dot(jp.g), B.a.dot(jp.g)));
        return std::min(m, (jp.g - c[0] * A.a - c[1] * B.a).norm() / jp.g.norm());
    }
    auto targets = dep_targets(A.alpha, B.alpha, jp.gamma, tol.boundary);
    for (const auto& t : targets) {
        if (!t) continue;
        double dist = std::max(std::abs(span->c1 - t->first), std::abs(span->c2 - t->second));
        if (dist > tol.boundary) m = std::min(m, dist);
    }
    DepSet dep = dep_conditions(A, B, jp, *span, tol);
    if (!dep.any()) {
        WVector w = w_vector(span->c1, span->c2, A.alpha, B.alpha, jp.gamma);
        m = std::min({m, std::abs(w.pp * w.mm), std::abs(w.pm * w.mp)});
    }
    return m;
}

const char* to_string(CellVerdict v) {
    switch (v) {
        case CellVerdict::Invalid: return "INVALID";
        case CellVerdict::Minimal: return "MINIMAL";
        case CellVerdict::NotMinimal: return "NOT_MINIMAL";
        case CellVerdict::Boundary: return "BOUNDARY";
    }
    return "?";
}

std::string RegionGrid::to_csv() const {
    std::string out = "c1,c2,verdict,slack_g1,slack_g2,slack_g3,slack_g4\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out += buf;
    };
    for (const auto& c : cells) {
        num(c.c1);
        out += ',';
        num(c.c2);
        out += ',';
        out += to_string(c.verdict);
        for (double s : c.slack) {
            out += ',';
            num(s);
        }
        out += '\n';
    }
    return out;
}

RegionGrid region_scan(const Vec3& a, const Vec3& b, double gamma, std::pair<double, double> c1_range,
                       std::pair<double, double> c2_range, std::size_t grid_n, const Tolerance& tol) {
    if (grid_n < 2) throw std::invalid_argument("region_scan: grid needs at least 2 points per axis");
    if (!(c1_range.first < c1_range.second) || !(c2_range.first < c2_range.second)) {
        throw std::invalid_argument("region_scan: degenerate range");
    }
    require_independent(a, b, tol);
    const BlochObservable A{1, a}, B{1, b};
    RegionGrid grid;
    grid.grid_n = grid_n;
    grid.cells.reserve(grid_n * grid_n);
    auto coord = [&](std::pair<double, double> r, std::size_t i) {
        return r.first + (r.second - r.first) * double(i) / double(grid_n - 1);
    };
    for (std::size_t i = 0; i < grid_n; ++i) {
        for (std::size_t j = 0; j < grid_n; ++j) {
            RegionCell cell;
            cell.c1 = coord(c1_range, i);
            cell.c2 = coord(c2_range, j);
            JointParams jp{gamma, cell.c1 * a + cell.c2 * b};
            PositivityReport r = joint_positivity(A, B, jp);
            cell.slack = r.slack;
            const double s = r.min_slack();
            if (s < -tol.boundary) {
                cell.verdict = CellVerdict::Invalid;
            } else if (s <= tol.boundary) {
                cell.verdict = CellVerdict::Boundary;
            } else {
                switch (unbiased_is_minimal(a, b, jp, tol).decision) {
                    case Decision::Minimal: cell.verdict = CellVerdict::Minimal; break;
                    case Decision::NotMinimal: cell.verdict = CellVerdict::NotMinimal; break;
                    case Decision::Boundary: cell.verdict = CellVerdict::Boundary; break;
                }
            }
            grid.cells.push_back(cell);
        }
    }
    return grid;
}

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

namespace {

Vec3 uniform_ball(std::mt19937_64& rng, double radius) {
    for (;;) {
        Vec3 v(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
        if (v.squaredNorm() <= 1) return radius * v;
    }
}

}  // namespace

QubitInstance sample_instance(std::mt19937_64& rng, const SampleOptions& opts, const Tolerance& tol) {
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        QubitInstance inst;
        if (opts.biased) {
            inst.first.alpha = 0.6 + 0.8 * uniform01(rng);
            inst.second.alpha = 0.6 + 0.8 * uniform01(rng);
        }
        inst.first.a = uniform_ball(rng, std::min(inst.first.alpha, 2 - inst.first.alpha));
        inst.second.a = uniform_ball(rng, std::min(inst.second.alpha, 2 - inst.second.alpha));
        if (!vectors_independent(inst.first.a, inst.second.a, tol)) continue;
        if (!opts.biased && !unbiased_compatible(inst.first.a, inst.second.a, 0)) continue;
        inst.joint.gamma = std::min(inst.first.alpha, inst.second.alpha) * uniform01(rng);
        if (uniform01(rng) < opts.off_span_fraction) {
            inst.joint.g = uniform_ball(rng, inst.joint.gamma);
        } else {
            double c1 = -1 + 3 * uniform01(rng), c2 = -1 + 3 * uniform01(rng);
            inst.joint.g = c1 * inst.first.a + c2 * inst.second.a;
        }
        if (joint_positivity(inst.first, inst.second, inst.joint).min_slack() <= 0) continue;
        if (decision_margin(inst.first, inst.second, inst.joint, tol) <= opts.min_margin) continue;
        return inst;
    }
    throw NumericalError("sample_instance: no valid instance within the attempt budget");
}

}  // namespace minjoint::qubit
