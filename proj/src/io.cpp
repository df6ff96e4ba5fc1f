#include "minjoint/io.hpp"

#include <fstream>
#include <stdexcept>

namespace minjoint::io {

namespace {

std::vector<std::string> labels(const json& j) { return j.get<std::vector<std::string>>(); }

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vec_from(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

qubit::Vec3 vec3_from(const json& j) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw std::invalid_argument("Bloch vector must have 3 components");
    return qubit::Vec3(v[0], v[1], v[2]);
}

json vec3_json(const qubit::Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json constraint_rows(const std::vector<Constraint>& cs) {
    json rows = json::array();
    for (const auto& c : cs) {
        json r = vec_json(c.a);
        r.push_back(c.alpha);
        rows.push_back(std::move(r));
    }
    return rows;
}

json optional_decision(const std::optional<Decision>& d) { return d ? json(to_string(*d)) : json(nullptr); }

std::optional<Decision> decision_or_null(const json& j) {
    if (j.is_null()) return std::nullopt;
    return decision_from_string(j.get<std::string>());
}

}  // namespace

json to_json(const Observable& a) {
    json effects = json::array();
    for (const auto& e : a.effects()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < e.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < e.cols(); ++c) row.push_back(json::array({e(r, c).real(), e(r, c).imag()}));
            rows.push_back(std::move(row));
        }
        effects.push_back(std::move(rows));
    }
    return json{{"dim", a.dim()}, {"outcomes", a.outcomes().labels()}, {"effects", std::move(effects)}};
}

Observable observable_from_json(const json& j) {
    const auto d = j.at("dim").get<Eigen::Index>();
    if (d < 1) throw std::invalid_argument("observable: dim must be positive");
    std::vector<Operator> effects;
    for (const auto& je : j.at("effects")) {
        if (Eigen::Index(je.size()) != d) throw std::invalid_argument("observable: effect row count != dim");
        Operator e(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            const auto& row = je.at(std::size_t(r));
            if (Eigen::Index(row.size()) != d) throw std::invalid_argument("observable: effect column count != dim");
            for (Eigen::Index c = 0; c < d; ++c) {
                const auto& z = row.at(std::size_t(c));
                e(r, c) = z.is_array() ? std::complex<double>(z.at(0).get<double>(), z.at(1).get<double>())
                                       : std::complex<double>(z.get<double>(), 0.0);
            }
        }
        effects.push_back(std::move(e));
    }
    return Observable(OutcomeSet(labels(j.at("outcomes"))), std::move(effects));
}

json to_json(const MarkovKernel& p) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < p.entries().rows(); ++r) rows.push_back(vec_json(p.entries().row(r).transpose()));
    return json{{"out", p.out_set().labels()}, {"in", p.in_set().labels()}, {"entries", std::move(rows)}};
}

MarkovKernel kernel_from_json(const json& j, const Tolerance& tol) {
    OutcomeSet out(labels(j.at("out"))), in(labels(j.at("in")));
    const auto& rows = j.at("entries");
    if (rows.size() != out.size()) throw std::invalid_argument("kernel: row count != |out|");
    Eigen::MatrixXd m(Eigen::Index(out.size()), Eigen::Index(in.size()));
    for (std::size_t r = 0; r < out.size(); ++r) {
        Eigen::VectorXd row = vec_from(rows.at(r));
        if (row.size() != m.cols()) throw std::invalid_argument("kernel: column count != |in|");
        m.row(Eigen::Index(r)) = row.transpose();
    }
    return MarkovKernel(std::move(out), std::move(in), std::move(m), tol);
}

json to_json(const LinearSystem& sys) {
    return json{{"n", sys.n()}, {"eq", constraint_rows(sys.equalities())}, {"ineq", constraint_rows(sys.inequalities())}};
}

LinearSystem system_from_json(const json& j) {
    const auto n = j.at("n").get<Eigen::Index>();
    if (n < 0) throw std::invalid_argument("linear system: negative n");
    LinearSystem sys(n);
    auto load = [&](const char* key, bool eq) {
        if (!j.contains(key)) return;
        for (const auto& row : j.at(key)) {
            Eigen::VectorXd v = vec_from(row);
            if (v.size() != n + 1) throw std::invalid_argument(std::string("linear system: ") + key + " row length != n+1");
            if (eq) {
                sys.add_equality(v.head(n), v[n]);
            } else {
                sys.add_inequality(v.head(n), v[n]);
            }
        }
    };
    load("eq", true);
    load("ineq", false);
    return sys;
}

json to_json(const VertexSet& vs) {
    json verts = json::array();
    for (const auto& v : vs.vertices) verts.push_back(vec_json(v));
    return json{{"vertices", std::move(verts)},
                {"dedup_tolerance", vs.dedup_tolerance},
                {"reduced_dim", vs.reduced_dim},
                {"subsets_examined", vs.subsets_examined}};
}

VertexSet vertex_set_from_json(const json& j) {
    VertexSet vs;
    for (const auto& v : j.at("vertices")) vs.vertices.push_back(vec_from(v));
    vs.dedup_tolerance = j.at("dedup_tolerance").get<double>();
    vs.reduced_dim = j.at("reduced_dim").get<Eigen::Index>();
    vs.subsets_examined = j.at("subsets_examined").get<std::size_t>();
    return vs;
}

json to_json(const MinimalityVerdict& v) {
    json cert = nullptr;
    if (v.certificate) {
        json triple = nullptr;
        if (v.certificate->triple) {
            const auto& t = *v.certificate->triple;
            triple = json{{"out", t.out}, {"in1", t.in1}, {"in2", t.in2}, {"product", t.product}};
        }
        cert = json{{"kernel", to_json(v.certificate->kernel)},
                    {"triple", std::move(triple)},
                    {"kg_residual", v.certificate->kg_residual}};
    }
    const auto& t = v.trace;
    json trace{{"linearly_independent", t.linearly_independent},
               {"has_zero_effect", t.has_zero_effect},
               {"pairwise_independent", t.pairwise_independent},
               {"via_q_star", optional_decision(t.via_q_star)},
               {"via_p_star", optional_decision(t.via_p_star)},
               {"via_cones", optional_decision(t.via_cones)},
               {"kg_vertices", t.kg_vertices},
               {"q_vertices", t.q_vertices},
               {"q_star_max_product", t.q_star_max_product},
               {"p_star_max_product", t.p_star_max_product},
               {"note", t.note}};
    return json{{"decision", to_string(v.decision)},
                {"method", to_string(v.method)},
                {"maximal", v.maximal},
                {"certificate", std::move(cert)},
                {"trace", std::move(trace)}};
}

MinimalityVerdict verdict_from_json(const json& j, const Tolerance& tol) {
    MinimalityVerdict v;
    v.decision = decision_from_string(j.at("decision").get<std::string>());
    v.method = method_from_string(j.at("method").get<std::string>());
    v.maximal = j.value("maximal", false);
    const auto& c = j.at("certificate");
    if (!c.is_null()) {
        Certificate cert{kernel_from_json(c.at("kernel"), tol), std::nullopt, c.at("kg_residual").get<double>()};
        const auto& t = c.at("triple");
        if (!t.is_null()) {
            cert.triple = SupportTriple{t.at("out").get<std::size_t>(), t.at("in1").get<std::size_t>(),
                                        t.at("in2").get<std::size_t>(), t.at("product").get<double>()};
        }
        v.certificate = std::move(cert);
    }
    if (j.contains("trace")) {
        const auto& t = j.at("trace");
        auto& tr = v.trace;
        tr.linearly_independent = t.at("linearly_independent").get<bool>();
        tr.has_zero_effect = t.at("has_zero_effect").get<bool>();
        tr.pairwise_independent = t.at("pairwise_independent").get<bool>();
        tr.via_q_star = decision_or_null(t.at("via_q_star"));
        tr.via_p_star = decision_or_null(t.at("via_p_star"));
        tr.via_cones = decision_or_null(t.at("via_cones"));
        tr.kg_vertices = t.at("kg_vertices").get<std::size_t>();
        tr.q_vertices = t.at("q_vertices").get<std::vector<std::size_t>>();
        tr.q_star_max_product = t.at("q_star_max_product").get<double>();
        tr.p_star_max_product = t.at("p_star_max_product").get<double>();
        tr.note = t.at("note").get<std::string>();
    }
    return v;
}

json to_json(const DescendResult& r) {
    json history = json::array();
    for (const auto& v : r.history) history.push_back(to_json(v));
    return json{{"status", to_string(r.status)}, {"steps", r.steps}, {"joint", to_json(r.joint)}, {"history", history}};
}

json to_json(const qubit::QubitInstance& q) {
    return json{{"alpha", q.first.alpha}, {"a", vec3_json(q.first.a)},    {"beta", q.second.alpha},
                {"b", vec3_json(q.second.a)}, {"gamma", q.joint.gamma}, {"g", vec3_json(q.joint.g)}};
}

qubit::QubitInstance qubit_instance_from_json(const json& j) {
    qubit::QubitInstance q;
    q.first.alpha = j.value("alpha", 1.0);
    q.first.a = vec3_from(j.at("a"));
    q.second.alpha = j.value("beta", 1.0);
    q.second.a = vec3_from(j.at("b"));
    q.joint.gamma = j.at("gamma").get<double>();
    q.joint.g = vec3_from(j.at("g"));
    return q;
}

JointInstance joint_instance_from_json(const json& j, const Tolerance& tol) {
    std::vector<Observable> marginals;
    for (const auto& m : j.at("marginals")) marginals.push_back(observable_from_json(m));
    Observable joint = observable_from_json(j.at("joint"));
    if (!validate_observable(joint, tol).ok()) throw std::invalid_argument("joint is not a valid observable");
    for (const auto& m : marginals) {
        if (!validate_observable(m, tol).ok()) throw std::invalid_argument("marginal is not a valid observable");
    }
    return make_joint_instance(std::move(marginals), joint, tol);
}

json to_json(const JointInstance& inst) {
    json ms = json::array();
    for (const auto& m : inst.marginals) ms.push_back(to_json(m));
    return json{{"marginals", std::move(ms)}, {"joint", to_json(inst.joint)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace minjoint::io
