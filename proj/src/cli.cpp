#include "minjoint/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <random>
#include <string>

#include "minjoint/io.hpp"

namespace minjoint {

namespace {

using io::json;

struct Flags {
    std::string input;
    std::string out;
    std::optional<double> tol;
    std::size_t grid = 201;
    std::optional<double> gamma;
    std::uint64_t seed = 1;
    std::size_t count = 500;
    bool cross_validate = false;
    bool descend = false;
};

class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

Tolerance tolerance(const Flags& f) {
    Tolerance tol;
    if (f.tol) tol.boundary = *f.tol;
    tol.validate();
    return tol;
}

json require_input(const Flags& f) {
    if (f.input.empty()) throw UsageError("--input is required for this command");
    return io::read_json_file(f.input);
}

bool decisions_conflict(Decision a, Decision b) {
    return a != b && a != Decision::Boundary && b != Decision::Boundary;
}

JointInstance qubit_joint_instance(const qubit::QubitInstance& q, const Tolerance& tol) {
    Observable joint = qubit::joint_from_params(q.first, q.second, q.joint, tol);
    return make_joint_instance({qubit::bloch_to_observable(q.first, tol), qubit::bloch_to_observable(q.second, tol)},
                               joint, tol);
}

int cmd_check(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    JointInstance inst = io::joint_instance_from_json(require_input(f), tol);
    MinimalityVerdict v = is_minimal(inst);
    json out = io::to_json(v);
    if (f.descend && v.decision == Decision::NotMinimal) out["descend"] = io::to_json(descend_to_minimal(inst));
    payload = io::dump(out);
    return 0;
}

int cmd_qubit_check(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    qubit::QubitInstance q = io::qubit_instance_from_json(require_input(f));
    MinimalityVerdict closed = qubit::qubit_is_minimal(q.first, q.second, q.joint, tol);
    json out = io::to_json(closed);
    int code = 0;
    if (f.cross_validate) {
        MinimalityVerdict general = is_minimal(qubit_joint_instance(q, tol));
        const bool conflict = decisions_conflict(closed.decision, general.decision);
        out["cross_validation"] = json{{"general", io::to_json(general)}, {"agree", !conflict}};
        if (conflict) code = 3;
    }
    payload = io::dump(out);
    return code;
}

int cmd_region(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    qubit::Vec3 a(0.3, 0, 0), b(0, 0.3, 0);
    double gamma = 0.5;
    if (!f.input.empty()) {
        qubit::QubitInstance q = io::qubit_instance_from_json(io::read_json_file(f.input));
        a = q.first.a;
        b = q.second.a;
        gamma = q.joint.gamma;
    }
    if (f.gamma) gamma = *f.gamma;
    payload = qubit::region_scan(a, b, gamma, {-1.0, 2.0}, {-1.0, 2.0}, f.grid, tol).to_csv();
    return 0;
}

int cmd_reduce(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    Observable a = io::observable_from_json(require_input(f));
    if (!validate_observable(a, tol).ok()) throw std::invalid_argument("input is not a valid observable");
    PairwiseReduction r = pairwise_reduce(a, tol);
    payload = io::dump(json{{"observable", io::to_json(r.reduced)},
                            {"forward", io::to_json(r.forward)},
                            {"backward", io::to_json(r.backward)}});
    return 0;
}

int cmd_joint(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    json in = require_input(f);
    Observable common = io::observable_from_json(in.at("common"));
    std::vector<MarkovKernel> kernels;
    for (const auto& k : in.at("kernels")) kernels.push_back(io::kernel_from_json(k, tol));
    std::optional<std::vector<Observable>> declared;
    if (in.contains("marginals")) {
        declared.emplace();
        for (const auto& m : in.at("marginals")) declared->push_back(io::observable_from_json(m));
    }
    payload = io::dump(io::to_json(joint_from_common(common, kernels, declared ? &*declared : nullptr, tol)));
    return 0;
}

int cmd_vertices(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    payload = io::dump(io::to_json(enumerate_vertices(io::system_from_json(require_input(f)), tol)));
    return 0;
}

int cmd_oracle_compare(const Flags& f, std::string& payload) {
    const Tolerance tol = tolerance(f);
    std::mt19937_64 rng(f.seed);
    qubit::SampleOptions opts;
    opts.off_span_fraction = 0.2;
    opts.min_margin = 10 * tol.boundary;
    std::size_t agree = 0, boundary = 0;
    json disagreements = json::array();
    for (std::size_t i = 0; i < f.count; ++i) {
        qubit::QubitInstance q = qubit::sample_instance(rng, opts, tol);
        MinimalityVerdict closed = qubit::unbiased_is_minimal(q.first.a, q.second.a, q.joint, tol);
        MinimalityVerdict general = is_minimal(qubit_joint_instance(q, tol));
        if (closed.decision == Decision::Boundary || general.decision == Decision::Boundary) {
            ++boundary;
        } else if (closed.decision == general.decision) {
            ++agree;
        } else {
            disagreements.push_back(json{{"instance", io::to_json(q)},
                                         {"closed_form", io::to_json(closed)},
                                         {"general", io::to_json(general)}});
        }
    }
    payload = io::dump(json{{"seed", f.seed},
                            {"count", f.count},
                            {"agree", agree},
                            {"boundary", boundary},
                            {"disagree", disagreements.size()},
                            {"disagreements", disagreements}});
    return disagreements.empty() ? 0 : 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimal joint observable toolkit", "minjoint"};
    app.require_subcommand(1, 1);
    Flags f;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", f.input, "input JSON path");
        sub->add_option("--out", f.out, "write output here instead of stdout");
        sub->add_option("--tol", f.tol, "boundary tolerance")->check(CLI::PositiveNumber);
    };
    using Handler = int (*)(const Flags&, std::string&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    auto add = [&](const char* name, const char* desc, Handler h) {
        CLI::App* sub = app.add_subcommand(name, desc);
        add_common(sub);
        commands.emplace_back(sub, h);
        return sub;
    };
    add("check", "decide minimality of a joint observable", cmd_check)
        ->add_flag("--descend", f.descend, "descend to a minimal joint after NOT_MINIMAL");
    add("qubit-check", "closed-form qubit decision", cmd_qubit_check)
        ->add_flag("--cross-validate", f.cross_validate, "also run the general algorithm and compare");
    CLI::App* region = add("region", "scan the (c1, c2) plane as CSV", cmd_region);
    region->add_option("--grid", f.grid, "points per axis")->check(CLI::Range(2, 100000));
    region->add_option("--gamma", f.gamma, "gamma of the joint");
    add("reduce", "pairwise-reduce an observable", cmd_reduce);
    add("joint", "joint observable from a common observable and kernels", cmd_joint);
    add("vertices", "enumerate vertices of a linear system", cmd_vertices);
    CLI::App* oracle = add("oracle-compare", "closed form against the general algorithm", cmd_oracle_compare);
    oracle->add_option("--seed", f.seed, "generator seed");
    oracle->add_option("--count", f.count, "number of instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    std::string payload;
    int code = 0;
    try {
        for (const auto& [sub, handler] : commands) {
            if (sub->parsed()) code = handler(f, payload);
        }
    } catch (const ConsistencyError& e) {
        err << "consistency error: " << e.what() << "\n";
        return 3;
    } catch (const CapExceeded& e) {
        err << "cap exceeded: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const io::json::exception& e) {
        err << "bad input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    if (f.out.empty()) {
        out << payload;
    } else {
        std::ofstream file(f.out);
        if (!file) {
            err << "error: cannot write " << f.out << "\n";
            return 1;
        }
        file << payload;
    }
    return code;
}

}  // namespace minjoint
