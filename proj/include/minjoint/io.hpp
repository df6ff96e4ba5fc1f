#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "minjoint/minimality.hpp"
#include "minjoint/polyhedra.hpp"
#include "minjoint/qubit.hpp"

namespace minjoint::io {

using json = nlohmann::json;

// Observable: {"dim": d, "outcomes": [...], "effects": [[[[re, im], ...] per row] per outcome]}
json to_json(const Observable& a);
Observable observable_from_json(const json& j);

// Kernel: {"out": [...], "in": [...], "entries": [[...], ...]}, rows = out labels.
json to_json(const MarkovKernel& p);
MarkovKernel kernel_from_json(const json& j, const Tolerance& tol = {});

// Linear system: {"n": n, "eq": [[a..., alpha], ...], "ineq": [[a..., alpha], ...]}
json to_json(const LinearSystem& sys);
LinearSystem system_from_json(const json& j);

json to_json(const VertexSet& vs);
VertexSet vertex_set_from_json(const json& j);

json to_json(const MinimalityVerdict& v);
MinimalityVerdict verdict_from_json(const json& j, const Tolerance& tol = {});

json to_json(const DescendResult& r);

// {"alpha": .., "a": [..], "beta": .., "b": [..], "gamma": .., "g": [..]}
json to_json(const qubit::QubitInstance& q);
qubit::QubitInstance qubit_instance_from_json(const json& j);

// {"marginals": [observable, ...], "joint": observable}
JointInstance joint_instance_from_json(const json& j, const Tolerance& tol = {});
json to_json(const JointInstance& inst);

/// Pretty-printed, deterministic; doubles use the shortest representation
/// that round-trips exactly.
std::string dump(const json& j);

json read_json_file(const std::string& path);

}  // namespace minjoint::io
