// SPDX-License-Identifier: Apache-2.0
// opcircuits python module: the engine's main operations behind a thin
// numpy-friendly surface.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "opcircuits/dsl.hpp"
#include "opcircuits/duotensor.hpp"
#include "opcircuits/gadgets.hpp"
#include "opcircuits/reconstruction.hpp"

namespace py = pybind11;
using namespace opc;

namespace {

dsl::CircuitDocument parse_or_throw(const std::string& text) {
    dsl::ParseResult res = dsl::parse(text);
    if (!res.ok()) {
        std::ostringstream msg;
        for (const auto& d : res.diagnostics)
            msg << d.line << ":" << d.col << ": " << d.message << "\n";
        throw py::value_error(msg.str());
    }
    return std::move(res.doc);
}

dsl::ResolvedDocument resolve_or_throw(const dsl::CircuitDocument& doc, const std::string& base) {
    dsl::ResolvedDocument r = dsl::resolve(doc, base);
    if (!r.ok()) {
        std::ostringstream msg;
        for (const auto& d : r.diagnostics) msg << d.message << "\n";
        throw py::value_error(msg.str());
    }
    return r;
}

ContractionOrder order_of(const std::string& name) {
    if (name == "greedy") return ContractionOrder::Greedy;
    if (name == "optimal") return ContractionOrder::Optimal;
    if (name == "naive") return ContractionOrder::Naive;
    return ContractionOrder::Auto;
}

OperatorFragment fragment_of(const Matrix& op, int in_dim, int out_dim) {
    std::vector<SystemType> ins, outs;
    if (in_dim > 1) ins.push_back({"in", in_dim});
    if (out_dim > 1) outs.push_back({"out", out_dim});
    if (ins.empty() && outs.empty()) ins.push_back({"in", in_dim});
    return OperatorFragment::make(ins, outs, op);
}

}  // namespace

PYBIND11_MODULE(opcircuits, m) {
    m.doc() = "operator-circuit engine for finite-dimensional quantum theory";

    // fiducial families
    m.def("fiducial_g", [](int n) { return fiducial_family(n).g; },
          "hopping metric of the canonical dim-n fiducial family", py::arg("n"));
    m.def("fiducial_g_inv", [](int n) { return fiducial_family(n).g_inv; }, py::arg("n"));
    m.def("fiducial_condition", [](int n) { return fiducial_family(n).condition; }, py::arg("n"));
    m.def("fiducial_projectors", [](int n) { return fiducial_family(n).preparations; },
          "the n^2 rank-one fiducial projectors", py::arg("n"));
    m.def("fiducial_names", [](int n) { return fiducial_family(n).names; }, py::arg("n"));

    // documents
    m.def("eval_document",
          [](const std::string& text, const std::string& base_dir, const std::string& order) {
              dsl::CircuitDocument doc = parse_or_throw(text);
              dsl::ResolvedDocument r = resolve_or_throw(doc, base_dir);
              return eval_circuit(r.graph, r.payloads, order_of(order));
          },
          "evaluate the circuit described by a document", py::arg("text"),
          py::arg("base_dir") = ".", py::arg("order") = "auto");
    m.def("pretty",
          [](const std::string& text) { return dsl::pretty(parse_or_throw(text)); },
          "canonical formatting of a document", py::arg("text"));
    m.def("render_dot",
          [](const std::string& text, const std::string& base_dir) {
              dsl::CircuitDocument doc = parse_or_throw(text);
              return dsl::emit_dot(resolve_or_throw(doc, base_dir).graph);
          },
          py::arg("text"), py::arg("base_dir") = ".");
    m.def("parse_diagnostics", [](const std::string& text) {
        std::vector<std::tuple<int, int, std::string>> out;
        for (const auto& d : dsl::parse(text).diagnostics) out.emplace_back(d.line, d.col, d.message);
        return out;
    });

    // linear-algebra kernel entry points
    m.def("min_eigenvalue",
          [](const Matrix& h) {
              return min_eigenvalue(
                  DenseHermitian(LabeledSpace({{"s", static_cast<int>(h.rows())}}), h));
          },
          py::arg("hermitian"));
    m.def("is_physical_op",
          [](const Matrix& op, int in_dim, int out_dim) {
              PhysicalityReport rep = is_physical(fragment_of(op, in_dim, out_dim));
              py::dict d;
              d["min_choi_eigenvalue"] = rep.min_choi_eigenvalue;
              d["trace_condition_slack"] = rep.trace_condition_slack;
              d["verdict"] = rep.verdict;
              return d;
          },
          "physicality of an operator on (in x out)", py::arg("op"), py::arg("in_dim"),
          py::arg("out_dim"));
    m.def("kraus_terms",
          [](const Matrix& op, int in_dim, int out_dim) {
              return kraus_decompose(fragment_of(op, in_dim, out_dim));
          },
          py::arg("op"), py::arg("in_dim"), py::arg("out_dim"));
    m.def("op_from_kraus",
          [](const std::vector<Matrix>& kraus, int in_dim, int out_dim) {
              return operator_from_kraus(kraus, {"in", in_dim}, {"out", out_dim}).op().matrix();
          },
          py::arg("kraus"), py::arg("in_dim"), py::arg("out_dim"));

    // gadget demos
    m.def("bloch_prob",
          [](std::array<double, 3> u, std::array<double, 3> v) {
              OperatorFragment pu =
                  bloch_state(BlochPoint(u[0], u[1], u[2]), Role::Preparation).with_prefix("u:");
              OperatorFragment pv =
                  bloch_state(BlochPoint(v[0], v[1], v[2]), Role::Result).with_prefix("v:");
              return contract(pu, pv, {{1, 1}}).scalar_value();
          },
          py::arg("u"), py::arg("v"));
    m.def("teleport_demo", [] {
        TeleportReport rep = teleportation_demo();
        py::dict d;
        d["verdict"] = rep.verdict;
        d["ratio"] = rep.ratio;
        d["equator_angle"] = rep.equator_angle;
        d["deviation"] = rep.deviation;
        return d;
    });
    m.def("swap_demo", [] {
        SwapReport rep = entanglement_swap_demo();
        py::dict d;
        d["verdict"] = rep.verdict;
        d["ratio"] = rep.ratio;
        d["deviation"] = rep.deviation;
        return d;
    });

    // reconstruction witnesses
    m.def("span_report",
          [](const std::vector<Matrix>& states) {
              SpanReport r = span_report(states);
              py::dict d;
              d["input_count"] = r.input_count;
              d["support_dim"] = r.support_dim;
              d["span_dim"] = r.span_dim;
              d["nonflat"] = r.nonflat;
              return d;
          },
          py::arg("states"));
    m.def("signature_vector", &signature_vector, py::arg("r"), py::arg("length"));
    m.def("kn_survivors",
          [](int range_n, int max_r) { return k_multiplicative_search(range_n, max_r).survivors; },
          py::arg("range_n"), py::arg("max_r"));
}
