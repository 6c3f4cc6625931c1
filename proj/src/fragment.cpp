// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/fragment.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>

namespace opc {

namespace {

std::vector<Factor> port_factors(const std::vector<Port>& ports) {
    std::vector<Factor> fs;
    fs.reserve(ports.size());
    for (const auto& p : ports) fs.push_back({p.label, p.type.dim});
    return fs;
}

}  // namespace

// ------------------------------- OperatorFragment ---------------------------

OperatorFragment::OperatorFragment(std::vector<Port> inputs, std::vector<Port> outputs, DenseHermitian op)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), op_(std::move(op)) {
    std::vector<Factor> expect = port_factors(inputs_);
    for (const auto& f : port_factors(outputs_)) expect.push_back(f);
    if (!(LabeledSpace(expect) == op_.space()))
        throw DimMismatch("OperatorFragment: operator space does not match port list");
}

double OperatorFragment::scalar_value() const {
    if (!is_scalar()) throw OpenPorts("scalar_value: fragment still has open ports");
    const cxd v = op_.matrix()(0, 0);
    if (std::abs(v.imag()) > 1e-10 * (1.0 + std::abs(v.real())))
        std::cerr << "[opcircuits] warning: discarding imaginary residue " << v.imag() << "\n";
    return v.real();
}

LabeledSpace OperatorFragment::input_space() const { return LabeledSpace(port_factors(inputs_)); }
LabeledSpace OperatorFragment::output_space() const { return LabeledSpace(port_factors(outputs_)); }

OperatorFragment OperatorFragment::with_prefix(const std::string& prefix) const {
    auto rename = [&prefix](std::vector<Port> ps) {
        for (auto& p : ps) p.label = prefix + p.label;
        return ps;
    };
    std::vector<std::string> nl;
    for (const auto& f : op_.space().factors()) nl.push_back(prefix + f.label);
    return OperatorFragment(rename(inputs_), rename(outputs_), op_.relabeled(nl));
}

OperatorFragment OperatorFragment::make(const std::vector<SystemType>& ins,
                                        const std::vector<SystemType>& outs, const Matrix& op) {
    std::vector<Port> in_ports, out_ports;
    for (std::size_t k = 0; k < ins.size(); ++k) in_ports.push_back({"i" + std::to_string(k + 1), ins[k]});
    for (std::size_t k = 0; k < outs.size(); ++k) out_ports.push_back({"o" + std::to_string(k + 1), outs[k]});
    std::vector<Factor> fs = port_factors(in_ports);
    for (const auto& f : port_factors(out_ports)) fs.push_back(f);
    return OperatorFragment(std::move(in_ports), std::move(out_ports),
                            DenseHermitian(LabeledSpace(std::move(fs)), op));
}

OperatorFragment OperatorFragment::preparation(const SystemType& t, const Matrix& state) {
    return make({}, {t}, state);
}

OperatorFragment OperatorFragment::result(const SystemType& t, const Matrix& effect) {
    return make({t}, {}, effect);
}

OperatorFragment OperatorFragment::channel(const SystemType& in, const SystemType& out, const Matrix& op) {
    return make({in}, {out}, op);
}

OperatorFragment OperatorFragment::scalar(double value) {
    Matrix m(1, 1);
    m(0, 0) = value;
    return OperatorFragment({}, {}, DenseHermitian(LabeledSpace{}, m));
}

// ---------------------------------- wiring ----------------------------------

OperatorFragment contract(const OperatorFragment& a, const OperatorFragment& b,
                          const std::vector<std::pair<int, int>>& pairs) {
    std::vector<std::pair<std::string, std::string>> label_pairs;
    for (const auto& [ao, bi] : pairs) {
        if (ao < 1 || ao > static_cast<int>(a.outputs().size()))
            throw Error("contract: no output port " + std::to_string(ao));
        if (bi < 1 || bi > static_cast<int>(b.inputs().size()))
            throw Error("contract: no input port " + std::to_string(bi));
        const Port& pa = a.outputs()[ao - 1];
        const Port& pb = b.inputs()[bi - 1];
        if (!(pa.type == pb.type))
            throw TypeMismatchError("contract: port types " + pa.type.name + " and " + pb.type.name +
                                    " do not match");
        label_pairs.push_back({pa.label, pb.label});
    }
    return contract_labels(a, b, label_pairs);
}

OperatorFragment contract_labels(const OperatorFragment& a, const OperatorFragment& b,
                                 const std::vector<std::pair<std::string, std::string>>& label_pairs) {
    std::set<std::string> wired_a, wired_b;
    for (const auto& [la, lb] : label_pairs) {
        if (a.op().space().dim_of(la) != b.op().space().dim_of(lb))
            throw TypeMismatchError("contract: wired factors " + la + " and " + lb + " differ in dim");
        if (!wired_a.insert(la).second) throw Error("contract: factor " + la + " wired twice");
        if (!wired_b.insert(lb).second) throw Error("contract: factor " + lb + " wired twice");
    }
    // unwired labels must be disjoint across the two fragments
    for (const auto& f : b.op().space().factors())
        if (!wired_b.count(f.label) && a.op().space().contains(f.label))
            throw LabelCollision("contract: label '" + f.label + "' appears on both fragments");

    // Bring a to [restA..., wiredA...] and b to [wiredB..., restB...].
    std::vector<std::string> order_a, order_b;
    for (const auto& f : a.op().space().factors())
        if (!wired_a.count(f.label)) order_a.push_back(f.label);
    const std::size_t rest_a_count = order_a.size();
    for (const auto& [la, lb] : label_pairs) order_a.push_back(la);
    for (const auto& [la, lb] : label_pairs) order_b.push_back(lb);
    for (const auto& f : b.op().space().factors())
        if (!wired_b.count(f.label)) order_b.push_back(f.label);

    DenseHermitian pa = permute_factors(a.op(), order_a);
    DenseHermitian pb = permute_factors(b.op(), order_b);

    // Rename b's wired factors to a's labels so the joint space is consistent.
    {
        std::vector<std::string> nl;
        for (std::size_t k = 0; k < label_pairs.size(); ++k) nl.push_back(label_pairs[k].first);
        for (std::size_t k = label_pairs.size(); k < pb.space().size(); ++k)
            nl.push_back(pb.space().factors()[k].label);
        pb = pb.relabeled(nl);
    }

    // Joint space [restA, W, restB]: multiply (pa ⊗ I_restB)(I_restA ⊗ pb) and
    // trace out W.
    int rest_a_dim = 1, rest_b_dim = 1;
    for (std::size_t k = 0; k < rest_a_count; ++k) rest_a_dim *= pa.space().factors()[k].dim;
    for (std::size_t k = label_pairs.size(); k < pb.space().size(); ++k)
        rest_b_dim *= pb.space().factors()[k].dim;

    std::vector<Factor> joint = pa.space().factors();
    for (std::size_t k = label_pairs.size(); k < pb.space().size(); ++k)
        joint.push_back(pb.space().factors()[k]);
    LabeledSpace joint_space{joint};

    auto embed_right = [&](const Matrix& m, int id_dim) {
        Matrix out(m.rows() * id_dim, m.cols() * id_dim);
        out.setZero();
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                out.block(i * id_dim, j * id_dim, id_dim, id_dim) =
                    m(i, j) * Matrix::Identity(id_dim, id_dim);
        return out;
    };
    auto embed_left = [&](const Matrix& m, int id_dim) {
        Matrix out(m.rows() * id_dim, m.cols() * id_dim);
        out.setZero();
        for (int i = 0; i < id_dim; ++i) out.block(i * m.rows(), i * m.cols(), m.rows(), m.cols()) = m;
        return out;
    };

    Matrix m1 = embed_right(pa.matrix(), rest_b_dim);
    Matrix m2 = embed_left(pb.matrix(), rest_a_dim);
    Matrix prod = m1 * m2;

    std::vector<std::string> wired_labels;
    for (const auto& [la, lb] : label_pairs) wired_labels.push_back(la);
    // prod is Hermitian only after tracing the wired factors; build through a
    // raw trace rather than the DenseHermitian constructor.
    DenseHermitian joint_h(joint_space, (prod + prod.adjoint().eval()) / 2.0);
    DenseHermitian traced = partial_trace(joint_h, wired_labels);

    // Result ports: a's inputs + b's unwired inputs; a's unwired outputs + b's outputs.
    std::vector<Port> in_ports, out_ports;
    for (const auto& p : a.inputs())
        if (!wired_a.count(p.label)) in_ports.push_back(p);
    for (const auto& p : b.inputs())
        if (!wired_b.count(p.label)) in_ports.push_back(p);
    for (const auto& p : a.outputs())
        if (!wired_a.count(p.label)) out_ports.push_back(p);
    for (const auto& p : b.outputs())
        if (!wired_b.count(p.label)) out_ports.push_back(p);

    std::vector<std::string> final_order;
    for (const auto& p : in_ports) final_order.push_back(p.label);
    for (const auto& p : out_ports) final_order.push_back(p.label);
    return OperatorFragment(std::move(in_ports), std::move(out_ports),
                            permute_factors(traced, final_order));
}

// ------------------------------ circuit evaluation ---------------------------

namespace {

struct Component {
    std::set<std::string> node_ids;
    OperatorFragment frag;
};

// All wires running between the two components, as fragment factor-label pairs.
// Wires in either direction are matched factors.
std::vector<std::pair<std::string, std::string>> wires_between(const WireGraph& g, const Component& c1,
                                                               const Component& c2) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& w : g.wires()) {
        const std::string out_label = w.from + ":o" + std::to_string(w.out_port);
        const std::string in_label = w.to + ":i" + std::to_string(w.in_port);
        if (c1.node_ids.count(w.from) && c2.node_ids.count(w.to))
            pairs.push_back({out_label, in_label});
        else if (c2.node_ids.count(w.from) && c1.node_ids.count(w.to))
            pairs.push_back({in_label, out_label});  // (c1-side label, c2-side label)
    }
    return pairs;
}

Component merge(const WireGraph& g, const Component& c1, const Component& c2) {
    auto pairs = wires_between(g, c1, c2);
    // pairs carry (c1 label, c2 label) regardless of wire direction
    Component out{c1.node_ids, contract_labels(c1.frag, c2.frag, pairs)};
    out.node_ids.insert(c2.node_ids.begin(), c2.node_ids.end());
    return out;
}

long merge_cost(const WireGraph& g, const Component& c1, const Component& c2) {
    long w = 1;
    for (const auto& [l1, l2] : wires_between(g, c1, c2)) w *= c1.frag.op().space().dim_of(l1);
    long d1 = c1.frag.op().space().total_dim();
    long d2 = c2.frag.op().space().total_dim();
    // joint working space: rest(c1) * wired * rest(c2)
    return (d1 / w) * w * (d2 / w);
}

std::vector<Component> initial_components(const WireGraph& graph,
                                          const std::map<std::string, OperatorFragment>& payloads) {
    std::vector<Component> comps;
    for (const auto& n : graph.nodes()) {
        auto it = payloads.find(n.id);
        if (it == payloads.end()) throw InvalidGraph("eval: node '" + n.id + "' has no payload");
        const OperatorFragment& f = it->second;
        if (f.inputs().size() != n.inputs.size() || f.outputs().size() != n.outputs.size())
            throw InvalidGraph("eval: payload of '" + n.id + "' does not match the node's ports");
        for (std::size_t k = 0; k < n.inputs.size(); ++k)
            if (f.inputs()[k].type.dim != n.inputs[k].dim)
                throw InvalidGraph("eval: input dim mismatch on '" + n.id + "'");
        for (std::size_t k = 0; k < n.outputs.size(); ++k)
            if (f.outputs()[k].type.dim != n.outputs[k].dim)
                throw InvalidGraph("eval: output dim mismatch on '" + n.id + "'");

        // Relabel ports to the graph-global scheme node:i<k> / node:o<k>.
        std::vector<Port> ins, outs;
        std::vector<std::string> space_labels;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
            std::string l = n.id + ":i" + std::to_string(k + 1);
            ins.push_back({l, n.inputs[k]});
            space_labels.push_back(l);
        }
        for (std::size_t k = 0; k < n.outputs.size(); ++k) {
            std::string l = n.id + ":o" + std::to_string(k + 1);
            outs.push_back({l, n.outputs[k]});
            space_labels.push_back(l);
        }
        comps.push_back({{n.id}, OperatorFragment(ins, outs, f.op().relabeled(space_labels))});
    }
    return comps;
}

OperatorFragment fold_naive(const WireGraph& graph, std::vector<Component> comps) {
    Component acc = comps.front();
    for (std::size_t k = 1; k < comps.size(); ++k) acc = merge(graph, acc, comps[k]);
    return acc.frag;
}

OperatorFragment fold_greedy(const WireGraph& graph, std::vector<Component> comps) {
    while (comps.size() > 1) {
        std::size_t bi = 0, bj = 1;
        long best = std::numeric_limits<long>::max();
        bool best_connected = false;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            for (std::size_t j = i + 1; j < comps.size(); ++j) {
                bool connected = !wires_between(graph, comps[i], comps[j]).empty();
                long cost = merge_cost(graph, comps[i], comps[j]);
                // prefer connected merges; disconnected ones only once no wires remain
                if (connected > best_connected || (connected == best_connected && cost < best)) {
                    best = cost;
                    bi = i;
                    bj = j;
                    best_connected = connected;
                }
            }
        }
        Component merged = merge(graph, comps[bi], comps[bj]);
        comps.erase(comps.begin() + static_cast<long>(bj));
        comps[bi] = std::move(merged);
    }
    return comps.front().frag;
}

// Exhaustive search over pairwise merge orders minimizing the largest
// intermediate working dimension. The search runs on dimensions only; the
// winning plan is replayed with real contractions afterwards.
struct PlanComp {
    std::set<std::string> ids;
    long open_dim = 1;
};

long plan_wire_dim(const WireGraph& g, const PlanComp& c1, const PlanComp& c2) {
    long w = 1;
    for (const auto& wire : g.wires()) {
        const bool fwd = c1.ids.count(wire.from) && c2.ids.count(wire.to);
        const bool bwd = c2.ids.count(wire.from) && c1.ids.count(wire.to);
        if (fwd || bwd) w *= g.node(wire.from).outputs[wire.out_port - 1].dim;
    }
    return w;
}

void optimal_search(const WireGraph& g, std::vector<PlanComp> comps, long current_max,
                    std::vector<std::pair<std::size_t, std::size_t>>& plan, long& best_total,
                    std::vector<std::pair<std::size_t, std::size_t>>& best_plan) {
    if (comps.size() == 1) {
        if (current_max < best_total) {
            best_total = current_max;
            best_plan = plan;
        }
        return;
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
        for (std::size_t j = i + 1; j < comps.size(); ++j) {
            const long w = plan_wire_dim(g, comps[i], comps[j]);
            const long cost = (comps[i].open_dim / w) * w * (comps[j].open_dim / w);
            const long next_max = std::max(current_max, cost);
            if (next_max >= best_total) continue;  // prune
            PlanComp merged;
            merged.ids = comps[i].ids;
            merged.ids.insert(comps[j].ids.begin(), comps[j].ids.end());
            merged.open_dim = (comps[i].open_dim / w) * (comps[j].open_dim / w);
            std::vector<PlanComp> next;
            for (std::size_t k = 0; k < comps.size(); ++k)
                if (k != i && k != j) next.push_back(comps[k]);
            next.push_back(merged);
            plan.push_back({i, j});
            optimal_search(g, std::move(next), next_max, plan, best_total, best_plan);
            plan.pop_back();
        }
    }
}

OperatorFragment fold_optimal(const WireGraph& graph, std::vector<Component> comps) {
    std::vector<PlanComp> pcs;
    for (const auto& c : comps) pcs.push_back({c.node_ids, c.frag.op().space().total_dim()});
    std::vector<std::pair<std::size_t, std::size_t>> plan, best_plan;
    long best_total = std::numeric_limits<long>::max();
    optimal_search(graph, pcs, 1, plan, best_total, best_plan);
    for (auto [i, j] : best_plan) {
        Component merged = merge(graph, comps[i], comps[j]);
        std::vector<Component> next;
        for (std::size_t k = 0; k < comps.size(); ++k)
            if (k != i && k != j) next.push_back(comps[k]);
        next.push_back(std::move(merged));
        comps = std::move(next);
    }
    return comps.front().frag;
}

}  // namespace

OperatorFragment eval_fragment(const WireGraph& graph,
                               const std::map<std::string, OperatorFragment>& payloads,
                               ContractionOrder order) {
    auto report = graph.validate();
    if (!report.ok()) {
        std::string msg = "eval: graph is invalid:";
        for (const auto& v : report.violations) msg += " [" + v.message + "]";
        throw InvalidGraph(msg);
    }
    if (graph.nodes().empty()) return OperatorFragment::scalar(1.0);

    auto comps = initial_components(graph, payloads);
    switch (order) {
        case ContractionOrder::Naive:
            return fold_naive(graph, comps);
        case ContractionOrder::Greedy:
            return fold_greedy(graph, comps);
        case ContractionOrder::Optimal:
            return fold_optimal(graph, comps);
        case ContractionOrder::Auto:
        default:
            return comps.size() <= 6 ? fold_optimal(graph, comps) : fold_greedy(graph, comps);
    }
}

double eval_circuit(const WireGraph& graph, const std::map<std::string, OperatorFragment>& payloads,
                    ContractionOrder order) {
    if (!graph.open_ports().empty()) throw OpenPorts("eval_circuit: circuit has open ports");
    return eval_fragment(graph, payloads, order).scalar_value();
}

// --------------------------- transposes and channels ------------------------

ChoiForm input_transpose(const OperatorFragment& f) {
    std::vector<std::string> in_labels;
    for (const auto& p : f.inputs()) in_labels.push_back(p.label);
    return ChoiForm{f.inputs(), f.outputs(), partial_transpose(f.op(), in_labels)};
}

OperatorFragment fragment_of_choi(const ChoiForm& c) {
    std::vector<std::string> in_labels;
    for (const auto& p : c.inputs) in_labels.push_back(p.label);
    return OperatorFragment(c.inputs, c.outputs, partial_transpose(c.matrix, in_labels));
}

ChoiForm link_product(const ChoiForm& m, const ChoiForm& n, const std::vector<std::string>& shared) {
    for (const auto& l : shared) {
        if (!m.matrix.space().contains(l) || !n.matrix.space().contains(l))
            throw LabelMismatch("link_product: label '" + l + "' missing on one side");
        if (m.matrix.space().dim_of(l) != n.matrix.space().dim_of(l))
            throw LabelMismatch("link_product: label '" + l + "' dims differ");
    }
    DenseHermitian mt = partial_transpose(m.matrix, shared);

    // Assemble as a label contraction: shared factors are matched pairs. Use
    // temporary names on the n side to keep the joint space collision-free.
    std::vector<Port> m_ports, n_ports;
    for (const auto& p : m.inputs) m_ports.push_back(p);
    for (const auto& p : m.outputs) m_ports.push_back(p);
    for (const auto& p : n.inputs) n_ports.push_back(p);
    for (const auto& p : n.outputs) n_ports.push_back(p);

    std::set<std::string> shared_set(shared.begin(), shared.end());
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> n_renames;
    for (const auto& f : n.matrix.space().factors())
        n_renames.push_back(shared_set.count(f.label) ? "__link:" + f.label : f.label);
    for (const auto& l : shared) pairs.push_back({l, "__link:" + l});

    // Treat both Choi matrices as port-less operator blobs for the contraction
    // arithmetic; ports are reattached afterwards.
    auto as_fragment = [](const DenseHermitian& h) {
        std::vector<Port> outs;
        for (const auto& f : h.space().factors()) outs.push_back({f.label, {f.label, f.dim}});
        return OperatorFragment({}, outs, h);
    };
    OperatorFragment fm = as_fragment(mt);
    OperatorFragment fn = as_fragment(n.matrix.relabeled(n_renames));
    OperatorFragment joined = contract_labels(fm, fn, pairs);

    // Result ports: the unshared ports of both, inputs from both sides first.
    std::vector<Port> ins, outs;
    for (const auto& p : m.inputs)
        if (!shared_set.count(p.label)) ins.push_back(p);
    for (const auto& p : n.inputs)
        if (!shared_set.count(p.label)) ins.push_back(p);
    for (const auto& p : m.outputs)
        if (!shared_set.count(p.label)) outs.push_back(p);
    for (const auto& p : n.outputs)
        if (!shared_set.count(p.label)) outs.push_back(p);
    std::vector<std::string> order;
    for (const auto& p : ins) order.push_back(p.label);
    for (const auto& p : outs) order.push_back(p.label);
    return ChoiForm{ins, outs, permute_factors(joined.op(), order)};
}

DenseHermitian apply_channel(const OperatorFragment& f, const DenseHermitian& state) {
    LabeledSpace in_space = f.input_space();
    if (state.space().total_dim() != in_space.total_dim())
        throw DimMismatch("apply_channel: state dim " + std::to_string(state.space().total_dim()) +
                          " vs input dim " + std::to_string(in_space.total_dim()));
    std::vector<int> sdims, idims;
    for (const auto& fa : state.space().factors()) sdims.push_back(fa.dim);
    for (const auto& fa : in_space.factors()) idims.push_back(fa.dim);
    if (sdims != idims) throw DimMismatch("apply_channel: state factor dims do not match inputs");

    DenseHermitian lifted = state.relabeled(in_space.labels());
    DenseHermitian big = kron(lifted, DenseHermitian::identity(f.output_space()));
    Matrix prod = big.matrix() * f.op().matrix();
    DenseHermitian herm(f.op().space(), (prod + prod.adjoint().eval()) / 2.0);
    return partial_trace(herm, in_space.labels());
}

DenseHermitian reverse_apply(const OperatorFragment& f, const DenseHermitian& effect) {
    LabeledSpace out_space = f.output_space();
    if (effect.space().total_dim() != out_space.total_dim())
        throw DimMismatch("reverse_apply: effect dim vs output dim mismatch");
    std::vector<int> edims, odims;
    for (const auto& fa : effect.space().factors()) edims.push_back(fa.dim);
    for (const auto& fa : out_space.factors()) odims.push_back(fa.dim);
    if (edims != odims) throw DimMismatch("reverse_apply: effect factor dims do not match outputs");

    DenseHermitian lifted = effect.relabeled(out_space.labels());
    DenseHermitian big = kron(DenseHermitian::identity(f.input_space()), lifted);
    Matrix prod = f.op().matrix() * big.matrix();
    DenseHermitian herm(f.op().space(), (prod + prod.adjoint().eval()) / 2.0);
    return partial_trace(herm, out_space.labels());
}

std::vector<Matrix> kraus_decompose(const OperatorFragment& f) {
    ChoiForm c = input_transpose(f);
    const int din = f.input_space().total_dim();
    const int dout = f.output_space().total_dim();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(c.matrix.matrix());
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("kraus_decompose: eigen failure");
    const auto& vals = solver.eigenvalues();
    const double neg_tol = 1e-9 * (1.0 + c.matrix.max_abs());
    if (vals(0) < -neg_tol)
        throw NotCP("kraus_decompose: Choi form has eigenvalue " + std::to_string(vals(0)));
    const double cutoff = 1e-10 * std::max(c.matrix.trace_real(), 0.0);
    std::vector<Matrix> terms;
    for (int k = vals.size() - 1; k >= 0; --k) {
        if (vals(k) <= cutoff || vals(k) <= 0.0) continue;
        Eigen::VectorXcd v = solver.eigenvectors().col(k) * std::sqrt(vals(k));
        Matrix E(dout, din);
        for (int i = 0; i < din; ++i)
            for (int o = 0; o < dout; ++o) E(o, i) = v(i * dout + o);
        terms.push_back(std::move(E));
    }
    return terms;
}

OperatorFragment operator_from_kraus(const std::vector<Matrix>& kraus, const SystemType& in_type,
                                     const SystemType& out_type) {
    const int din = in_type.dim, dout = out_type.dim;
    Matrix choi = Matrix::Zero(din * dout, din * dout);
    for (const auto& E : kraus) {
        if (E.rows() != dout || E.cols() != din)
            throw ShapeMismatch("operator_from_kraus: term is " + std::to_string(E.rows()) + "x" +
                                std::to_string(E.cols()) + ", want " + std::to_string(dout) + "x" +
                                std::to_string(din));
        Eigen::VectorXcd v(din * dout);
        for (int i = 0; i < din; ++i)
            for (int o = 0; o < dout; ++o) v(i * dout + o) = E(o, i);
        choi += v * v.adjoint();
    }
    OperatorFragment as_choi = OperatorFragment::channel(in_type, out_type, choi);
    DenseHermitian op = partial_transpose(as_choi.op(), {as_choi.inputs()[0].label});
    return OperatorFragment(as_choi.inputs(), as_choi.outputs(), op);
}

}  // namespace opc
