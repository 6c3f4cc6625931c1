// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace opc {

void WireGraph::add_node(FragmentNode node) {
    if (has_node(node.id)) throw Error("add_node: duplicate node id '" + node.id + "'");
    nodes_.push_back(std::move(node));
}

void WireGraph::add_wire(Wire wire) { wires_.push_back(std::move(wire)); }

bool WireGraph::has_node(const std::string& id) const { return node_index(id) >= 0; }

int WireGraph::node_index(const std::string& id) const {
    for (std::size_t k = 0; k < nodes_.size(); ++k)
        if (nodes_[k].id == id) return static_cast<int>(k);
    return -1;
}

const FragmentNode& WireGraph::node(const std::string& id) const {
    int k = node_index(id);
    if (k < 0) throw Error("no node '" + id + "'");
    return nodes_[k];
}

bool WireGraph::wire_exists(const Wire& w) const {
    return std::find(wires_.begin(), wires_.end(), w) != wires_.end();
}

std::vector<std::vector<int>> WireGraph::successors() const {
    std::vector<std::vector<int>> succ(nodes_.size());
    for (const auto& w : wires_) {
        int a = node_index(w.from), b = node_index(w.to);
        if (a >= 0 && b >= 0) succ[a].push_back(b);
    }
    return succ;
}

ValidationReport WireGraph::validate() const {
    ValidationReport rep;
    auto flag = [&rep](ViolationKind k, std::string msg) { rep.violations.push_back({k, std::move(msg)}); };

    // endpoints exist and port indices are in range and typed consistently
    std::map<std::pair<std::string, int>, int> out_use, in_use;
    for (const auto& w : wires_) {
        int a = node_index(w.from), b = node_index(w.to);
        if (a < 0) {
            flag(ViolationKind::UnknownNode, "wire source node '" + w.from + "' does not exist");
            continue;
        }
        if (b < 0) {
            flag(ViolationKind::UnknownNode, "wire target node '" + w.to + "' does not exist");
            continue;
        }
        const auto& na = nodes_[a];
        const auto& nb = nodes_[b];
        bool ports_ok = true;
        if (w.out_port < 1 || w.out_port > static_cast<int>(na.outputs.size())) {
            flag(ViolationKind::BadPortIndex,
                 w.from + " has no output port " + std::to_string(w.out_port));
            ports_ok = false;
        }
        if (w.in_port < 1 || w.in_port > static_cast<int>(nb.inputs.size())) {
            flag(ViolationKind::BadPortIndex, w.to + " has no input port " + std::to_string(w.in_port));
            ports_ok = false;
        }
        if (!ports_ok) continue;

        if (++out_use[{w.from, w.out_port}] == 2)
            flag(ViolationKind::DuplicateWire,
                 "output " + w.from + ".out" + std::to_string(w.out_port) + " carries more than one wire");
        if (++in_use[{w.to, w.in_port}] == 2)
            flag(ViolationKind::DuplicateWire,
                 "input " + w.to + ".in" + std::to_string(w.in_port) + " carries more than one wire");

        const SystemType& ta = na.outputs[w.out_port - 1];
        const SystemType& tb = nb.inputs[w.in_port - 1];
        if (!(ta == tb))
            flag(ViolationKind::TypeMismatch, "wire " + w.from + ".out" + std::to_string(w.out_port) +
                                                  " -> " + w.to + ".in" + std::to_string(w.in_port) +
                                                  " joins type " + ta.name + " to " + tb.name);
    }

    // closed loops: DFS cycle detection over node successors
    auto succ = successors();
    std::vector<int> state(nodes_.size(), 0);  // 0 unseen, 1 on stack, 2 done
    bool cyclic = false;
    std::vector<int> stack;
    for (std::size_t s = 0; s < nodes_.size() && !cyclic; ++s) {
        if (state[s]) continue;
        stack.push_back(static_cast<int>(s));
        std::vector<std::size_t> iter{0};
        state[s] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            if (iter.back() < succ[v].size()) {
                int w = succ[v][iter.back()++];
                if (state[w] == 1) {
                    cyclic = true;
                    break;
                }
                if (state[w] == 0) {
                    state[w] = 1;
                    stack.push_back(w);
                    iter.push_back(0);
                }
            } else {
                state[v] = 2;
                stack.pop_back();
                iter.pop_back();
            }
        }
    }
    if (cyclic) flag(ViolationKind::ClosedLoop, "tracing forward along wires returns to the same operation");

    rep.is_circuit = rep.violations.empty() && open_ports().empty();
    return rep;
}

std::vector<std::vector<std::string>> WireGraph::topological_layers() const {
    std::vector<int> indeg(nodes_.size(), 0);
    auto succ = successors();
    for (const auto& w : wires_) {
        int b = node_index(w.to);
        if (b >= 0 && node_index(w.from) >= 0) indeg[b]++;
    }

    std::vector<std::vector<std::string>> layers;
    std::vector<bool> placed(nodes_.size(), false);
    std::size_t done = 0;
    while (done < nodes_.size()) {
        std::vector<int> layer;
        for (std::size_t k = 0; k < nodes_.size(); ++k)
            if (!placed[k] && indeg[k] == 0) layer.push_back(static_cast<int>(k));
        if (layer.empty()) throw CyclicGraph("topological_layers: graph has a closed loop");
        std::vector<std::string> ids;
        for (int v : layer) {
            placed[v] = true;
            ++done;
            ids.push_back(nodes_[v].id);
        }
        // decrement after collecting the whole layer so parallel nodes share one
        for (int v : layer)
            for (int w : succ[v]) indeg[w]--;
        layers.push_back(std::move(ids));
    }
    return layers;
}

bool WireGraph::is_synchronous(const std::vector<Wire>& set) const {
    for (const auto& w : set)
        if (!wire_exists(w)) throw UnknownWire("is_synchronous: wire not in graph");

    auto succ = successors();
    // reach[v] = nodes reachable from v (inclusive of v only through forward steps)
    const std::size_t n = nodes_.size();
    std::vector<std::set<int>> reach(n);
    // repeated DFS is plenty at this scale
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<int> stack{static_cast<int>(s)};
        std::set<int> seen;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : succ[v])
                if (seen.insert(w).second) stack.push_back(w);
        }
        reach[s] = std::move(seen);
    }

    // wire w2 is reachable from wire w1 if w2's source node is w1's target node
    // or lies forward of it
    for (const auto& w1 : set) {
        int t = node_index(w1.to);
        for (const auto& w2 : set) {
            if (w1 == w2) continue;
            int s2 = node_index(w2.from);
            if (s2 == t || reach[t].count(s2)) return false;
        }
    }
    return true;
}

long WireGraph::composite_dim(const std::vector<Wire>& wires) const {
    long dim = 1;
    for (const auto& w : wires) {
        if (!wire_exists(w)) throw UnknownWire("composite_dim: wire not in graph");
        dim *= node(w.from).outputs[w.out_port - 1].dim;
    }
    return dim;
}

std::vector<OpenPort> WireGraph::open_ports() const {
    std::set<std::pair<std::string, int>> wired_out, wired_in;
    for (const auto& w : wires_) {
        wired_out.insert({w.from, w.out_port});
        wired_in.insert({w.to, w.in_port});
    }
    std::vector<OpenPort> open;
    for (const auto& n : nodes_) {
        for (int k = 1; k <= static_cast<int>(n.inputs.size()); ++k)
            if (!wired_in.count({n.id, k})) open.push_back({n.id, true, k, n.inputs[k - 1]});
        for (int k = 1; k <= static_cast<int>(n.outputs.size()); ++k)
            if (!wired_out.count({n.id, k})) open.push_back({n.id, false, k, n.outputs[k - 1]});
    }
    return open;
}

}  // namespace opc
