// SPDX-License-Identifier: Apache-2.0
// graph.hpp — typed circuit skeletons: nodes with typed ports, wires, the four
// wiring rules, topological layering, and synchronous-set queries.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opcircuits/errors.hpp"

namespace opc {

struct SystemType {
    std::string name;
    int dim = 1;

    bool operator==(const SystemType& o) const { return name == o.name && dim == o.dim; }
};

struct FragmentNode {
    std::string id;
    std::vector<SystemType> inputs;   // port k has index k+1
    std::vector<SystemType> outputs;
    std::string payload;  // operator name; empty for a symbolic placeholder
};

// A wire runs from (from, out port) to (to, in port); ports are 1-based.
struct Wire {
    std::string from;
    int out_port = 1;
    std::string to;
    int in_port = 1;

    bool operator==(const Wire& o) const {
        return from == o.from && out_port == o.out_port && to == o.to && in_port == o.in_port;
    }
};

enum class ViolationKind { UnknownNode, BadPortIndex, DuplicateWire, TypeMismatch, ClosedLoop };

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool is_circuit = false;  // valid and no open ports
    bool ok() const { return violations.empty(); }
};

struct OpenPort {
    std::string node;
    bool is_input = false;
    int port = 1;
    SystemType type;
};

class WireGraph {
public:
    void add_node(FragmentNode node);
    void add_wire(Wire wire);

    const std::vector<FragmentNode>& nodes() const { return nodes_; }
    const std::vector<Wire>& wires() const { return wires_; }
    const FragmentNode& node(const std::string& id) const;
    bool has_node(const std::string& id) const;

    ValidationReport validate() const;

    // Kahn layering: every wire runs from an earlier layer to a strictly later
    // one. Throws CyclicGraph.
    std::vector<std::vector<std::string>> topological_layers() const;

    // True iff no wire in the set is reachable by forward tracing from another
    // wire in the set. Throws UnknownWire.
    bool is_synchronous(const std::vector<Wire>& wires) const;

    // A synchronous wire set carries a composite system; its dimension is the
    // product of the member wire dims. Throws UnknownWire.
    long composite_dim(const std::vector<Wire>& wires) const;

    // Open (unwired) ports in deterministic order: per node (insertion order),
    // inputs then outputs, ascending port index.
    std::vector<OpenPort> open_ports() const;

private:
    std::vector<FragmentNode> nodes_;
    std::vector<Wire> wires_;

    bool wire_exists(const Wire& w) const;
    std::vector<std::vector<int>> successors() const;  // node index -> node indices
    int node_index(const std::string& id) const;       // -1 if absent
};

}  // namespace opc
