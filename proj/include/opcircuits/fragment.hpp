// SPDX-License-Identifier: Apache-2.0
// fragment.hpp — operator fragments and the circuit trace.
//
// An OperatorFragment is a Hermitian operator on [input factors..., output
// factors...] plus port metadata. Wiring fragments together multiplies on the
// matched factors and partial-traces them; a fully wired circuit evaluates to
// a real number.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opcircuits/graph.hpp"
#include "opcircuits/linalg.hpp"

namespace opc {

struct Port {
    std::string label;  // the factor label inside the operator's space
    SystemType type;
};

class OperatorFragment {
public:
    // op.space must list the input factors then the output factors, with dims
    // matching the port types.
    OperatorFragment(std::vector<Port> inputs, std::vector<Port> outputs, DenseHermitian op);

    const std::vector<Port>& inputs() const { return inputs_; }
    const std::vector<Port>& outputs() const { return outputs_; }
    const DenseHermitian& op() const { return op_; }

    bool is_scalar() const { return inputs_.empty() && outputs_.empty(); }
    // Value of a 0-port fragment; imaginary residue above 1e-10 is reported on
    // stderr and discarded.
    double scalar_value() const;

    LabeledSpace input_space() const;
    LabeledSpace output_space() const;

    // Fresh copy with every factor label prefixed (for wiring distinct uses).
    OperatorFragment with_prefix(const std::string& prefix) const;

    // -------- constructors for the common shapes --------
    static OperatorFragment preparation(const SystemType& t, const Matrix& state);
    static OperatorFragment result(const SystemType& t, const Matrix& effect);
    static OperatorFragment channel(const SystemType& in, const SystemType& out, const Matrix& op);
    static OperatorFragment scalar(double value);
    // Multi-port variants; labels are generated as i1.. / o1..
    static OperatorFragment make(const std::vector<SystemType>& ins, const std::vector<SystemType>& outs,
                                 const Matrix& op);

private:
    std::vector<Port> inputs_, outputs_;
    DenseHermitian op_;
};

// The input transpose of a fragment; for physical fragments this is PSD.
struct ChoiForm {
    std::vector<Port> inputs, outputs;
    DenseHermitian matrix;
};

// ---------------------------------- wiring ----------------------------------

// Wire a's output ports into b's input ports (1-based index pairs); multiply on
// the matched factors and trace them out. Zero pairs degenerates to the tensor
// product. Throws TypeMismatchError, LabelCollision.
OperatorFragment contract(const OperatorFragment& a, const OperatorFragment& b,
                          const std::vector<std::pair<int, int>>& pairs);

// Generalized two-fragment contraction by factor label pairs (either side may
// own the output end); used by the circuit evaluator.
OperatorFragment contract_labels(const OperatorFragment& a, const OperatorFragment& b,
                                 const std::vector<std::pair<std::string, std::string>>& label_pairs);

enum class ContractionOrder { Auto, Greedy, Optimal, Naive };

// Evaluate a closed circuit to its trace value. Payloads map node id to the
// fragment standing on that node. Throws OpenPorts, InvalidGraph.
double eval_circuit(const WireGraph& graph, const std::map<std::string, OperatorFragment>& payloads,
                    ContractionOrder order = ContractionOrder::Auto);

// Contract an arbitrary (open) fragment graph down to a single fragment.
OperatorFragment eval_fragment(const WireGraph& graph,
                               const std::map<std::string, OperatorFragment>& payloads,
                               ContractionOrder order = ContractionOrder::Auto);

// --------------------------- transposes and channels ------------------------

ChoiForm input_transpose(const OperatorFragment& f);
OperatorFragment fragment_of_choi(const ChoiForm& c);  // inverse of input_transpose

// Link product over shared factor labels: Tr_shared[(m^T_shared ⊗ I)(n ⊗ I)].
// Equals input_transpose(contract(...)) of the corresponding fragments.
ChoiForm link_product(const ChoiForm& m, const ChoiForm& n, const std::vector<std::string>& shared);

// Forward map: state on the input space -> operator on the output space.
DenseHermitian apply_channel(const OperatorFragment& f, const DenseHermitian& state);

// Backward map: effect on the output space -> operator on the input space.
DenseHermitian reverse_apply(const OperatorFragment& f, const DenseHermitian& effect);

// Kraus terms (out_dim x in_dim) of a CP fragment; term count = Choi rank (with
// eigenvalues below 1e-10 * trace dropped). Throws NotCP.
std::vector<Matrix> kraus_decompose(const OperatorFragment& f);

// Fragment realizing rho -> sum_i E_i rho E_i^dag. Throws ShapeMismatch.
OperatorFragment operator_from_kraus(const std::vector<Matrix>& kraus, const SystemType& in_type,
                                     const SystemType& out_type);

}  // namespace opc
