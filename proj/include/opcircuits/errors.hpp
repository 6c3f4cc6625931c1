// SPDX-License-Identifier: Apache-2.0
// errors.hpp — exception types shared across the engine

#pragma once

#include <stdexcept>
#include <string>

namespace opc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define OPC_DEFINE_ERROR(NAME)                      \
    struct NAME : Error {                           \
        using Error::Error;                         \
    }

// linalg
OPC_DEFINE_ERROR(LabelCollision);
OPC_DEFINE_ERROR(UnknownLabel);
OPC_DEFINE_ERROR(BasisDimensionMismatch);
OPC_DEFINE_ERROR(ConvergenceFailure);
OPC_DEFINE_ERROR(NotAPermutation);
OPC_DEFINE_ERROR(HermiticityViolation);

// graphs and fragments
OPC_DEFINE_ERROR(UnknownWire);
OPC_DEFINE_ERROR(CyclicGraph);
OPC_DEFINE_ERROR(TypeMismatchError);
OPC_DEFINE_ERROR(CycleCreated);
OPC_DEFINE_ERROR(OpenPorts);
OPC_DEFINE_ERROR(InvalidGraph);
OPC_DEFINE_ERROR(DimMismatch);
OPC_DEFINE_ERROR(LabelMismatch);
OPC_DEFINE_ERROR(NotCP);
OPC_DEFINE_ERROR(ShapeMismatch);

// duotensors
OPC_DEFINE_ERROR(SingularMetric);
OPC_DEFINE_ERROR(SingularTransform);

// physicality and gadgets
OPC_DEFINE_ERROR(StructureMismatch);
OPC_DEFINE_ERROR(ZeroDenominator);
OPC_DEFINE_ERROR(NotNormalized);
OPC_DEFINE_ERROR(AssemblyError);
OPC_DEFINE_ERROR(NotComplete);
OPC_DEFINE_ERROR(OrthonormalityFailure);

// reconstruction checks
OPC_DEFINE_ERROR(EmptySet);
OPC_DEFINE_ERROR(RangeTooSmall);

// dsl / io
OPC_DEFINE_ERROR(IOFailure);
OPC_DEFINE_ERROR(FormatError);
OPC_DEFINE_ERROR(UnresolvedName);

#undef OPC_DEFINE_ERROR

}  // namespace opc
