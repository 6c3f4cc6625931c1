// SPDX-License-Identifier: Apache-2.0
// dsl.hpp — the line-oriented circuit description language, the operator
// library file format, directive execution, and the dot emitter.
//
// Grammar (one statement per line, '#' starts a comment):
//   type IDENT dim INT
//   op IDENT : TYPE* -> TYPE* [= lib "PATH" | = GADGET(ARGS)]
//   node IDENT uses IDENT
//   wire IDENT.outINT -> IDENT.inINT
//   eval | physical IDENT | ratio IDENT IDENT | render "PATH"
//
// Gadget sources: cnot(), maxent(), bloch(x,y,z), filter(TYPE,[n,...]),
// basis(TYPE,n), ident(TYPE). The op's signature picks the role.

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "opcircuits/fragment.hpp"

namespace opc::dsl {

struct Diagnostic {
    int line = 0;
    int col = 0;
    std::string message;
};

struct TypeDecl {
    std::string name;
    int dim = 1;
    bool operator==(const TypeDecl& o) const { return name == o.name && dim == o.dim; }
};

struct SourceRef {
    enum Kind { None, Lib, Gadget } kind = None;
    std::string lib_path;              // Lib
    std::string gadget;                // Gadget: callee name
    std::vector<double> numbers;       // scalar arguments in order
    std::vector<std::string> idents;   // identifier arguments in order
    std::vector<int> list;             // one bracketed integer list
    bool operator==(const SourceRef& o) const {
        return kind == o.kind && lib_path == o.lib_path && gadget == o.gadget &&
               numbers == o.numbers && idents == o.idents && list == o.list;
    }
};

struct OpDecl {
    std::string name;
    std::vector<std::string> in_types, out_types;
    SourceRef source;
    int line = 0;
    bool operator==(const OpDecl& o) const {
        return name == o.name && in_types == o.in_types && out_types == o.out_types &&
               source == o.source;
    }
};

struct NodeDecl {
    std::string name, op;
    int line = 0;
    bool operator==(const NodeDecl& o) const { return name == o.name && op == o.op; }
};

struct WireDecl {
    std::string from;
    int out_port = 1;
    std::string to;
    int in_port = 1;
    int line = 0;
    bool operator==(const WireDecl& o) const {
        return from == o.from && out_port == o.out_port && to == o.to && in_port == o.in_port;
    }
};

struct Directive {
    enum Kind { Eval, Physical, Ratio, Render } kind = Eval;
    std::string a, b;
    int line = 0;
    bool operator==(const Directive& o) const { return kind == o.kind && a == o.a && b == o.b; }
};

struct CircuitDocument {
    std::vector<TypeDecl> types;
    std::vector<OpDecl> ops;
    std::vector<NodeDecl> nodes;
    std::vector<WireDecl> wires;
    std::vector<Directive> directives;

    bool operator==(const CircuitDocument& o) const {
        return types == o.types && ops == o.ops && nodes == o.nodes && wires == o.wires &&
               directives == o.directives;
    }
};

struct ParseResult {
    CircuitDocument doc;
    std::vector<Diagnostic> diagnostics;  // capped at 20; parsing continues past errors
    bool ok() const { return diagnostics.empty(); }
};

ParseResult parse(const std::string& text);

// Canonical formatting; parse(pretty(doc)).doc == doc.
std::string pretty(const CircuitDocument& doc);

// ------------------------------- operator library ---------------------------

struct LibraryEntry {
    std::string name;
    std::vector<std::string> in_types, out_types;
    Matrix matrix;  // Hermitian, row-major [re, im] pairs on disk
};

struct OperatorLibrary {
    std::vector<TypeDecl> types;
    std::vector<LibraryEntry> entries;
};

// Throws IOFailure, FormatError, HermiticityViolation.
OperatorLibrary load_library(const std::string& path);
void save_library(const OperatorLibrary& lib, const std::string& path);

// ---------------------------------- resolution ------------------------------

struct ResolvedDocument {
    std::map<std::string, SystemType> types;
    std::map<std::string, OperatorFragment> operators;  // by op name
    WireGraph graph;
    std::map<std::string, OperatorFragment> payloads;   // by node id
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

// base_dir anchors relative library paths.
ResolvedDocument resolve(const CircuitDocument& doc, const std::string& base_dir);

// ------------------------------------ running -------------------------------

struct RunOptions {
    ContractionOrder order = ContractionOrder::Auto;
    double tol = 1e-8;          // proportionality tolerance for `ratio`
    std::string render_override;  // when set, `render` writes here instead
};

// Executes the document's directives in order, printing one line each to `out`.
// Returns 0 on success, 1 on validation/engine failure.
int run(const CircuitDocument& doc, const std::string& base_dir, const RunOptions& options,
        std::ostream& out);

// Deterministic dot rendering: one record node per fragment, one edge per wire
// labeled with its type name.
std::string emit_dot(const WireGraph& graph);

// Shortest round-trippable decimal form (used by pretty and the library
// writer).
std::string format_number(double v);

}  // namespace opc::dsl
