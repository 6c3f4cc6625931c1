// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "opcircuits/gadgets.hpp"
#include "opcircuits/physicality.hpp"

namespace opc::dsl {

std::string format_number(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string fmt_fixed12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12f", v);
    return buf;
}

// prints with at least one decimal digit so magnitudes read as reals
std::string fmt_real(double v) {
    std::string s = format_number(v);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

// ------------------------------------ lexer ---------------------------------

enum class Tok { Ident, Int, Float, Punct, Str, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    long long integer = 0;
    int col = 0;
};

struct LineLexer {
    const std::string& s;
    int line;
    std::size_t pos = 0;
    std::vector<Diagnostic>* diags;

    void error(int col, const std::string& msg) const {
        if (diags->size() < 20) diags->push_back({line, col, msg});
    }

    std::vector<Token> all() {
        std::vector<Token> out;
        while (true) {
            Token t = next();
            if (t.kind == Tok::End) break;
            out.push_back(std::move(t));
        }
        return out;
    }

    Token next() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
        if (pos >= s.size() || s[pos] == '#') return {};
        const int col = static_cast<int>(pos) + 1;
        const char c = s[pos];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            return {Tok::Ident, s.substr(start, pos - start), 0.0, 0, col};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
            (c == '.' && pos + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[pos + 1])))) {
            // "->" is punctuation, not a number sign
            if (c == '-' && pos + 1 < s.size() && s[pos + 1] == '>') {
                pos += 2;
                return {Tok::Punct, "->", 0.0, 0, col};
            }
            std::size_t start = pos;
            if (c == '-' || c == '+') ++pos;
            bool is_float = false;
            while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) ||
                                      s[pos] == '.' || s[pos] == 'e' || s[pos] == 'E' ||
                                      ((s[pos] == '-' || s[pos] == '+') && pos > start &&
                                       (s[pos - 1] == 'e' || s[pos - 1] == 'E')))) {
                if (s[pos] == '.' || s[pos] == 'e' || s[pos] == 'E') is_float = true;
                ++pos;
            }
            const std::string text = s.substr(start, pos - start);
            Token t{is_float ? Tok::Float : Tok::Int, text, 0.0, 0, col};
            try {
                t.number = std::stod(text);
                if (!is_float) t.integer = std::stoll(text);
            } catch (...) {
                error(col, "malformed number '" + text + "'");
            }
            return t;
        }
        if (c == '"') {
            std::size_t end = s.find('"', pos + 1);
            if (end == std::string::npos) {
                error(col, "unterminated string");
                pos = s.size();
                return {Tok::Str, "", 0.0, 0, col};
            }
            std::string text = s.substr(pos + 1, end - pos - 1);
            pos = end + 1;
            return {Tok::Str, std::move(text), 0.0, 0, col};
        }
        static const std::string puncts = ":.,()[]=";
        if (puncts.find(c) != std::string::npos) {
            ++pos;
            return {Tok::Punct, std::string(1, c), 0.0, 0, col};
        }
        error(col, std::string("unexpected character '") + c + "'");
        ++pos;
        return next();
    }
};

// ------------------------------- statement parser ----------------------------

struct LineParser {
    std::vector<Token> toks;
    std::size_t k = 0;
    int line;
    std::vector<Diagnostic>* diags;

    bool failed = false;

    void error(const std::string& msg) {
        if (!failed && diags->size() < 20) {
            const int col = k < toks.size() ? toks[k].col : (toks.empty() ? 1 : toks.back().col + 1);
            diags->push_back({line, col, msg});
        }
        failed = true;
    }

    bool done() const { return k >= toks.size(); }
    const Token* peek() const { return k < toks.size() ? &toks[k] : nullptr; }

    bool accept_punct(const std::string& p) {
        if (k < toks.size() && toks[k].kind == Tok::Punct && toks[k].text == p) {
            ++k;
            return true;
        }
        return false;
    }

    void expect_punct(const std::string& p) {
        if (!accept_punct(p)) error("expected '" + p + "'");
    }

    std::string expect_ident(const std::string& what) {
        if (k < toks.size() && toks[k].kind == Tok::Ident) return toks[k++].text;
        error("expected " + what);
        return "";
    }

    long long expect_int(const std::string& what) {
        if (k < toks.size() && toks[k].kind == Tok::Int) return toks[k++].integer;
        error("expected " + what);
        return 0;
    }

    double expect_number(const std::string& what) {
        if (k < toks.size() && (toks[k].kind == Tok::Int || toks[k].kind == Tok::Float))
            return toks[k++].number;
        error("expected " + what);
        return 0.0;
    }

    std::string expect_string(const std::string& what) {
        if (k < toks.size() && toks[k].kind == Tok::Str) return toks[k++].text;
        error("expected " + what);
        return "";
    }

    void expect_end() {
        if (!done()) error("trailing tokens");
    }
};

// port reference "name.outN" / "name.inN"; returns (node, is_input, port)
bool parse_port(LineParser& p, std::string& node, bool& is_input, int& port) {
    node = p.expect_ident("node name");
    p.expect_punct(".");
    const std::string ref = p.expect_ident("port (outN or inN)");
    if (p.failed) return false;
    std::string prefix;
    if (ref.rfind("out", 0) == 0)
        prefix = "out";
    else if (ref.rfind("in", 0) == 0)
        prefix = "in";
    else {
        p.error("port must be outN or inN, got '" + ref + "'");
        return false;
    }
    is_input = prefix == "in";
    const std::string digits = ref.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        p.error("port must be outN or inN, got '" + ref + "'");
        return false;
    }
    port = std::stoi(digits);
    return true;
}

SourceRef parse_source(LineParser& p) {
    SourceRef src;
    if (p.peek() && p.peek()->kind == Tok::Ident && p.peek()->text == "lib") {
        ++p.k;
        src.kind = SourceRef::Lib;
        src.lib_path = p.expect_string("library path string");
        return src;
    }
    src.kind = SourceRef::Gadget;
    src.gadget = p.expect_ident("gadget name");
    p.expect_punct("(");
    bool first = true;
    while (!p.failed && !p.accept_punct(")")) {
        if (!first) p.expect_punct(",");
        first = false;
        if (p.failed) break;
        const Token* t = p.peek();
        if (!t) {
            p.error("unterminated gadget call");
            break;
        }
        if (t->kind == Tok::Ident) {
            src.idents.push_back(t->text);
            ++p.k;
        } else if (t->kind == Tok::Int || t->kind == Tok::Float) {
            src.numbers.push_back(t->number);
            ++p.k;
        } else if (t->kind == Tok::Punct && t->text == "[") {
            ++p.k;
            bool ifirst = true;
            while (!p.failed && !p.accept_punct("]")) {
                if (!ifirst) p.expect_punct(",");
                ifirst = false;
                src.list.push_back(static_cast<int>(p.expect_int("integer list entry")));
            }
        } else {
            p.error("unexpected gadget argument");
            break;
        }
    }
    return src;
}

}  // namespace

ParseResult parse(const std::string& text) {
    ParseResult result;
    std::vector<Diagnostic>& diags = result.diagnostics;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        LineLexer lex{raw, line_no, 0, &diags};
        auto toks = lex.all();
        if (toks.empty()) continue;
        LineParser p{std::move(toks), 0, line_no, &diags};

        const Token& head = p.toks[0];
        if (head.kind != Tok::Ident) {
            p.error("statement must start with a keyword");
            continue;
        }
        ++p.k;
        if (head.text == "type") {
            TypeDecl d;
            d.name = p.expect_ident("type name");
            if (p.expect_ident("keyword 'dim'") != "dim" && !p.failed) p.error("expected 'dim'");
            d.dim = static_cast<int>(p.expect_int("dimension"));
            p.expect_end();
            if (!p.failed) result.doc.types.push_back(std::move(d));
        } else if (head.text == "op") {
            OpDecl d;
            d.line = line_no;
            d.name = p.expect_ident("operator name");
            p.expect_punct(":");
            while (!p.failed && p.peek() && p.peek()->kind == Tok::Ident)
                d.in_types.push_back(p.toks[p.k++].text);
            p.expect_punct("->");
            while (!p.failed && p.peek() && p.peek()->kind == Tok::Ident) {
                // "= lib ..." starts with '='; idents here are out types
                d.out_types.push_back(p.toks[p.k++].text);
            }
            if (p.accept_punct("=")) d.source = parse_source(p);
            p.expect_end();
            if (!p.failed) result.doc.ops.push_back(std::move(d));
        } else if (head.text == "node") {
            NodeDecl d;
            d.line = line_no;
            d.name = p.expect_ident("node name");
            if (p.expect_ident("keyword 'uses'") != "uses" && !p.failed) p.error("expected 'uses'");
            d.op = p.expect_ident("operator name");
            p.expect_end();
            if (!p.failed) result.doc.nodes.push_back(std::move(d));
        } else if (head.text == "wire") {
            WireDecl d;
            d.line = line_no;
            bool in1 = false, in2 = false;
            if (!parse_port(p, d.from, in1, d.out_port)) continue;
            p.expect_punct("->");
            if (!parse_port(p, d.to, in2, d.in_port)) continue;
            p.expect_end();
            if (!p.failed && in1) p.error("wire must start at an output port");
            if (!p.failed && !in2) p.error("wire must end at an input port");
            if (!p.failed) result.doc.wires.push_back(std::move(d));
        } else if (head.text == "eval") {
            p.expect_end();
            if (!p.failed) result.doc.directives.push_back({Directive::Eval, "", "", line_no});
        } else if (head.text == "physical") {
            Directive d{Directive::Physical, p.expect_ident("operator name"), "", line_no};
            p.expect_end();
            if (!p.failed) result.doc.directives.push_back(std::move(d));
        } else if (head.text == "ratio") {
            Directive d{Directive::Ratio, p.expect_ident("operator name"),
                        p.expect_ident("operator name"), line_no};
            p.expect_end();
            if (!p.failed) result.doc.directives.push_back(std::move(d));
        } else if (head.text == "render") {
            Directive d{Directive::Render, p.expect_string("output path string"), "", line_no};
            p.expect_end();
            if (!p.failed) result.doc.directives.push_back(std::move(d));
        } else {
            p.k = 0;
            p.error("unknown keyword '" + head.text + "'");
        }
    }
    return result;
}

// ----------------------------------- pretty ---------------------------------

std::string pretty(const CircuitDocument& doc) {
    std::ostringstream out;
    for (const auto& t : doc.types) out << "type " << t.name << " dim " << t.dim << "\n";
    for (const auto& o : doc.ops) {
        out << "op " << o.name << " :";
        for (const auto& t : o.in_types) out << " " << t;
        out << " ->";
        for (const auto& t : o.out_types) out << " " << t;
        if (o.source.kind == SourceRef::Lib) {
            out << " = lib \"" << o.source.lib_path << "\"";
        } else if (o.source.kind == SourceRef::Gadget) {
            out << " = " << o.source.gadget << "(";
            bool first = true;
            for (const auto& id : o.source.idents) {
                if (!first) out << ", ";
                first = false;
                out << id;
            }
            for (double v : o.source.numbers) {
                if (!first) out << ", ";
                first = false;
                out << format_number(v);
            }
            if (!o.source.list.empty()) {
                if (!first) out << ", ";
                out << "[";
                for (std::size_t k = 0; k < o.source.list.size(); ++k)
                    out << (k ? ", " : "") << o.source.list[k];
                out << "]";
            }
            out << ")";
        }
        out << "\n";
    }
    for (const auto& n : doc.nodes) out << "node " << n.name << " uses " << n.op << "\n";
    for (const auto& w : doc.wires)
        out << "wire " << w.from << ".out" << w.out_port << " -> " << w.to << ".in" << w.in_port
            << "\n";
    for (const auto& d : doc.directives) {
        switch (d.kind) {
            case Directive::Eval: out << "eval\n"; break;
            case Directive::Physical: out << "physical " << d.a << "\n"; break;
            case Directive::Ratio: out << "ratio " << d.a << " " << d.b << "\n"; break;
            case Directive::Render: out << "render \"" << d.a << "\"\n"; break;
        }
    }
    return out.str();
}

// ------------------------------- operator library ---------------------------

namespace {

std::string join_path(const std::string& dir, const std::string& rel) {
    if (rel.empty() || rel.front() == '/') return rel;
    if (dir.empty()) return rel;
    return dir.back() == '/' ? dir + rel : dir + "/" + rel;
}

}  // namespace

OperatorLibrary load_library(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailure("cannot open library file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    // libraries reuse the document lexer; matrices may span lines, so tokenize
    // the whole file with line tracking
    std::vector<Diagnostic> diags;
    std::vector<Token> toks;
    std::vector<int> tok_lines;
    {
        std::istringstream lines(text);
        std::string raw;
        int line_no = 0;
        while (std::getline(lines, raw)) {
            ++line_no;
            LineLexer lex{raw, line_no, 0, &diags};
            for (auto& t : lex.all()) {
                toks.push_back(t);
                tok_lines.push_back(line_no);
            }
        }
    }
    if (!diags.empty())
        throw FormatError("line " + std::to_string(diags[0].line) + ": " + diags[0].message);

    OperatorLibrary lib;
    std::size_t k = 0;
    auto fail = [&](const std::string& msg) -> void {
        const int line = k < tok_lines.size() ? tok_lines[k] : (tok_lines.empty() ? 1 : tok_lines.back());
        throw FormatError("line " + std::to_string(line) + ": " + msg);
    };
    auto expect_ident = [&]() {
        if (k >= toks.size() || toks[k].kind != Tok::Ident) fail("expected identifier");
        return toks[k++].text;
    };
    auto expect_punct = [&](const std::string& p) {
        if (k >= toks.size() || toks[k].kind != Tok::Punct || toks[k].text != p)
            fail("expected '" + p + "'");
        ++k;
    };
    auto expect_number = [&]() {
        if (k >= toks.size() || (toks[k].kind != Tok::Int && toks[k].kind != Tok::Float))
            fail("expected number");
        return toks[k++].number;
    };

    std::map<std::string, int> dims;
    while (k < toks.size()) {
        const std::string kw = expect_ident();
        if (kw == "type") {
            TypeDecl t;
            t.name = expect_ident();
            if (expect_ident() != "dim") fail("expected 'dim'");
            t.dim = static_cast<int>(expect_number());
            dims[t.name] = t.dim;
            lib.types.push_back(std::move(t));
        } else if (kw == "op") {
            LibraryEntry e;
            e.name = expect_ident();
            expect_punct(":");
            while (k < toks.size() && toks[k].kind == Tok::Ident) e.in_types.push_back(toks[k++].text);
            expect_punct("->");
            while (k < toks.size() && toks[k].kind == Tok::Ident) e.out_types.push_back(toks[k++].text);
            expect_punct("=");
            expect_punct("[");
            std::vector<cxd> entries;
            while (k < toks.size() && !(toks[k].kind == Tok::Punct && toks[k].text == "]")) {
                expect_punct("[");
                const double re = expect_number();
                expect_punct(",");
                const double im = expect_number();
                expect_punct("]");
                entries.push_back(cxd(re, im));
                if (k < toks.size() && toks[k].kind == Tok::Punct && toks[k].text == ",") ++k;
            }
            expect_punct("]");

            long dim = 1;
            for (const auto& t : e.in_types) {
                if (!dims.count(t)) fail("entry '" + e.name + "' uses undeclared type '" + t + "'");
                dim *= dims[t];
            }
            for (const auto& t : e.out_types) {
                if (!dims.count(t)) fail("entry '" + e.name + "' uses undeclared type '" + t + "'");
                dim *= dims[t];
            }
            if (static_cast<long>(entries.size()) != dim * dim)
                fail("entry '" + e.name + "' has " + std::to_string(entries.size()) +
                     " matrix entries, types require " + std::to_string(dim * dim));
            e.matrix.resize(dim, dim);
            for (long r = 0; r < dim; ++r)
                for (long c = 0; c < dim; ++c) e.matrix(r, c) = entries[r * dim + c];
            const double scale = e.matrix.cwiseAbs().maxCoeff();
            if ((e.matrix - e.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale))
                throw HermiticityViolation("library entry '" + e.name + "' is not Hermitian");
            lib.entries.push_back(std::move(e));
        } else {
            --k;
            fail("expected 'type' or 'op', got '" + kw + "'");
        }
    }
    return lib;
}

void save_library(const OperatorLibrary& lib, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOFailure("cannot write library file '" + path + "'");
    for (const auto& t : lib.types) out << "type " << t.name << " dim " << t.dim << "\n";
    for (const auto& e : lib.entries) {
        out << "op " << e.name << " :";
        for (const auto& t : e.in_types) out << " " << t;
        out << " ->";
        for (const auto& t : e.out_types) out << " " << t;
        out << " = [\n";
        for (long r = 0; r < e.matrix.rows(); ++r) {
            out << "  ";
            for (long c = 0; c < e.matrix.cols(); ++c) {
                out << "[" << format_number(e.matrix(r, c).real()) << ", "
                    << format_number(e.matrix(r, c).imag()) << "]";
                if (r + 1 < e.matrix.rows() || c + 1 < e.matrix.cols()) out << ",";
                if (c + 1 < e.matrix.cols()) out << " ";
            }
            out << "\n";
        }
        out << "]\n";
    }
    if (!out) throw IOFailure("write to '" + path + "' failed");
}

// ---------------------------------- resolution ------------------------------

namespace {

void diag(std::vector<Diagnostic>& ds, int line, const std::string& msg) {
    if (ds.size() < 20) ds.push_back({line, 1, msg});
}

// role-aware gadget construction; port types rebind to the op's declared
// signature types
bool build_gadget(const OpDecl& op, const std::vector<SystemType>& ins,
                  const std::vector<SystemType>& outs, const std::map<std::string, SystemType>& types,
                  std::vector<Diagnostic>& ds, std::map<std::string, OperatorFragment>& out) {
    const auto& src = op.source;
    auto type_of = [&](const std::string& name) -> const SystemType* {
        auto it = types.find(name);
        if (it == types.end()) {
            diag(ds, op.line, "op " + op.name + ": unknown type '" + name + "'");
            return nullptr;
        }
        return &it->second;
    };
    auto all_qubits = [&](const std::vector<SystemType>& ts) {
        for (const auto& t : ts)
            if (t.dim != 2) return false;
        return true;
    };
    const std::size_t nin = ins.size(), nout = outs.size();
    auto emplace = [&](const OperatorFragment& raw) {
        out.emplace(op.name, OperatorFragment::make(ins, outs, raw.op().matrix()));
    };

    try {
        if (src.gadget == "cnot") {
            if (nin != 2 || nout != 2 || !all_qubits(ins) || !all_qubits(outs)) {
                diag(ds, op.line, "op " + op.name + ": cnot() needs signature q q -> q q with dim-2 types");
                return false;
            }
            emplace(cnot_fragment());
            return true;
        }
        if (src.gadget == "maxent") {
            if (!((nin == 0 && nout == 2 && all_qubits(outs)) ||
                  (nin == 2 && nout == 0 && all_qubits(ins)))) {
                diag(ds, op.line, "op " + op.name + ": maxent() needs -> q q or q q -> with dim-2 types");
                return false;
            }
            emplace(max_entangled(nin == 0 ? Role::Preparation : Role::Result));
            return true;
        }
        if (src.gadget == "bloch") {
            if (src.numbers.size() != 3) {
                diag(ds, op.line, "op " + op.name + ": bloch(x, y, z) takes three numbers");
                return false;
            }
            if (!((nin == 0 && nout == 1 && all_qubits(outs)) ||
                  (nin == 1 && nout == 0 && all_qubits(ins)))) {
                diag(ds, op.line, "op " + op.name + ": bloch() needs -> q or q -> with a dim-2 type");
                return false;
            }
            emplace(bloch_state(BlochPoint(src.numbers[0], src.numbers[1], src.numbers[2]),
                                nin == 0 ? Role::Preparation : Role::Result));
            return true;
        }
        if (src.gadget == "filter") {
            if (src.idents.size() != 1 || src.list.empty()) {
                diag(ds, op.line, "op " + op.name + ": filter(TYPE, [n, ...]) expected");
                return false;
            }
            const SystemType* t = type_of(src.idents[0]);
            if (!t) return false;
            if (nin != 1 || nout != 1 || op.in_types[0] != src.idents[0] ||
                op.out_types[0] != src.idents[0]) {
                diag(ds, op.line, "op " + op.name + ": filter signature must be " + t->name + " -> " +
                                      t->name);
                return false;
            }
            emplace(filter_fragment(Subspace::computational(*t, src.list)));
            return true;
        }
        if (src.gadget == "basis") {
            if (src.idents.size() != 1 || src.numbers.size() != 1) {
                diag(ds, op.line, "op " + op.name + ": basis(TYPE, n) expected");
                return false;
            }
            const SystemType* t = type_of(src.idents[0]);
            if (!t) return false;
            const int n = static_cast<int>(src.numbers[0]);
            if (n < 1 || n > t->dim) {
                diag(ds, op.line, "op " + op.name + ": basis index out of range");
                return false;
            }
            Matrix m = Matrix::Zero(t->dim, t->dim);
            m(n - 1, n - 1) = 1.0;
            if (nin == 0 && nout == 1 && op.out_types[0] == src.idents[0])
                emplace(OperatorFragment::preparation(*t, m));
            else if (nin == 1 && nout == 0 && op.in_types[0] == src.idents[0])
                emplace(OperatorFragment::result(*t, m));
            else {
                diag(ds, op.line, "op " + op.name + ": basis() needs -> TYPE or TYPE ->");
                return false;
            }
            return true;
        }
        if (src.gadget == "ident") {
            if (src.idents.size() != 1) {
                diag(ds, op.line, "op " + op.name + ": ident(TYPE) expected");
                return false;
            }
            const SystemType* t = type_of(src.idents[0]);
            if (!t) return false;
            if (nin == 1 && nout == 1 && op.in_types[0] == src.idents[0] &&
                op.out_types[0] == src.idents[0])
                emplace(identity_channel(*t));
            else if (nin == 1 && nout == 0 && op.in_types[0] == src.idents[0])
                emplace(deterministic_effect(*t));
            else {
                diag(ds, op.line, "op " + op.name + ": ident() needs TYPE -> TYPE or TYPE ->");
                return false;
            }
            return true;
        }
    } catch (const Error& e) {
        diag(ds, op.line, "op " + op.name + ": " + e.what());
        return false;
    }
    diag(ds, op.line, "op " + op.name + ": unknown gadget '" + src.gadget + "'");
    return false;
}

}  // namespace

ResolvedDocument resolve(const CircuitDocument& doc, const std::string& base_dir) {
    ResolvedDocument r;
    auto& ds = r.diagnostics;

    for (const auto& t : doc.types) {
        if (t.dim < 1) {
            diag(ds, 0, "type " + t.name + ": dim must be >= 1");
            continue;
        }
        if (!r.types.emplace(t.name, SystemType{t.name, t.dim}).second)
            diag(ds, 0, "type " + t.name + " declared twice");
    }

    std::map<std::string, OperatorLibrary> libs;
    for (const auto& op : doc.ops) {
        bool types_ok = true;
        std::vector<SystemType> ins, outs;
        for (const auto& t : op.in_types) {
            auto it = r.types.find(t);
            if (it == r.types.end()) {
                diag(ds, op.line, "op " + op.name + ": unknown type '" + t + "'");
                types_ok = false;
            } else
                ins.push_back(it->second);
        }
        for (const auto& t : op.out_types) {
            auto it = r.types.find(t);
            if (it == r.types.end()) {
                diag(ds, op.line, "op " + op.name + ": unknown type '" + t + "'");
                types_ok = false;
            } else
                outs.push_back(it->second);
        }
        if (!types_ok) continue;

        if (op.source.kind == SourceRef::None) {
            diag(ds, op.line, "op " + op.name + " has no source (expected '= lib ...' or a gadget)");
            continue;
        }
        if (op.source.kind == SourceRef::Gadget) {
            build_gadget(op, ins, outs, r.types, ds, r.operators);
            continue;
        }
        // library reference; entry is selected by the op's own name
        const std::string full = join_path(base_dir, op.source.lib_path);
        try {
            if (!libs.count(full)) libs.emplace(full, load_library(full));
            const OperatorLibrary& lib = libs.at(full);
            const LibraryEntry* entry = nullptr;
            for (const auto& e : lib.entries)
                if (e.name == op.name) entry = &e;
            if (!entry) {
                diag(ds, op.line,
                     "op " + op.name + ": no entry named '" + op.name + "' in " + op.source.lib_path);
                continue;
            }
            long dim = 1;
            for (const auto& t : ins) dim *= t.dim;
            for (const auto& t : outs) dim *= t.dim;
            if (entry->matrix.rows() != dim) {
                diag(ds, op.line, "op " + op.name + ": library matrix dim " +
                                      std::to_string(entry->matrix.rows()) +
                                      " does not match signature dim " + std::to_string(dim));
                continue;
            }
            r.operators.emplace(op.name, OperatorFragment::make(ins, outs, entry->matrix));
        } catch (const Error& e) {
            diag(ds, op.line, "op " + op.name + ": " + e.what());
        }
    }

    for (const auto& n : doc.nodes) {
        auto it = r.operators.find(n.op);
        if (it == r.operators.end()) {
            diag(ds, n.line, "node " + n.name + ": unresolved operator '" + n.op + "'");
            continue;
        }
        std::vector<SystemType> ins, outs;
        for (const auto& p : it->second.inputs()) ins.push_back(p.type);
        for (const auto& p : it->second.outputs()) outs.push_back(p.type);
        try {
            r.graph.add_node({n.name, ins, outs, n.op});
        } catch (const Error& e) {
            diag(ds, n.line, e.what());
            continue;
        }
        r.payloads.emplace(n.name, it->second);
    }
    for (const auto& w : doc.wires) r.graph.add_wire({w.from, w.out_port, w.to, w.in_port});

    // graph violations are diagnostics too
    for (const auto& v : r.graph.validate().violations) diag(ds, 0, v.message);
    return r;
}

// ------------------------------------ running -------------------------------

int run(const CircuitDocument& doc, const std::string& base_dir, const RunOptions& options,
        std::ostream& out) {
    ResolvedDocument r = resolve(doc, base_dir);
    if (!r.ok()) {
        for (const auto& d : r.diagnostics) out << "error: " << d.message << "\n";
        return 1;
    }
    for (const auto& d : doc.directives) {
        try {
            switch (d.kind) {
                case Directive::Eval: {
                    out << fmt_fixed12(eval_circuit(r.graph, r.payloads, options.order)) << "\n";
                    break;
                }
                case Directive::Physical: {
                    auto it = r.operators.find(d.a);
                    if (it == r.operators.end()) throw UnresolvedName("no operator '" + d.a + "'");
                    PhysicalityReport rep = is_physical(it->second);
                    if (rep.verdict)
                        out << "PHYSICAL (min choi eig " << fmt_real(rep.min_choi_eigenvalue)
                            << ", trace slack " << fmt_real(rep.trace_condition_slack) << ")\n";
                    else if (rep.trace_condition_slack < 0.0)
                        out << "NOT PHYSICAL (trace slack " << fmt_real(rep.trace_condition_slack)
                            << ")\n";
                    else
                        out << "NOT PHYSICAL (min choi eig " << fmt_real(rep.min_choi_eigenvalue)
                            << ")\n";
                    break;
                }
                case Directive::Ratio: {
                    auto ia = r.operators.find(d.a), ib = r.operators.find(d.b);
                    if (ia == r.operators.end()) throw UnresolvedName("no operator '" + d.a + "'");
                    if (ib == r.operators.end()) throw UnresolvedName("no operator '" + d.b + "'");
                    RatioVerdict v = probability_ratio(ia->second, ib->second, options.tol);
                    if (v.well_conditioned)
                        out << "well-conditioned, k = " << format_number(*v.ratio) << "\n";
                    else
                        out << "not well-conditioned\n";
                    break;
                }
                case Directive::Render: {
                    const std::string path = options.render_override.empty()
                                                 ? join_path(base_dir, d.a)
                                                 : options.render_override;
                    std::ofstream f(path);
                    if (!f) throw IOFailure("cannot write '" + path + "'");
                    f << emit_dot(r.graph);
                    out << "rendered " << path << "\n";
                    break;
                }
            }
        } catch (const Error& e) {
            out << "error: line " << d.line << ": " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}

std::string emit_dot(const WireGraph& graph) {
    std::vector<const FragmentNode*> nodes;
    for (const auto& n : graph.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(),
              [](const FragmentNode* a, const FragmentNode* b) { return a->id < b->id; });

    std::vector<Wire> wires = graph.wires();
    std::sort(wires.begin(), wires.end(), [](const Wire& a, const Wire& b) {
        return std::tie(a.from, a.out_port, a.to, a.in_port) <
               std::tie(b.from, b.out_port, b.to, b.in_port);
    });

    std::ostringstream out;
    out << "digraph circuit {\n";
    out << "  rankdir=BT;\n";
    out << "  node [shape=record];\n";
    for (const auto* n : nodes) {
        out << "  \"" << n->id << "\" [label=\"{";
        if (!n->inputs.empty()) {
            out << "{";
            for (std::size_t k = 0; k < n->inputs.size(); ++k)
                out << (k ? "|" : "") << "<i" << k + 1 << ">" << n->inputs[k].name;
            out << "}|";
        }
        out << n->id;
        if (!n->outputs.empty()) {
            out << "|{";
            for (std::size_t k = 0; k < n->outputs.size(); ++k)
                out << (k ? "|" : "") << "<o" << k + 1 << ">" << n->outputs[k].name;
            out << "}";
        }
        out << "}\"];\n";
    }
    for (const auto& w : wires) {
        const auto& t = graph.node(w.from).outputs[w.out_port - 1];
        out << "  \"" << w.from << "\":o" << w.out_port << " -> \"" << w.to << "\":i" << w.in_port
            << " [label=\"" << t.name << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace opc::dsl
