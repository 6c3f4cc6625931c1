// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/duotensor.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <numeric>

namespace opc {

// -------------------------------- fiducial family ---------------------------

FiducialFamily fiducial_family(const SystemType& t) {
    const int N = t.dim;
    if (N < 1) throw Error("fiducial_family: N must be >= 1");

    std::vector<Eigen::VectorXcd> kets;
    std::vector<std::string> names;
    for (int n = 0; n < N; ++n) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N);
        v(n) = 1.0;
        kets.push_back(v);
        names.push_back(std::to_string(n + 1));
    }
    const double s = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < N; ++m) {
        for (int n = m + 1; n < N; ++n) {
            Eigen::VectorXcd x = Eigen::VectorXcd::Zero(N);
            x(m) = s;
            x(n) = s;
            kets.push_back(x);
            names.push_back(std::to_string(m + 1) + std::to_string(n + 1) + "x");
            Eigen::VectorXcd y = Eigen::VectorXcd::Zero(N);
            y(m) = s;
            y(n) = cxd(0.0, 1.0) * s;
            kets.push_back(y);
            names.push_back(std::to_string(m + 1) + std::to_string(n + 1) + "y");
        }
    }

    FiducialFamily fam;
    fam.system = t;
    fam.names = std::move(names);
    for (const auto& k : kets) {
        Matrix p = k * k.adjoint();
        fam.effects.push_back(p);
        fam.preparations.push_back(p);
    }

    const int K = fam.count();
    fam.g.resize(K, K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) fam.g(i, j) = (fam.preparations[i] * fam.effects[j]).trace().real();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(fam.g);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    fam.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(fam.condition < 1e8))
        throw SingularMetric("hopping metric for dim " + std::to_string(N) + " has condition " +
                             std::to_string(fam.condition));
    fam.g_inv = fam.g.fullPivLu().inverse();
    return fam;
}

FiducialFamily fiducial_family(int N) { return fiducial_family(SystemType{"t" + std::to_string(N), N}); }

// ----------------------------------- Duotensor ------------------------------

Duotensor::Duotensor(std::vector<Leg> legs, std::vector<double> coeffs)
    : legs_(std::move(legs)), coeffs_(std::move(coeffs)) {
    std::size_t want = 1;
    for (const auto& l : legs_) want *= static_cast<std::size_t>(l.type.dim) * l.type.dim;
    if (coeffs_.size() != want)
        throw ShapeMismatch("Duotensor: coefficient array has " + std::to_string(coeffs_.size()) +
                            " entries, legs require " + std::to_string(want));
}

std::vector<int> Duotensor::shape() const {
    std::vector<int> s;
    for (const auto& l : legs_) s.push_back(l.type.dim * l.type.dim);
    return s;
}

double Duotensor::at(const std::vector<int>& idx) const {
    const auto sh = shape();
    std::size_t flat = 0;
    for (std::size_t k = 0; k < sh.size(); ++k) flat = flat * sh[k] + static_cast<std::size_t>(idx[k]);
    return coeffs_[flat];
}

namespace {

const FiducialFamily& family_for(const FamilyMap& families, const SystemType& t) {
    auto it = families.find(t.name);
    if (it == families.end()) throw Error("no fiducial family for type '" + t.name + "'");
    if (it->second.system.dim != t.dim) throw DimMismatch("fiducial family dim mismatch for " + t.name);
    return it->second;
}

// Contract axis `ax` of a row-major tensor with matrix M: new[i] = sum_j M(i,j) old[j].
std::vector<double> contract_axis(const std::vector<double>& coeffs, const std::vector<int>& shape,
                                  std::size_t ax, const Eigen::MatrixXd& M) {
    std::vector<double> out(coeffs.size(), 0.0);
    const int K = shape[ax];
    std::size_t inner = 1;
    for (std::size_t k = ax + 1; k < shape.size(); ++k) inner *= shape[k];
    std::size_t outer = coeffs.size() / (inner * K);
    for (std::size_t a = 0; a < outer; ++a) {
        for (std::size_t c = 0; c < inner; ++c) {
            const std::size_t base = a * K * inner + c;
            for (int i = 0; i < K; ++i) {
                double acc = 0.0;
                for (int j = 0; j < K; ++j) acc += M(i, j) * coeffs[base + j * inner];
                out[base + static_cast<std::size_t>(i) * inner] = acc;
            }
        }
    }
    return out;
}

// The matrix carrying a leg from its current color to the other one.
Eigen::MatrixXd recolor_matrix(const Leg& leg, LegColor to, const FiducialFamily& fam) {
    // input leg:  black_i = sum_j g(i,j) white_j
    // output leg: black_i = sum_j g(j,i) white_j
    const bool input = leg.dir == LegDirection::Input;
    if (leg.color == LegColor::White && to == LegColor::Black)
        return input ? fam.g : Eigen::MatrixXd(fam.g.transpose());
    return input ? fam.g_inv : Eigen::MatrixXd(fam.g_inv.transpose());
}

}  // namespace

Duotensor recolor(const Duotensor& d, std::size_t leg_index, LegColor new_color,
                  const FamilyMap& families) {
    if (leg_index >= d.legs().size()) throw Error("recolor: no such leg");
    const Leg& leg = d.legs()[leg_index];
    if (leg.color == new_color) return d;
    const FiducialFamily& fam = family_for(families, leg.type);
    auto coeffs = contract_axis(d.coeffs(), d.shape(), leg_index, recolor_matrix(leg, new_color, fam));
    auto legs = d.legs();
    legs[leg_index].color = new_color;
    return Duotensor(std::move(legs), std::move(coeffs));
}

Duotensor operator_to_duotensor(const OperatorFragment& f, const FamilyMap& families,
                                const std::vector<LegColor>& target_colors) {
    std::vector<Leg> legs;
    std::vector<const FiducialFamily*> fams;
    std::vector<bool> is_input;
    for (const auto& p : f.inputs()) {
        legs.push_back({p.type, LegDirection::Input, LegColor::Black});
        fams.push_back(&family_for(families, p.type));
        is_input.push_back(true);
    }
    for (const auto& p : f.outputs()) {
        legs.push_back({p.type, LegDirection::Output, LegColor::Black});
        fams.push_back(&family_for(families, p.type));
        is_input.push_back(false);
    }
    if (target_colors.size() != legs.size())
        throw ShapeMismatch("operator_to_duotensor: one target color per leg expected");

    // All-black entries: cap input ports with fiducial preparations and output
    // ports with fiducial effects, then trace.
    std::vector<int> shape;
    std::size_t total = 1;
    for (const auto& l : legs) {
        shape.push_back(l.type.dim * l.type.dim);
        total *= static_cast<std::size_t>(shape.back());
    }
    std::vector<double> coeffs(std::max<std::size_t>(total, 1), 0.0);
    std::vector<int> idx(legs.size(), 0);
    const Matrix& op = f.op().matrix();
    for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
        Matrix cap = Matrix::Identity(1, 1);
        for (std::size_t k = 0; k < legs.size(); ++k) {
            const Matrix& x = is_input[k] ? fams[k]->preparations[idx[k]] : fams[k]->effects[idx[k]];
            Matrix next(cap.rows() * x.rows(), cap.cols() * x.cols());
            for (int i = 0; i < cap.rows(); ++i)
                for (int j = 0; j < cap.cols(); ++j)
                    next.block(i * x.rows(), j * x.cols(), x.rows(), x.cols()) = cap(i, j) * x;
            cap = std::move(next);
        }
        const cxd v = (op * cap).trace();
        if (std::abs(v.imag()) > 1e-10 * (1.0 + std::abs(v.real())))
            throw Error("operator_to_duotensor: imaginary residue " + std::to_string(v.imag()));
        coeffs[flat] = v.real();
        // odometer
        for (int k = static_cast<int>(legs.size()) - 1; k >= 0; --k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }

    Duotensor d(legs, std::move(coeffs));
    for (std::size_t k = 0; k < legs.size(); ++k)
        if (target_colors[k] != LegColor::Black) d = recolor(d, k, target_colors[k], families);
    return d;
}

OperatorFragment duotensor_to_operator(const Duotensor& d, const FamilyMap& families) {
    Duotensor w = d;
    for (std::size_t k = 0; k < w.legs().size(); ++k)
        if (w.legs()[k].color != LegColor::White) w = recolor(w, k, LegColor::White, families);

    // White coefficients weight effects on input legs and preparations on
    // output legs.
    std::vector<SystemType> ins, outs;
    std::vector<const FiducialFamily*> fams;
    std::vector<bool> is_input;
    for (const auto& l : w.legs()) {
        if (l.dir == LegDirection::Input)
            ins.push_back(l.type);
        else
            outs.push_back(l.type);
    }
    // factor order in a fragment is inputs then outputs; reorder legs that way
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < w.legs().size(); ++k)
        if (w.legs()[k].dir == LegDirection::Input) order.push_back(k);
    for (std::size_t k = 0; k < w.legs().size(); ++k)
        if (w.legs()[k].dir == LegDirection::Output) order.push_back(k);

    int dim = 1;
    for (const auto& t : ins) dim *= t.dim;
    for (const auto& t : outs) dim *= t.dim;

    Matrix acc = Matrix::Zero(dim, dim);
    const auto shape = w.shape();
    std::vector<int> idx(w.legs().size(), 0);
    for (std::size_t flat = 0; flat < w.size(); ++flat) {
        const double c = w.coeffs()[flat];
        if (c != 0.0) {
            Matrix term = Matrix::Identity(1, 1);
            for (std::size_t pos : order) {
                const Leg& l = w.legs()[pos];
                const FiducialFamily& fam = family_for(families, l.type);
                const Matrix& x = l.dir == LegDirection::Input ? fam.effects[idx[pos]]
                                                               : fam.preparations[idx[pos]];
                Matrix next(term.rows() * x.rows(), term.cols() * x.cols());
                for (int i = 0; i < term.rows(); ++i)
                    for (int j = 0; j < term.cols(); ++j)
                        next.block(i * x.rows(), j * x.cols(), x.rows(), x.cols()) = term(i, j) * x;
                term = std::move(next);
            }
            acc += c * term;
        }
        for (int k = static_cast<int>(w.legs().size()) - 1; k >= 0; --k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return OperatorFragment::make(ins, outs, acc);
}

// ------------------------------ fiducial transforms --------------------------

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& M, const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw SingularTransform(std::string(what) + " matrix is singular");
    return lu.inverse();
}

}  // namespace

FiducialBasis transformed_basis(const FiducialFamily& family, const FiducialTransform& t) {
    const int K = family.count();
    if (t.E.rows() != K || t.E.cols() != K || t.P.rows() != K || t.P.cols() != K)
        throw DimMismatch("transformed_basis: transform dims do not match family");
    Eigen::MatrixXd Einv = checked_inverse(t.E, "effect");
    Eigen::MatrixXd Pinv = checked_inverse(t.P, "preparation");
    FiducialBasis out;
    out.effects.resize(K, Matrix::Zero(family.system.dim, family.system.dim));
    out.preparations.resize(K, Matrix::Zero(family.system.dim, family.system.dim));
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            out.effects[i] += Einv(i, j) * family.effects[j];
            out.preparations[i] += Pinv(i, j) * family.preparations[j];
        }
    }
    return out;
}

Duotensor change_fiducials(const Duotensor& d, const FiducialTransform& t) {
    Eigen::MatrixXd Einv = checked_inverse(t.E, "effect");
    Eigen::MatrixXd Pinv = checked_inverse(t.P, "preparation");

    auto coeffs = d.coeffs();
    const auto shape = d.shape();
    for (std::size_t k = 0; k < d.legs().size(); ++k) {
        const Leg& l = d.legs()[k];
        if (l.type.dim * l.type.dim != shape[k]) throw DimMismatch("change_fiducials: leg shape");
        Eigen::MatrixXd M;
        if (l.dir == LegDirection::Input && l.color == LegColor::White)
            M = t.E.transpose();  // subscript: new = E^T old
        else if (l.dir == LegDirection::Output && l.color == LegColor::Black)
            M = Einv;  // superscript: new = E^-1 old
        else if (l.dir == LegDirection::Output && l.color == LegColor::White)
            M = t.P.transpose();  // pre-superscript: new = P^T old
        else
            M = Pinv;  // pre-subscript: new = P^-1 old
        if (M.rows() != shape[k])
            throw DimMismatch("change_fiducials: transform dim does not match leg");
        coeffs = contract_axis(coeffs, shape, k, M);
    }
    return Duotensor(d.legs(), std::move(coeffs));
}

Matrix reconstruct_with_basis(const Duotensor& d, const std::vector<FiducialBasis>& per_leg) {
    if (per_leg.size() != d.legs().size())
        throw ShapeMismatch("reconstruct_with_basis: one basis per leg expected");
    for (const auto& l : d.legs())
        if (l.color != LegColor::White) throw Error("reconstruct_with_basis: legs must be all white");

    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < d.legs().size(); ++k)
        if (d.legs()[k].dir == LegDirection::Input) order.push_back(k);
    for (std::size_t k = 0; k < d.legs().size(); ++k)
        if (d.legs()[k].dir == LegDirection::Output) order.push_back(k);

    int dim = 1;
    for (const auto& l : d.legs()) dim *= l.type.dim;
    Matrix acc = Matrix::Zero(dim, dim);
    const auto shape = d.shape();
    std::vector<int> idx(d.legs().size(), 0);
    for (std::size_t flat = 0; flat < d.size(); ++flat) {
        const double c = d.coeffs()[flat];
        if (c != 0.0) {
            Matrix term = Matrix::Identity(1, 1);
            for (std::size_t pos : order) {
                const Leg& l = d.legs()[pos];
                const Matrix& x = l.dir == LegDirection::Input ? per_leg[pos].effects[idx[pos]]
                                                               : per_leg[pos].preparations[idx[pos]];
                Matrix next(term.rows() * x.rows(), term.cols() * x.cols());
                for (int i = 0; i < term.rows(); ++i)
                    for (int j = 0; j < term.cols(); ++j)
                        next.block(i * x.rows(), j * x.cols(), x.rows(), x.cols()) = term(i, j) * x;
                term = std::move(next);
            }
            acc += c * term;
        }
        for (int k = static_cast<int>(d.legs().size()) - 1; k >= 0; --k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return acc;
}

// --------------------------- duotensor circuit eval --------------------------

double eval_circuit_duotensor(const WireGraph& graph,
                              const std::map<std::string, OperatorFragment>& payloads,
                              const FamilyMap& families) {
    auto report = graph.validate();
    if (!report.is_circuit) throw InvalidGraph("eval_circuit_duotensor: not a closed circuit");

    // Standard form: input legs white, output legs black. A wire then contracts
    // the source's black output index against the target's white input index.
    struct NodeDuo {
        std::vector<int> wire_of_leg;  // wire index per leg (inputs then outputs)
        Duotensor duo;
    };
    std::map<std::string, NodeDuo> duos;
    for (const auto& n : graph.nodes()) {
        const OperatorFragment& f = payloads.at(n.id);
        std::vector<LegColor> colors;
        for (std::size_t k = 0; k < f.inputs().size(); ++k) colors.push_back(LegColor::White);
        for (std::size_t k = 0; k < f.outputs().size(); ++k) colors.push_back(LegColor::Black);
        NodeDuo nd{std::vector<int>(colors.size(), -1), operator_to_duotensor(f, families, colors)};
        duos.emplace(n.id, std::move(nd));
    }

    std::vector<int> wire_range;
    for (std::size_t w = 0; w < graph.wires().size(); ++w) {
        const Wire& wire = graph.wires()[w];
        const auto& from = graph.node(wire.from);
        const int dim = from.outputs[wire.out_port - 1].dim;
        wire_range.push_back(dim * dim);
        duos.at(wire.from).wire_of_leg[graph.node(wire.from).inputs.size() + wire.out_port - 1] =
            static_cast<int>(w);
        duos.at(wire.to).wire_of_leg[wire.in_port - 1] = static_cast<int>(w);
    }

    // Brute-force sum over all wire index assignments.
    double total = 0.0;
    std::vector<int> assign(wire_range.size(), 0);
    while (true) {
        double prod = 1.0;
        for (const auto& [id, nd] : duos) {
            std::vector<int> idx(nd.wire_of_leg.size());
            for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = assign[nd.wire_of_leg[k]];
            prod *= nd.duo.at(idx);
            if (prod == 0.0) break;
        }
        total += prod;
        int k = static_cast<int>(assign.size()) - 1;
        for (; k >= 0; --k) {
            if (++assign[k] < wire_range[k]) break;
            assign[k] = 0;
        }
        if (k < 0) break;
    }
    return total;
}

}  // namespace opc
