#include "chdisc/channels.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace chdisc {

namespace {

// Structural invariants (POVM closure, Kraus trace preservation, unitarity)
// are checked tightly; Choi matrices arriving from solvers or files get a
// looser gate since they carry accumulated floating-point error.
constexpr double kStructTol = 1e-10;
constexpr double kChoiTol = 1e-8;

std::string fmt_mag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Mat unvec(const std::vector<Cx>& v, int rows, int cols) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = v[static_cast<size_t>(i) * cols + j];
    return m;
}

std::vector<Cx> vec_of(const Mat& m) {
    std::vector<Cx> v(static_cast<size_t>(m.rows()) * m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) v[static_cast<size_t>(i) * m.cols() + j] = m(i, j);
    return v;
}

} // namespace

PovmSet::PovmSet(std::vector<HermitianOperator> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) throw NotAPovm("PovmSet: no effects");
    const int d = effects_.front().dim();
    Mat sum = Mat::zero(d, d);
    for (const auto& e : effects_) {
        if (e.dim() != d) throw NotAPovm("PovmSet: effect dimension mismatch");
        EigDecomposition eig = eig_hermitian(e);
        if (eig.values.back() < -kStructTol) throw NotAPovm("PovmSet: effect not PSD");
        sum += e.mat();
    }
    sum -= Mat::identity(d);
    if (sum.max_abs() > kStructTol) throw NotAPovm("PovmSet: effects do not sum to identity");
}

QuantumChannel::QuantumChannel(std::vector<Mat> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw NotAChannel("QuantumChannel: no Kraus operators");
    dim_out_ = kraus_.front().rows();
    dim_in_ = kraus_.front().cols();
    if (dim_in_ < 1 || dim_out_ < 1) throw NotAChannel("QuantumChannel: empty dimensions");
    Mat acc = Mat::zero(dim_in_, dim_in_);
    for (const Mat& k : kraus_) {
        if (k.rows() != dim_out_ || k.cols() != dim_in_)
            throw NotAChannel("QuantumChannel: Kraus operator shape mismatch");
        acc += k.adjoint() * k;
    }
    acc -= Mat::identity(dim_in_);
    if (acc.max_abs() > kStructTol)
        throw NotAChannel("QuantumChannel: Kraus operators are not trace preserving");
}

QuantumChannel QuantumChannel::identity(int dim) {
    if (dim < 1) throw NotAChannel("identity channel: dim < 1");
    return QuantumChannel({Mat::identity(dim)});
}

QuantumChannel QuantumChannel::unitary(const Mat& u) {
    if (!u.square()) throw NotUnitary("unitary channel: matrix not square");
    Mat g = u.adjoint() * u;
    g -= Mat::identity(u.rows());
    if (g.max_abs() > kStructTol) throw NotUnitary("unitary channel: matrix not unitary");
    return QuantumChannel({u});
}

QuantumChannel QuantumChannel::amplitude_damping(double theta) {
    if (theta < 0.0 || theta > 1.0)
        throw NotAChannel("amplitude_damping: theta outside [0, 1]");
    Mat a(2, 2);
    a(0, 0) = Cx(1.0, 0.0);
    a(1, 1) = Cx(std::sqrt(1.0 - theta), 0.0);
    Mat b(2, 2);
    b(0, 1) = Cx(std::sqrt(theta), 0.0);
    return QuantumChannel({a, b});
}

QuantumChannel QuantumChannel::werner_holevo(int dim) {
    if (dim < 2) throw NotAChannel("werner_holevo: dim < 2");
    // Choi is (I - SWAP)/(dim - 1), twice the antisymmetric projector scaled.
    Mat choi = Mat::identity(dim * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) choi(i * dim + j, j * dim + i) -= Cx(1.0, 0.0);
    choi *= Cx(1.0 / (dim - 1), 0.0);
    return channel_from_choi(HermitianOperator(choi), BipartiteDims{dim, dim});
}

QuantumChannel QuantumChannel::depolarizing(int dim, double p) {
    if (dim < 2) throw NotAChannel("depolarizing: dim < 2");
    const double lo = -1.0 / (static_cast<double>(dim) * dim - 1.0);
    if (p < lo - 1e-12 || p > 1.0 + 1e-12)
        throw NotAChannel("depolarizing: p outside the completely positive range");
    Mat choi(dim * dim, dim * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) choi(i * dim + i, j * dim + j) += Cx(p, 0.0);
    const double off = (1.0 - p) / dim;
    for (int t = 0; t < dim * dim; ++t) choi(t, t) += Cx(off, 0.0);
    return channel_from_choi(HermitianOperator(choi), BipartiteDims{dim, dim});
}

QuantumChannel QuantumChannel::measurement(const PovmSet& povm) {
    const int d = povm.dim();
    const int n = povm.size();
    // A -> sum_i Tr(M_i A) |i><i| realized by Kraus |i><v| over the spectral
    // decompositions of the effects.
    std::vector<Mat> kraus;
    for (int i = 0; i < n; ++i) {
        EigDecomposition e = eig_hermitian(povm[i]);
        for (int k = 0; k < d; ++k) {
            const double lam = e.values[static_cast<size_t>(k)];
            if (lam <= kEigenvalueCutoff) continue;
            Mat op(n, d);
            const double w = std::sqrt(lam);
            for (int j = 0; j < d; ++j) op(i, j) = w * std::conj(e.vectors(j, k));
            kraus.push_back(std::move(op));
        }
    }
    return QuantumChannel(std::move(kraus));
}

HermitianOperator choi_of(const QuantumChannel& ch) {
    const int total = ch.dim_out() * ch.dim_in();
    Mat choi = Mat::zero(total, total);
    for (const Mat& k : ch.kraus()) {
        // (K (x) I) |psi_H> is the row-major flattening of K.
        std::vector<Cx> v = vec_of(k);
        choi += outer(v, v);
    }
    return HermitianOperator(choi);
}

QuantumChannel channel_from_choi(const HermitianOperator& choi, BipartiteDims dims) {
    if (choi.dim() != dims.total())
        throw DimensionMismatch("channel_from_choi: choi does not match dims");
    EigDecomposition e = eig_hermitian(choi);
    const double scale = std::max(1.0, std::abs(e.values.front()));
    if (e.values.back() < -kChoiTol * scale)
        throw NotPsd("channel_from_choi: choi operator has negative eigenvalue " +
                     fmt_mag(e.values.back()));
    HermitianOperator marginal = partial_trace(choi, dims, Factor::First);
    Mat dev = marginal.mat() - Mat::identity(dims.dim_in);
    if (dev.max_abs() > kChoiTol * scale)
        throw NotTracePreserving(
            "channel_from_choi: output marginal deviates from identity by " +
            fmt_mag(dev.max_abs()));

    std::vector<Mat> kraus;
    for (int k = 0; k < choi.dim(); ++k) {
        const double lam = e.values[static_cast<size_t>(k)];
        if (lam <= kEigenvalueCutoff) continue;
        std::vector<Cx> v(static_cast<size_t>(choi.dim()));
        const double w = std::sqrt(lam);
        for (int i = 0; i < choi.dim(); ++i) v[static_cast<size_t>(i)] = w * e.vectors(i, k);
        kraus.push_back(unvec(v, dims.dim_out, dims.dim_in));
    }
    if (kraus.empty()) throw NotAChannel("channel_from_choi: zero operator");
    return QuantumChannel(std::move(kraus));
}

HermitianOperator apply(const QuantumChannel& ch, const HermitianOperator& rho) {
    if (rho.dim() != ch.dim_in()) throw DimensionMismatch("apply: state dimension mismatch");
    Mat acc = Mat::zero(ch.dim_out(), ch.dim_out());
    for (const Mat& k : ch.kraus()) acc += k * rho.mat() * k.adjoint();
    return HermitianOperator(acc);
}

HermitianOperator apply_tensored(const QuantumChannel& ch, const HermitianOperator& rho,
                                 int dim_anc) {
    if (rho.dim() != ch.dim_in() * dim_anc)
        throw DimensionMismatch("apply_tensored: state dimension mismatch");
    const int out_total = ch.dim_out() * dim_anc;
    Mat acc = Mat::zero(out_total, out_total);
    Mat eye = Mat::identity(dim_anc);
    for (const Mat& k : ch.kraus()) {
        Mat kk = kron(k, eye);
        acc += kk * rho.mat() * kk.adjoint();
    }
    return HermitianOperator(acc);
}

namespace {

using nlohmann::json;

json complex_to_json(const Cx& v) { return json::array({v.real(), v.imag()}); }

Cx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("channel spec: complex entries must be [re, im]");
    return Cx(j[0].get<double>(), j[1].get<double>());
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ParseError("channel spec: matrix row count mismatch");
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError("channel spec: matrix column count mismatch");
        for (int c = 0; c < cols; ++c) m(i, c) = complex_from_json(row[static_cast<size_t>(c)]);
    }
    return m;
}

Mat square_mat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("channel spec: matrix must be a nonempty array");
    const int n = static_cast<int>(j.size());
    return mat_from_json(j, n, n);
}

int dim_field(const json& spec, const char* name) {
    if (!spec.contains(name) || !spec[name].is_number_integer())
        throw ParseError(std::string("channel spec: missing integer field '") + name + "'");
    int v = spec[name].get<int>();
    if (v < 1) throw ParseError(std::string("channel spec: field '") + name + "' must be >= 1");
    return v;
}

double num_field(const json& spec, const char* name) {
    if (!spec.contains(name) || !spec[name].is_number())
        throw ParseError(std::string("channel spec: missing numeric field '") + name + "'");
    return spec[name].get<double>();
}

} // namespace

QuantumChannel channel_from_spec(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        throw ParseError("channel spec: expected an object with a 'kind' field");
    const std::string kind = spec["kind"].get<std::string>();
    if (kind == "identity") {
        return QuantumChannel::identity(dim_field(spec, "dim"));
    }
    if (kind == "unitary") {
        if (!spec.contains("matrix")) throw ParseError("channel spec: unitary needs 'matrix'");
        return QuantumChannel::unitary(square_mat_from_json(spec["matrix"]));
    }
    if (kind == "amplitude_damping") {
        return QuantumChannel::amplitude_damping(num_field(spec, "theta"));
    }
    if (kind == "werner_holevo") {
        return QuantumChannel::werner_holevo(dim_field(spec, "dim"));
    }
    if (kind == "depolarizing") {
        return QuantumChannel::depolarizing(dim_field(spec, "dim"), num_field(spec, "p"));
    }
    if (kind == "measurement") {
        const int d = dim_field(spec, "dim");
        if (!spec.contains("effects") || !spec["effects"].is_array() || spec["effects"].empty())
            throw ParseError("channel spec: measurement needs a nonempty 'effects' array");
        std::vector<HermitianOperator> effects;
        for (const auto& e : spec["effects"]) effects.emplace_back(mat_from_json(e, d, d));
        return QuantumChannel::measurement(PovmSet(std::move(effects)));
    }
    if (kind == "kraus") {
        const int din = dim_field(spec, "dim_in");
        const int dout = dim_field(spec, "dim_out");
        if (!spec.contains("operators") || !spec["operators"].is_array() || spec["operators"].empty())
            throw ParseError("channel spec: kraus needs a nonempty 'operators' array");
        std::vector<Mat> kraus;
        for (const auto& k : spec["operators"]) kraus.push_back(mat_from_json(k, dout, din));
        return QuantumChannel(std::move(kraus));
    }
    if (kind == "choi") {
        const int din = dim_field(spec, "dim_in");
        const int dout = dim_field(spec, "dim_out");
        if (!spec.contains("matrix")) throw ParseError("channel spec: choi needs 'matrix'");
        Mat m = mat_from_json(spec["matrix"], din * dout, din * dout);
        return channel_from_choi(HermitianOperator(m), BipartiteDims{dout, din});
    }
    throw ParseError("channel spec: unknown kind '" + kind + "'");
}

QuantumChannel channel_from_spec_string(const std::string& text) {
    nlohmann::json spec = nlohmann::json::parse(text, nullptr, false);
    if (spec.is_discarded()) throw ParseError("channel spec: invalid JSON");
    return channel_from_spec(spec);
}

nlohmann::json kraus_spec(const QuantumChannel& ch) {
    nlohmann::json spec;
    spec["kind"] = "kraus";
    spec["dim_in"] = ch.dim_in();
    spec["dim_out"] = ch.dim_out();
    nlohmann::json ops = nlohmann::json::array();
    for (const Mat& k : ch.kraus()) ops.push_back(mat_to_json(k));
    spec["operators"] = std::move(ops);
    return spec;
}

nlohmann::json choi_spec(const QuantumChannel& ch) {
    nlohmann::json spec;
    spec["kind"] = "choi";
    spec["dim_in"] = ch.dim_in();
    spec["dim_out"] = ch.dim_out();
    spec["matrix"] = mat_to_json(choi_of(ch).mat());
    return spec;
}

Mat matrix_from_spec(const nlohmann::json& rows) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty())
        throw ParseError("matrix spec: expected a nonempty array of rows");
    return mat_from_json(rows, static_cast<int>(rows.size()),
                         static_cast<int>(rows[0].size()));
}

} // namespace chdisc
