#include "chdisc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chdisc/kernels.hpp"

namespace chdisc {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = Cx(1.0, 0.0);
    return m;
}

Mat Mat::adjoint() const {
    Mat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

Mat Mat::transpose() const {
    Mat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

Mat Mat::conjugate() const {
    Mat r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(i, j) = std::conj((*this)(i, j));
    return r;
}

Cx Mat::trace() const {
    if (!square()) throw DimensionMismatch("Mat::trace: not square");
    Cx t(0.0, 0.0);
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double Mat::frobenius_norm() const {
    double s = 0.0;
    for (const Cx& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double Mat::max_abs() const {
    double s = 0.0;
    for (const Cx& v : a_) s = std::max(s, std::abs(v));
    return s;
}

Mat& Mat::operator+=(const Mat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("Mat::+=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("Mat::-=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Mat& Mat::operator*=(Cx s) {
    for (Cx& v : a_) v *= s;
    return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("Mat::*: inner dimension mismatch");
    Mat out(a.rows(), b.cols());
    kernels::gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(), out.data());
    return out;
}

Mat operator*(Cx s, Mat a) { return a *= s; }
Mat operator*(Mat a, Cx s) { return a *= s; }

std::vector<Cx> operator*(const Mat& a, const std::vector<Cx>& v) {
    if (a.cols() != static_cast<int>(v.size()))
        throw DimensionMismatch("Mat * vector: dimension mismatch");
    std::vector<Cx> out(static_cast<size_t>(a.rows()), Cx(0.0, 0.0));
    for (int i = 0; i < a.rows(); ++i) {
        Cx acc(0.0, 0.0);
        for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * v[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = acc;
    }
    return out;
}

Cx vdot(const std::vector<Cx>& x, const std::vector<Cx>& y) {
    if (x.size() != y.size()) throw DimensionMismatch("vdot: length mismatch");
    Cx acc(0.0, 0.0);
    for (size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

double vnorm(const std::vector<Cx>& x) {
    double s = 0.0;
    for (const Cx& v : x) s += std::norm(v);
    return std::sqrt(s);
}

Mat outer(const std::vector<Cx>& x, const std::vector<Cx>& y) {
    Mat r(static_cast<int>(x.size()), static_cast<int>(y.size()));
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j)
            r(static_cast<int>(i), static_cast<int>(j)) = x[i] * std::conj(y[j]);
    return r;
}

HermitianOperator::HermitianOperator(Mat m) {
    if (!m.square()) throw DimensionMismatch("HermitianOperator: matrix not square");
    const int n = m.rows();
    Mat sym(n, n);
    for (int i = 0; i < n; ++i) {
        sym(i, i) = Cx(m(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            Cx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            sym(i, j) = v;
            sym(j, i) = std::conj(v);
        }
    }
    m_ = std::move(sym);
}

HermitianOperator HermitianOperator::identity(int dim) {
    return HermitianOperator(Mat::identity(dim));
}

HermitianOperator HermitianOperator::zero(int dim) {
    return HermitianOperator(Mat::zero(dim, dim));
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
    m_ += o.m_;
    return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
    m_ -= o.m_;
    return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
    m_ *= Cx(s, 0.0);
    return *this;
}

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("hs_inner: dimension mismatch");
    // Tr(AB) = sum_ij A_ij conj(B_ij) for Hermitian A, B; real by symmetry.
    double acc = 0.0;
    const int n = a.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            acc += a(i, j).real() * b(i, j).real() + a(i, j).imag() * b(i, j).imag();
    return acc;
}

PureState::PureState(std::vector<Cx> amp) : amp_(std::move(amp)) {
    double n = vnorm(amp_);
    if (std::abs(n - 1.0) > 1e-12) throw NotAState("PureState: vector norm deviates from 1");
}

PureState PureState::normalized(std::vector<Cx> amp) {
    double n = vnorm(amp);
    if (n < 1e-300) throw NotAState("PureState::normalized: zero vector");
    for (Cx& v : amp) v /= n;
    return PureState(std::move(amp));
}

HermitianOperator PureState::projector() const {
    return HermitianOperator(outer(amp_, amp_));
}

EigDecomposition eig_hermitian(const HermitianOperator& x) {
    const int n = x.dim();
    Mat a = x.mat();
    Mat v = Mat::identity(n);

    const double scale = a.frobenius_norm();
    const double target = 1e-13 * scale;

    auto off_norm = [&]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) s += 2.0 * std::norm(a(p, q));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_norm() <= target) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const Cx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                // Split off the phase so the 2x2 block is real, then apply the
                // classic symmetric rotation that zeroes the (p,q) entry.
                const Cx phase = apq / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                double t;
                if (tau >= 0.0) {
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                } else {
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Cx gpp = c * phase;  // column rotation G: col_p' = gpp col_p - s col_q
                const Cx gpq = s * phase;  // col_q' = gpq col_p + c col_q

                for (int i = 0; i < n; ++i) {
                    const Cx aip = a(i, p);
                    const Cx aiq = a(i, q);
                    a(i, p) = aip * gpp - aiq * s;
                    a(i, q) = aip * gpq + aiq * c;
                }
                for (int j = 0; j < n; ++j) {
                    const Cx apj = a(p, j);
                    const Cx aqj = a(q, j);
                    a(p, j) = std::conj(gpp) * apj - s * aqj;
                    a(q, j) = std::conj(gpq) * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    const Cx vip = v(i, p);
                    const Cx viq = v(i, q);
                    v(i, p) = vip * gpp - viq * s;
                    v(i, q) = vip * gpq + viq * c;
                }
                a(p, q) = Cx(0.0, 0.0);
                a(q, p) = Cx(0.0, 0.0);
            }
        }
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });

    EigDecomposition out;
    out.values.resize(static_cast<size_t>(n));
    out.vectors = Mat(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<size_t>(k)];
        out.values[static_cast<size_t>(k)] = a(src, src).real();
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, src);
    }
    return out;
}

HermitianOperator positive_part(const HermitianOperator& x) {
    return spectral_map(x, [](double lam) { return lam > 0.0 ? lam : 0.0; });
}

HermitianOperator abs_op(const HermitianOperator& x) {
    return spectral_map(x, [](double lam) { return std::abs(lam); });
}

double trace_norm(const HermitianOperator& x) {
    EigDecomposition e = eig_hermitian(x);
    double s = 0.0;
    for (double lam : e.values) s += std::abs(lam);
    return s;
}

double op_norm(const HermitianOperator& x) {
    EigDecomposition e = eig_hermitian(x);
    double s = 0.0;
    for (double lam : e.values) s = std::max(s, std::abs(lam));
    return s;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const Cx av = a(i, j);
            if (av == Cx(0.0, 0.0)) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = av * b(k, l);
        }
    return r;
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(kron(a.mat(), b.mat()));
}

Mat partial_trace(const Mat& x, BipartiteDims dims, Factor traced) {
    const int da = dims.dim_out;
    const int db = dims.dim_in;
    if (!x.square() || x.rows() != da * db)
        throw DimensionMismatch("partial_trace: matrix does not match dims");
    if (traced == Factor::First) {
        Mat r(db, db);
        for (int b1 = 0; b1 < db; ++b1)
            for (int b2 = 0; b2 < db; ++b2) {
                Cx acc(0.0, 0.0);
                for (int a0 = 0; a0 < da; ++a0) acc += x(a0 * db + b1, a0 * db + b2);
                r(b1, b2) = acc;
            }
        return r;
    }
    Mat r(da, da);
    for (int a1 = 0; a1 < da; ++a1)
        for (int a2 = 0; a2 < da; ++a2) {
            Cx acc(0.0, 0.0);
            for (int b0 = 0; b0 < db; ++b0) acc += x(a1 * db + b0, a2 * db + b0);
            r(a1, a2) = acc;
        }
    return r;
}

HermitianOperator partial_trace(const HermitianOperator& x, BipartiteDims dims, Factor traced) {
    return HermitianOperator(partial_trace(x.mat(), dims, traced));
}

Mat schmidt_operator(const PureState& psi, int dim_a, int dim_b) {
    if (psi.dim() != dim_a * dim_b)
        throw DimensionMismatch("schmidt_operator: state does not match dims");
    Mat op(dim_b, dim_a);
    for (int i = 0; i < dim_a; ++i)
        for (int j = 0; j < dim_b; ++j) op(j, i) = psi[i * dim_b + j];
    return op;
}

Mat schmidt_operator(const PureState& psi, int dim) { return schmidt_operator(psi, dim, dim); }

std::vector<HermitianOperator> gell_mann_basis(int dim) {
    if (dim < 1) throw DimensionMismatch("gell_mann_basis: dim < 1");
    std::vector<HermitianOperator> basis;
    basis.reserve(static_cast<size_t>(dim) * dim - 1);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < dim; ++j) {
        for (int k = j + 1; k < dim; ++k) {
            Mat sym(dim, dim);
            sym(j, k) = Cx(inv_sqrt2, 0.0);
            sym(k, j) = Cx(inv_sqrt2, 0.0);
            basis.emplace_back(std::move(sym));
            Mat asym(dim, dim);
            asym(j, k) = Cx(0.0, -inv_sqrt2);
            asym(k, j) = Cx(0.0, inv_sqrt2);
            basis.emplace_back(std::move(asym));
        }
    }
    for (int l = 1; l < dim; ++l) {
        Mat diag(dim, dim);
        const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int i = 0; i < l; ++i) diag(i, i) = Cx(norm, 0.0);
        diag(l, l) = Cx(-static_cast<double>(l) * norm, 0.0);
        basis.emplace_back(std::move(diag));
    }
    return basis;
}

std::vector<HermitianOperator> hermitian_basis(int dim) {
    std::vector<HermitianOperator> basis;
    basis.reserve(static_cast<size_t>(dim) * dim);
    Mat id = Mat::identity(dim);
    id *= Cx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0);
    basis.emplace_back(std::move(id));
    for (auto& g : gell_mann_basis(dim)) basis.push_back(std::move(g));
    return basis;
}

} // namespace chdisc
