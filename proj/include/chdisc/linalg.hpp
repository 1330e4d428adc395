#pragma once

#include <complex>
#include <vector>

#include "chdisc/errors.hpp"

namespace chdisc {

using Cx = std::complex<double>;

// Eigenvalues with magnitude at or below this count as zero for support,
// pseudo-inverse and measurement tie-breaking decisions.
inline constexpr double kEigenvalueCutoff = 1e-10;

// Dense complex matrix, row-major.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {
        if (rows < 0 || cols < 0) throw DimensionMismatch("Mat: negative dimension");
    }

    static Mat identity(int n);
    static Mat zero(int rows, int cols) { return Mat(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Cx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const Cx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    Cx* data() { return a_.data(); }
    const Cx* data() const { return a_.data(); }

    Mat adjoint() const;
    Mat transpose() const;
    Mat conjugate() const;
    Cx trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(Cx s);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<Cx> a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(Cx s, Mat a);
Mat operator*(Mat a, Cx s);

std::vector<Cx> operator*(const Mat& a, const std::vector<Cx>& v);

// <x, y> with the conjugation on x.
Cx vdot(const std::vector<Cx>& x, const std::vector<Cx>& y);
double vnorm(const std::vector<Cx>& x);
// |x><y|
Mat outer(const std::vector<Cx>& x, const std::vector<Cx>& y);

// Complex Hermitian matrix; construction symmetrizes to (X + X^dag)/2.
class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(Mat m);

    static HermitianOperator identity(int dim);
    static HermitianOperator zero(int dim);

    int dim() const { return m_.rows(); }
    const Mat& mat() const { return m_; }
    const Cx& operator()(int i, int j) const { return m_(i, j); }

    double trace() const { return m_.trace().real(); }
    double frobenius_norm() const { return m_.frobenius_norm(); }

    HermitianOperator& operator+=(const HermitianOperator& o);
    HermitianOperator& operator-=(const HermitianOperator& o);
    HermitianOperator& operator*=(double s);

private:
    Mat m_;
};

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator*(double s, HermitianOperator a);

// Real Hilbert-Schmidt inner product Tr(A B) of two Hermitian operators.
double hs_inner(const HermitianOperator& a, const HermitianOperator& b);

// Output (first) and input (second) factor dimensions of a bipartite space,
// indexed row-major as (out, in).
struct BipartiteDims {
    int dim_out = 0;
    int dim_in = 0;
    int total() const { return dim_out * dim_in; }
};

enum class Factor { First, Second };

// Normalized complex vector. Construction rejects vectors whose norm is off
// by more than 1e-12; use normalized() to build from unnormalized data.
class PureState {
public:
    PureState() = default;
    explicit PureState(std::vector<Cx> amp);
    static PureState normalized(std::vector<Cx> amp);

    int dim() const { return static_cast<int>(amp_.size()); }
    const std::vector<Cx>& amp() const { return amp_; }
    const Cx& operator[](int i) const { return amp_[static_cast<size_t>(i)]; }

    // |psi><psi|
    HermitianOperator projector() const;

private:
    std::vector<Cx> amp_;
};

struct EigDecomposition {
    std::vector<double> values;  // descending
    Mat vectors;                 // column k is the eigenvector of values[k]
};

// Cyclic Jacobi diagonalization. Converges when the off-diagonal Frobenius
// norm drops to 1e-13 of the input norm, capped at 100 sweeps.
EigDecomposition eig_hermitian(const HermitianOperator& x);

HermitianOperator positive_part(const HermitianOperator& x);
HermitianOperator abs_op(const HermitianOperator& x);
double trace_norm(const HermitianOperator& x);
double op_norm(const HermitianOperator& x);

// Spectral f(x) = V f(lambda) V^dag through a callable on the eigenvalues.
template <typename F>
HermitianOperator spectral_map(const HermitianOperator& x, F f);

Mat kron(const Mat& a, const Mat& b);
HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);

Mat partial_trace(const Mat& x, BipartiteDims dims, Factor traced);
HermitianOperator partial_trace(const HermitianOperator& x, BipartiteDims dims, Factor traced);

// For psi on A (x) B returns the B x A matrix with psi = sum_i |i>_A (x) (A|i>),
// i.e. psi[(i,j)] = op(j,i). The square overload is the common case.
Mat schmidt_operator(const PureState& psi, int dim_a, int dim_b);
Mat schmidt_operator(const PureState& psi, int dim);

// Traceless Hermitian orthonormal basis (generalized Gell-Mann set), d^2 - 1
// elements with Tr(g_a g_b) = delta_ab.
std::vector<HermitianOperator> gell_mann_basis(int dim);
// Full Hermitian orthonormal basis: I/sqrt(d) followed by the Gell-Mann set.
std::vector<HermitianOperator> hermitian_basis(int dim);

// --- implementation of the template ---

template <typename F>
HermitianOperator spectral_map(const HermitianOperator& x, F f) {
    EigDecomposition e = eig_hermitian(x);
    const int n = x.dim();
    Mat scaled(n, n);
    for (int j = 0; j < n; ++j) {
        const double fv = f(e.values[static_cast<size_t>(j)]);
        for (int i = 0; i < n; ++i) scaled(i, j) = fv * e.vectors(i, j);
    }
    return HermitianOperator(scaled * e.vectors.adjoint());
}

} // namespace chdisc
