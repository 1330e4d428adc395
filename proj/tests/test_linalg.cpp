#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "chdisc/kernels.hpp"
#include "chdisc/linalg.hpp"
#include "test_support.hpp"

using namespace chdisc;
namespace ts = chdisc::testsupport;

namespace {

const Cx kI(0.0, 1.0);

Mat mat2(Cx a, Cx b, Cx c, Cx d) {
    Mat m(2, 2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

HermitianOperator herm_diag(std::vector<double> d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return HermitianOperator(m);
}

} // namespace

TEST_CASE("matrix product, trace, adjoint against hand values") {
    Mat a = mat2(Cx(1, 1), Cx(2, 0), Cx(0, 0), Cx(0, 3));
    Mat b = mat2(Cx(1, 0), kI, -kI, Cx(2, 0));
    Mat ab = a * b;
    CHECK(std::abs(ab(0, 0) - Cx(1, -1)) < 1e-15);
    CHECK(std::abs(ab(0, 1) - Cx(3, 1)) < 1e-15);
    CHECK(std::abs(ab(1, 0) - Cx(3, 0)) < 1e-15);
    CHECK(std::abs(ab(1, 1) - Cx(0, 6)) < 1e-15);

    CHECK(std::abs(a.trace() - Cx(1, 4)) < 1e-15);
    CHECK(std::abs(a.adjoint()(1, 0) - Cx(2, 0)) < 1e-15);
    CHECK(std::abs(a.adjoint()(0, 1) - Cx(0, 0)) < 1e-15);
    CHECK(std::abs(a.transpose()(0, 1) - Cx(0, 0)) < 1e-15);
    CHECK(std::abs(a.conjugate()(0, 0) - Cx(1, -1)) < 1e-15);
    CHECK(a.frobenius_norm() == doctest::Approx(std::sqrt(15.0)).epsilon(1e-14));
    CHECK(a.max_abs() == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("matrix shape errors") {
    Mat a(2, 3);
    Mat b(2, 2);
    CHECK_THROWS_AS(a + b, DimensionMismatch);
    CHECK_THROWS_AS(b * a * a, DimensionMismatch);
    CHECK_THROWS_AS(a.trace(), DimensionMismatch);
    CHECK_THROWS_AS(a * std::vector<Cx>(2), DimensionMismatch);
}

TEST_CASE("vector operations follow the physics conventions") {
    std::vector<Cx> x{kI, Cx(1, 0)};
    std::vector<Cx> y{Cx(1, 0), kI};
    // conjugation sits on the first argument
    CHECK(std::abs(vdot(x, y)) < 1e-15);
    CHECK(std::abs(vdot(x, x) - Cx(2, 0)) < 1e-15);
    CHECK(vnorm(x) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    Mat o = outer(x, y);
    CHECK(std::abs(o(0, 0) - kI) < 1e-15);
    CHECK(std::abs(o(0, 1) - Cx(1, 0)) < 1e-15);
    CHECK(std::abs(o(1, 0) - Cx(1, 0)) < 1e-15);
    CHECK(std::abs(o(1, 1) + kI) < 1e-15);

    Mat a = mat2(Cx(1, 0), Cx(2, 0), Cx(3, 0), Cx(4, 0));
    std::vector<Cx> av = a * std::vector<Cx>{Cx(1, 0), Cx(1, 0)};
    CHECK(std::abs(av[0] - Cx(3, 0)) < 1e-15);
    CHECK(std::abs(av[1] - Cx(7, 0)) < 1e-15);
}

TEST_CASE("hermitian construction symmetrizes") {
    Mat x = mat2(Cx(1, 0), Cx(0, 2), Cx(0, 0), Cx(3, 0));
    HermitianOperator h(x);
    CHECK(std::abs(h(0, 1) - kI) < 1e-15);
    CHECK(std::abs(h(1, 0) + kI) < 1e-15);
    CHECK(h.trace() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_AS(HermitianOperator(Mat(2, 3)), DimensionMismatch);
}

TEST_CASE("eigendecomposition of a known 2x2") {
    HermitianOperator h(mat2(Cx(1, 0), kI, -kI, Cx(1, 0)));
    EigDecomposition e = eig_hermitian(h);
    REQUIRE(e.values.size() == 2);
    CHECK(e.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    Mat rebuilt(2, 2);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) rebuilt(i, j) = e.values[static_cast<size_t>(j)] * e.vectors(i, j);
    rebuilt = rebuilt * e.vectors.adjoint();
    CHECK((rebuilt - h.mat()).max_abs() < 1e-12);
}

TEST_CASE("eigendecomposition reconstructs random matrices") {
    ts::Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        HermitianOperator x = ts::random_hermitian(rng, 6, 2.0);
        EigDecomposition e = eig_hermitian(x);
        // descending order
        for (size_t k = 1; k < e.values.size(); ++k) CHECK(e.values[k - 1] >= e.values[k]);
        // orthonormal columns
        CHECK((e.vectors.adjoint() * e.vectors - Mat::identity(6)).max_abs() < 1e-12);
        Mat scaled(6, 6);
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 6; ++i) scaled(i, j) = e.values[static_cast<size_t>(j)] * e.vectors(i, j);
        const double err = (scaled * e.vectors.adjoint() - x.mat()).max_abs();
        CHECK(err <= 1e-10 * (1.0 + x.frobenius_norm()));
    }
}

TEST_CASE("eigendecomposition handles degenerate spectra") {
    EigDecomposition e = eig_hermitian(HermitianOperator::identity(3));
    for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
    CHECK((e.vectors.adjoint() * e.vectors - Mat::identity(3)).max_abs() < 1e-12);
}

TEST_CASE("spectral functions on a diagonal operator") {
    HermitianOperator x = herm_diag({3.0, -2.0});
    CHECK((positive_part(x).mat() - herm_diag({3.0, 0.0}).mat()).max_abs() < 1e-12);
    CHECK((abs_op(x).mat() - herm_diag({3.0, 2.0}).mat()).max_abs() < 1e-12);
    CHECK(trace_norm(x) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(op_norm(x) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("spectral functions on an off-diagonal operator") {
    HermitianOperator x(mat2(Cx(0, 0), Cx(2, 0), Cx(2, 0), Cx(0, 0)));
    CHECK((abs_op(x).mat() - (Cx(2, 0) * Mat::identity(2))).max_abs() < 1e-12);
    CHECK(trace_norm(x) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(op_norm(x) == doctest::Approx(2.0).epsilon(1e-12));
    HermitianOperator pp = positive_part(x);
    CHECK(std::abs(pp(0, 0) - Cx(1, 0)) < 1e-12);
    CHECK(std::abs(pp(0, 1) - Cx(1, 0)) < 1e-12);
}

TEST_CASE("spectral_map applies scalar functions to the spectrum") {
    HermitianOperator x = herm_diag({4.0, 9.0});
    HermitianOperator r = spectral_map(x, [](double v) { return std::sqrt(v); });
    CHECK((r.mat() - herm_diag({2.0, 3.0}).mat()).max_abs() < 1e-12);

    ts::Rng rng(12);
    HermitianOperator s = ts::random_density(rng, 5);
    HermitianOperator root = spectral_map(s, [](double v) { return std::sqrt(std::max(v, 0.0)); });
    CHECK((root.mat() * root.mat() - s.mat()).max_abs() < 1e-10);
}

TEST_CASE("kron follows row-major composite indexing") {
    ts::Rng rng(13);
    Mat a = ts::random_mat(rng, 2, 2);
    Mat b = ts::random_mat(rng, 3, 3);
    Mat k = kron(a, b);
    REQUIRE(k.rows() == 6);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                    CHECK(std::abs(k(i * 3 + p, j * 3 + q) - a(i, j) * b(p, q)) < 1e-14);
}

TEST_CASE("partial_trace contracts the requested factor") {
    ts::Rng rng(14);
    HermitianOperator a = ts::random_hermitian(rng, 2);
    HermitianOperator b = ts::random_hermitian(rng, 3);
    HermitianOperator x = kron(a, b);
    const BipartiteDims dims{2, 3};

    HermitianOperator t1 = partial_trace(x, dims, Factor::First);
    CHECK((t1.mat() - a.trace() * b.mat()).max_abs() < 1e-12);
    HermitianOperator t2 = partial_trace(x, dims, Factor::Second);
    CHECK((t2.mat() - b.trace() * a.mat()).max_abs() < 1e-12);

    HermitianOperator y = ts::random_hermitian(rng, 6);
    CHECK(partial_trace(y, dims, Factor::First).trace() == doctest::Approx(y.trace()).epsilon(1e-12));
    CHECK_THROWS_AS(partial_trace(y, BipartiteDims{2, 2}, Factor::First), DimensionMismatch);
}

TEST_CASE("schmidt_operator lays out amplitudes column by column") {
    // psi[(i, j)] = op(j, i), op maps the first factor into the second
    std::vector<Cx> amp{Cx(1, 0), Cx(3, 0), Cx(2, 0), Cx(4, 0)};
    const double n = vnorm(amp);
    PureState psi = PureState::normalized(std::move(amp));
    Mat op = schmidt_operator(psi, 2);
    CHECK(std::abs(n * op(0, 0) - Cx(1, 0)) < 1e-12);
    CHECK(std::abs(n * op(0, 1) - Cx(2, 0)) < 1e-12);
    CHECK(std::abs(n * op(1, 0) - Cx(3, 0)) < 1e-12);
    CHECK(std::abs(n * op(1, 1) - Cx(4, 0)) < 1e-12);

    // the reduced state of the second factor is op op^dag
    HermitianOperator rho2 = partial_trace(psi.projector(), BipartiteDims{2, 2}, Factor::First);
    CHECK((rho2.mat() - op * op.adjoint()).max_abs() < 1e-12);
}

TEST_CASE("pure states enforce normalization strictly") {
    std::vector<Cx> off{Cx(1.0 + 1e-6, 0), Cx(0, 0)};
    CHECK_THROWS_AS(PureState{off}, NotAState);
    PureState fixed = PureState::normalized(off);
    CHECK(vnorm(fixed.amp()) == doctest::Approx(1.0).epsilon(1e-14));
    HermitianOperator p = fixed.projector();
    CHECK((p.mat() * p.mat() - p.mat()).max_abs() < 1e-14);
    CHECK(p.trace() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("basis families are orthonormal and complete") {
    for (int dim : {2, 3}) {
        std::vector<HermitianOperator> gm = gell_mann_basis(dim);
        REQUIRE(static_cast<int>(gm.size()) == dim * dim - 1);
        for (const auto& g : gm) CHECK(std::abs(g.trace()) < 1e-13);
        for (size_t i = 0; i < gm.size(); ++i)
            for (size_t j = 0; j < gm.size(); ++j)
                CHECK(hs_inner(gm[i], gm[j]) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));

        std::vector<HermitianOperator> full = hermitian_basis(dim);
        REQUIRE(static_cast<int>(full.size()) == dim * dim);
        CHECK((full[0].mat() - (Cx(1.0 / std::sqrt(dim)) * Mat::identity(dim))).max_abs() < 1e-14);

        ts::Rng rng(15);
        HermitianOperator x = ts::random_hermitian(rng, dim);
        HermitianOperator rebuilt = HermitianOperator::zero(dim);
        for (const auto& e : full) rebuilt += hs_inner(e, x) * e;
        CHECK((rebuilt.mat() - x.mat()).max_abs() < 1e-12);
    }
}

TEST_CASE("hs_inner is the real Hilbert-Schmidt pairing") {
    ts::Rng rng(16);
    HermitianOperator a = ts::random_hermitian(rng, 4);
    HermitianOperator b = ts::random_hermitian(rng, 4);
    CHECK(hs_inner(a, b) == doctest::Approx((a.mat() * b.mat()).trace().real()).epsilon(1e-12));
    CHECK(hs_inner(a, a) == doctest::Approx(a.frobenius_norm() * a.frobenius_norm()).epsilon(1e-12));
}

TEST_CASE("complex gemm kernels agree bitwise and match a naive product") {
    ts::Rng rng(17);
    const int m = 37, k = 23, n = 41;
    Mat a = ts::random_mat(rng, m, k);
    Mat b = ts::random_mat(rng, k, n);
    std::vector<Cx> serial(static_cast<size_t>(m) * n), parallel(static_cast<size_t>(m) * n);
    kernels::gemm_serial(m, k, n, a.data(), b.data(), serial.data());
    kernels::gemm_parallel(m, k, n, a.data(), b.data(), parallel.data());
    for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);

    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            Cx acc(0, 0);
            for (int t = 0; t < k; ++t) acc += a(i, t) * b(t, j);
            CHECK(std::abs(serial[static_cast<size_t>(i) * n + j] - acc) < 1e-10);
        }
}

TEST_CASE("real gemm kernels agree bitwise") {
    ts::Rng rng(18);
    std::normal_distribution<double> nd;
    const int m = 29, k = 31, n = 27;
    std::vector<double> a(static_cast<size_t>(m) * k), b(static_cast<size_t>(k) * n);
    for (auto& x : a) x = nd(rng);
    for (auto& x : b) x = nd(rng);
    std::vector<double> serial(static_cast<size_t>(m) * n), parallel(static_cast<size_t>(m) * n);
    kernels::rgemm_serial(m, k, n, a.data(), b.data(), serial.data());
    kernels::rgemm_parallel(m, k, n, a.data(), b.data(), parallel.data());
    for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("schur assembly kernels agree and match the dense formula") {
    ts::Rng rng(19);
    std::normal_distribution<double> nd;
    const int n = 16, m = 13;
    std::vector<kernels::SparseSym> cons(static_cast<size_t>(m));
    std::uniform_int_distribution<int> idx(0, n - 1);
    for (auto& c : cons) {
        c.n = n;
        for (int e = 0; e < 7; ++e) {
            const int r = idx(rng);
            const int s = idx(rng);
            const double v = nd(rng);
            if (r == s) {
                c.add(r, r, v);
            } else {
                c.add(r, s, v);
                c.add(s, r, v);
            }
        }
    }
    std::vector<double> w(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = nd(rng);
            w[static_cast<size_t>(i) * n + j] = v;
            w[static_cast<size_t>(j) * n + i] = v;
        }

    std::vector<double> serial(static_cast<size_t>(m) * m), parallel(static_cast<size_t>(m) * m);
    kernels::schur_assemble_serial(cons, w.data(), n, serial.data());
    kernels::schur_assemble_parallel(cons, w.data(), n, parallel.data());
    for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);

    // dense reference: <A_i, W A_j W>
    auto dense = [&](const kernels::SparseSym& c) {
        std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
        for (size_t e = 0; e < c.val.size(); ++e)
            d[static_cast<size_t>(c.row[e]) * n + c.col[e]] += c.val[e];
        return d;
    };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            std::vector<double> ai = dense(cons[static_cast<size_t>(i)]);
            std::vector<double> aj = dense(cons[static_cast<size_t>(j)]);
            std::vector<double> waj(static_cast<size_t>(n) * n), wajw(static_cast<size_t>(n) * n);
            kernels::rgemm_serial(n, n, n, w.data(), aj.data(), waj.data());
            kernels::rgemm_serial(n, n, n, waj.data(), w.data(), wajw.data());
            double acc = 0.0;
            for (size_t t = 0; t < wajw.size(); ++t) acc += ai[t] * wajw[t];
            CHECK(serial[static_cast<size_t>(i) * m + j] == doctest::Approx(acc).scale(1.0).epsilon(1e-10));
        }
}
