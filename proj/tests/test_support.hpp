#pragma once

// Seeded random generators shared by the test binaries, so failures
// reproduce from the printed seed alone.

#include <cmath>
#include <random>
#include <vector>

#include "chdisc/channels.hpp"
#include "chdisc/linalg.hpp"

namespace chdisc::testsupport {

using Rng = std::mt19937_64;

inline Cx gauss(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng);
    const double im = n(rng);
    return Cx(re, im);
}

inline Mat random_mat(Rng& rng, int rows, int cols) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

inline HermitianOperator random_hermitian(Rng& rng, int dim, double scale = 1.0) {
    // the constructor symmetrizes
    return HermitianOperator(Cx(scale) * random_mat(rng, dim, dim));
}

inline HermitianOperator random_density(Rng& rng, int dim) {
    Mat g = random_mat(rng, dim, dim);
    HermitianOperator rho(g * g.adjoint());
    return (1.0 / rho.trace()) * rho;
}

inline PureState random_pure(Rng& rng, int dim) {
    std::vector<Cx> v(static_cast<size_t>(dim));
    for (auto& x : v) x = gauss(rng);
    return PureState::normalized(std::move(v));
}

// Modified Gram-Schmidt on a Gaussian matrix; Haar-like is good enough here.
inline Mat random_unitary(Rng& rng, int dim) {
    Mat g = random_mat(rng, dim, dim);
    std::vector<std::vector<Cx>> cols;
    for (int j = 0; j < dim; ++j) {
        std::vector<Cx> v(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) v[static_cast<size_t>(i)] = g(i, j);
        for (const auto& prev : cols) {
            const Cx pr = vdot(prev, v);
            for (int i = 0; i < dim; ++i) v[static_cast<size_t>(i)] -= pr * prev[static_cast<size_t>(i)];
        }
        const double nv = vnorm(v);
        for (auto& x : v) x /= nv;
        cols.push_back(std::move(v));
    }
    Mat u(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) u(i, j) = cols[static_cast<size_t>(j)][static_cast<size_t>(i)];
    return u;
}

inline std::vector<PureState> random_basis(Rng& rng, int dim) {
    Mat u = random_unitary(rng, dim);
    std::vector<PureState> out;
    for (int j = 0; j < dim; ++j) {
        std::vector<Cx> v(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) v[static_cast<size_t>(i)] = u(i, j);
        out.push_back(PureState::normalized(std::move(v)));
    }
    return out;
}

// Unitary with a prescribed spectrum in a random eigenbasis.
inline Mat unitary_with_phases(Rng& rng, const std::vector<double>& phases) {
    const int d = static_cast<int>(phases.size());
    Mat q = random_unitary(rng, d);
    Mat diag = Mat::zero(d, d);
    for (int j = 0; j < d; ++j) diag(j, j) = std::polar(1.0, phases[static_cast<size_t>(j)]);
    return q * diag * q.adjoint();
}

// CPTP channel from the first dim_in columns of a random unitary on
// dim_out * env, cut into env Kraus blocks.
inline QuantumChannel random_channel(Rng& rng, int dim_in, int dim_out, int env) {
    Mat u = random_unitary(rng, dim_out * env);
    std::vector<Mat> kraus;
    for (int k = 0; k < env; ++k) {
        Mat kk(dim_out, dim_in);
        for (int i = 0; i < dim_out; ++i)
            for (int j = 0; j < dim_in; ++j) kk(i, j) = u(k * dim_out + i, j);
        kraus.push_back(std::move(kk));
    }
    return QuantumChannel(std::move(kraus));
}

// Convex mixture of random unitaries: unital by construction.
inline QuantumChannel random_mixed_unitary(Rng& rng, int dim, int terms) {
    std::uniform_real_distribution<double> u01(0.05, 1.0);
    std::vector<double> p(static_cast<size_t>(terms));
    double s = 0.0;
    for (auto& x : p) {
        x = u01(rng);
        s += x;
    }
    std::vector<Mat> kraus;
    for (int k = 0; k < terms; ++k)
        kraus.push_back(Cx(std::sqrt(p[static_cast<size_t>(k)] / s)) * random_unitary(rng, dim));
    return QuantumChannel(std::move(kraus));
}

} // namespace chdisc::testsupport
