#pragma once

#include <complex>
#include <vector>

// Hot inner kernels, each in a serial reference version and an OpenMP
// version. The plain names dispatch on problem size and the configured
// thread budget; tests compare the two versions directly and the bench
// target times them against each other.

namespace chdisc {

using Cx = std::complex<double>;

// Thread budget for parallel kernels and sweep evaluation.
//   CHDISC_THREADS unset or 0  -> OpenMP default (all cores)
//   CHDISC_THREADS = 1         -> serial everywhere
//   CHDISC_THREADS = n         -> at most n threads
// Cached after the first call.
int thread_budget();

// True when OpenMP is compiled in and the budget allows more than one thread.
bool parallel_enabled();

namespace kernels {

// Row-major complex gemm: out = A (m x k) * B (k x n). out must not alias.
void gemm_serial(int m, int k, int n, const Cx* a, const Cx* b, Cx* out);
void gemm_parallel(int m, int k, int n, const Cx* a, const Cx* b, Cx* out);
void gemm(int m, int k, int n, const Cx* a, const Cx* b, Cx* out);

// Row-major real gemm, same contract.
void rgemm_serial(int m, int k, int n, const double* a, const double* b, double* out);
void rgemm_parallel(int m, int k, int n, const double* a, const double* b, double* out);
void rgemm(int m, int k, int n, const double* a, const double* b, double* out);

// Sparse symmetric real matrix given as explicit entries (full pattern,
// both triangles), used for cone-program constraint operators.
struct SparseSym {
    int n = 0;
    std::vector<int> row;
    std::vector<int> col;
    std::vector<double> val;

    void add(int r, int c, double v) {
        row.push_back(r);
        col.push_back(c);
        val.push_back(v);
    }
};

// Gram matrix of constraint sandwiches: out[i*m + j] = <A_i, W A_j W> for
// symmetric dense W (n x n). out is filled fully and symmetrized.
void schur_assemble_serial(const std::vector<SparseSym>& cons, const double* w, int n,
                           double* out);
void schur_assemble_parallel(const std::vector<SparseSym>& cons, const double* w, int n,
                             double* out);
void schur_assemble(const std::vector<SparseSym>& cons, const double* w, int n, double* out);

} // namespace kernels
} // namespace chdisc
