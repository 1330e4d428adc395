#include "chdisc/kernels.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chdisc {

int thread_budget() {
    static const int budget = [] {
        const char* env = std::getenv("CHDISC_THREADS");
        if (env == nullptr || *env == '\0') return 0;
        try {
            int v = std::stoi(env);
            return v < 0 ? 0 : v;
        } catch (...) {
            return 0;
        }
    }();
    return budget;
}

bool parallel_enabled() {
#ifdef _OPENMP
    if (thread_budget() == 1) return false;
    return true;
#else
    return false;
#endif
}

#ifdef _OPENMP
static int clamp_threads() {
    int budget = thread_budget();
    int hw = omp_get_max_threads();
    if (budget == 0 || budget > hw) return hw;
    return budget;
}
#endif

namespace kernels {

// Each output row is owned by one thread and the inner loops run in a fixed
// order, so results are bit-identical for every thread count.

void gemm_serial(int m, int k, int n, const Cx* a, const Cx* b, Cx* out) {
    for (int i = 0; i < m; ++i) {
        Cx* dst = out + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dst[j] = Cx(0.0, 0.0);
        const Cx* arow = a + static_cast<size_t>(i) * k;
        for (int l = 0; l < k; ++l) {
            const Cx av = arow[l];
            if (av == Cx(0.0, 0.0)) continue;
            const Cx* brow = b + static_cast<size_t>(l) * n;
            for (int j = 0; j < n; ++j) dst[j] += av * brow[j];
        }
    }
}

void gemm_parallel(int m, int k, int n, const Cx* a, const Cx* b, Cx* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
    for (int i = 0; i < m; ++i) {
        Cx* dst = out + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dst[j] = Cx(0.0, 0.0);
        const Cx* arow = a + static_cast<size_t>(i) * k;
        for (int l = 0; l < k; ++l) {
            const Cx av = arow[l];
            if (av == Cx(0.0, 0.0)) continue;
            const Cx* brow = b + static_cast<size_t>(l) * n;
            for (int j = 0; j < n; ++j) dst[j] += av * brow[j];
        }
    }
#else
    gemm_serial(m, k, n, a, b, out);
#endif
}

void gemm(int m, int k, int n, const Cx* a, const Cx* b, Cx* out) {
    // Parallelism only pays off once the work comfortably exceeds the fork cost.
    if (parallel_enabled() && static_cast<long long>(m) * k * n >= 64 * 64 * 64) {
        gemm_parallel(m, k, n, a, b, out);
    } else {
        gemm_serial(m, k, n, a, b, out);
    }
}

void rgemm_serial(int m, int k, int n, const double* a, const double* b, double* out) {
    for (int i = 0; i < m; ++i) {
        double* dst = out + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dst[j] = 0.0;
        const double* arow = a + static_cast<size_t>(i) * k;
        for (int l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = b + static_cast<size_t>(l) * n;
            for (int j = 0; j < n; ++j) dst[j] += av * brow[j];
        }
    }
}

void rgemm_parallel(int m, int k, int n, const double* a, const double* b, double* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(clamp_threads())
    for (int i = 0; i < m; ++i) {
        double* dst = out + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dst[j] = 0.0;
        const double* arow = a + static_cast<size_t>(i) * k;
        for (int l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = b + static_cast<size_t>(l) * n;
            for (int j = 0; j < n; ++j) dst[j] += av * brow[j];
        }
    }
#else
    rgemm_serial(m, k, n, a, b, out);
#endif
}

void rgemm(int m, int k, int n, const double* a, const double* b, double* out) {
    if (parallel_enabled() && static_cast<long long>(m) * k * n >= 64 * 64 * 64) {
        rgemm_parallel(m, k, n, a, b, out);
    } else {
        rgemm_serial(m, k, n, a, b, out);
    }
}

namespace {

// One column of the Gram matrix: sandwich B = W A_j W accumulated from the
// sparse entries of A_j as sum_e v_e * W[:,r_e] W[c_e,:], then dotted with
// every sparse A_i. scratch must hold n*n doubles.
void schur_column(const std::vector<SparseSym>& cons, const double* w, int n, int j,
                  double* scratch, double* out) {
    const size_t nn = static_cast<size_t>(n) * n;
    for (size_t t = 0; t < nn; ++t) scratch[t] = 0.0;
    const SparseSym& aj = cons[j];
    for (size_t e = 0; e < aj.val.size(); ++e) {
        const double v = aj.val[e];
        const double* wr = w + static_cast<size_t>(aj.row[e]) * n;  // W row r == W[:,r]
        const double* wc = w + static_cast<size_t>(aj.col[e]) * n;
        for (int x = 0; x < n; ++x) {
            const double vx = v * wr[x];
            if (vx == 0.0) continue;
            double* dst = scratch + static_cast<size_t>(x) * n;
            for (int y = 0; y < n; ++y) dst[y] += vx * wc[y];
        }
    }
    const size_t m = cons.size();
    for (size_t i = 0; i < m; ++i) {
        const SparseSym& ai = cons[i];
        double acc = 0.0;
        for (size_t e = 0; e < ai.val.size(); ++e) {
            acc += ai.val[e] * scratch[static_cast<size_t>(ai.row[e]) * n + ai.col[e]];
        }
        out[i * m + j] = acc;
    }
}

void symmetrize_inplace(double* m, size_t dim) {
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = i + 1; j < dim; ++j) {
            double v = 0.5 * (m[i * dim + j] + m[j * dim + i]);
            m[i * dim + j] = v;
            m[j * dim + i] = v;
        }
    }
}

} // namespace

void schur_assemble_serial(const std::vector<SparseSym>& cons, const double* w, int n,
                           double* out) {
    std::vector<double> scratch(static_cast<size_t>(n) * n);
    for (size_t j = 0; j < cons.size(); ++j) {
        schur_column(cons, w, n, static_cast<int>(j), scratch.data(), out);
    }
    symmetrize_inplace(out, cons.size());
}

void schur_assemble_parallel(const std::vector<SparseSym>& cons, const double* w, int n,
                             double* out) {
#ifdef _OPENMP
    const int jobs = static_cast<int>(cons.size());
#pragma omp parallel num_threads(clamp_threads())
    {
        std::vector<double> scratch(static_cast<size_t>(n) * n);
#pragma omp for schedule(dynamic, 4)
        for (int j = 0; j < jobs; ++j) {
            schur_column(cons, w, n, j, scratch.data(), out);
        }
    }
    symmetrize_inplace(out, cons.size());
#else
    schur_assemble_serial(cons, w, n, out);
#endif
}

void schur_assemble(const std::vector<SparseSym>& cons, const double* w, int n, double* out) {
    if (parallel_enabled() && cons.size() >= 64) {
        schur_assemble_parallel(cons, w, n, out);
    } else {
        schur_assemble_serial(cons, w, n, out);
    }
}

} // namespace kernels
} // namespace chdisc
