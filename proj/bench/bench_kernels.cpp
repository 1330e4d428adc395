// Times the serial reference kernels against their OpenMP versions.
// CHDISC_THREADS caps the parallel side the same way it does in the library.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "chdisc/kernels.hpp"

using namespace chdisc;

namespace {

std::vector<Cx> random_complex(int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Cx> v(static_cast<size_t>(count));
    for (auto& x : v) x = Cx(g(rng), g(rng));
    return v;
}

std::vector<double> random_real(int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(static_cast<size_t>(count));
    for (auto& x : v) x = g(rng);
    return v;
}

std::vector<double> random_symmetric(int n, unsigned seed) {
    std::vector<double> w = random_real(n * n, seed);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double s = 0.5 * (w[static_cast<size_t>(i) * n + j] +
                                    w[static_cast<size_t>(j) * n + i]);
            w[static_cast<size_t>(i) * n + j] = s;
            w[static_cast<size_t>(j) * n + i] = s;
        }
    return w;
}

// Sparse family shaped like embedded cone-program constraints: a few
// symmetric entry pairs per operator.
std::vector<kernels::SparseSym> constraint_family(int m, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<kernels::SparseSym> cons(static_cast<size_t>(m));
    for (auto& c : cons) {
        c.n = n;
        for (int e = 0; e < 4; ++e) {
            const int r = pick(rng);
            const int col = pick(rng);
            const double v = g(rng);
            c.add(r, col, v);
            if (r != col) c.add(col, r, v);
        }
    }
    return cons;
}

void bm_gemm_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const std::vector<Cx> a = random_complex(n * n, 11);
    const std::vector<Cx> b = random_complex(n * n, 12);
    std::vector<Cx> out(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::gemm_serial(n, n, n, a.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * n * n);
}

void bm_gemm_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const std::vector<Cx> a = random_complex(n * n, 11);
    const std::vector<Cx> b = random_complex(n * n, 12);
    std::vector<Cx> out(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::gemm_parallel(n, n, n, a.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * n * n);
}

void bm_rgemm_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const std::vector<double> a = random_real(n * n, 21);
    const std::vector<double> b = random_real(n * n, 22);
    std::vector<double> out(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::rgemm_serial(n, n, n, a.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * n * n);
}

void bm_rgemm_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const std::vector<double> a = random_real(n * n, 21);
    const std::vector<double> b = random_real(n * n, 22);
    std::vector<double> out(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::rgemm_parallel(n, n, n, a.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * n * n);
}

void bm_schur_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int m = 3 * n;
    const auto cons = constraint_family(m, n, 31);
    const std::vector<double> w = random_symmetric(n, 32);
    std::vector<double> out(static_cast<size_t>(m) * m);
    for (auto _ : state) {
        kernels::schur_assemble_serial(cons, w.data(), n, out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(m) * m);
}

void bm_schur_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int m = 3 * n;
    const auto cons = constraint_family(m, n, 31);
    const std::vector<double> w = random_symmetric(n, 32);
    std::vector<double> out(static_cast<size_t>(m) * m);
    for (auto _ : state) {
        kernels::schur_assemble_parallel(cons, w.data(), n, out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(m) * m);
}

} // namespace

BENCHMARK(bm_gemm_serial)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_gemm_parallel)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_rgemm_serial)->Arg(64)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_rgemm_parallel)->Arg(64)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_schur_serial)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(bm_schur_parallel)->Arg(32)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
