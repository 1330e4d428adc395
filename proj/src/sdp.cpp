#include "chdisc/sdp.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>

#include "chdisc/errors.hpp"
#include "chdisc/kernels.hpp"

namespace chdisc {

namespace {

using kernels::SparseSym;

// ---------------------------------------------------------------------------
// Dense real symmetric eigensolver: Householder tridiagonalization followed
// by QL with implicit shifts. Only the solver uses this; the public
// eig_hermitian stays the complex Jacobi in linalg.
// ---------------------------------------------------------------------------

void tred2(int n, double* a, double* d, double* e) {
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (int k = 0; k <= l; ++k) scale += std::fabs(a[i * n + k]);
            if (scale == 0.0) {
                e[i] = a[i * n + l];
            } else {
                for (int k = 0; k <= l; ++k) {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                double f = a[i * n + l];
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a[j * n + i] = a[i * n + j] / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
                    for (int k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a[i * n + j];
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k)
                        a[j * n + k] -= (f * e[k] + g * a[i * n + k]);
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += a[i * n + k] * a[k * n + j];
                for (int k = 0; k <= l; ++k) a[k * n + j] -= g * a[k * n + i];
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for (int j = 0; j <= l; ++j) a[j * n + i] = a[i * n + j] = 0.0;
    }
}

void tqli(int n, double* d, double* e, double* z) {
    auto sign_of = [](double a, double b) { return b >= 0.0 ? std::fabs(a) : -std::fabs(a); };
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= DBL_EPSILON * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw DecompositionFailed("tqli: eigenvalue iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + sign_of(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

struct REig {
    std::vector<double> w;  // ascending
    std::vector<double> z;  // column k is the eigenvector for w[k]
};

REig reig(int n, std::vector<double> a) {
    REig out;
    out.w.assign(static_cast<size_t>(n), 0.0);
    if (n == 1) {
        out.w[0] = a[0];
        out.z = {1.0};
        return out;
    }
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    tred2(n, a.data(), out.w.data(), e.data());
    tqli(n, out.w.data(), e.data(), a.data());
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int p, int q) { return out.w[static_cast<size_t>(p)] <
                                                out.w[static_cast<size_t>(q)]; });
    std::vector<double> w(static_cast<size_t>(n));
    std::vector<double> z(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<size_t>(k)];
        w[static_cast<size_t>(k)] = out.w[static_cast<size_t>(src)];
        for (int i = 0; i < n; ++i) z[static_cast<size_t>(i) * n + k] = a[static_cast<size_t>(i) * n + src];
    }
    out.w = std::move(w);
    out.z = std::move(z);
    return out;
}

// Z diag(f(w)) Z^T for an eigendecomposition.
template <typename F>
std::vector<double> eig_build(int n, const REig& e, F f) {
    std::vector<double> scaled(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            scaled[static_cast<size_t>(i) * n + k] =
                e.z[static_cast<size_t>(i) * n + k] * f(e.w[static_cast<size_t>(k)]);
    std::vector<double> zt(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            zt[static_cast<size_t>(k) * n + j] = e.z[static_cast<size_t>(j) * n + k];
    std::vector<double> out(static_cast<size_t>(n) * n);
    kernels::rgemm(n, n, n, scaled.data(), zt.data(), out.data());
    return out;
}

std::vector<double> rmul(int n, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(static_cast<size_t>(n) * n);
    kernels::rgemm(n, n, n, a.data(), b.data(), c.data());
    return c;
}

void rsymmetrize(int n, std::vector<double>& a) {
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a[static_cast<size_t>(i) * n + j] +
                                    a[static_cast<size_t>(j) * n + i]);
            a[static_cast<size_t>(i) * n + j] = v;
            a[static_cast<size_t>(j) * n + i] = v;
        }
}

double rdot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double rmax_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

bool rchol(int n, std::vector<double>& a) {
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            const double v = a[static_cast<size_t>(j) * n + k];
            d -= v * v;
        }
        if (d <= 0.0 || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        a[static_cast<size_t>(j) * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[static_cast<size_t>(i) * n + k] * a[static_cast<size_t>(j) * n + k];
            a[static_cast<size_t>(i) * n + j] = s / d;
        }
    }
    return true;
}

void rchol_solve(int n, const std::vector<double>& l, double* x) {
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int k = 0; k < i; ++k) s -= l[static_cast<size_t>(i) * n + k] * x[k];
        x[i] = s / l[static_cast<size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= l[static_cast<size_t>(k) * n + i] * x[k];
        x[i] = s / l[static_cast<size_t>(i) * n + i];
    }
}

double sparse_dot(const SparseSym& a, const std::vector<double>& x, int n) {
    double acc = 0.0;
    for (size_t e = 0; e < a.val.size(); ++e)
        acc += a.val[e] * x[static_cast<size_t>(a.row[e]) * n + a.col[e]];
    return acc;
}

void sparse_axpy(const SparseSym& a, double coef, std::vector<double>& dst, int n) {
    for (size_t e = 0; e < a.val.size(); ++e)
        dst[static_cast<size_t>(a.row[e]) * n + a.col[e]] += coef * a.val[e];
}

// ---------------------------------------------------------------------------
// Complex <-> real embedding. A Hermitian A maps to (1/2) [[Re A, -Im A],
// [Im A, Re A]], which preserves inner products with similarly embedded
// variables, so objective values, right-hand sides, and dual multipliers all
// carry over one to one.
// ---------------------------------------------------------------------------

SparseSym embed_sparse(const HermitianOperator& h) {
    const int nc = h.dim();
    SparseSym s;
    s.n = 2 * nc;
    for (int i = 0; i < nc; ++i) {
        for (int j = 0; j < nc; ++j) {
            const Cx v = h(i, j);
            const double re = 0.5 * v.real();
            const double im = 0.5 * v.imag();
            if (re != 0.0) {
                s.add(i, j, re);
                s.add(nc + i, nc + j, re);
            }
            if (im != 0.0) {
                s.add(nc + i, j, im);
                s.add(i, nc + j, -im);
            }
        }
    }
    return s;
}

std::vector<double> embed_dense(const HermitianOperator& h, double scale) {
    const int nc = h.dim();
    const int n = 2 * nc;
    std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < nc; ++i) {
        for (int j = 0; j < nc; ++j) {
            const Cx v = h(i, j);
            const double re = 0.5 * scale * v.real();
            const double im = 0.5 * scale * v.imag();
            out[static_cast<size_t>(i) * n + j] = re;
            out[static_cast<size_t>(nc + i) * n + nc + j] = re;
            out[static_cast<size_t>(nc + i) * n + j] = im;
            out[static_cast<size_t>(i) * n + nc + j] = -im;
        }
    }
    return out;
}

HermitianOperator unembed(const std::vector<double>& x, int nc) {
    const int n = 2 * nc;
    Mat m(nc, nc);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) {
            const double re = 0.5 * (x[static_cast<size_t>(i) * n + j] +
                                     x[static_cast<size_t>(nc + i) * n + nc + j]);
            const double im = 0.5 * (x[static_cast<size_t>(nc + i) * n + j] -
                                     x[static_cast<size_t>(i) * n + nc + j]);
            m(i, j) = Cx(re, im);
        }
    return HermitianOperator(m);
}

// Pivoted Cholesky on the constraint Gram matrix; rows never pivoted before
// the diagonal residual falls under drop_tol are linear combinations of the
// pivoted ones.
struct PivotSplit {
    std::vector<int> kept;
    std::vector<int> dropped;
};

PivotSplit pivoted_split(int m, std::vector<double> g, double drop_tol) {
    std::vector<int> idx(static_cast<size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    int k = 0;
    for (; k < m; ++k) {
        int best = k;
        for (int t = k + 1; t < m; ++t) {
            if (g[static_cast<size_t>(idx[t]) * m + idx[t]] >
                g[static_cast<size_t>(idx[best]) * m + idx[best]])
                best = t;
        }
        std::swap(idx[static_cast<size_t>(k)], idx[static_cast<size_t>(best)]);
        const int pk = idx[static_cast<size_t>(k)];
        const double dk = g[static_cast<size_t>(pk) * m + pk];
        if (dk <= drop_tol) break;
        const double root = std::sqrt(dk);
        g[static_cast<size_t>(pk) * m + pk] = root;
        for (int t = k + 1; t < m; ++t) {
            const int pt = idx[static_cast<size_t>(t)];
            g[static_cast<size_t>(pt) * m + pk] /= root;
        }
        for (int t = k + 1; t < m; ++t) {
            const int pt = idx[static_cast<size_t>(t)];
            const double lt = g[static_cast<size_t>(pt) * m + pk];
            if (lt == 0.0) continue;
            for (int s = k + 1; s < m; ++s) {
                const int ps = idx[static_cast<size_t>(s)];
                g[static_cast<size_t>(pt) * m + ps] -= lt * g[static_cast<size_t>(ps) * m + pk];
            }
        }
    }
    PivotSplit out;
    out.kept.assign(idx.begin(), idx.begin() + k);
    out.dropped.assign(idx.begin() + k, idx.end());
    std::sort(out.kept.begin(), out.kept.end());
    std::sort(out.dropped.begin(), out.dropped.end());
    return out;
}

struct RealProblem {
    int n = 0;   // embedded dimension
    int nc = 0;  // complex dimension
    double cost_scale = 1.0;
    std::vector<double> cost;
    std::vector<SparseSym> cons;  // kept rows, normalized
    std::vector<double> b;        // matching right-hand sides
    std::vector<int> kept;        // original constraint index per row
    std::vector<double> row_scale;
    bool inconsistent = false;    // contradictory dependent rows found
};

RealProblem preprocess(const SdpProblem& p) {
    const int nc = p.cost.dim();
    const int m = static_cast<int>(p.constraints.size());
    RealProblem rp;
    rp.nc = nc;
    rp.n = 2 * nc;
    rp.cost_scale = std::max(1.0, p.cost.mat().max_abs());
    rp.cost = embed_dense(p.cost, 1.0 / rp.cost_scale);
    rp.row_scale.assign(static_cast<size_t>(m), 0.0);

    std::vector<SparseSym> all(static_cast<size_t>(m));
    std::vector<double> ball(static_cast<size_t>(m), 0.0);
    std::vector<int> candidates;
    for (int j = 0; j < m; ++j) {
        if (p.constraints[static_cast<size_t>(j)].op.dim() != nc)
            throw DimensionMismatch("solve_sdp: constraint dimension mismatch");
        SparseSym s = embed_sparse(p.constraints[static_cast<size_t>(j)].op);
        double nrm = 0.0;
        for (double v : s.val) nrm += v * v;
        nrm = std::sqrt(nrm);
        const double rhs = p.constraints[static_cast<size_t>(j)].rhs;
        if (nrm < 1e-300) {
            if (std::fabs(rhs) > 1e-12) rp.inconsistent = true;
            continue;
        }
        for (double& v : s.val) v /= nrm;
        rp.row_scale[static_cast<size_t>(j)] = nrm;
        ball[static_cast<size_t>(j)] = rhs / nrm;
        all[static_cast<size_t>(j)] = std::move(s);
        candidates.push_back(j);
    }
    if (rp.inconsistent) return rp;
    if (candidates.empty()) throw SolverFailure("solve_sdp: no usable constraints");

    const int mc = static_cast<int>(candidates.size());
    std::vector<SparseSym> cc;
    cc.reserve(static_cast<size_t>(mc));
    for (int j : candidates) cc.push_back(all[static_cast<size_t>(j)]);
    std::vector<double> eye(static_cast<size_t>(rp.n) * rp.n, 0.0);
    for (int i = 0; i < rp.n; ++i) eye[static_cast<size_t>(i) * rp.n + i] = 1.0;
    std::vector<double> gram(static_cast<size_t>(mc) * mc);
    kernels::schur_assemble(cc, eye.data(), rp.n, gram.data());

    PivotSplit split = pivoted_split(mc, gram, 1e-10);
    if (split.kept.empty()) throw SolverFailure("solve_sdp: all constraints degenerate");

    if (!split.dropped.empty()) {
        // Dependent rows must carry consistent right-hand sides, otherwise the
        // problem is contradictory.
        const int mk = static_cast<int>(split.kept.size());
        std::vector<double> gkk(static_cast<size_t>(mk) * mk);
        for (int r = 0; r < mk; ++r)
            for (int c = 0; c < mk; ++c)
                gkk[static_cast<size_t>(r) * mk + c] =
                    gram[static_cast<size_t>(split.kept[static_cast<size_t>(r)]) * mc +
                         split.kept[static_cast<size_t>(c)]];
        for (int r = 0; r < mk; ++r) gkk[static_cast<size_t>(r) * mk + r] += 1e-13;
        if (!rchol(mk, gkk)) throw SolverFailure("solve_sdp: Gram factorization failed");
        for (int dj : split.dropped) {
            std::vector<double> coef(static_cast<size_t>(mk));
            for (int r = 0; r < mk; ++r)
                coef[static_cast<size_t>(r)] =
                    gram[static_cast<size_t>(split.kept[static_cast<size_t>(r)]) * mc + dj];
            rchol_solve(mk, gkk, coef.data());
            double pred = 0.0;
            for (int r = 0; r < mk; ++r)
                pred += coef[static_cast<size_t>(r)] *
                        ball[static_cast<size_t>(candidates[static_cast<size_t>(
                            split.kept[static_cast<size_t>(r)])])];
            const double bj = ball[static_cast<size_t>(candidates[static_cast<size_t>(dj)])];
            if (std::fabs(pred - bj) > 1e-8 * (1.0 + std::fabs(bj))) {
                rp.inconsistent = true;
                return rp;
            }
        }
    }

    for (int kj : split.kept) {
        const int orig = candidates[static_cast<size_t>(kj)];
        rp.cons.push_back(std::move(all[static_cast<size_t>(orig)]));
        rp.b.push_back(ball[static_cast<size_t>(orig)]);
        rp.kept.push_back(orig);
    }
    return rp;
}

struct IpmResult {
    SolveStatus status = SolveStatus::MaxIterations;
    std::vector<double> x;
    std::vector<double> y;
    int iterations = 0;
};

IpmResult run_ipm(const RealProblem& rp, const SdpOptions& opt) {
    const int n = rp.n;
    const int m = static_cast<int>(rp.cons.size());
    const size_t nn = static_cast<size_t>(n) * n;

    IpmResult res;
    double norm_b = 0.0;
    for (double v : rp.b) norm_b = std::max(norm_b, std::fabs(v));
    const double norm_c = rmax_abs(rp.cost);

    std::vector<double> x(nn, 0.0), s(nn, 0.0);
    std::vector<double> y(static_cast<size_t>(m), 0.0);
    const double tau_p = std::max(1.0, norm_b);
    const double tau_d = std::max(1.0, norm_c);
    for (int i = 0; i < n; ++i) {
        x[static_cast<size_t>(i) * n + i] = tau_p;
        s[static_cast<size_t>(i) * n + i] = tau_d;
    }

    const double mu0 = tau_p * tau_d;
    double best_res = std::numeric_limits<double>::infinity();
    int best_iter = 0;

    std::vector<double> rpv(static_cast<size_t>(m));
    std::vector<double> rd(nn), wrdw(nn), rc(nn), dx(nn), ds(nn), scratch(nn);
    std::vector<double> avec(static_cast<size_t>(m)), rhs(static_cast<size_t>(m));
    std::vector<double> h(static_cast<size_t>(m) * m);

    auto classify = [&](double pres, double dres, double gap, double mu, bool stalled) {
        if (pres <= opt.tol && dres <= opt.tol && gap <= opt.tol) return SolveStatus::Optimal;
        if (pres <= 1e-7 && dres <= 1e-7 && gap <= 1e-7) return SolveStatus::Optimal;
        // Complementarity kept shrinking while primal feasibility plateaued:
        // the classic signature of an infeasible constraint system.
        if (pres > 1e-6 && (stalled || mu <= 1e-10 * mu0)) return SolveStatus::Infeasible;
        return SolveStatus::MaxIterations;
    };

    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        for (int j = 0; j < m; ++j)
            rpv[static_cast<size_t>(j)] =
                rp.b[static_cast<size_t>(j)] - sparse_dot(rp.cons[static_cast<size_t>(j)], x, n);
        for (size_t t = 0; t < nn; ++t) rd[t] = rp.cost[t] + s[t];
        for (int j = 0; j < m; ++j)
            sparse_axpy(rp.cons[static_cast<size_t>(j)], -y[static_cast<size_t>(j)], rd, n);

        const double pv = rdot(rp.cost, x);
        double dv = 0.0;
        for (int j = 0; j < m; ++j) dv += rp.b[static_cast<size_t>(j)] * y[static_cast<size_t>(j)];
        const double mu = rdot(x, s) / n;
        double pres = 0.0;
        for (double v : rpv) pres = std::max(pres, std::fabs(v));
        pres /= 1.0 + norm_b;
        const double dres = rmax_abs(rd) / (1.0 + norm_c);
        const double gap = std::fabs(pv - dv) / (1.0 + std::fabs(pv) + std::fabs(dv));
        const double total = std::max({pres, dres, gap});

        // Diverging iterates mean the dual is unbounded while primal
        // feasibility is stuck, so report infeasibility instead of feeding
        // overflowed numbers to the eigensolver.
        if (!std::isfinite(total) || rmax_abs(x) > 1e150 || rmax_abs(s) > 1e150) {
            res.status = (std::isfinite(pres) && pres <= 1e-6) ? SolveStatus::MaxIterations
                                                               : SolveStatus::Infeasible;
            break;
        }

        if (total <= opt.tol) {
            res.status = SolveStatus::Optimal;
            break;
        }
        if (total < 0.999 * best_res) {
            best_res = total;
            best_iter = it;
        } else if (it - best_iter > 30) {
            res.status = classify(pres, dres, gap, mu, true);
            break;
        }

        REig ex = reig(n, x);
        REig es = reig(n, s);
        if (ex.w.front() <= 0.0 || es.w.front() <= 0.0) {
            res.status = classify(pres, dres, gap, mu, it - best_iter > 15);
            break;
        }
        std::vector<double> xh = eig_build(n, ex, [](double w) { return std::sqrt(w); });
        std::vector<double> xih = eig_build(n, ex, [](double w) { return 1.0 / std::sqrt(w); });
        std::vector<double> sinv = eig_build(n, es, [](double w) { return 1.0 / w; });
        std::vector<double> sih = eig_build(n, es, [](double w) { return 1.0 / std::sqrt(w); });

        std::vector<double> mid = rmul(n, rmul(n, xh, s), xh);
        rsymmetrize(n, mid);
        REig em = reig(n, mid);
        if (em.w.front() <= 0.0) {
            res.status = classify(pres, dres, gap, mu, it - best_iter > 15);
            break;
        }
        std::vector<double> misqrt = eig_build(n, em, [](double w) { return 1.0 / std::sqrt(w); });
        std::vector<double> w = rmul(n, rmul(n, xh, misqrt), xh);
        rsymmetrize(n, w);

        kernels::schur_assemble(rp.cons, w.data(), n, h.data());
        std::vector<double> hl = h;
        bool ok = rchol(m, hl);
        if (!ok) {
            double trace = 0.0;
            for (int j = 0; j < m; ++j) trace += h[static_cast<size_t>(j) * m + j];
            double jitter = 1e-14 * std::max(1.0, trace / m);
            for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
                hl = h;
                for (int j = 0; j < m; ++j) hl[static_cast<size_t>(j) * m + j] += jitter;
                ok = rchol(m, hl);
                jitter *= 1e4;
            }
            if (!ok) {
                res.status = classify(pres, dres, gap, mu, it - best_iter > 15);
                break;
            }
        }

        std::vector<double> tmp = rmul(n, rmul(n, w, rd), w);
        rsymmetrize(n, tmp);
        wrdw = tmp;
        for (int j = 0; j < m; ++j)
            avec[static_cast<size_t>(j)] = sparse_dot(rp.cons[static_cast<size_t>(j)], wrdw, n);

        auto solve_direction = [&](const std::vector<double>& rc_in, std::vector<double>& dy_out) {
            for (int j = 0; j < m; ++j)
                rhs[static_cast<size_t>(j)] =
                    sparse_dot(rp.cons[static_cast<size_t>(j)], rc_in, n) +
                    avec[static_cast<size_t>(j)] - rpv[static_cast<size_t>(j)];
            dy_out = rhs;
            rchol_solve(m, hl, dy_out.data());
            // dS = A^T(dy) - Rd ; dX = Rc - W dS W
            for (size_t t = 0; t < nn; ++t) ds[t] = -rd[t];
            for (int j = 0; j < m; ++j)
                sparse_axpy(rp.cons[static_cast<size_t>(j)], dy_out[static_cast<size_t>(j)], ds, n);
            scratch = rmul(n, rmul(n, w, ds), w);
            for (size_t t = 0; t < nn; ++t) dx[t] = rc_in[t] - scratch[t];
            rsymmetrize(n, dx);
            rsymmetrize(n, ds);
        };

        auto max_step = [&](const std::vector<double>& ih, const std::vector<double>& delta) {
            std::vector<double> yv = rmul(n, rmul(n, ih, delta), ih);
            rsymmetrize(n, yv);
            REig ey = reig(n, yv);
            const double lmin = ey.w.front();
            if (lmin >= -1e-300) return std::numeric_limits<double>::infinity();
            return -1.0 / lmin;
        };

        // predictor: aim straight at complementarity zero
        for (size_t t = 0; t < nn; ++t) rc[t] = -x[t];
        std::vector<double> dy;
        solve_direction(rc, dy);
        const double ap_aff = std::min(1.0, 0.98 * max_step(xih, dx));
        const double ad_aff = std::min(1.0, 0.98 * max_step(sih, ds));
        double mu_aff = rdot(x, s) + ap_aff * rdot(dx, s) + ad_aff * rdot(x, ds) +
                        ap_aff * ad_aff * rdot(dx, ds);
        mu_aff = std::max(mu_aff / n, 0.0);
        double sigma = mu_aff / mu;
        sigma = std::min(1.0, std::max(0.0, sigma * sigma * sigma));

        // corrector with the centering target sigma * mu
        const double target = sigma * mu;
        for (size_t t = 0; t < nn; ++t) rc[t] = target * sinv[t] - x[t];
        solve_direction(rc, dy);
        const double ap = std::min(1.0, 0.98 * max_step(xih, dx));
        const double ad = std::min(1.0, 0.98 * max_step(sih, ds));
        if (ap < 1e-10 && ad < 1e-10) {
            res.status = classify(pres, dres, gap, mu, it - best_iter > 15);
            break;
        }
        for (size_t t = 0; t < nn; ++t) x[t] += ap * dx[t];
        for (size_t t = 0; t < nn; ++t) s[t] += ad * ds[t];
        for (int j = 0; j < m; ++j) y[static_cast<size_t>(j)] += ad * dy[static_cast<size_t>(j)];
        rsymmetrize(n, x);
        rsymmetrize(n, s);
    }

    if (it == opt.max_iterations) {
        // final residual read for classification
        for (int j = 0; j < m; ++j)
            rpv[static_cast<size_t>(j)] =
                rp.b[static_cast<size_t>(j)] - sparse_dot(rp.cons[static_cast<size_t>(j)], x, n);
        for (size_t t = 0; t < nn; ++t) rd[t] = rp.cost[t] + s[t];
        for (int j = 0; j < m; ++j)
            sparse_axpy(rp.cons[static_cast<size_t>(j)], -y[static_cast<size_t>(j)], rd, n);
        double pres = 0.0;
        for (double v : rpv) pres = std::max(pres, std::fabs(v));
        pres /= 1.0 + norm_b;
        const double dres = rmax_abs(rd) / (1.0 + norm_c);
        const double pv = rdot(rp.cost, x);
        double dv = 0.0;
        for (int j = 0; j < m; ++j) dv += rp.b[static_cast<size_t>(j)] * y[static_cast<size_t>(j)];
        const double gap = std::fabs(pv - dv) / (1.0 + std::fabs(pv) + std::fabs(dv));
        res.status = classify(pres, dres, gap, rdot(x, s) / n, it - best_iter > 30);
    }

    res.x = std::move(x);
    res.y = std::move(y);
    res.iterations = std::min(it + 1, opt.max_iterations);
    return res;
}

} // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
    if (problem.cost.dim() < 1) throw DimensionMismatch("solve_sdp: empty cost");
    if (problem.constraints.empty()) throw SolverFailure("solve_sdp: no constraints");

    const int nc = problem.cost.dim();
    const int m = static_cast<int>(problem.constraints.size());

    RealProblem rp = preprocess(problem);

    SdpSolution sol;
    sol.y.assign(static_cast<size_t>(m), 0.0);

    if (rp.inconsistent) {
        sol.status = SolveStatus::Infeasible;
        sol.x = HermitianOperator::zero(nc);
        sol.slack = HermitianOperator(Mat::zero(nc, nc) - problem.cost.mat());
        sol.iterations = 0;
    } else {
        IpmResult ipm = run_ipm(rp, options);
        sol.status = ipm.status;
        sol.iterations = ipm.iterations;
        sol.x = unembed(ipm.x, nc);
        for (size_t k = 0; k < rp.kept.size(); ++k) {
            const int orig = rp.kept[k];
            sol.y[static_cast<size_t>(orig)] =
                ipm.y[k] * rp.cost_scale / rp.row_scale[static_cast<size_t>(orig)];
        }
        Mat slack = Mat::zero(nc, nc) - problem.cost.mat();
        for (int j = 0; j < m; ++j) {
            if (sol.y[static_cast<size_t>(j)] == 0.0) continue;
            slack += Cx(sol.y[static_cast<size_t>(j)], 0.0) *
                     problem.constraints[static_cast<size_t>(j)].op.mat();
        }
        sol.slack = HermitianOperator(std::move(slack));
    }

    sol.primal_value = hs_inner(problem.cost, sol.x);
    sol.dual_value = 0.0;
    double norm_b = 0.0;
    double pres = 0.0;
    for (int j = 0; j < m; ++j) {
        const double bj = problem.constraints[static_cast<size_t>(j)].rhs;
        norm_b = std::max(norm_b, std::fabs(bj));
        sol.dual_value += sol.y[static_cast<size_t>(j)] * bj;
        pres = std::max(pres,
                        std::fabs(hs_inner(problem.constraints[static_cast<size_t>(j)].op, sol.x) -
                                  bj));
    }
    sol.primal_residual = pres / (1.0 + norm_b);
    sol.gap = std::fabs(sol.primal_value - sol.dual_value) /
              (1.0 + std::fabs(sol.primal_value) + std::fabs(sol.dual_value));
    EigDecomposition se = eig_hermitian(sol.slack);
    const double neg = se.values.empty() ? 0.0 : std::min(0.0, se.values.back());
    sol.dual_residual = -neg / (1.0 + problem.cost.mat().max_abs());

    if (sol.status == SolveStatus::Optimal &&
        (sol.gap > 1e-7 || sol.primal_residual > 1e-7 || sol.dual_residual > 1e-7)) {
        sol.status = SolveStatus::MaxIterations;
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

SdpProblem build_discrimination_primal(const std::vector<double>& weights,
                                       const std::vector<HermitianOperator>& chois,
                                       BipartiteDims dims) {
    const int nch = static_cast<int>(weights.size());
    if (nch < 2 || chois.size() != weights.size())
        throw DimensionMismatch("build_discrimination_primal: need matching weights and chois");
    const int nkh = dims.total();
    if (dims.dim_out < 1 || dims.dim_in < 1)
        throw DimensionMismatch("build_discrimination_primal: bad dims");
    for (const auto& c : chois)
        if (c.dim() != nkh)
            throw DimensionMismatch("build_discrimination_primal: choi dimension mismatch");
    for (double wgt : weights)
        if (!(wgt > 0.0))
            throw DimensionMismatch("build_discrimination_primal: weights must be positive");

    const int big = nch * nkh;
    Mat cost = Mat::zero(big, big);
    for (int i = 0; i < nch; ++i) {
        const Mat& ci = chois[static_cast<size_t>(i)].mat();
        for (int r = 0; r < nkh; ++r)
            for (int c = 0; c < nkh; ++c)
                cost(i * nkh + r, i * nkh + c) = weights[static_cast<size_t>(i)] * ci(r, c);
    }

    SdpProblem p{HermitianOperator(std::move(cost)), {}};
    p.constraints.push_back({HermitianOperator::identity(big),
                             static_cast<double>(dims.dim_out)});
    const Mat id_n = Mat::identity(nch);
    const auto traceless = gell_mann_basis(dims.dim_out);
    const auto full = hermitian_basis(dims.dim_in);
    for (const auto& xa : traceless) {
        for (const auto& eb : full) {
            Mat block = kron(xa.mat(), eb.mat());
            p.constraints.push_back({HermitianOperator(kron(id_n, block)), 0.0});
        }
    }
    return p;
}

SdpProblem build_state_povm_sdp(const std::vector<double>& weights,
                                const std::vector<HermitianOperator>& states) {
    const int nst = static_cast<int>(weights.size());
    if (nst < 1 || states.size() != weights.size())
        throw DimensionMismatch("build_state_povm_sdp: need matching weights and states");
    const int d = states.front().dim();
    double wsum = 0.0;
    for (double wgt : weights) {
        if (!(wgt > 0.0)) throw NotAState("build_state_povm_sdp: weights must be positive");
        wsum += wgt;
    }
    if (std::fabs(wsum - 1.0) > 1e-12)
        throw NotAState("build_state_povm_sdp: weights must sum to 1");
    for (const auto& st : states) {
        if (st.dim() != d) throw DimensionMismatch("build_state_povm_sdp: state dims differ");
        EigDecomposition e = eig_hermitian(st);
        const double scale = std::max(1.0, std::fabs(e.values.front()));
        if (e.values.back() < -1e-8 * scale)
            throw NotAState("build_state_povm_sdp: state is not PSD");
        if (std::fabs(st.trace() - 1.0) > 1e-9)
            throw NotAState("build_state_povm_sdp: state trace deviates from 1");
    }

    const int big = nst * d;
    Mat cost = Mat::zero(big, big);
    for (int i = 0; i < nst; ++i) {
        const Mat& si = states[static_cast<size_t>(i)].mat();
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                cost(i * d + r, i * d + c) = weights[static_cast<size_t>(i)] * si(r, c);
    }

    SdpProblem p{HermitianOperator(std::move(cost)), {}};
    const Mat id_n = Mat::identity(nst);
    const auto full = hermitian_basis(d);
    for (size_t b = 0; b < full.size(); ++b) {
        const double rhs = (b == 0) ? std::sqrt(static_cast<double>(d)) : 0.0;
        p.constraints.push_back({HermitianOperator(kron(id_n, full[b].mat())), rhs});
    }
    return p;
}

SdpProblem build_diamond_sdp(const HermitianOperator& delta, BipartiteDims dims) {
    const int nkh = dims.total();
    if (delta.dim() != nkh)
        throw DimensionMismatch("build_diamond_sdp: delta does not match dims");
    const int big = 2 * nkh;
    Mat cost = Mat::zero(big, big);
    for (int r = 0; r < nkh; ++r)
        for (int c = 0; c < nkh; ++c) {
            const Cx v = 0.25 * delta(r, c);
            cost(r, nkh + c) = v;
            // adjoint block: transpose as well, or the symmetrizing
            // constructor cancels the imaginary part of delta
            cost(nkh + c, r) = std::conj(v);
        }

    SdpProblem p{HermitianOperator(std::move(cost)), {}};
    const auto traceless = gell_mann_basis(dims.dim_out);
    const auto full = hermitian_basis(dims.dim_in);
    for (int blk = 0; blk < 2; ++blk) {
        Mat tr = Mat::zero(big, big);
        for (int t = 0; t < nkh; ++t) tr(blk * nkh + t, blk * nkh + t) = Cx(1.0, 0.0);
        p.constraints.push_back({HermitianOperator(std::move(tr)),
                                 static_cast<double>(dims.dim_out)});
        for (const auto& xa : traceless) {
            for (const auto& eb : full) {
                Mat block = kron(xa.mat(), eb.mat());
                Mat placed = Mat::zero(big, big);
                for (int r = 0; r < nkh; ++r)
                    for (int c = 0; c < nkh; ++c)
                        placed(blk * nkh + r, blk * nkh + c) = block(r, c);
                p.constraints.push_back({HermitianOperator(std::move(placed)), 0.0});
            }
        }
    }
    return p;
}

} // namespace chdisc
