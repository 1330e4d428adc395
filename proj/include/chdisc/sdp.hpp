#pragma once

#include <vector>

#include "chdisc/channels.hpp"
#include "chdisc/linalg.hpp"

namespace chdisc {

enum class SolveStatus { Optimal, MaxIterations, Infeasible };

struct LinearConstraint {
    HermitianOperator op;
    double rhs = 0.0;
};

// Semidefinite program over a complex Hermitian variable:
//   maximize   <cost, X>
//   subject to <constraints[j].op, X> = constraints[j].rhs,  X >= 0.
struct SdpProblem {
    HermitianOperator cost;
    std::vector<LinearConstraint> constraints;
};

struct SdpOptions {
    double tol = 1e-9;
    int max_iterations = 200;
};

struct SdpSolution {
    SolveStatus status = SolveStatus::MaxIterations;
    HermitianOperator x;      // primal variable
    std::vector<double> y;    // dual multiplier per constraint, original order
    HermitianOperator slack;  // sum_j y_j A_j - cost, recomputed from y
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;             // |primal - dual| / (1 + |primal| + |dual|)
    double primal_residual = 0.0; // max_j |<A_j,X> - b_j| / (1 + max_j |b_j|)
    double dual_residual = 0.0;   // negative part of slack spectrum, relative
    int iterations = 0;
};

// Primal-dual interior point solver (Nesterov-Todd scaling, predictor /
// corrector). The complex problem is embedded as a real symmetric one of
// twice the dimension; values and multipliers map back one to one. On
// Optimal the relative gap and both residuals are below options.tol.
// Linearly dependent constraint rows are detected and dropped up front;
// dependent rows with inconsistent right-hand sides yield Infeasible.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

// The three cone programs used by the discrimination machinery. All of them
// order constraints deterministically, which callers rely on to read dual
// multipliers back; the ordering is documented per builder.
//
// Common notation: dims = {dim_out, dim_in} of the channels being compared,
// traceless_basis = gell_mann_basis(dim_out) (indexed a), full_basis =
// hermitian_basis(dim_in) (indexed b, identity element first).

// Network formulation of the optimal discrimination probability for the
// ensemble {weights[i], chois[i]}: the variable is a block-diagonal
// collection F = diag(F_1..F_n) on C^n (x) K (x) H,
//   maximize   sum_i weights[i] <chois[i], F_i>
//   subject to sum_i Tr F_i = dim_out,
//              sum_i <(X_a (x) E_b), F_i> = 0 for every traceless-out pair,
//              F >= 0,
// which pins sum_i F_i to the form I (x) sigma. Constraint order: index 0 is
// the global trace; then (a, b) pairs with a major, b minor. The optimum is
// the best success probability over all input states and measurements.
SdpProblem build_discrimination_primal(const std::vector<double>& weights,
                                       const std::vector<HermitianOperator>& chois,
                                       BipartiteDims dims);

// State discrimination with a fixed ensemble {weights[i], states[i]} on one
// space: variable diag(M_1..M_n), maximize sum_i weights[i] <states[i], M_i>
// subject to sum_i M_i = I. Constraints run over hermitian_basis(dim) in
// order (rhs sqrt(dim) for the identity element, 0 for the rest).
SdpProblem build_state_povm_sdp(const std::vector<double>& weights,
                                const std::vector<HermitianOperator>& states);

// Half the diamond norm of the Hermitian-preserving map whose Choi operator
// is delta:
//   maximize   Re Tr(delta X) / 2
//   subject to [[I (x) rho0, X], [X^dag, I (x) rho1]] >= 0 with rho0, rho1
// states, expressed over the PSD variable Y on a doubled space whose
// off-diagonal block carries X. Constraint order: block-0 trace, block-0
// (a, b) pairs, block-1 trace, block-1 (a, b) pairs (pinning each diagonal
// block to the form I (x) rho). For delta = C(Phi_lambda) the optimal
// success probability is 1/2 + optimum.
SdpProblem build_diamond_sdp(const HermitianOperator& delta, BipartiteDims dims);

} // namespace chdisc
