#pragma once

#include <optional>
#include <vector>

#include "chdisc/channels.hpp"
#include "chdisc/linalg.hpp"

namespace chdisc {

// |lambda |psi><psi| - (1-lambda) |phi><phi|| assembled from the closed-form
// two-dimensional spectrum, no eigendecomposition. Exact (to rounding) also
// for parallel or orthogonal states.
HermitianOperator rank1_abs(const PureState& phi, const PureState& psi, double lambda);

// Two-qubit-channel shortcut: the maximally entangled input is optimal iff
// adding ((2 lambda - 1) I - Phi_lambda(I)) (x) I to Delta_lambda leaves the
// marginal of the absolute value unchanged. Channels must be qubit to qubit.
bool qubit_mei(const QuantumChannel& a, const QuantumChannel& b, double lambda,
               double tol = 1e-8, double* gap = nullptr);

// Discrimination of two unitary channels at lambda = 1/2, decided by the
// spectrum of the relative unitary W = U V^dag (phase-fixed so Tr W is real
// and nonnegative). The maximally entangled input is optimal iff Tr W = 0 or
// the eigenphases form at most two clusters of equal multiplicity; Tr W = 0
// additionally means the channels are perfectly distinguishable.
struct UnitaryMeiReport {
    bool mei = false;
    bool trace_zero = false;
    double trace_magnitude = 0.0;    // |Tr W| before phase fixing
    std::vector<double> phases;      // sorted eigenphases after phase fixing
    std::vector<int> cluster_sizes;  // multiplicities, wrap-aware clustering
};
UnitaryMeiReport unitary_mei(const Mat& u, const Mat& v, double tol = 1e-8);

// Pair of orthonormal bases defining two basis-measurement channels.
// Families must be complete (as many states as the dimension) and
// orthonormal within 1e-10.
struct SpmProblem {
    SpmProblem(std::vector<PureState> xi_arg, std::vector<PureState> eta_arg);
    std::vector<PureState> xi;
    std::vector<PureState> eta;
    int dim() const { return static_cast<int>(xi.size()); }
};

// Overlap data of a basis pair: w(i,j) = <xi_i, eta_j> with the eta phases
// fixed so the diagonal is real and nonnegative, c_i = sqrt(1 - w_ii^2), and
// the proportionality constant the criterion forces.
struct SpmDerived {
    Mat w;
    std::vector<double> c;
    double d_const = 0.0;              // (2 / dim) sum_i c_i
    std::vector<PureState> eta_fixed;  // eta after the diagonal phase fixing
};
SpmDerived spm_derive(const SpmProblem& p);

// Optimality of the maximally entangled input for the two measurement
// channels: sum_i |lambda P_conj(xi_i) - (1-lambda) P_conj(eta_i)| must be
// proportional to the identity. At lambda = 1/2 with no coinciding pairs the
// closed matrix equation is evaluated as a cross-check.
struct SpmMeiReport {
    bool mei = false;
    double deviation = 0.0;
    HermitianOperator marginal;
    std::optional<double> equation_residual;
};
SpmMeiReport spm_mei(const SpmProblem& p, double lambda = 0.5, double tol = 1e-8);

// Residual of d I - C = (W - diag W) C^{-1} (W - diag W)^dag, the matrix form
// of the lambda = 1/2 criterion (C = diag(c), d the forced constant). Throws
// DecompositionFailed when some c_i vanishes (coinciding projections).
double spm_matrix_equation_residual(const SpmProblem& p);

// Separated form of the same equation: R1 = W C^-1 W^dag + C^-1 carries its
// trace automatically, R2 = W C^-1 S + S C^-1 W^dag (S = diag w_ii) does not,
// and the equation holds iff the traceless parts of R1 and R2 agree.
struct SpmEquationReport {
    double equation_residual = 0.0;
    double wsep_trace1 = 0.0;
    double wsep_trace2 = 0.0;
    double wsep_traceless_gap = 0.0;
};
SpmEquationReport spm_equation_report(const SpmProblem& p);

// dim == 3 at lambda = 1/2: optimality forces the overlap matrix to be
// hollow with its support on one of the two fixed-point-free 3-cycles.
bool spm_dim3_criterion(const SpmProblem& p, double tol = 1e-8);

// Constant-overlap classification: with all c_i equal to c, solutions of the
// criterion exist exactly for c = 1 (any dimension, all pairs orthogonal) or
// c < 1 in even dimension with W = sqrt(1-c^2) I + i c G for a hollow
// Hermitian unitary G. Unequal c_i throw ConstCViolated; c = 0 families
// (coinciding pairs) are refused as DecompositionFailed.
enum class SpmConstCBranch {
    SatisfiedAllOrthogonal,
    SatisfiedG,
    NotSatisfied,
    NotSatisfiableOddDim,
};
struct SpmConstCResult {
    SpmConstCBranch branch = SpmConstCBranch::NotSatisfied;
    double c = 0.0;
    std::optional<Mat> g;
};
SpmConstCResult spm_const_c_criterion(const SpmProblem& p, double tol = 1e-8);

// dim == 4 with all |w_ij| = 1/2 (mutually unbiased basis pair): the
// criterion holds iff 2 w, dephased so its first row and column are +1,
// matches the real Hadamard pattern
//   {{1,1,1,1},{1,-1,-1,1},{1,1,-1,-1},{1,-1,1,-1}}.
// Throws NotUnitary / NotMub (both gates at 1e-9) for inputs outside the
// family. Optionally reports the entrywise distance from the pattern.
bool spm_dim4_hadamard_check(const Mat& w, double tol = 1e-9, double* pattern_gap = nullptr);
bool spm_dim4_hadamard_check(const SpmProblem& p, double tol = 1e-9,
                             double* pattern_gap = nullptr);

} // namespace chdisc
