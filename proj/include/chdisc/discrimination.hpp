#pragma once

#include <optional>
#include <vector>

#include "chdisc/channels.hpp"
#include "chdisc/linalg.hpp"
#include "chdisc/sdp.hpp"

namespace chdisc {

// Weighted ensemble of channels to tell apart. All channels must share input
// and output dimensions; weights are positive and sum to one within 1e-12.
class DiscriminationProblem {
public:
    DiscriminationProblem(std::vector<double> weights, std::vector<QuantumChannel> channels);

    int size() const { return static_cast<int>(channels_.size()); }
    int dim_in() const { return channels_.front().dim_in(); }
    int dim_out() const { return channels_.front().dim_out(); }
    BipartiteDims choi_dims() const { return channels_.front().choi_dims(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<QuantumChannel>& channels() const { return channels_; }
    const std::vector<HermitianOperator>& chois() const { return chois_; }

private:
    std::vector<double> weights_;
    std::vector<QuantumChannel> channels_;
    std::vector<HermitianOperator> chois_;
};

// Process POVM (tester): effects F_i >= 0 on K (x) H with sum_i F_i = I (x)
// sigma for a state sigma on H. Encodes input state and measurement in one
// object; construction recovers sigma from the effect sum and checks the
// product form within 1e-9 (effects PSD within 1e-10), else NotATester.
class ProcessPovm {
public:
    ProcessPovm(std::vector<HermitianOperator> effects, BipartiteDims dims);

    int size() const { return static_cast<int>(effects_.size()); }
    const HermitianOperator& operator[](int i) const { return effects_[static_cast<size_t>(i)]; }
    const std::vector<HermitianOperator>& effects() const { return effects_; }
    BipartiteDims dims() const { return dims_; }
    const HermitianOperator& sigma() const { return sigma_; }

private:
    std::vector<HermitianOperator> effects_;
    BipartiteDims dims_;
    HermitianOperator sigma_;
};

// Operational strategy: pure input on H (x) ancilla, channel through the
// first factor, then a POVM on K (x) ancilla. The ancilla dimension is free
// (dim_in for the full-Schmidt-rank strategies, smaller for restricted ones).
struct MeasurementScheme {
    MeasurementScheme(PureState input, int dim_in_arg, int dim_anc_arg, PovmSet povm_arg);

    PureState input_state;
    int dim_in;
    int dim_anc;
    PovmSet povm;
};

PureState max_entangled_state(int dim);

// Bridge between the two pictures: F_i = (I (x) A^dag) M_i (I (x) A) where
// |psi> = sum_i |i> (x) A|i>. scheme_from_tester restricts to the support of
// sigma (ancilla dimension = rank sigma) and reproduces all outcome
// probabilities of the tester.
ProcessPovm tester_from_scheme(const MeasurementScheme& scheme, int dim_out);
MeasurementScheme scheme_from_tester(const ProcessPovm& f);

double success_probability(const DiscriminationProblem& prob, const MeasurementScheme& scheme);
double success_probability(const DiscriminationProblem& prob, const ProcessPovm& f);

// Binary state discrimination: projector onto the strictly positive spectrum
// of lambda rho1 - (1-lambda) rho2 (eigenvalues within 1e-10 of zero go to
// the second effect).
PovmSet helstrom(const HermitianOperator& rho1, const HermitianOperator& rho2, double lambda);

// Holevo optimality of a POVM for a state ensemble: sum_i w_i rho_i M_i must
// dominate every w_j rho_j. violations holds the PSD defect per outcome.
struct StatePovmCheck {
    bool ok = false;
    std::vector<double> violations;
    double hermiticity_gap = 0.0;
};
StatePovmCheck check_state_povm_optimality(const std::vector<double>& weights,
                                           const std::vector<HermitianOperator>& states,
                                           const PovmSet& povm, double tol = 1e-8);

// lambda C(a) - (1-lambda) C(b); for two channels this carries the whole
// discrimination problem.
HermitianOperator delta_lambda(const QuantumChannel& a, const QuantumChannel& b, double lambda);

// Success probability of the maximally entangled input with the optimal
// measurement, two-channel closed form (1 + Tr|Delta_lambda| / d) / 2.
double p_mei_two(const QuantumChannel& a, const QuantumChannel& b, double lambda);

// Proportionality to the identity in operator norm, relative tolerance with
// an absolute floor of 1e-10. Optionally reports the deviation.
bool mei_condition(const HermitianOperator& marginal, double tol = 1e-8,
                   double* deviation = nullptr);

// Maximally entangled input: optimal measurement for the ensemble of scaled
// Choi operators. Two channels go through the closed-form projector; more
// use the POVM cone program and a polish step that restores exact closure.
struct PMeiResult {
    double p_mei = 0.0;
    HermitianOperator z;  // sum_i w_i C_i M_i
    PovmSet povm;
};
PMeiResult p_mei_multi(const DiscriminationProblem& prob, const SdpOptions& options = {});

// The bound sandwich around the optimal success probability:
//   p_mei <= p_opt <= ||Tr_K Z||_op <= (1 + epsilon) p_mei.
// mei_holds reports whether Tr_K Z is proportional to the identity, in which
// case the maximally entangled input is exactly optimal. p_opt is filled by
// the cone program when solve is requested and the solver converges.
struct DiscriminationReport {
    double p_mei = 0.0;
    double upper_bound = 0.0;
    std::optional<double> p_opt;
    bool mei_holds = false;
    double mei_deviation = 0.0;
    double epsilon = 0.0;
    HermitianOperator z;
};
DiscriminationReport bounds_report(const DiscriminationProblem& prob, bool solve = false,
                                   double tol = 1e-8, const SdpOptions& options = {});

// Converged network program with the pieces the certificates need: tester
// blocks, the dual operator G >= w_i C_i with Tr_K G = lambda0 I, and the
// complementary slackness defects. Throws SolverFailure unless Optimal.
struct DiscriminationSdp {
    double p_opt = 0.0;
    std::vector<HermitianOperator> tester;
    HermitianOperator dual_choi;  // G, equal to lambda0 C(Phi_0) at the optimum
    double lambda0 = 0.0;
    std::vector<double> slackness;
    SdpSolution raw;
};
DiscriminationSdp solve_discrimination(const DiscriminationProblem& prob,
                                       const SdpOptions& options = {});

// Optimality conditions for a concrete strategy. verdict reports whether the
// checked conditions hold within tolerance; necessary_only flags inputs of
// deficient Schmidt rank, where the conditions are necessary but no longer
// sufficient. For full-rank verdicts the certificate channel Phi_0 and its
// weight lambda0 are reconstructed and the dominance / slackness defects of
// lambda0 C(Phi_0) against the w_i C_i are reported.
struct OptimalityCertificate {
    bool verdict = false;
    bool necessary_only = false;
    double lambda0 = 0.0;
    std::optional<QuantumChannel> phi0;
    std::vector<double> majorization_residuals;
    std::vector<double> slackness_residuals;
    double marginal_residual = 0.0;
    double hermiticity_gap = 0.0;
    std::optional<double> p_opt_reference;
};
OptimalityCertificate check_scheme_optimality(const DiscriminationProblem& prob,
                                              const MeasurementScheme& scheme,
                                              double tol = 1e-8);
OptimalityCertificate check_tester_optimality(const DiscriminationProblem& prob,
                                              const ProcessPovm& f, double tol = 1e-8,
                                              bool cross_validate = false,
                                              const SdpOptions& options = {});

// Norm chain around the diamond norm of Phi_lambda = lambda a - (1-lambda) b:
//   ||C||_1 / d  <=  ||Phi_lambda||_diamond  <=  ||Tr_K |C|||_op
//                <=  (1 + eps_prime) ||C||_1 / d  <=  ||C||_1.
// diamond comes from the cone program (absent if it fails); eps_prime is
// absent when the difference vanishes.
struct DiamondBounds {
    double lower = 0.0;
    std::optional<double> diamond;
    double marginal_norm = 0.0;
    double trace_norm_total = 0.0;
    std::optional<double> eps_prime;
};
DiamondBounds diamond_norm_bounds(const QuantumChannel& a, const QuantumChannel& b,
                                  double lambda, const SdpOptions& options = {});

// When Tr_K |Delta_lambda| decomposes over a given orthogonal projector
// family (transposed, as the covariance argument produces), the bound
// (1 + max_i k_i)/2 needs no eigendecomposition of the full operator.
// Throws DecompositionFailed if the family is invalid or the residual of the
// decomposition exceeds 1e-8.
struct CovariantBound {
    std::vector<double> k;
    double bound = 0.0;
    double p_mei = 0.0;
};
CovariantBound covariant_upper_bound(const QuantumChannel& a, const QuantumChannel& b,
                                     double lambda,
                                     const std::vector<HermitianOperator>& projectors);

} // namespace chdisc
