#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chdisc/linalg.hpp"

namespace chdisc {

// POVM on a single space: effects are PSD and sum to the identity
// (both within 1e-10, else NotAPovm).
class PovmSet {
public:
    explicit PovmSet(std::vector<HermitianOperator> effects);

    int dim() const { return effects_.front().dim(); }
    int size() const { return static_cast<int>(effects_.size()); }
    const HermitianOperator& operator[](int i) const { return effects_[static_cast<size_t>(i)]; }
    const std::vector<HermitianOperator>& effects() const { return effects_; }

private:
    std::vector<HermitianOperator> effects_;
};

// Completely positive trace-preserving map held as Kraus operators
// (dim_out x dim_in each). Construction checks sum_k K^dag K = I within 1e-10.
class QuantumChannel {
public:
    explicit QuantumChannel(std::vector<Mat> kraus);

    static QuantumChannel identity(int dim);
    static QuantumChannel unitary(const Mat& u);
    static QuantumChannel amplitude_damping(double theta);
    static QuantumChannel werner_holevo(int dim);
    static QuantumChannel depolarizing(int dim, double p);
    static QuantumChannel measurement(const PovmSet& povm);

    int dim_in() const { return dim_in_; }
    int dim_out() const { return dim_out_; }
    BipartiteDims choi_dims() const { return BipartiteDims{dim_out_, dim_in_}; }
    const std::vector<Mat>& kraus() const { return kraus_; }

private:
    int dim_in_ = 0, dim_out_ = 0;
    std::vector<Mat> kraus_;
};

// Choi operator (Phi (x) id) applied to the unnormalized maximally entangled
// projector sum_ij |i><j| (x) |i><j|, indexed with the output factor first.
HermitianOperator choi_of(const QuantumChannel& ch);

// Inverse direction: checks PSD (NotPsd) and the partial-trace normalization
// Tr_out C = I (NotTracePreserving), both within 1e-8 relative to the largest
// eigenvalue; Kraus come from the eigendecomposition with eigenvalues below
// the support cutoff dropped.
QuantumChannel channel_from_choi(const HermitianOperator& choi, BipartiteDims dims);

HermitianOperator apply(const QuantumChannel& ch, const HermitianOperator& rho);

// (Phi (x) id) on an operator over dim_in * dim_anc.
HermitianOperator apply_tensored(const QuantumChannel& ch, const HermitianOperator& rho,
                                 int dim_anc);

// Textual channel format. Complex entries are [re, im] pairs; dims explicit.
// kinds: identity, unitary, amplitude_damping, werner_holevo, depolarizing,
// measurement, kraus, choi. kraus/choi round-trip bit-exactly.
QuantumChannel channel_from_spec(const nlohmann::json& spec);
QuantumChannel channel_from_spec_string(const std::string& text);
nlohmann::json kraus_spec(const QuantumChannel& ch);
nlohmann::json choi_spec(const QuantumChannel& ch);

// Complex matrix in the same convention: a nonempty array of equal-length
// rows whose entries are [re, im] pairs. Shape is inferred.
Mat matrix_from_spec(const nlohmann::json& rows);

} // namespace chdisc
