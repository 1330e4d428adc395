#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "chdisc/channels.hpp"
#include "test_support.hpp"

using namespace chdisc;
namespace ts = chdisc::testsupport;

namespace {

const Cx kI(0.0, 1.0);

HermitianOperator basis_projector(int dim, int k) {
    Mat m(dim, dim);
    m(k, k) = 1.0;
    return HermitianOperator(m);
}

PovmSet pm_basis_povm() {
    Mat plus(2, 2), minus(2, 2);
    plus(0, 0) = plus(0, 1) = plus(1, 0) = plus(1, 1) = 0.5;
    minus(0, 0) = minus(1, 1) = 0.5;
    minus(0, 1) = minus(1, 0) = -0.5;
    return PovmSet({HermitianOperator(plus), HermitianOperator(minus)});
}

double kraus_closure_gap(const QuantumChannel& ch) {
    Mat acc = Mat::zero(ch.dim_in(), ch.dim_in());
    for (const Mat& k : ch.kraus()) acc += k.adjoint() * k;
    return (acc - Mat::identity(ch.dim_in())).max_abs();
}

} // namespace

TEST_CASE("povm validation accepts measurements and rejects the rest") {
    PovmSet pm = pm_basis_povm();
    CHECK(pm.size() == 2);
    CHECK(pm.dim() == 2);

    // effect with a negative eigenvalue
    Mat bad(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    Mat rest(2, 2);
    rest(0, 0) = -0.5;
    rest(1, 1) = 1.5;
    CHECK_THROWS_AS(PovmSet({HermitianOperator(bad), HermitianOperator(rest)}), NotAPovm);

    // closure failure
    CHECK_THROWS_AS(PovmSet({basis_projector(2, 0), basis_projector(2, 0)}), NotAPovm);
    CHECK_THROWS_AS(PovmSet({}), NotAPovm);
    CHECK_THROWS_AS(PovmSet({basis_projector(2, 0), basis_projector(3, 1)}), NotAPovm);
}

TEST_CASE("kraus construction validates trace preservation") {
    ts::Rng rng(21);
    QuantumChannel ch = ts::random_channel(rng, 2, 3, 2);
    CHECK(kraus_closure_gap(ch) < 1e-10);
    CHECK(ch.dim_in() == 2);
    CHECK(ch.dim_out() == 3);

    std::vector<Mat> scaled = ch.kraus();
    for (Mat& k : scaled) k *= Cx(1.01);
    CHECK_THROWS_AS(QuantumChannel{scaled}, NotAChannel);
    CHECK_THROWS_AS(QuantumChannel{std::vector<Mat>{}}, NotAChannel);
    CHECK_THROWS_AS(QuantumChannel({Mat::identity(2), Mat::identity(3)}), NotAChannel);
}

TEST_CASE("factory channels have trace-preserving kraus families") {
    for (const QuantumChannel& ch :
         {QuantumChannel::identity(3), QuantumChannel::amplitude_damping(0.3),
          QuantumChannel::werner_holevo(3), QuantumChannel::depolarizing(3, 0.7),
          QuantumChannel::measurement(pm_basis_povm())}) {
        CHECK(kraus_closure_gap(ch) < 1e-10);
        // choi marginal over the output factor is the identity
        HermitianOperator marginal = partial_trace(choi_of(ch), ch.choi_dims(), Factor::First);
        CHECK((marginal.mat() - Mat::identity(ch.dim_in())).max_abs() < 1e-10);
        CHECK(choi_of(ch).trace() == doctest::Approx(ch.dim_in()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(QuantumChannel::amplitude_damping(1.5), Error);
    // mixing parameter below the completely positive range
    CHECK_THROWS_AS(QuantumChannel::depolarizing(2, -0.5), Error);
    CHECK_THROWS_AS(QuantumChannel::depolarizing(2, 1.2), Error);
    CHECK_THROWS_AS(QuantumChannel::werner_holevo(1), Error);
}

TEST_CASE("identity choi is the unnormalized maximally entangled projector") {
    HermitianOperator c = choi_of(QuantumChannel::identity(2));
    for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) {
            const bool hit = (r == 0 || r == 3) && (s == 0 || s == 3);
            CHECK(std::abs(c(r, s) - Cx(hit ? 1.0 : 0.0, 0.0)) < 1e-14);
        }
}

TEST_CASE("amplitude damping choi entries match the closed form") {
    const double theta = 0.37;
    HermitianOperator c = choi_of(QuantumChannel::amplitude_damping(theta));
    // output-first indexing: rows are (k, h) with k the output index
    CHECK(std::abs(c(0, 0) - Cx(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(c(0, 3) - Cx(std::sqrt(1.0 - theta), 0.0)) < 1e-14);
    CHECK(std::abs(c(3, 3) - Cx(1.0 - theta, 0.0)) < 1e-14);
    CHECK(std::abs(c(1, 1) - Cx(theta, 0.0)) < 1e-14);
    CHECK(std::abs(c(2, 2)) < 1e-14);
}

TEST_CASE("werner holevo choi is the scaled antisymmetric projector") {
    const int d = 3;
    HermitianOperator c = choi_of(QuantumChannel::werner_holevo(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    const double want =
                        ((i == k && j == l ? 1.0 : 0.0) - (i == l && j == k ? 1.0 : 0.0)) / (d - 1);
                    CHECK(std::abs(c(i * d + j, k * d + l) - Cx(want, 0.0)) < 1e-12);
                }
    EigDecomposition e = eig_hermitian(c);
    int ones = 0, zeros = 0;
    for (double v : e.values) {
        if (std::abs(v - 1.0) < 1e-10) ++ones;
        if (std::abs(v) < 1e-10) ++zeros;
    }
    CHECK(ones == 3);
    CHECK(zeros == 6);
}

TEST_CASE("depolarizing mixes toward the maximally mixed state") {
    // p is the probability of keeping the input
    QuantumChannel ch = QuantumChannel::depolarizing(2, 0.7);
    HermitianOperator out = apply(ch, basis_projector(2, 0));
    CHECK(std::abs(out(0, 0) - Cx(0.85, 0.0)) < 1e-11);
    CHECK(std::abs(out(1, 1) - Cx(0.15, 0.0)) < 1e-11);
    CHECK(std::abs(out(0, 1)) < 1e-11);
}

TEST_CASE("measurement channel records outcome statistics diagonally") {
    PovmSet pm = pm_basis_povm();
    QuantumChannel ch = QuantumChannel::measurement(pm);
    ts::Rng rng(22);
    HermitianOperator rho = ts::random_density(rng, 2);
    HermitianOperator out = apply(ch, rho);
    for (int i = 0; i < 2; ++i) {
        CHECK(out(i, i).real() == doctest::Approx(hs_inner(pm[i], rho)).epsilon(1e-12));
        for (int j = 0; j < 2; ++j)
            if (i != j) CHECK(std::abs(out(i, j)) < 1e-12);
    }

    // choi of a measurement stacks transposed effects on the diagonal
    HermitianOperator c = choi_of(ch);
    HermitianOperator direct = HermitianOperator::zero(4);
    for (int i = 0; i < 2; ++i)
        direct += kron(basis_projector(2, i), HermitianOperator(pm[i].mat().transpose()));
    CHECK((c.mat() - direct.mat()).max_abs() < 1e-12);
}

TEST_CASE("unitary channel conjugates and rejects non-unitaries") {
    Mat h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h(0, 0) = h(0, 1) = h(1, 0) = s;
    h(1, 1) = -s;
    QuantumChannel ch = QuantumChannel::unitary(h);
    HermitianOperator out = apply(ch, basis_projector(2, 0));
    CHECK(std::abs(out(0, 0) - Cx(0.5, 0.0)) < 1e-12);
    CHECK(std::abs(out(0, 1) - Cx(0.5, 0.0)) < 1e-12);

    Mat notu = Mat::identity(2);
    notu(0, 0) = 1.1;
    CHECK_THROWS_AS(QuantumChannel::unitary(notu), NotUnitary);
}

TEST_CASE("apply agrees with the choi contraction formula") {
    ts::Rng rng(23);
    QuantumChannel ch = ts::random_channel(rng, 3, 2, 3);
    HermitianOperator rho = ts::random_density(rng, 3);
    HermitianOperator out = apply(ch, rho);
    CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-12));

    Mat contracted = choi_of(ch).mat() * kron(Mat::identity(2), rho.mat().transpose());
    Mat reduced = partial_trace(contracted, ch.choi_dims(), Factor::Second);
    CHECK((out.mat() - reduced).max_abs() < 1e-11);
}

TEST_CASE("apply_tensored acts on the first factor only") {
    ts::Rng rng(24);
    QuantumChannel ch = QuantumChannel::amplitude_damping(0.42);
    HermitianOperator r1 = ts::random_density(rng, 2);
    HermitianOperator r2 = ts::random_density(rng, 3);
    HermitianOperator out = apply_tensored(ch, kron(r1, r2), 3);
    CHECK((out.mat() - kron(apply(ch, r1), r2).mat()).max_abs() < 1e-11);
    CHECK_THROWS_AS(apply_tensored(ch, r1, 3), DimensionMismatch);
}

TEST_CASE("channel_from_choi round trips within tolerance") {
    ts::Rng rng(25);
    for (const QuantumChannel& ch :
         {ts::random_channel(rng, 2, 2, 3), QuantumChannel::werner_holevo(3),
          QuantumChannel::depolarizing(2, 0.5)}) {
        HermitianOperator c = choi_of(ch);
        QuantumChannel back = channel_from_choi(c, ch.choi_dims());
        CHECK((choi_of(back).mat() - c.mat()).max_abs() < 1e-9);
        CHECK(kraus_closure_gap(back) < 1e-8);
    }
}

TEST_CASE("channel_from_choi distinguishes its two failure modes") {
    HermitianOperator c = choi_of(QuantumChannel::identity(2));

    // marginal-preserving negative dent: indices (1,0) and (0,0) of K (x) H
    Mat dent(4, 4);
    dent(2, 2) = 1e-3;
    dent(0, 0) = -1e-3;
    HermitianOperator not_psd = c + HermitianOperator(dent);
    CHECK_THROWS_AS(channel_from_choi(not_psd, BipartiteDims{2, 2}), NotPsd);

    HermitianOperator not_tp = 1.05 * c;
    CHECK_THROWS_AS(channel_from_choi(not_tp, BipartiteDims{2, 2}), NotTracePreserving);

    // both errors carry the measured magnitude
    try {
        channel_from_choi(not_tp, BipartiteDims{2, 2});
    } catch (const NotTracePreserving& e) {
        CHECK(std::string(e.what()).find("deviates") != std::string::npos);
    }

    // tiny noise stays within the acceptance window
    Mat noise(4, 4);
    noise(1, 2) = Cx(1e-10, 1e-10);
    noise(2, 1) = Cx(1e-10, -1e-10);
    QuantumChannel ok = channel_from_choi(c + HermitianOperator(noise), BipartiteDims{2, 2});
    CHECK(kraus_closure_gap(ok) < 1e-9);
}

TEST_CASE("kraus spec round trips verbatim") {
    ts::Rng rng(26);
    QuantumChannel ch = ts::random_channel(rng, 2, 3, 2);
    nlohmann::json spec = kraus_spec(ch);
    QuantumChannel back = channel_from_spec(spec);
    REQUIRE(back.kraus().size() == ch.kraus().size());
    for (size_t k = 0; k < ch.kraus().size(); ++k) {
        const Mat& a = ch.kraus()[k];
        const Mat& b = back.kraus()[k];
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) CHECK(a(i, j) == b(i, j));
    }

    // the string path parses the same way
    QuantumChannel again = channel_from_spec_string(spec.dump());
    CHECK(again.kraus()[0](0, 0) == ch.kraus()[0](0, 0));
}

TEST_CASE("choi spec reconstructs the channel") {
    QuantumChannel ch = QuantumChannel::amplitude_damping(0.3);
    QuantumChannel back = channel_from_spec(choi_spec(ch));
    CHECK((choi_of(back).mat() - choi_of(ch).mat()).max_abs() < 1e-9);
}

TEST_CASE("builtin spec kinds parse") {
    CHECK(channel_from_spec_string(R"({"kind":"identity","dim":3})").dim_in() == 3);
    CHECK(channel_from_spec_string(R"({"kind":"amplitude_damping","theta":0.5})").dim_out() == 2);
    CHECK(channel_from_spec_string(R"({"kind":"werner_holevo","dim":3})").dim_out() == 3);
    CHECK(channel_from_spec_string(R"({"kind":"depolarizing","dim":2,"p":0.25})").dim_in() == 2);
    QuantumChannel u = channel_from_spec_string(
        R"({"kind":"unitary","matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]})");
    CHECK(std::abs(u.kraus()[0](0, 1) - Cx(1, 0)) < 1e-15);
    QuantumChannel m = channel_from_spec_string(
        R"({"kind":"measurement","dim":2,"effects":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]})");
    CHECK(m.dim_out() == 2);
}

TEST_CASE("malformed specs raise parse errors") {
    CHECK_THROWS_AS(channel_from_spec_string("not json"), ParseError);
    CHECK_THROWS_AS(channel_from_spec_string(R"({"kind":"no_such_kind"})"), ParseError);
    CHECK_THROWS_AS(channel_from_spec_string(R"({"kind":"identity"})"), ParseError);
    CHECK_THROWS_AS(channel_from_spec_string(R"({"kind":"identity","dim":0})"), ParseError);
    CHECK_THROWS_AS(channel_from_spec_string(R"({"kind":"unitary","matrix":[[[1,0],[0,0]],[[0,0]]]})"),
                    ParseError);
    CHECK_THROWS_AS(channel_from_spec_string(R"({"kind":"unitary","matrix":[[[1,0],"x"],[[0,0],[1,0]]]})"),
                    ParseError);
    // structurally valid json, not a channel
    CHECK_THROWS_AS(
        channel_from_spec_string(
            R"({"kind":"kraus","dim_in":2,"dim_out":2,"operators":[[[[2,0],[0,0]],[[0,0],[2,0]]]]})"),
        NotAChannel);
}

TEST_CASE("matrix_from_spec infers shape and validates") {
    nlohmann::json rows = nlohmann::json::parse(R"([[[1,0],[0,1]],[[0,-1],[2,3]]])");
    Mat m = matrix_from_spec(rows);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    CHECK(m(0, 1) == kI);
    CHECK(m(1, 1) == Cx(2, 3));
    CHECK_THROWS_AS(matrix_from_spec(nlohmann::json::array()), ParseError);
    CHECK_THROWS_AS(matrix_from_spec(nlohmann::json::parse(R"([[[1,0]],[[1,0],[2,0]]])")), ParseError);
}
