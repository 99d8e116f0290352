#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "qproc/tomo.hpp"

using namespace qproc;
using namespace qproc::tomo;

TEST_CASE("duals satisfy tr(D_j^dag B_k) = delta_jk and the double dual returns the basis") {
    Rng rng(1);
    std::vector<Mat> basis;
    for (int k = 0; k < 9; ++k) basis.push_back(qla::random_ginibre(rng, 3, 3));
    auto d = dual_set(basis);
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k < 9; ++k) {
            cd v = (d[j].adjoint() * basis[k]).trace();
            CHECK(std::abs(v - cd(j == k ? 1.0 : 0.0)) < 1e-9);
        }
    CHECK(duality_residual(basis, d) < 1e-9);
    auto dd = dual_set(d);
    for (int k = 0; k < 9; ++k) CHECK(oracle::maxdiff(dd[k], basis[k]) < 1e-9);
}

TEST_CASE("dual_set refuses a dependent basis") {
    std::vector<Mat> b{qla::pauli(0), qla::pauli(1), qla::pauli(1), qla::pauli(3)};
    CHECK_THROWS_AS(dual_set(b), std::domain_error);
}

TEST_CASE("born probabilities") {
    CHECK(born_prob(qla::ket_bra(2, 0, 0), qla::ket_bra(2, 0, 0)) == doctest::Approx(1));
    POVM sic = sic_povm_qubit();
    CHECK(is_valid_povm(sic));
    for (double p : born_probs(Mat::Identity(2, 2) / 2.0, sic)) CHECK(p == doctest::Approx(0.25));
    Mat plus = Mat::Constant(2, 2, 0.5);
    CHECK(born_prob(plus, qla::ket_bra(2, 0, 0)) == doctest::Approx(0.5));
}

TEST_CASE("state tomography inverts born_probs for 100 random states") {
    Rng rng(2);
    POVM sic = sic_povm_qubit();
    POVM r3 = random_ic_povm(rng, 3);
    CHECK(is_valid_povm(r3));
    CHECK(r3.elements.size() == 9);
    for (int rep = 0; rep < 100; ++rep) {
        Mat rho2 = qla::random_density(rng, 2), rho3 = qla::random_density(rng, 3);
        CHECK(oracle::maxdiff(state_tomography(born_probs(rho2, sic), sic), rho2) < 1e-10);
        CHECK(oracle::maxdiff(state_tomography(born_probs(rho3, r3), r3), rho3) < 1e-8);
    }
}

TEST_CASE("random IC POVM completion is the largest admissible alpha") {
    Rng rng(3);
    POVM p = random_ic_povm(rng, 2);
    // the completion element touches zero
    CHECK(qla::min_eig(p.elements.back()) == doctest::Approx(0.0).epsilon(1e-9));
    for (const Mat& e : p.elements) CHECK(qla::is_psd(e));
}

TEST_CASE("ic_povm_from_positive_basis sums to identity") {
    std::vector<Mat> fs;
    for (const Mat& s : pauli_state_basis()) fs.push_back(s);
    POVM p = ic_povm_from_positive_basis(fs);
    CHECK(is_valid_povm(p));
    Mat s = Mat::Zero(2, 2);
    for (const Mat& e : p.elements) s += e;
    CHECK(oracle::maxdiff(s, Mat::Identity(2, 2)) < 1e-12);
}

TEST_CASE("channel tomography reproduces random channels") {
    Rng rng(4);
    auto in2 = pauli_state_basis();
    for (int rep = 0; rep < 20; ++rep) {
        Channel c = channels::random_cptp(rng, 2, 2, 1 + rep % 4);
        std::vector<Mat> outs;
        for (const Mat& r : in2) outs.push_back(channels::apply(c, r));
        Channel est = channel_tomography(in2, outs);
        CHECK(oracle::maxdiff(channels::choi(est), channels::choi(c)) < 1e-10);
    }
    // qutrit input with random density inputs
    std::vector<Mat> in3;
    for (int k = 0; k < 9; ++k) in3.push_back(qla::random_density(rng, 3));
    Channel c = channels::random_cptp(rng, 3, 2, 2);
    std::vector<Mat> outs;
    for (const Mat& r : in3) outs.push_back(channels::apply(c, r));
    CHECK(oracle::maxdiff(channels::choi(channel_tomography(in3, outs)), channels::choi(c)) < 1e-8);
}

TEST_CASE("projective instrument is valid and reduces to its POVM") {
    Instrument z = projective_instrument({qla::ket_bra(2, 0, 0), qla::ket_bra(2, 1, 1)});
    CHECK(is_valid_instrument(z));
    POVM p = instrument_to_povm(z);
    CHECK(oracle::maxdiff(p.elements[0], qla::ket_bra(2, 0, 0)) < 1e-14);
    CHECK(oracle::maxdiff(p.elements[1], qla::ket_bra(2, 1, 1)) < 1e-14);
    // a sub-normalized set is rejected
    Instrument half = projective_instrument({qla::ket_bra(2, 0, 0)});
    CHECK_FALSE(is_valid_instrument(half));
}

TEST_CASE("random instrument elements are CP and sum to a trace-preserving map") {
    Rng rng(5);
    Channel c = channels::random_cptp(rng, 2, 2, 4);
    auto ks = channels::kraus(c);
    Instrument j;
    for (const Mat& k : ks) j.elements.push_back(Channel::from_kraus({k}));
    CHECK(is_valid_instrument(j));
    Mat s = Mat::Zero(2, 2);
    for (const Mat& e : instrument_to_povm(j).elements) s += e;
    CHECK(oracle::maxdiff(s, Mat::Identity(2, 2)) < 1e-12);
}

TEST_CASE("POVM json roundtrip") {
    POVM sic = sic_povm_qubit();
    auto j = to_json(sic);
    CHECK(j["kind"] == "povm");
    POVM back = povm_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(back.elements.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(oracle::maxdiff(back.elements[k], sic.elements[k]) < 1e-15);
}
