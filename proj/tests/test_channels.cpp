#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "oracle.hpp"
#include "qproc/channels.hpp"

using namespace qproc;
using namespace qproc::channels;

namespace {

std::vector<Channel> zoo() {
    return {identity(2),
            identity(3),
            amplitude_damping(0.3),
            amplitude_damping(0.0),
            depolarizing(0.4, 0.3, 0.2, 0.1),
            dephasing(1.0, 0.7),
            xz_oscillatory(1.0, 0.3),
            unitary(qla::pauli(1)),
            random_cptp(5, 3, 2)};
}

void check_physical(const Channel& c) {
    CHECK(is_cp(c).ok);
    CHECK(is_tp(c).ok);
    CHECK(rep_agreement(c) < 1e-10);
    if (c.d_in == c.d_out) {
        Dilation dl = dilate_to_unitary(c);
        const int n = c.d_out * dl.d_env;
        CHECK(oracle::maxdiff(dl.U * dl.U.adjoint(), Mat::Identity(n, n)) < 1e-10);
        Rng rng(99);
        Mat rho = qla::random_density(rng, c.d_in);
        CHECK(oracle::maxdiff(apply_dilation(dl, rho, c.d_in, c.d_out), channels::apply(c, rho)) < 1e-10);
    }
}

}  // namespace

TEST_CASE("Choi of Kraus matches the action-based oracle") {
    Rng rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        Channel c = random_cptp(rng, 2, 3, 2);
        auto ks = kraus(c);
        auto act = [&](const Mat& x) {
            Mat o = Mat::Zero(3, 3);
            for (const Mat& k : ks) o += k * x * k.adjoint();
            return o;
        };
        CHECK(oracle::maxdiff(choi(c), oracle::choi_from_action(act, 2, 3)) < 1e-12);
    }
}

TEST_CASE("factory channels and 50 random CPTP maps are CP, TP, agree across reps and dilate") {
    for (const Channel& c : zoo()) check_physical(c);
    Rng rng(2);
    for (int rep = 0; rep < 50; ++rep) check_physical(random_cptp(rng, 2 + rep % 2, 2 + rep % 2, 1 + rep % 4));
    for (int rep = 0; rep < 10; ++rep) {
        Channel c = random_cptp(rng, 2, 3, 2);
        CHECK(is_cp(c).ok);
        CHECK(is_tp(c).ok);
        CHECK(rep_agreement(c) < 1e-10);
    }
}

TEST_CASE("tr_out of the Choi is the identity on the input") {
    Rng rng(3);
    Channel c = random_cptp(rng, 3, 2, 3);
    CHECK(oracle::maxdiff(oracle::trace_first(choi(c), 2, 3), Mat::Identity(3, 3)) < 1e-12);
}

TEST_CASE("Kraus count equals numerical Choi rank") {
    Rng rng(4);
    for (int r = 1; r <= 4; ++r) {
        Channel c = random_cptp(rng, 2, 2, r);
        Channel viaChoi = Channel::from_choi(choi(c), 2, 2);
        CHECK(kraus(viaChoi).size() == static_cast<std::size_t>(r));
    }
    Channel big = random_cptp(rng, 2, 3, 9);
    CHECK(kraus(Channel::from_choi(choi(big), 2, 3)).size() <= 6);
    CHECK(kraus(unitary(qla::pauli(2))).size() == 1);
}

TEST_CASE("apply is linear") {
    Rng rng(5);
    Channel c = random_cptp(rng, 3, 3, 2);
    Mat a = qla::random_ginibre(rng, 3, 3), b = qla::random_ginibre(rng, 3, 3);
    cd al(0.3, -1.2), be(2.0, 0.5);
    for (Rep r : {Rep::Kraus, Rep::Choi, Rep::SuperOp}) {
        Channel cr = convert(c, r);
        CHECK(oracle::maxdiff(channels::apply(cr, al * a + be * b), al * channels::apply(cr, a) + be * channels::apply(cr, b)) < 1e-12);
    }
}

TEST_CASE("compose matches sequential application") {
    Rng rng(6);
    Channel c1 = random_cptp(rng, 2, 2, 2), c2 = random_cptp(rng, 2, 2, 3);
    Mat rho = qla::random_density(rng, 2);
    CHECK(oracle::maxdiff(channels::apply(compose(c2, c1), rho), channels::apply(c2, channels::apply(c1, rho))) < 1e-12);
}

TEST_CASE("depolarizing Choi eigenvalues are 2 p_j") {
    double p[4] = {0.4, 0.3, 0.2, 0.1};
    auto ev = oracle::eigvals_sorted(choi(depolarizing(p[0], p[1], p[2], p[3])));
    std::vector<double> want{0.2, 0.4, 0.6, 0.8};
    for (int k = 0; k < 4; ++k) CHECK(ev[k] == doctest::Approx(want[k]).epsilon(1e-12));
    CHECK_THROWS(depolarizing(0.5, 0.5, 0.5, 0.0));
}

TEST_CASE("amplitude damping with vanishing survival sends every state to |0><0|") {
    Rng rng(7);
    Channel c = amplitude_damping(0.0);
    for (int rep = 0; rep < 20; ++rep)
        CHECK(oracle::maxdiff(channels::apply(c, qla::random_density(rng, 2)), qla::ket_bra(2, 0, 0)) < 1e-10);
    Mat rho = qla::ket_bra(2, 1, 1);
    CHECK(channels::apply(amplitude_damping(0.3), rho)(1, 1).real() == doctest::Approx(0.3));
    CHECK(channels::apply(amplitude_damping(0.3), rho)(0, 0).real() == doctest::Approx(0.7));
}

TEST_CASE("dephasing damps coherences only") {
    Mat plus = Mat::Constant(2, 2, 0.5);
    Mat out = channels::apply(dephasing(2.0, 0.5), plus);
    CHECK(out(0, 1).real() == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK(out(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("xz_oscillatory Choi entries") {
    double wt = 0.3, c2 = std::pow(std::cos(0.6), 2);
    Mat y = choi(xz_oscillatory(1.0, wt));
    CHECK(y(0, 0).real() == doctest::Approx(0.5 * (1 + c2)));
    CHECK(y(1, 1).real() == doctest::Approx(0.5 * (1 - c2)));
    CHECK(y(0, 3).real() == doctest::Approx(c2));
    CHECK(is_cp(xz_oscillatory(1.0, wt)).ok);
}

TEST_CASE("kraus_from_choi rejects NCP input naming the eigenvalue") {
    Mat y = qla::partial_transpose(qla::max_entangled(2), {2, 2}, {1});
    try {
        kraus_from_choi(y, 2, 2);
        FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("-1") != std::string::npos);
    }
    CHECK_FALSE(is_cp(Channel::from_choi(y, 2, 2)).ok);
    CHECK(is_cp(Channel::from_choi(y, 2, 2)).min_eig == doctest::Approx(-1));
}

TEST_CASE("trace-nonpreserving map is flagged") {
    Channel c = Channel::from_kraus({0.5 * Mat::Identity(2, 2)});
    CHECK_FALSE(is_tp(c).ok);
    CHECK(is_tp(c).residual == doctest::Approx(0.75));
    CHECK_THROWS(dilate_to_unitary(c));
}

TEST_CASE("superop and Choi conversions invert each other") {
    Rng rng(8);
    Mat y = choi(random_cptp(rng, 2, 3, 2));
    Mat s = superop_from_choi(y, 2, 3);
    CHECK(s.rows() == 9);
    CHECK(s.cols() == 4);
    CHECK(oracle::maxdiff(choi_from_superop(s, 2, 3), y) < 1e-14);
    Mat rho = qla::random_density(rng, 2);
    CHECK(oracle::maxdiff(devectorize(s * vectorize(rho)), channels::apply(Channel::from_choi(y, 2, 3), rho)) < 1e-12);
}

TEST_CASE("choi_io is the (in x out) reordering") {
    Rng rng(9);
    Channel c = random_cptp(rng, 2, 3, 2);
    CHECK(oracle::maxdiff(choi_io(c), oracle::swap(choi(c), 3, 2)) < 1e-14);
}

TEST_CASE("channel json roundtrip in every representation") {
    Rng rng(10);
    Channel c = random_cptp(rng, 2, 2, 2);
    for (Rep r : {Rep::Kraus, Rep::Choi, Rep::SuperOp}) {
        Channel cr = convert(c, r);
        Channel back = channel_from_json(nlohmann::json::parse(to_json(cr).dump()));
        CHECK(back.rep == r);
        CHECK(oracle::maxdiff(choi(back), choi(c)) < 1e-12);
    }
    CHECK_THROWS(factory("nope", {}));
    CHECK(is_tp(factory("dephasing", {1.0, 2.0})).ok);
}
