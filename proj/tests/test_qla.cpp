#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "qproc/channels.hpp"
#include "qproc/qla.hpp"

using namespace qproc;
using namespace qproc::qla;

TEST_CASE("kron matches index-loop oracle and is associative") {
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        Mat a = random_ginibre(rng, 2, 3), b = random_ginibre(rng, 3, 2), c = random_ginibre(rng, 2, 2);
        CHECK(oracle::maxdiff(kron(a, b), oracle::kron(a, b)) < 1e-14);
        CHECK(oracle::maxdiff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);
        Mat sa = random_ginibre(rng, 3, 3), sb = random_ginibre(rng, 2, 2);
        CHECK(std::abs(kron(sa, sb).trace() - sa.trace() * sb.trace()) < 1e-12);
    }
}

TEST_CASE("partial trace of a product returns tr(B) A for 100 random pairs") {
    Rng rng(2);
    for (int rep = 0; rep < 100; ++rep) {
        Mat a = random_ginibre(rng, 3, 3), b = random_ginibre(rng, 2, 2);
        CHECK(oracle::maxdiff(partial_trace(kron(a, b), {3, 2}, {0}), b.trace() * a) < 1e-12);
        CHECK(oracle::maxdiff(partial_trace(kron(a, b), {3, 2}, {1}), a.trace() * b) < 1e-12);
    }
}

TEST_CASE("partial trace agrees with the loop oracle on generic matrices") {
    Rng rng(3);
    Mat m = random_ginibre(rng, 12, 12);
    CHECK(oracle::maxdiff(partial_trace(m, {3, 4}, {0}), oracle::trace_second(m, 3, 4)) < 1e-12);
    CHECK(oracle::maxdiff(partial_trace(m, {3, 4}, {1}), oracle::trace_first(m, 3, 4)) < 1e-12);
    // three factors: keep the middle
    Mat t = random_ginibre(rng, 12, 12);
    Mat mid = partial_trace(t, {2, 3, 2}, {1});
    Mat ref = oracle::trace_first(oracle::trace_second(t, 6, 2), 2, 3);
    CHECK(oracle::maxdiff(mid, ref) < 1e-12);
    CMatrix cm({2, 3, 2}, t);
    CHECK(partial_trace(cm, {2, 0}).dims() == Dims{2, 2});
}

TEST_CASE("permute swaps factors like the oracle and round-trips") {
    Rng rng(4);
    Mat m = random_ginibre(rng, 6, 6);
    CHECK(oracle::maxdiff(permute(m, {2, 3}, {1, 0}), oracle::swap(m, 2, 3)) < 1e-14);
    Mat t = random_ginibre(rng, 24, 24);
    Mat p = permute(t, {2, 3, 4}, {2, 0, 1});
    CHECK(oracle::maxdiff(permute(p, {4, 2, 3}, {1, 2, 0}), t) < 1e-14);
    Mat a = random_ginibre(rng, 2, 2), b = random_ginibre(rng, 3, 3), c = random_ginibre(rng, 4, 4);
    CHECK(oracle::maxdiff(permute(kron_all({a, b, c}), {2, 3, 4}, {2, 0, 1}), kron_all({c, a, b})) < 1e-12);
}

TEST_CASE("partial transpose") {
    Rng rng(5);
    Mat a = random_ginibre(rng, 2, 2), b = random_ginibre(rng, 3, 3);
    CHECK(oracle::maxdiff(partial_transpose(kron(a, b), {2, 3}, {1}), kron(a, b.transpose())) < 1e-14);
    CHECK(oracle::maxdiff(partial_transpose(kron(a, b), {2, 3}, {0, 1}), kron(a, b).transpose()) < 1e-14);
    // the max-entangled state has a negative partial transpose
    CHECK(min_eig(partial_transpose(max_entangled(2), {2, 2}, {1})) == doctest::Approx(-1.0));
}

TEST_CASE("realign gives operator-Schmidt rank 1 on products") {
    Rng rng(6);
    Mat a = random_ginibre(rng, 2, 2), b = random_ginibre(rng, 3, 3);
    Mat r = realign(kron(a, b), {2, 3}, 1);
    Eigen::JacobiSVD<Mat> svd(r);
    CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
    Mat r2 = realign(max_entangled(2), {2, 2}, 1);
    Eigen::JacobiSVD<Mat> svd2(r2);
    CHECK(svd2.singularValues()(3) > 0.5);
}

TEST_CASE("herm_eig reconstructs random Hermitian matrices up to dim 64") {
    Rng rng(7);
    for (int d : {2, 5, 16, 64}) {
        Mat g = random_ginibre(rng, d, d);
        Mat h = g + g.adjoint();
        Eig e = herm_eig(h);
        Mat rec = e.vecs * e.vals.cast<cd>().asDiagonal() * e.vecs.adjoint();
        CHECK(oracle::maxdiff(rec, h) < 1e-10);
        for (int k = 1; k < d; ++k) CHECK(e.vals(k - 1) >= e.vals(k));
    }
    CHECK_THROWS_AS(herm_eig(random_ginibre(rng, 3, 3)), std::invalid_argument);
}

TEST_CASE("max_entangled") {
    Mat p = max_entangled(2);
    CHECK(p(0, 0) == cd(1));
    CHECK(p(0, 3) == cd(1));
    CHECK(p(3, 0) == cd(1));
    CHECK(p(3, 3) == cd(1));
    CHECK(p.cwiseAbs().sum() == doctest::Approx(4));
    CHECK(p.trace().real() == doctest::Approx(2));
    CHECK(oracle::maxdiff(partial_trace(max_entangled(3), {3, 3}, {0}) / 3.0, Mat::Identity(3, 3) / 3.0) < 1e-14);
    CHECK_THROWS(max_entangled(1));
}

TEST_CASE("entropies in nats") {
    CHECK(vn_entropy(Mat::Identity(2, 2) / 2.0) == doctest::Approx(std::log(2.0)));
    CHECK(vn_entropy(ket_bra(3, 1, 1)) == doctest::Approx(0.0));
    // Bell state: MI = 2 ln 2
    Mat bell = max_entangled(2) / 2.0;
    CHECK(q_mutual_info(CMatrix({2, 2}, bell), {0}) == doctest::Approx(2 * std::log(2.0)));
    CHECK(q_rel_entropy(ket_bra(2, 0, 0), ket_bra(2, 1, 1)) == std::numeric_limits<double>::infinity());
    Rng rng(8);
    Mat r = random_density(rng, 3), s = random_density(rng, 3);
    CHECK(q_rel_entropy(r, s) >= 0);
    CHECK(q_rel_entropy(r, r) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(vn_entropy(r) == doctest::Approx(oracle::entropy_of_spectrum(oracle::eigvals_sorted(r))));
}

TEST_CASE("data processing for relative entropy and mutual information under 50 random CPTP maps") {
    Rng rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        Mat r = random_density(rng, 2), s = random_density(rng, 2);
        Channel c = channels::random_cptp(rng, 2, 2, 1 + rep % 4);
        CHECK(q_rel_entropy(channels::apply(c, r), channels::apply(c, s)) <= q_rel_entropy(r, s) + 1e-9);
        Mat rab = random_density(rng, 4);
        // act on B only
        std::vector<Mat> ks;
        for (const Mat& k : channels::kraus(c)) ks.push_back(kron(Mat::Identity(2, 2), k));
        Mat out = Mat::Zero(4, 4);
        for (const Mat& k : ks) out += k * rab * k.adjoint();
        CHECK(q_mutual_info(CMatrix({2, 2}, out), {0}) <= q_mutual_info(CMatrix({2, 2}, rab), {0}) + 1e-9);
    }
}

TEST_CASE("norms and distances") {
    Mat z = pauli(3);
    CHECK(trace_norm(z) == doctest::Approx(2));
    CHECK(schatten_norm(z, 2) == doctest::Approx(std::sqrt(2.0)));
    CHECK(trace_distance(ket_bra(2, 0, 0), ket_bra(2, 1, 1)) == doctest::Approx(1));
    Rng rng(10);
    Mat r = random_density(rng, 4);
    Mat sq = psd_sqrt(r);
    CHECK(oracle::maxdiff(sq * sq, r) < 1e-10);
}

TEST_CASE("pauli algebra and random objects") {
    for (int j = 1; j < 4; ++j) CHECK(oracle::maxdiff(pauli(j) * pauli(j), Mat::Identity(2, 2)) < 1e-15);
    CHECK(oracle::maxdiff(pauli(1) * pauli(2), cd(0, 1) * pauli(3)) < 1e-15);
    Rng rng(11);
    Mat u = random_unitary(rng, 5);
    CHECK(oracle::maxdiff(u * u.adjoint(), Mat::Identity(5, 5)) < 1e-12);
    Mat rho = random_density(rng, 4, 2);
    CHECK(is_psd(rho));
    CHECK(std::abs(rho.trace() - cd(1)) < 1e-12);
    CHECK(herm_eig(rho).vals(2) < 1e-10);
}

TEST_CASE("CMatrix json roundtrip keeps field order") {
    Rng rng(12);
    CMatrix m({2, 3}, random_ginibre(rng, 6, 6));
    auto j = to_json(m);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"rows_dims", "cols_dims", "re", "im"});
    CMatrix back = cmatrix_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.dims() == m.dims());
    CHECK(oracle::maxdiff(back.m, m.m) == 0.0);
}
