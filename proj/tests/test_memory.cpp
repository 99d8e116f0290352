#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "oracle.hpp"

using namespace qproc;
using namespace qproc::memory;

TEST_CASE("N_R vanishes exactly when is_markov holds on 30 product and 30 correlated tensors") {
    Rng rng(1);
    for (int rep = 0; rep < 30; ++rep) {
        ProcessTensor p = fixtures::product_process(rng, 1 + rep % 3);
        auto v = is_markov(p);
        CHECK(v.markov);
        CHECK(nonmarkov_rel_entropy(p).nr <= 1e-8);
        CHECK(v.breaks.independent);
        ProcessTensor c = fixtures::correlated_circuit(rng, 1 + rep % 2);
        auto vc = is_markov(c);
        CHECK_FALSE(vc.markov);
        CHECK(nonmarkov_rel_entropy(c).nr > 1e-8);
    }
}

TEST_CASE("closest Markov tensor of a product process is the process itself") {
    Rng rng(2);
    ProcessTensor p = fixtures::product_process(rng, 2);
    CHECK(oracle::maxdiff(closest_markov(p).choi, p.choi) < 1e-12);
    ProcessTensor c = fixtures::correlated_circuit(rng, 2);
    ProcessTensor m = closest_markov(c);
    CHECK(proc::check_causality(m).ok);
    CHECK(m.choi.trace().real() == doctest::Approx(c.choi.trace().real()));
}

TEST_CASE("confusion probabilities are exp(-n N_R)") {
    auto r = nonmarkov_rel_entropy(proc::shallow_pocket(1.0, 2));
    REQUIRE(r.p_confusion.size() == 3);
    CHECK(r.p_confusion[0].first == 1);
    CHECK(r.p_confusion[2].first == 100);
    CHECK(r.p_confusion[1].second == doctest::Approx(std::exp(-10 * r.nr)));
}

TEST_CASE("Schatten bound vanishes iff product form") {
    Rng rng(3);
    CHECK(schatten_bound(fixtures::product_process(rng, 2)) < 1e-12);
    CHECK(schatten_bound(fixtures::correlated_circuit(rng, 2)) > 1e-6);
    CHECK(schatten_bound(proc::shallow_pocket(1.0, 2), 2.0) > 1e-6);
}

TEST_CASE("causal breaks leave Markov futures independent of the past") {
    Rng rng(4);
    auto r = causal_break_check(fixtures::product_process(rng, 3));
    CHECK(r.independent);
    // 4 effects at t=1, then 16*4 at t=2, then 16*16*4 at t=3
    CHECK(r.elements == 4 + 64 + 1024);
    auto c = causal_break_check(fixtures::correlated_circuit(rng, 2));
    CHECK_FALSE(c.independent);
    CHECK(c.worst_time >= 0);
}

TEST_CASE("bond dimensions") {
    Rng rng(5);
    for (int b : mpo_bond_dims(fixtures::product_process(rng, 3))) CHECK(b == 1);
    auto bc = mpo_bond_dims(fixtures::correlated_circuit(rng, 2));
    CHECK(bc.size() == 2);
    CHECK(*std::max_element(bc.begin(), bc.end()) > 1);
    CHECK(schmidt_rank(qla::kron(qla::pauli(1), qla::pauli(2)), {2, 2}, 1) == 1);
    CHECK(schmidt_rank(qla::max_entangled(2), {2, 2}, 1) == 4);
}

TEST_CASE("QCMI vanishes on product processes and not on the shallow pocket") {
    Rng rng(6);
    ProcessTensor p = fixtures::product_process(rng, 2);
    Split s = split_by_times(p, {2}, {1}, {0});
    CHECK(std::abs(qcmi(p, s)) < 1e-9);
    ProcessTensor sp = proc::shallow_pocket(1.0, 2);
    // H = 0 slots, M = 1i, F = 1o,2i
    Split s2{{3, 4}, {2}, {0, 1}};
    CHECK(qcmi(sp, s2) > 1e-3);
    CHECK_THROWS(qcmi(sp, Split{{2}, {3}, {0}}));
    CHECK_THROWS(qcmi(sp, Split{{3, 4}, {2}, {}}));
}

TEST_CASE("finite-order construction passes its own instrument and fails a rotated one") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto fx = fixtures::finite_order_fixture(seed);
        CHECK(fx.built.causality.ok);
        auto ok = markov_order_test(fx.built.tensor, fx.split, fx.elements);
        CHECK(ok.ok);
        for (int r : ok.schmidt_rank) CHECK(r == 1);
        CHECK(qcmi(fx.built.tensor, fx.split) <= 1e-8);
        CHECK(recovery_error(fx.built.tensor, fx.split, fx.elements, fx.duals) < 1e-10);
    }
    int fails = 0;
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        auto fx = fixtures::finite_order_fixture(100 + trial);
        if (!markov_order_test(fx.built.tensor, fx.split, fixtures::rotated_instrument(rng)).ok) ++fails;
    }
    CHECK(fails >= 45);
}

TEST_CASE("Markov processes are recovered from any instrument on M") {
    Rng rng(7);
    ProcessTensor p = fixtures::product_process(rng, 2);
    Split s = split_by_times(p, {2}, {1}, {0});
    // full measure-and-prepare basis on (1i,1o)
    std::vector<Mat> els;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) els.push_back(proc::measure_prepare_choi(qla::ket_bra(2, a, a), qla::ket_bra(2, b, b)));
    auto r = markov_order_test(p, s, els);
    CHECK(r.ok);
}

TEST_CASE("divisibility") {
    auto d = infer_divisor(channels::dephasing(1.0, 2.0), channels::dephasing(1.0, 0.5));
    CHECK(d.cp);
    CHECK(d.residual < 1e-12);
    CHECK(oracle::maxdiff(d.zeta, channels::superop(channels::dephasing(1.0, 1.5))) < 1e-12);
    auto x = infer_divisor(channels::xz_oscillatory(1.0, 1.2), channels::xz_oscillatory(1.0, 0.6));
    CHECK_FALSE(x.cp);
    CHECK(x.min_eig < -1e-6);
    CHECK_THROWS_AS(infer_divisor(channels::xz_oscillatory(1.0, 1.0), channels::xz_oscillatory(1.0, M_PI / 4)),
                    std::domain_error);
}

TEST_CASE("snapshot generator") {
    auto s = snapshot_generator(channels::dephasing(2.0, 1.0), 1.0);
    CHECK(s.ok);
    CHECK(s.cp_semigroup);
    CHECK(s.recon_error < 1e-10);
    // generator of dephasing at rate 2 on the coherences
    CHECK(s.L(1, 1).real() == doctest::Approx(-2.0));
    auto ad = snapshot_generator(channels::amplitude_damping(std::exp(-0.7)), 0.7);
    CHECK(ad.ok);
    CHECK(ad.cp_semigroup);
    auto xz = snapshot_generator(channels::xz_oscillatory(1.0, M_PI / 4), M_PI / 4);
    CHECK_FALSE(xz.ok);
    CHECK(xz.diagnostic.find("branch cut") != std::string::npos);
}

TEST_CASE("BLP witness") {
    Mat plus = Mat::Constant(2, 2, 0.5), minus = plus;
    minus(0, 1) = minus(1, 0) = -0.5;
    std::vector<double> ts;
    for (int k = 0; k <= 20; ++k) ts.push_back(0.1 * k);
    auto deph = blp_channel_family([](double t) { return channels::dephasing(1.0, t); }, plus, minus, ts);
    CHECK_FALSE(deph.non_markovian);
    CHECK(deph.distance[10] == doctest::Approx(std::exp(-1.0)));
    auto xz = blp_channel_family([](double t) { return channels::xz_oscillatory(1.0, t); }, qla::ket_bra(2, 0, 0),
                                 qla::ket_bra(2, 1, 1), ts);
    CHECK(xz.non_markovian);
    // shallow pocket: distances of |+>,|-> decay as exp(-gamma t) without intervention
    auto free = blp_shallow_pocket(1.0, 1.0, Mat::Identity(2, 2), plus, minus, 21);
    CHECK_FALSE(free.non_markovian);
    CHECK(free.distance.back() == doctest::Approx(std::exp(-2.0)));
    auto echo = blp_shallow_pocket(1.0, 1.0, qla::pauli(1), plus, qla::ket_bra(2, 0, 0), 21);
    CHECK(echo.non_markovian);
    CHECK(blp_verdict({0, 1, 2}, {1.0, 0.5, 0.6}).non_markovian);
    CHECK_FALSE(blp_verdict({0, 1, 2}, {1.0, 0.5, 0.5}).non_markovian);
}

TEST_CASE("BLP distances from a tensor match direct channel application") {
    Rng rng(8);
    Channel c1 = channels::random_cptp(rng, 2, 2, 2), c2 = channels::random_cptp(rng, 2, 2, 2);
    ProcessTensor t = proc::markov_tensor(Mat::Identity(2, 2) / 2.0, {c1, c2});
    Mat r = qla::random_density(rng, 2), s = qla::random_density(rng, 2);
    auto ds = blp_tensor_distances(t, {}, r, s);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0] == doctest::Approx(qla::trace_distance(channels::apply(c1, r), channels::apply(c1, s))));
    Channel both = channels::compose(c2, c1);
    CHECK(ds[1] == doctest::Approx(qla::trace_distance(channels::apply(both, r), channels::apply(both, s))));
}
