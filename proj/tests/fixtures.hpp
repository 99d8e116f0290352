#pragma once
// Shared constructions for the memory suites.

#include "qproc/memory.hpp"

namespace fixtures {

using namespace qproc;

// Slots 0i,0o,1i,1o,2i. H = {0i,0o}, M = {1i}, F = {1o,2i}.
// T = sum_x H_x (x) |x><x| (x) F_x with F_x distinct channels and H_x from rho0 and a channel into 1i.
struct OrderFixture {
    memory::FiniteOrder built;
    std::vector<Mat> elements;
    std::vector<Mat> duals;
    memory::Split split;
};

inline OrderFixture finite_order_fixture(std::uint64_t seed) {
    Rng rng(seed);
    Mat rho0 = qla::random_density(rng, 2);
    Channel into = channels::random_cptp(rng, 2, 2, 2);
    std::vector<Mat> hist, fut, els;
    for (int x = 0; x < 2; ++x) {
        Mat px = qla::ket_bra(2, x, x);
        Mat mx = Mat::Zero(2, 2);
        for (const Mat& k : channels::kraus(into)) mx += k.adjoint() * px * k;
        hist.push_back(qla::kron(rho0, Mat(mx.transpose())));
        fut.push_back(proc::op_choi(channels::random_cptp(rng, 2, 2, 1 + x)));
        els.push_back(px);
    }
    std::vector<Slot> h{{0, 'i', 2}, {0, 'o', 2}}, m{{1, 'i', 2}}, f{{1, 'o', 2}, {2, 'i', 2}};
    OrderFixture o;
    o.built = memory::build_finite_order(fut, els, hist, {}, h, m, f);
    o.elements = els;
    o.duals = els;
    o.split = memory::Split{{3, 4}, {2}, {0, 1}};
    return o;
}

inline std::vector<Mat> rotated_instrument(Rng& rng) {
    Mat u = qla::random_unitary(rng, 2);
    return {u * qla::ket_bra(2, 0, 0) * u.adjoint(), u * qla::ket_bra(2, 1, 1) * u.adjoint()};
}

inline ProcessTensor correlated_circuit(Rng& rng, int steps) {
    Mat rho = qla::random_density(rng, 4);
    std::vector<Mat> us;
    for (int j = 0; j < steps; ++j) us.push_back(qla::random_unitary(rng, 4));
    return proc::process_from_circuit(rho, 2, 2, us);
}

inline ProcessTensor product_process(Rng& rng, int steps) {
    std::vector<Channel> cs;
    for (int j = 0; j < steps; ++j) cs.push_back(channels::random_cptp(rng, 2, 2, 1 + j % 3));
    return proc::markov_tensor(qla::random_density(rng, 2), cs);
}

}  // namespace fixtures
