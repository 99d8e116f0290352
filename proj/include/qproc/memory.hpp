#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qproc/proctensor.hpp"

namespace qproc::memory {

ProcessTensor closest_markov(const ProcessTensor& t);

struct RelEntropy {
    double nr;
    std::vector<std::pair<int, double>> p_confusion;  // n -> exp(-n N_R)
};
RelEntropy nonmarkov_rel_entropy(const ProcessTensor& t);

// || T/trT - closest/tr ||_p, an upper bound on the Schatten measure
double schatten_bound(const ProcessTensor& t, double p = 1.0);

struct CausalBreakReport {
    bool independent = true;
    double max_deviation = 0;
    int elements = 0;
    int worst_time = -1;
};
// measure-and-prepare breaks at every intermediate time; conditional futures compared
CausalBreakReport causal_break_check(const ProcessTensor& t, double tol = 1e-8);

struct MarkovVerdict {
    bool markov;
    double distance;  // trace norm of the normalized difference
    CausalBreakReport breaks;
    ProcessTensor factorization;
};
MarkovVerdict is_markov(const ProcessTensor& t, double tol = 1e-8);

// slot-index sets, each contiguous, chronological order H < M < F
struct Split {
    std::vector<int> F, M, H;
};
Split split_by_times(const ProcessTensor& t, const std::vector<int>& f, const std::vector<int>& m,
                     const std::vector<int>& h);
double qcmi(const ProcessTensor& t, const Split& s);

struct OrderTest {
    bool ok;
    std::vector<double> mutual_info;
    std::vector<int> schmidt_rank;
    std::vector<double> probability;
};
// elements act on the M slots in (i,o) order
OrderTest markov_order_test(const ProcessTensor& t, const Split& s, const std::vector<Mat>& elements,
                            double tol = 1e-8);

struct FiniteOrder {
    ProcessTensor tensor;
    proc::CausalityReport causality;
};
// sum_x H_x (x) conj(Delta_x) (x) F_x + sum_a [FH_a (x) conj(Dbar_a)] reordered to H,M,F
FiniteOrder build_finite_order(const std::vector<Mat>& futures, const std::vector<Mat>& duals,
                               const std::vector<Mat>& histories,
                               const std::vector<std::pair<Mat, Mat>>& complement,
                               const std::vector<Slot>& h_slots, const std::vector<Slot>& m_slots,
                               const std::vector<Slot>& f_slots);

// rebuilds T from its reduced H,M tensor via the recovery map; returns the max entry error
double recovery_error(const ProcessTensor& t, const Split& s, const std::vector<Mat>& elements,
                      const std::vector<Mat>& duals);

int schmidt_rank(const Mat& m, const Dims& dims, int cut);
std::vector<int> mpo_bond_dims(const ProcessTensor& t);

struct Divisor {
    Mat zeta;  // superoperator
    bool cp;
    double min_eig;
    double residual;
    double cond;
};
Divisor infer_divisor(const Channel& e_t0, const Channel& e_s0);

struct Snapshot {
    bool ok = false;
    std::string diagnostic;
    Mat L;  // superoperator generator
    double recon_error = 0;
    bool cp_semigroup = false;
    double worst_eig = 0;
    double worst_s = 0;
};
Snapshot snapshot_generator(const Channel& e_t0, double t, int samples = 20);

struct BlpSeries {
    std::vector<double> t;
    std::vector<double> distance;
    std::vector<bool> increase;
    bool non_markovian = false;
    double max_increase = 0;
};
BlpSeries blp_verdict(const std::vector<double>& times, const std::vector<double>& distances);
BlpSeries blp_channel_family(const std::function<Channel(double)>& family, const Mat& rho, const Mat& sigma,
                             const std::vector<double>& times);
// state after each time j >= 1 with rho/sigma prepared at 0o and the given ops at intermediate times
std::vector<double> blp_tensor_distances(const ProcessTensor& t, const std::map<int, Mat>& ops, const Mat& rho,
                                         const Mat& sigma);
// shallow pocket over [0, 2t] with an intervention (unitary) at t
BlpSeries blp_shallow_pocket(double gamma, double t, const Mat& intervention, const Mat& rho, const Mat& sigma,
                             int points = 41);

}  // namespace qproc::memory
