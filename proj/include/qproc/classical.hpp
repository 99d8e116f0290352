#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qproc::classical {

using StochMatrix = Eigen::MatrixXd;  // columns indexed by the conditioning history
using Dist = Eigen::VectorXd;

// P(x_{k-1},...,x_0) flattened row-major: dims[0] belongs to the latest time
struct JointDist {
    std::vector<int> dims;
    std::vector<double> probs;

    int times() const { return static_cast<int>(dims.size()); }
    // axis of time t (0 = earliest)
    int axis(int t) const { return times() - 1 - t; }
    double at(const std::vector<int>& chrono) const;  // chrono[t] = outcome at time t
    void check() const;
};

bool is_column_stochastic(const StochMatrix& g, double tol = 1e-12);
bool is_bistochastic(const StochMatrix& g, double tol = 1e-12);

Dist apply(const StochMatrix& g, const Dist& p);
// Gamma_(k:j) = Gamma_last ... Gamma_first for a chronological list
StochMatrix chapman(const std::vector<StochMatrix>& chain);
// P(r_k | r_j) for a chronological list of one-step matrices, via explicit trajectory sums
StochMatrix two_point_from_chain(const std::vector<StochMatrix>& chain, int j, int k);

// chronological Markov chain joint over `steps+1` times
JointDist markov_chain(const Dist& p0, const StochMatrix& g, int steps);

JointDist marginalize(const JointDist& j, const std::vector<int>& keep_times);
// family entries: time set (chronological) -> joint over those times
bool consistency_check(const std::map<std::vector<int>, JointDist>& family, double tol = 1e-10,
                       double* worst = nullptr);

// conditional P(x_t | history of depth l) table; returns max deviation between depth l and full history
double order_deviation(const JointDist& j, int l);
int markov_order_estimate(const JointDist& j, double tol = 1e-9);

// Gamma^(m): d x d^m, columns (x_{k-1},...,x_{k-m}) row-major. Xi: d^m x d^m.
StochMatrix hidden_markov_embed(const StochMatrix& gm, int d, int m);
// joint over `steps` further times from an initial m-time block distribution
JointDist simulate_order_m(const StochMatrix& gm, int d, int m, const Dist& init_block, int steps);

double shannon(const std::vector<double>& p);
// chronological time sets
double cmi(const JointDist& j, const std::vector<int>& f, const std::vector<int>& m, const std::vector<int>& h);
struct Recovery {
    JointDist reconstructed;
    double error;
};
Recovery recovery(const JointDist& j, const std::vector<int>& f, const std::vector<int>& m,
                  const std::vector<int>& h);

struct DpiReport {
    double trace_before, trace_after;
    double rel_before, rel_after;
    double mi_before, mi_after;
    bool contracts;
};
DpiReport dpi_suite(const Dist& p, const Dist& q, const StochMatrix& g);

struct EuclidReport {
    double initial, final_, ratio;                 // plain 2-norm
    double initial_sq, final_sq, ratio_sq;         // squared 2-norm
};
// two bits, second bit uniform, discarded by the process
EuclidReport euclidean_counterexample(const Dist& p, const Dist& r);

StochMatrix fair_die();
StochMatrix biased_die(const Dist& p);
StochMatrix perturbed_die(double p = 0.5, double q = 0.115, double s = 0.04);
// mu in 0..3; weights[mu] mixes the perturbed die with the fair die (mu = 3 is the fair die)
StochMatrix escalating_die_matrix(int mu, const std::vector<double>& weights = {1.0, 2.0 / 3, 1.0 / 3, 0.0});
JointDist escalating_die(int tosses, const std::vector<double>& weights = {1.0, 2.0 / 3, 1.0 / 3, 0.0});

enum class CoinIntervention { Flip, Identity, Reset };
// joint over (F1, F2) after starting at heads; outcome 0 = heads
JointDist coin_with_interventions(double p, CoinIntervention j);
JointDist coin_no_intervention(double p);
JointDist parity_process();
JointDist long_memory(double p, int s, int d, int times);

nlohmann::ordered_json to_json(const JointDist& j);
JointDist joint_from_json(const nlohmann::json& j);

}  // namespace qproc::classical
