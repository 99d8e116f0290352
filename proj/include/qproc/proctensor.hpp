#pragma once

#include <map>
#include <string>
#include <vector>

#include "qproc/tomo.hpp"

namespace qproc {

struct Slot {
    int t;
    char dir;  // 'i' or 'o'
    int d;
};

// Choi over chronological slots 0i,0o,1i,...,ki. Unnormalized: tr = prod of output dims.
struct ProcessTensor {
    std::vector<Slot> slots;
    Mat choi;

    Dims dims() const;
    std::vector<int> times() const;
    int slot_index(int t, char dir) const;  // -1 if absent
    std::vector<int> slots_of_time(int t) const;
    double output_dim_product() const;
};

namespace proc {

// Choi(C o A) = C * A for channels; `shared` pairs slot indices of a with slot indices of b.
// Result factors: unshared of a, then unshared of b.
struct Linked {
    Mat m;
    Dims dims;
};
Linked link_product(const Mat& a, const Dims& da, const Mat& b, const Dims& db,
                    const std::vector<std::pair<int, int>>& shared);

// tr_S[Y (1 (x) A^T)] over the listed slots (A ordered as the listed slots)
Mat contract(const Mat& y, const Dims& dims, const std::vector<int>& slots, const Mat& a);

// op Choi in (i,o) order; the last time uses the effect form E^T
double born_multi(const ProcessTensor& t, const std::vector<Mat>& ops);
double born_element(const ProcessTensor& t, const Mat& element);
Mat effect_choi(const Mat& e);
Mat op_choi(const Channel& c);
Mat measure_prepare_choi(const Mat& effect, const Mat& state);

struct CausalityReport {
    bool ok;
    double min_eig;
    double trace_residual;
    std::vector<double> level_residuals;  // from the last time down to 0i
    int failed_level = -1;
};
CausalityReport check_causality(const ProcessTensor& t, double tol = 1e-8);

// keep_times: subset of times. Intermediate or earlier dropped times need an op in `ops`.
ProcessTensor reduce(const ProcessTensor& t, const std::vector<int>& keep_times,
                     const std::map<int, Mat>& ops = {});
ProcessTensor contract_time(const ProcessTensor& t, int time, const Mat& op_io);

// element spans all slots of `times` (in slot order); normalized by the element probability
ProcessTensor condition_on_past(const ProcessTensor& t, const std::vector<int>& times, const Mat& element,
                                double* prob = nullptr);

ProcessTensor process_from_circuit(const Mat& rho_se, int d_s, int d_e, const std::vector<Mat>& unitaries);
ProcessTensor superchannel_build(const Mat& rho_se, int d_s, int d_e, const Mat& U);
ProcessTensor markov_tensor(const Mat& rho0, const std::vector<Channel>& chans);

// direct density-matrix simulation for product ops (oracle for the circuit constructor)
double simulate_circuit(const Mat& rho_se, int d_s, int d_e, const std::vector<Mat>& unitaries,
                        const std::vector<Channel>& ops, const Mat& effect);

ProcessTensor shallow_pocket(double gamma_t, int steps = 2);
ProcessTensor shallow_pocket_segments(const std::vector<double>& gamma_ts);
// 4x4 block on (0o,1o) of the 2-step tensor
Mat shallow_pocket_compressed(const ProcessTensor& t);

ProcessTensor stern_gerlach();

// the interaction and correlated state of the initial-correlations example
Mat xyz_interaction(double omega_t);
Mat correlated_state(double a1, double a2, double a3, double g);

struct OpBasis {
    std::vector<std::vector<Mat>> per_time;  // basis elements per time; last time holds effect Chois
    std::vector<std::vector<Mat>> duals;
};
OpBasis random_op_basis(Rng& rng, const ProcessTensor& shape);
// threads > 1 splits the sequences across workers; results do not depend on the split
std::vector<double> basis_probabilities(const ProcessTensor& t, const OpBasis& b, int threads = 1);
ProcessTensor reconstruct_process(const std::vector<double>& probs, const OpBasis& b,
                                  const std::vector<Slot>& slots);

// Random product tester: one random instrument per time and a random POVM at the last time
struct Tester {
    std::vector<Mat> elements;  // over all slots
};
Tester random_product_tester(Rng& rng, const ProcessTensor& shape, int outcomes = 2);

nlohmann::ordered_json to_json(const ProcessTensor& t);
ProcessTensor process_from_json(const nlohmann::json& j);

}  // namespace proc
}  // namespace qproc
