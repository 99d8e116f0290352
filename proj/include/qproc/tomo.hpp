#pragma once

#include <string>
#include <vector>

#include "qproc/channels.hpp"

namespace qproc {

struct POVM {
    std::vector<Mat> elements;
};

struct Instrument {
    std::vector<Channel> elements;
};

namespace tomo {

// tr(D_j^dag B_k) = delta_jk; throws when the Gram condition number exceeds 1e12
std::vector<Mat> dual_set(const std::vector<Mat>& basis);
double duality_residual(const std::vector<Mat>& basis, const std::vector<Mat>& duals);

bool is_valid_povm(const POVM& p, double tol = 1e-9);
bool is_valid_instrument(const Instrument& j, double tol = 1e-9);

POVM sic_povm_qubit();
POVM ic_povm_from_positive_basis(const std::vector<Mat>& fs);
// d^2-1 random positive matrices plus the completion I - alpha sum F
POVM random_ic_povm(Rng& rng, int d);

double born_prob(const Mat& rho, const Mat& e);
std::vector<double> born_probs(const Mat& rho, const POVM& p);

Mat state_tomography(const std::vector<double>& probs, const POVM& p);
Channel channel_tomography(const std::vector<Mat>& inputs, const std::vector<Mat>& outputs);

POVM instrument_to_povm(const Instrument& j);
Instrument projective_instrument(const std::vector<Mat>& projectors);

// qubit states |+x>,|-x>,|+y>,|+z>
std::vector<Mat> pauli_state_basis();

nlohmann::ordered_json to_json(const POVM& p);
nlohmann::ordered_json to_json(const Instrument& j);
POVM povm_from_json(const nlohmann::json& j);

}  // namespace tomo
}  // namespace qproc
