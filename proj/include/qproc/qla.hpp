#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace qproc {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Dims = std::vector<int>;
using Rng = std::mt19937_64;

inline constexpr double kTauPsd = 1e-9;

int prod(const Dims& d);

// Matrix with tensor-factor bookkeeping. Square unless rows/cols dims differ.
struct CMatrix {
    Dims rows_dims;
    Dims cols_dims;
    Mat m;

    CMatrix() = default;
    CMatrix(Dims d, Mat mat);
    CMatrix(Dims rd, Dims cdims, Mat mat);

    bool square() const { return rows_dims == cols_dims; }
    const Dims& dims() const { return rows_dims; }
};

namespace qla {

CMatrix kron(const CMatrix& a, const CMatrix& b);
Mat kron(const Mat& a, const Mat& b);
Mat kron_all(const std::vector<Mat>& ms);

// keep: factor indices to keep, in any order; the result keeps them in original order
CMatrix partial_trace(const CMatrix& m, std::vector<int> keep);
Mat partial_trace(const Mat& m, const Dims& dims, std::vector<int> keep);

CMatrix partial_transpose(const CMatrix& m, const std::vector<int>& factors);
Mat partial_transpose(const Mat& m, const Dims& dims, const std::vector<int>& factors);

// new factor q is old factor perm[q]
Mat permute(const Mat& m, const Dims& dims, const std::vector<int>& perm);
CMatrix permute(const CMatrix& m, const std::vector<int>& perm);

// Operator-Schmidt realignment across the cut after the first `na` factors
Mat realign(const Mat& m, const Dims& dims, int na);

struct Eig {
    RVec vals;  // descending
    Mat vecs;
};
Eig herm_eig(const Mat& m);
double min_eig(const Mat& m);
bool is_hermitian(const Mat& m, double tol = kTauPsd);
bool is_psd(const Mat& m, double tol = kTauPsd);

// clamps eigenvalues within tau_psd of zero
RVec clamped_spectrum(const Mat& rho);

double vn_entropy(const Mat& rho);
// returns +inf on support violation
double q_rel_entropy(const Mat& rho, const Mat& sigma);
double q_mutual_info(const CMatrix& rho, const std::vector<int>& part_a);
double trace_norm(const Mat& m);
double schatten_norm(const Mat& m, double p);
double trace_distance(const Mat& rho, const Mat& sigma);

Mat max_entangled(int d);
Mat ket_bra(int d, int i, int j);
Mat psd_sqrt(const Mat& m);
Mat psd_inv_sqrt(const Mat& m, double tol = 1e-12);

Mat pauli(int j);

Mat random_unitary(Rng& rng, int d);
Mat random_density(Rng& rng, int d, int rank = -1);
Mat random_ginibre(Rng& rng, int rows, int cols);

nlohmann::ordered_json to_json(const CMatrix& m);
CMatrix cmatrix_from_json(const nlohmann::json& j);

}  // namespace qla
}  // namespace qproc
