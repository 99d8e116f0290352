#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qproc/qla.hpp"

namespace qproc {

enum class Rep { Kraus, Choi, SuperOp };

// One representation is stored; the others are derived on demand.
struct Channel {
    int d_in = 0;
    int d_out = 0;
    Rep rep = Rep::Choi;
    std::vector<Mat> kraus;
    Mat choi;     // (out x in)
    Mat superop;  // d_out^2 x d_in^2, row-major vec

    static Channel from_kraus(std::vector<Mat> ks);
    static Channel from_choi(Mat choi, int d_in, int d_out);
    static Channel from_superop(Mat s, int d_in, int d_out);
};

namespace channels {

Vec vectorize(const Mat& rho);
Mat devectorize(const Vec& v);

Mat choi_from_kraus(const std::vector<Mat>& ks);
// throws naming the most negative eigenvalue for NCP input
std::vector<Mat> kraus_from_choi(const Mat& choi, int d_in, int d_out);
Mat choi_from_superop(const Mat& s, int d_in, int d_out);
Mat superop_from_choi(const Mat& choi, int d_in, int d_out);

Mat choi(const Channel& c);
Mat superop(const Channel& c);
std::vector<Mat> kraus(const Channel& c);
Channel convert(const Channel& c, Rep target);

// Choi reordered to (in x out), the form used for operations inside testers
Mat choi_io(const Channel& c);

Mat apply(const Channel& c, const Mat& rho);
Channel compose(const Channel& c2, const Channel& c1);

struct CpReport {
    bool ok;
    double min_eig;
};
struct TpReport {
    bool ok;
    double residual;
};
CpReport is_cp(const Channel& c, double tol = kTauPsd);
TpReport is_tp(const Channel& c, double tol = 1e-9);

struct Dilation {
    Mat U;    // on system (x) environment
    int d_env;
};
Dilation dilate_to_unitary(const Channel& c);
// tr_E(U (rho (x) |0><0|) U^dag)
Mat apply_dilation(const Dilation& d, const Mat& rho, int d_in, int d_out);

// max deviation of apply() across the three representations on a full input basis
double rep_agreement(const Channel& c);

Channel identity(int d);
Channel unitary(const Mat& U);
Channel amplitude_damping(double p);
Channel depolarizing(double p0, double p1, double p2, double p3);
Channel dephasing(double gamma, double t);
Channel xz_oscillatory(double omega, double t);
Channel random_cptp(std::uint64_t seed, int d, int rank);
Channel random_cptp(Rng& rng, int d_in, int d_out, int rank);
Channel factory(const std::string& kind, const std::vector<double>& params, std::uint64_t seed = 0);

nlohmann::ordered_json to_json(const Channel& c);
Channel channel_from_json(const nlohmann::json& j);

}  // namespace channels
}  // namespace qproc
