#include "qproc/channels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qproc {

using namespace qla;

Channel Channel::from_kraus(std::vector<Mat> ks) {
    if (ks.empty()) throw std::invalid_argument("Channel: empty Kraus list");
    Channel c;
    c.d_out = static_cast<int>(ks[0].rows());
    c.d_in = static_cast<int>(ks[0].cols());
    for (const auto& k : ks)
        if (k.rows() != c.d_out || k.cols() != c.d_in) throw std::invalid_argument("Channel: Kraus dims differ");
    c.rep = Rep::Kraus;
    c.kraus = std::move(ks);
    return c;
}

Channel Channel::from_choi(Mat choi, int d_in, int d_out) {
    if (choi.rows() != d_in * d_out || choi.cols() != d_in * d_out)
        throw std::invalid_argument("Channel: Choi size mismatch");
    Channel c;
    c.d_in = d_in;
    c.d_out = d_out;
    c.rep = Rep::Choi;
    c.choi = std::move(choi);
    return c;
}

Channel Channel::from_superop(Mat s, int d_in, int d_out) {
    if (s.rows() != d_out * d_out || s.cols() != d_in * d_in)
        throw std::invalid_argument("Channel: superoperator size mismatch");
    Channel c;
    c.d_in = d_in;
    c.d_out = d_out;
    c.rep = Rep::SuperOp;
    c.superop = std::move(s);
    return c;
}

namespace channels {

Vec vectorize(const Mat& rho) {
    Vec v(rho.size());
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.cols(); ++c) v(r * rho.cols() + c) = rho(r, c);
    return v;
}

Mat devectorize(const Vec& v) {
    auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw std::invalid_argument("devectorize: length is not a square");
    Mat m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = v(r * d + c);
    return m;
}

Mat choi_from_kraus(const std::vector<Mat>& ks) {
    const Eigen::Index n = ks.at(0).size();
    Mat r = Mat::Zero(n, n);
    for (const auto& k : ks) {
        Vec v = vectorize(k);
        r += v * v.adjoint();
    }
    return r;
}

std::vector<Mat> kraus_from_choi(const Mat& choi, int d_in, int d_out) {
    Eig e = herm_eig(choi);
    double lmax = std::max(e.vals(0), 0.0);
    double lmin = e.vals(e.vals.size() - 1);
    if (lmin < -kTauPsd * std::max(lmax, 1.0)) {
        std::ostringstream os;
        os << "kraus_from_choi: map is not CP, most negative Choi eigenvalue " << lmin;
        throw std::domain_error(os.str());
    }
    std::vector<Mat> ks;
    for (Eigen::Index k = 0; k < e.vals.size(); ++k) {
        if (e.vals(k) < 1e-9 * lmax || e.vals(k) <= 0) break;
        Vec v = std::sqrt(e.vals(k)) * e.vecs.col(k);
        Mat K(d_out, d_in);
        for (int a = 0; a < d_out; ++a)
            for (int c = 0; c < d_in; ++c) K(a, c) = v(a * d_in + c);
        ks.push_back(K);
    }
    if (ks.empty()) ks.push_back(Mat::Zero(d_out, d_in));
    return ks;
}

// Choi[(a,c),(b,d)] = S[(a,b),(c,d)]; the reshuffle is its own inverse up to index roles
Mat choi_from_superop(const Mat& s, int d_in, int d_out) {
    Mat r(d_out * d_in, d_out * d_in);
    for (int a = 0; a < d_out; ++a)
        for (int b = 0; b < d_out; ++b)
            for (int c = 0; c < d_in; ++c)
                for (int d = 0; d < d_in; ++d) r(a * d_in + c, b * d_in + d) = s(a * d_out + b, c * d_in + d);
    return r;
}

Mat superop_from_choi(const Mat& choi, int d_in, int d_out) {
    Mat s(d_out * d_out, d_in * d_in);
    for (int a = 0; a < d_out; ++a)
        for (int b = 0; b < d_out; ++b)
            for (int c = 0; c < d_in; ++c)
                for (int d = 0; d < d_in; ++d) s(a * d_out + b, c * d_in + d) = choi(a * d_in + c, b * d_in + d);
    return s;
}

Mat choi(const Channel& c) {
    switch (c.rep) {
        case Rep::Choi: return c.choi;
        case Rep::Kraus: return choi_from_kraus(c.kraus);
        case Rep::SuperOp: return choi_from_superop(c.superop, c.d_in, c.d_out);
    }
    return {};
}

Mat superop(const Channel& c) {
    switch (c.rep) {
        case Rep::SuperOp: return c.superop;
        case Rep::Kraus: {
            Mat s = Mat::Zero(c.d_out * c.d_out, c.d_in * c.d_in);
            for (const auto& k : c.kraus) s += kron(k, Mat(k.conjugate()));
            return s;
        }
        case Rep::Choi: return superop_from_choi(c.choi, c.d_in, c.d_out);
    }
    return {};
}

std::vector<Mat> kraus(const Channel& c) {
    if (c.rep == Rep::Kraus) return c.kraus;
    return kraus_from_choi(choi(c), c.d_in, c.d_out);
}

Channel convert(const Channel& c, Rep target) {
    switch (target) {
        case Rep::Kraus: return Channel::from_kraus(kraus(c));
        case Rep::Choi: return Channel::from_choi(choi(c), c.d_in, c.d_out);
        case Rep::SuperOp: return Channel::from_superop(superop(c), c.d_in, c.d_out);
    }
    return c;
}

Mat choi_io(const Channel& c) { return permute(choi(c), {c.d_out, c.d_in}, {1, 0}); }

Mat apply(const Channel& c, const Mat& rho) {
    if (rho.rows() != c.d_in || rho.cols() != c.d_in) throw std::invalid_argument("apply: dim mismatch");
    switch (c.rep) {
        case Rep::Kraus: {
            Mat out = Mat::Zero(c.d_out, c.d_out);
            for (const auto& k : c.kraus) out += k * rho * k.adjoint();
            return out;
        }
        case Rep::SuperOp: return devectorize(c.superop * vectorize(rho));
        case Rep::Choi: {
            Mat out = Mat::Zero(c.d_out, c.d_out);
            for (int a = 0; a < c.d_out; ++a)
                for (int b = 0; b < c.d_out; ++b) {
                    cd s = 0;
                    for (int i = 0; i < c.d_in; ++i)
                        for (int j = 0; j < c.d_in; ++j) s += c.choi(a * c.d_in + i, b * c.d_in + j) * rho(i, j);
                    out(a, b) = s;
                }
            return out;
        }
    }
    return {};
}

Channel compose(const Channel& c2, const Channel& c1) {
    if (c1.d_out != c2.d_in) throw std::invalid_argument("compose: dim mismatch");
    return Channel::from_superop(superop(c2) * superop(c1), c1.d_in, c2.d_out);
}

CpReport is_cp(const Channel& c, double tol) {
    Mat y = choi(c);
    if (!is_hermitian(y, tol)) return {false, -std::numeric_limits<double>::infinity()};
    Eig e = herm_eig(y);
    double lmin = e.vals(e.vals.size() - 1);
    return {lmin >= -tol * std::max(e.vals(0), 1.0), lmin};
}

TpReport is_tp(const Channel& c, double tol) {
    Mat r = partial_trace(choi(c), {c.d_out, c.d_in}, {1});
    double res = (r - Mat::Identity(c.d_in, c.d_in)).cwiseAbs().maxCoeff();
    return {res <= tol, res};
}

Dilation dilate_to_unitary(const Channel& c) {
    if (c.d_in != c.d_out) throw std::invalid_argument("dilate_to_unitary: d_in != d_out");
    if (!is_tp(c).ok) throw std::invalid_argument("dilate_to_unitary: channel is not trace preserving");
    auto ks = kraus(c);
    const int d = c.d_in, r = static_cast<int>(ks.size()), n = d * r;
    Mat U = Mat::Zero(n, n);
    std::vector<bool> filled(n, false);
    std::vector<Vec> basis;
    for (int col = 0; col < d; ++col) {
        Vec v = Vec::Zero(n);
        for (int j = 0; j < r; ++j)
            for (int a = 0; a < d; ++a) v(a * r + j) = ks[j](a, col);
        U.col(col * r) = v;
        filled[col * r] = true;
        basis.push_back(v);
    }
    int next = 0;
    for (int pos = 0; pos < n; ++pos) {
        if (filled[pos]) continue;
        for (; next < n; ++next) {
            Vec v = Vec::Zero(n);
            v(next) = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : basis) v -= b.dot(v) * b;
            double nv = v.norm();
            if (nv > 1e-10) {
                v /= nv;
                U.col(pos) = v;
                basis.push_back(v);
                ++next;
                break;
            }
        }
    }
    return {U, r};
}

Mat apply_dilation(const Dilation& dl, const Mat& rho, int d_in, int d_out) {
    if (d_in != d_out || rho.rows() != d_in) throw std::invalid_argument("apply_dilation: dim mismatch");
    Mat e0 = Mat::Zero(dl.d_env, dl.d_env);
    e0(0, 0) = 1.0;
    Mat big = dl.U * kron(rho, e0) * dl.U.adjoint();
    return partial_trace(big, {d_out, dl.d_env}, {0});
}

double rep_agreement(const Channel& c) {
    Channel ch = convert(c, Rep::Choi);
    Channel so = convert(c, Rep::SuperOp);
    bool cp = is_cp(c).ok;
    Channel kr = cp ? convert(c, Rep::Kraus) : ch;
    double worst = 0.0;
    for (int i = 0; i < c.d_in; ++i)
        for (int j = 0; j < c.d_in; ++j) {
            Mat e = ket_bra(c.d_in, i, j);
            Mat a = channels::apply(ch, e), b = channels::apply(so, e), k = channels::apply(kr, e);
            worst = std::max({worst, (a - b).cwiseAbs().maxCoeff(), (a - k).cwiseAbs().maxCoeff()});
        }
    return worst;
}

Channel identity(int d) { return Channel::from_kraus({Mat::Identity(d, d)}); }

Channel unitary(const Mat& U) {
    if ((U * U.adjoint() - Mat::Identity(U.rows(), U.rows())).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("unitary: matrix is not unitary");
    return Channel::from_kraus({U});
}

Channel amplitude_damping(double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("amplitude_damping: p outside [0,1]");
    Mat k0 = Mat::Zero(2, 2), k1 = Mat::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(p);
    k1(0, 1) = std::sqrt(1 - p);
    return Channel::from_kraus({k0, k1});
}

Channel depolarizing(double p0, double p1, double p2, double p3) {
    double ps[4] = {p0, p1, p2, p3};
    double s = 0;
    for (double p : ps) {
        if (p < 0 || p > 1) throw std::invalid_argument("depolarizing: probability outside [0,1]");
        s += p;
    }
    if (std::abs(s - 1) > 1e-12) throw std::invalid_argument("depolarizing: probabilities must sum to 1");
    std::vector<Mat> ks;
    for (int j = 0; j < 4; ++j)
        if (ps[j] > 0) ks.push_back(std::sqrt(ps[j]) * pauli(j));
    return Channel::from_kraus(ks);
}

Channel dephasing(double gamma, double t) {
    if (gamma * t < 0) throw std::invalid_argument("dephasing: negative gamma t");
    Mat s = Mat::Identity(4, 4);
    s(1, 1) = std::exp(-gamma * t);
    s(2, 2) = std::exp(-gamma * t);
    return Channel::from_superop(s, 2, 2);
}

Channel xz_oscillatory(double omega, double t) {
    double c = std::cos(2 * omega * t), c2 = c * c;
    Mat y = Mat::Zero(4, 4);
    y(0, 0) = y(3, 3) = 0.5 * (1 + c2);
    y(1, 1) = y(2, 2) = 0.5 * (1 - c2);
    y(0, 3) = y(3, 0) = c2;
    return Channel::from_choi(y, 2, 2);
}

Channel random_cptp(Rng& rng, int d_in, int d_out, int rank) {
    if (rank < 1) throw std::invalid_argument("random_cptp: rank < 1");
    Mat g = random_ginibre(rng, d_out * rank, d_in);
    Mat v = g * psd_inv_sqrt(g.adjoint() * g);
    std::vector<Mat> ks;
    for (int j = 0; j < rank; ++j) ks.push_back(v.block(j * d_out, 0, d_out, d_in));
    return Channel::from_kraus(ks);
}

Channel random_cptp(std::uint64_t seed, int d, int rank) {
    Rng rng(seed);
    return random_cptp(rng, d, d, rank);
}

Channel factory(const std::string& kind, const std::vector<double>& p, std::uint64_t seed) {
    auto need = [&](std::size_t n) {
        if (p.size() != n) throw std::invalid_argument("factory: " + kind + " expects " + std::to_string(n) + " params");
    };
    if (kind == "identity") {
        need(1);
        return identity(static_cast<int>(p[0]));
    }
    if (kind == "amplitude_damping") {
        need(1);
        return amplitude_damping(p[0]);
    }
    if (kind == "depolarizing") {
        need(4);
        return depolarizing(p[0], p[1], p[2], p[3]);
    }
    if (kind == "dephasing") {
        need(2);
        return dephasing(p[0], p[1]);
    }
    if (kind == "xz_oscillatory") {
        need(2);
        return xz_oscillatory(p[0], p[1]);
    }
    if (kind == "random_cptp") {
        need(2);
        return random_cptp(seed, static_cast<int>(p[0]), static_cast<int>(p[1]));
    }
    throw std::invalid_argument("factory: unknown kind " + kind);
}

nlohmann::ordered_json to_json(const Channel& c) {
    nlohmann::ordered_json j;
    j["d_in"] = c.d_in;
    j["d_out"] = c.d_out;
    switch (c.rep) {
        case Rep::Choi:
            j["rep"] = "choi";
            j["choi"] = qla::to_json(CMatrix({c.d_out, c.d_in}, c.choi));
            break;
        case Rep::SuperOp:
            j["rep"] = "superop";
            j["superop"] = qla::to_json(CMatrix({c.d_out, c.d_out}, {c.d_in, c.d_in}, c.superop));
            break;
        case Rep::Kraus: {
            j["rep"] = "kraus";
            auto arr = nlohmann::ordered_json::array();
            for (const auto& k : c.kraus) arr.push_back(qla::to_json(CMatrix({c.d_out}, {c.d_in}, k)));
            j["kraus"] = arr;
            break;
        }
    }
    return j;
}

Channel channel_from_json(const nlohmann::json& j) {
    int di = j.at("d_in").get<int>(), dout = j.at("d_out").get<int>();
    std::string rep = j.at("rep").get<std::string>();
    if (rep == "choi") return Channel::from_choi(cmatrix_from_json(j.at("choi")).m, di, dout);
    if (rep == "superop") return Channel::from_superop(cmatrix_from_json(j.at("superop")).m, di, dout);
    if (rep == "kraus") {
        std::vector<Mat> ks;
        for (const auto& k : j.at("kraus")) ks.push_back(cmatrix_from_json(k).m);
        Channel c = Channel::from_kraus(ks);
        if (c.d_in != di || c.d_out != dout) throw std::invalid_argument("channel json: dims disagree with Kraus");
        return c;
    }
    throw std::invalid_argument("channel json: unknown rep " + rep);
}

}  // namespace channels
}  // namespace qproc
