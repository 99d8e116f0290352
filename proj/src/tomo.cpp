#include "qproc/tomo.hpp"

#include <cmath>

namespace qproc::tomo {

using namespace qla;

std::vector<Mat> dual_set(const std::vector<Mat>& basis) {
    const int n = static_cast<int>(basis.size());
    if (n == 0) throw std::invalid_argument("dual_set: empty basis");
    Mat g(n, n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) g(l, k) = (basis[l].adjoint() * basis[k]).trace();
    Eigen::JacobiSVD<Mat> svd(g);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= 0 || sv(0) / sv(n - 1) > 1e12)
        throw std::domain_error("dual_set: basis is linearly dependent (Gram matrix singular)");
    // D_j = sum_k C_jk B_k with conj(C) G = I
    Mat c = g.partialPivLu().solve(Mat::Identity(n, n)).conjugate();
    std::vector<Mat> duals;
    for (int j = 0; j < n; ++j) {
        Mat d = Mat::Zero(basis[0].rows(), basis[0].cols());
        for (int k = 0; k < n; ++k) d += c(j, k) * basis[k];
        duals.push_back(d);
    }
    return duals;
}

double duality_residual(const std::vector<Mat>& basis, const std::vector<Mat>& duals) {
    double worst = 0;
    for (std::size_t j = 0; j < duals.size(); ++j)
        for (std::size_t k = 0; k < basis.size(); ++k) {
            cd v = (duals[j].adjoint() * basis[k]).trace();
            worst = std::max(worst, std::abs(v - (j == k ? 1.0 : 0.0)));
        }
    return worst;
}

bool is_valid_povm(const POVM& p, double tol) {
    if (p.elements.empty()) return false;
    const auto d = p.elements[0].rows();
    Mat s = Mat::Zero(d, d);
    for (const auto& e : p.elements) {
        if (!is_psd(e, tol)) return false;
        s += e;
    }
    return (s - Mat::Identity(d, d)).cwiseAbs().maxCoeff() <= tol;
}

bool is_valid_instrument(const Instrument& j, double tol) {
    if (j.elements.empty()) return false;
    const int d = j.elements[0].d_in, dout = j.elements[0].d_out;
    Mat s = Mat::Zero(d * dout, d * dout);
    for (const auto& a : j.elements) {
        if (!channels::is_cp(a, tol).ok) return false;
        s += channels::choi(a);
    }
    return channels::is_tp(Channel::from_choi(s, d, dout), tol).ok;
}

POVM sic_povm_qubit() {
    const double r = 1.0 / std::sqrt(3.0);
    const cd w = std::exp(cd(0, 2 * M_PI / 3));
    const double a = std::sqrt(2.0 / 3.0);
    std::vector<Vec> kets(4, Vec(2));
    kets[0] << 1, 0;
    kets[1] << r, a;
    kets[2] << r, a * w;
    kets[3] << r, a * w * w;
    POVM p;
    for (const auto& k : kets) p.elements.push_back(0.5 * k * k.adjoint());
    return p;
}

POVM ic_povm_from_positive_basis(const std::vector<Mat>& fs) {
    if (fs.empty()) throw std::invalid_argument("ic_povm_from_positive_basis: empty input");
    for (const auto& f : fs)
        if (!is_psd(f)) throw std::invalid_argument("ic_povm_from_positive_basis: element not positive");
    Mat s = Mat::Zero(fs[0].rows(), fs[0].cols());
    for (const auto& f : fs) s += f;
    // pseudo-inverse square root covers a singular sum
    Mat w = psd_inv_sqrt(s);
    POVM p;
    for (const auto& f : fs) p.elements.push_back(w * f * w);
    return p;
}

POVM random_ic_povm(Rng& rng, int d) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Mat> fs;
        Mat s = Mat::Zero(d, d);
        for (int k = 0; k < d * d - 1; ++k) {
            Mat g = random_ginibre(rng, d, 1);
            fs.push_back(g * g.adjoint());
            s += fs.back();
        }
        double alpha = 1.0 / herm_eig(s).vals(0);
        POVM p;
        for (auto& f : fs) p.elements.push_back(alpha * f);
        p.elements.push_back(Mat::Identity(d, d) - alpha * s);
        try {
            dual_set(p.elements);
            return p;
        } catch (const std::domain_error&) {
        }
    }
    throw std::runtime_error("random_ic_povm: no informationally complete draw");
}

double born_prob(const Mat& rho, const Mat& e) {
    if (rho.rows() != e.rows()) throw std::invalid_argument("born_prob: dim mismatch");
    return (rho * e).trace().real();
}

std::vector<double> born_probs(const Mat& rho, const POVM& p) {
    std::vector<double> out;
    for (const auto& e : p.elements) out.push_back(born_prob(rho, e));
    return out;
}

Mat state_tomography(const std::vector<double>& probs, const POVM& p) {
    const int d = static_cast<int>(p.elements.at(0).rows());
    if (static_cast<int>(p.elements.size()) != d * d)
        throw std::invalid_argument("state_tomography: POVM must have d^2 elements");
    if (probs.size() != p.elements.size()) throw std::invalid_argument("state_tomography: probability count");
    double s = 0;
    for (double x : probs) {
        if (x < -1e-6) throw std::invalid_argument("state_tomography: negative probability");
        s += x;
    }
    if (std::abs(s - 1) > 1e-6) throw std::invalid_argument("state_tomography: probabilities must sum to 1");
    auto duals = dual_set(p.elements);
    Mat rho = Mat::Zero(d, d);
    for (std::size_t k = 0; k < probs.size(); ++k) rho += probs[k] * duals[k].adjoint();
    return rho;
}

Channel channel_tomography(const std::vector<Mat>& inputs, const std::vector<Mat>& outputs) {
    if (inputs.size() != outputs.size() || inputs.empty())
        throw std::invalid_argument("channel_tomography: input/output count mismatch");
    const int di = static_cast<int>(inputs[0].rows()), dout = static_cast<int>(outputs[0].rows());
    if (static_cast<int>(inputs.size()) != di * di) throw std::invalid_argument("channel_tomography: basis is not IC");
    auto duals = dual_set(inputs);
    Mat y = Mat::Zero(di * dout, di * dout);
    for (std::size_t j = 0; j < inputs.size(); ++j) y += kron(outputs[j], Mat(duals[j].conjugate()));
    return Channel::from_choi(y, di, dout);
}

POVM instrument_to_povm(const Instrument& j) {
    POVM p;
    for (const auto& a : j.elements) {
        // E = tr_o(A^T) with A in (out x in) order
        Mat t = channels::choi(a).transpose();
        p.elements.push_back(partial_trace(t, {a.d_out, a.d_in}, {1}));
    }
    return p;
}

Instrument projective_instrument(const std::vector<Mat>& projectors) {
    Instrument j;
    for (const auto& p : projectors) j.elements.push_back(Channel::from_kraus({p}));
    return j;
}

std::vector<Mat> pauli_state_basis() {
    auto proj = [](int axis, int sign) { return Mat(0.5 * (Mat::Identity(2, 2) + double(sign) * pauli(axis))); };
    return {proj(1, 1), proj(1, -1), proj(2, 1), proj(3, 1)};
}

nlohmann::ordered_json to_json(const POVM& p) {
    nlohmann::ordered_json j;
    j["kind"] = "povm";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : p.elements) arr.push_back(qla::to_json(CMatrix({static_cast<int>(e.rows())}, e)));
    j["elements"] = arr;
    return j;
}

nlohmann::ordered_json to_json(const Instrument& in) {
    nlohmann::ordered_json j;
    j["kind"] = "instrument";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& a : in.elements) arr.push_back(qla::to_json(CMatrix({a.d_out, a.d_in}, channels::choi(a))));
    j["elements"] = arr;
    return j;
}

POVM povm_from_json(const nlohmann::json& j) {
    if (j.at("kind").get<std::string>() != "povm") throw std::invalid_argument("povm json: kind is not povm");
    POVM p;
    for (const auto& e : j.at("elements")) p.elements.push_back(cmatrix_from_json(e).m);
    return p;
}

}  // namespace qproc::tomo
