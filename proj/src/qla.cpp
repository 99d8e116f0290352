#include "qproc/qla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qproc {

int prod(const Dims& d) {
    int p = 1;
    for (int x : d) p *= x;
    return p;
}

CMatrix::CMatrix(Dims d, Mat mat) : rows_dims(d), cols_dims(std::move(d)), m(std::move(mat)) {
    if (m.rows() != prod(rows_dims) || m.cols() != prod(cols_dims))
        throw std::invalid_argument("CMatrix: entry count does not match dims");
}

CMatrix::CMatrix(Dims rd, Dims cdims, Mat mat)
    : rows_dims(std::move(rd)), cols_dims(std::move(cdims)), m(std::move(mat)) {
    if (m.rows() != prod(rows_dims) || m.cols() != prod(cols_dims))
        throw std::invalid_argument("CMatrix: entry count does not match dims");
}

namespace qla {

namespace {

std::vector<int> strides(const Dims& dims) {
    std::vector<int> s(dims.size(), 1);
    for (int q = static_cast<int>(dims.size()) - 2; q >= 0; --q) s[q] = s[q + 1] * dims[q + 1];
    return s;
}

// offsets of all joint values of `factors` (first listed is slowest)
std::vector<int> offsets(const Dims& dims, const std::vector<int>& factors) {
    auto st = strides(dims);
    std::vector<int> out{0};
    for (int f : factors) {
        std::vector<int> nxt;
        nxt.reserve(out.size() * dims[f]);
        for (int o : out)
            for (int v = 0; v < dims[f]; ++v) nxt.push_back(o + v * st[f]);
        out.swap(nxt);
    }
    return out;
}

void check_factors(const Dims& dims, const std::vector<int>& fs) {
    for (int f : fs)
        if (f < 0 || f >= static_cast<int>(dims.size()))
            throw std::out_of_range("factor index out of range");
}

std::vector<int> complement(int n, const std::vector<int>& fs) {
    std::vector<int> c;
    for (int q = 0; q < n; ++q)
        if (std::find(fs.begin(), fs.end(), q) == fs.end()) c.push_back(q);
    return c;
}

}  // namespace

Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    Dims rd = a.rows_dims, cdims = a.cols_dims;
    rd.insert(rd.end(), b.rows_dims.begin(), b.rows_dims.end());
    cdims.insert(cdims.end(), b.cols_dims.begin(), b.cols_dims.end());
    return CMatrix(rd, cdims, kron(a.m, b.m));
}

Mat kron_all(const std::vector<Mat>& ms) {
    Mat r = Mat::Identity(1, 1);
    for (const auto& m : ms) r = kron(r, m);
    return r;
}

Mat partial_trace(const Mat& m, const Dims& dims, std::vector<int> keep) {
    check_factors(dims, keep);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    auto tr = complement(static_cast<int>(dims.size()), keep);
    auto ok = offsets(dims, keep);
    auto ot = offsets(dims, tr);
    const int n = static_cast<int>(ok.size());
    Mat r = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cd s = 0;
            for (int t : ot) s += m(ok[a] + t, ok[b] + t);
            r(a, b) = s;
        }
    return r;
}

CMatrix partial_trace(const CMatrix& m, std::vector<int> keep) {
    if (!m.square()) throw std::invalid_argument("partial_trace: rectangular matrix");
    check_factors(m.rows_dims, keep);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    Dims nd;
    for (int k : keep) nd.push_back(m.rows_dims[k]);
    return CMatrix(nd, partial_trace(m.m, m.rows_dims, keep));
}

Mat partial_transpose(const Mat& m, const Dims& dims, const std::vector<int>& factors) {
    check_factors(dims, factors);
    auto rest = complement(static_cast<int>(dims.size()), factors);
    auto oc = offsets(dims, rest);
    auto os = offsets(dims, factors);
    Mat r(m.rows(), m.cols());
    for (int c1 : oc)
        for (int c2 : oc)
            for (int s1 : os)
                for (int s2 : os) r(c1 + s2, c2 + s1) = m(c1 + s1, c2 + s2);
    return r;
}

CMatrix partial_transpose(const CMatrix& m, const std::vector<int>& factors) {
    if (!m.square()) throw std::invalid_argument("partial_transpose: rectangular matrix");
    return CMatrix(m.rows_dims, partial_transpose(m.m, m.rows_dims, factors));
}

Mat permute(const Mat& m, const Dims& dims, const std::vector<int>& perm) {
    if (perm.size() != dims.size()) throw std::invalid_argument("permute: bad permutation");
    check_factors(dims, perm);
    auto map = offsets(dims, perm);
    const int n = static_cast<int>(map.size());
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = m(map[i], map[j]);
    return r;
}

CMatrix permute(const CMatrix& m, const std::vector<int>& perm) {
    if (!m.square()) throw std::invalid_argument("permute: rectangular matrix");
    Dims nd;
    for (int p : perm) nd.push_back(m.rows_dims[p]);
    return CMatrix(nd, permute(m.m, m.rows_dims, perm));
}

Mat realign(const Mat& m, const Dims& dims, int na) {
    int da = 1, db = 1;
    for (int q = 0; q < static_cast<int>(dims.size()); ++q) (q < na ? da : db) *= dims[q];
    Mat r(da * da, db * db);
    for (int a = 0; a < da; ++a)
        for (int a2 = 0; a2 < da; ++a2)
            for (int b = 0; b < db; ++b)
                for (int b2 = 0; b2 < db; ++b2) r(a * da + a2, b * db + b2) = m(a * db + b, a2 * db + b2);
    return r;
}

bool is_hermitian(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

Eig herm_eig(const Mat& m) {
    if (!is_hermitian(m)) throw std::invalid_argument("herm_eig: matrix is not Hermitian");
    Mat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::Index n = h.rows();
    Eig e{RVec(n), Mat(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        e.vals(k) = es.eigenvalues()(n - 1 - k);
        e.vecs.col(k) = es.eigenvectors().col(n - 1 - k);
    }
    return e;
}

double min_eig(const Mat& m) {
    Mat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool is_psd(const Mat& m, double tol) {
    if (!is_hermitian(m, tol)) return false;
    Mat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    double lmax = std::max(std::abs(es.eigenvalues().maxCoeff()), 1e-300);
    return es.eigenvalues()(0) >= -tol * std::max(lmax, 1.0);
}

RVec clamped_spectrum(const Mat& rho) {
    RVec v = herm_eig(rho).vals;
    double lmax = v.size() ? v(0) : 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (v(k) < kTauPsd * lmax) {
            if (v(k) < -kTauPsd * std::max(lmax, 1.0))
                throw std::invalid_argument("vn_entropy: matrix is not positive semidefinite");
            v(k) = 0.0;
        }
    return v;
}

double vn_entropy(const Mat& rho) {
    RVec v = clamped_spectrum(rho);
    double s = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (v(k) > 0) s -= v(k) * std::log(v(k));
    return s;
}

double q_rel_entropy(const Mat& rho, const Mat& sigma) {
    if (rho.rows() != sigma.rows()) throw std::invalid_argument("q_rel_entropy: dim mismatch");
    double a = -vn_entropy(rho);
    Eig es = herm_eig(sigma);
    double smax = es.vals(0);
    double rmax = herm_eig(rho).vals(0);
    double b = 0.0;
    for (Eigen::Index j = 0; j < es.vals.size(); ++j) {
        double w = (es.vecs.col(j).adjoint() * rho * es.vecs.col(j))(0, 0).real();
        if (es.vals(j) <= kTauPsd * smax) {
            if (w > kTauPsd * std::max(rmax, 1.0)) return std::numeric_limits<double>::infinity();
            continue;
        }
        b += w * std::log(es.vals(j));
    }
    return a - b;
}

double q_mutual_info(const CMatrix& rho, const std::vector<int>& part_a) {
    const int n = static_cast<int>(rho.rows_dims.size());
    check_factors(rho.rows_dims, part_a);
    auto part_b = complement(n, part_a);
    if (part_a.empty() || part_b.empty()) throw std::invalid_argument("q_mutual_info: bad partition");
    Mat r = rho.m / rho.m.trace();
    return vn_entropy(partial_trace(r, rho.rows_dims, part_a)) +
           vn_entropy(partial_trace(r, rho.rows_dims, part_b)) - vn_entropy(r);
}

double trace_norm(const Mat& m) {
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues().sum();
}

double schatten_norm(const Mat& m, double p) {
    Eigen::BDCSVD<Mat> svd(m);
    double s = 0.0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) s += std::pow(svd.singularValues()(k), p);
    return std::pow(s, 1.0 / p);
}

double trace_distance(const Mat& rho, const Mat& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw std::invalid_argument("trace_distance: dim mismatch");
    return 0.5 * trace_norm(rho - sigma);
}

Mat max_entangled(int d) {
    if (d < 2) throw std::invalid_argument("max_entangled: d < 2");
    Mat r = Mat::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) r(a * d + a, b * d + b) = 1.0;
    return r;
}

Mat ket_bra(int d, int i, int j) {
    Mat r = Mat::Zero(d, d);
    r(i, j) = 1.0;
    return r;
}

Mat psd_sqrt(const Mat& m) {
    Eig e = herm_eig(m);
    RVec s = e.vals.cwiseMax(0.0).cwiseSqrt();
    return e.vecs * s.cast<cd>().asDiagonal() * e.vecs.adjoint();
}

Mat psd_inv_sqrt(const Mat& m, double tol) {
    Eig e = herm_eig(m);
    double lmax = e.vals(0);
    Vec s(e.vals.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        s(k) = e.vals(k) > tol * lmax ? 1.0 / std::sqrt(e.vals(k)) : 0.0;
    return e.vecs * s.asDiagonal() * e.vecs.adjoint();
}

Mat pauli(int j) {
    Mat p(2, 2);
    switch (j) {
        case 0: p << 1, 0, 0, 1; break;
        case 1: p << 0, 1, 1, 0; break;
        case 2: p << 0, cd(0, -1), cd(0, 1), 0; break;
        case 3: p << 1, 0, 0, -1; break;
        default: throw std::out_of_range("pauli index");
    }
    return p;
}

Mat random_ginibre(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double re = n(rng);
            double im = n(rng);
            g(i, j) = cd(re, im);
        }
    return g;
}

Mat random_unitary(Rng& rng, int d) {
    Mat g = random_ginibre(rng, d, d);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        cd ph = r(k, k) / std::abs(r(k, k));
        q.col(k) *= ph;
    }
    return q;
}

Mat random_density(Rng& rng, int d, int rank) {
    if (rank <= 0) rank = d;
    Mat g = random_ginibre(rng, d, rank);
    Mat r = g * g.adjoint();
    return r / r.trace();
}

nlohmann::ordered_json to_json(const CMatrix& m) {
    nlohmann::ordered_json j;
    j["rows_dims"] = m.rows_dims;
    j["cols_dims"] = m.cols_dims;
    std::vector<double> re, im;
    re.reserve(m.m.size());
    im.reserve(m.m.size());
    for (Eigen::Index r = 0; r < m.m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.m.cols(); ++c) {
            re.push_back(m.m(r, c).real());
            im.push_back(m.m(r, c).imag());
        }
    j["re"] = re;
    j["im"] = im;
    return j;
}

CMatrix cmatrix_from_json(const nlohmann::json& j) {
    Dims rd = j.at("rows_dims").get<Dims>();
    Dims cdims = j.at("cols_dims").get<Dims>();
    auto re = j.at("re").get<std::vector<double>>();
    auto im = j.contains("im") ? j.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
    const int nr = prod(rd), nc = prod(cdims);
    if (static_cast<int>(re.size()) != nr * nc || im.size() != re.size())
        throw std::invalid_argument("CMatrix json: entry count mismatch");
    Mat m(nr, nc);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c) m(r, c) = cd(re[r * nc + c], im[r * nc + c]);
    return CMatrix(rd, cdims, m);
}

}  // namespace qla
}  // namespace qproc
