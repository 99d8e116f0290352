#include "qproc/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace qproc::memory {

using namespace qla;

namespace {

// d^2 projectors spanning the operator space: |a>, (|a>+|b>)/sqrt2, (|a>+i|b>)/sqrt2
std::vector<Mat> spanning_states(int d) {
    std::vector<Mat> out;
    for (int a = 0; a < d; ++a) out.push_back(ket_bra(d, a, a));
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            Vec v = Vec::Zero(d), w = Vec::Zero(d);
            v(a) = w(a) = 1 / std::sqrt(2.0);
            v(b) = 1 / std::sqrt(2.0);
            w(b) = cd(0, 1) / std::sqrt(2.0);
            out.push_back(v * v.adjoint());
            out.push_back(w * w.adjoint());
        }
    return out;
}

Mat normalized(const Mat& m) { return m / m.trace(); }

double entropy_of(const Mat& rho, const Dims& d, const std::vector<int>& keep) {
    if (keep.empty()) return 0.0;
    return vn_entropy(partial_trace(rho, d, keep));
}

std::vector<int> merged(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
}

int dims_product(const std::vector<Slot>& s) {
    int p = 1;
    for (const auto& x : s) p *= x.d;
    return p;
}

}  // namespace

ProcessTensor closest_markov(const ProcessTensor& t) {
    const int n = static_cast<int>(t.slots.size());
    const double norm = t.output_dim_product();
    auto d = t.dims();
    // groups: {first slot}, then consecutive (o, i) pairs
    std::vector<std::vector<int>> groups{{0}};
    for (int q = 1; q + 1 < n; q += 2) groups.push_back({q, q + 1});
    if (n % 2 == 0) throw std::invalid_argument("closest_markov: slots must be 0i,(o,i)*");
    ProcessTensor r;
    r.slots = t.slots;
    r.choi = Mat::Identity(1, 1);
    for (const auto& g : groups) {
        double dout = 1;
        for (int q : g)
            if (t.slots[q].dir == 'o') dout *= t.slots[q].d;
        Mat marg = partial_trace(t.choi, d, g) * (dout / norm);
        r.choi = kron(r.choi, marg);
    }
    return r;
}

RelEntropy nonmarkov_rel_entropy(const ProcessTensor& t) {
    ProcessTensor m = closest_markov(t);
    RelEntropy r;
    r.nr = std::max(0.0, q_rel_entropy(normalized(t.choi), normalized(m.choi)));
    for (int n : {1, 10, 100}) r.p_confusion.push_back({n, std::exp(-n * r.nr)});
    return r;
}

double schatten_bound(const ProcessTensor& t, double p) {
    ProcessTensor m = closest_markov(t);
    return schatten_norm(normalized(t.choi) - normalized(m.choi), p);
}

CausalBreakReport causal_break_check(const ProcessTensor& t, double tol) {
    CausalBreakReport rep;
    auto ts = t.times();
    for (std::size_t jb = 0; jb + 1 < ts.size(); ++jb) {
        const int tb = ts[jb];
        std::vector<int> past;
        std::vector<std::vector<Mat>> choices;
        for (std::size_t j = 0; j <= jb; ++j) {
            auto sl = t.slots_of_time(ts[j]);
            int di = t.slots[sl[0]].d;
            auto eff = spanning_states(di);
            std::vector<Mat> els;
            if (j < jb) {
                int dout = t.slots[sl[1]].d;
                for (const auto& e : eff)
                    for (const auto& s : spanning_states(dout)) els.push_back(proc::measure_prepare_choi(e, s));
                past.insert(past.end(), sl.begin(), sl.end());
            } else {
                for (const auto& e : eff) els.push_back(proc::effect_choi(e));
                past.push_back(t.slot_index(tb, 'i'));
            }
            choices.push_back(els);
        }
        std::vector<Mat> elements{Mat::Identity(1, 1)};
        for (const auto& c : choices) {
            std::vector<Mat> nxt;
            for (const auto& a : elements)
                for (const auto& b : c) nxt.push_back(kron(a, b));
            elements.swap(nxt);
        }
        const double fut_norm = [&] {
            double p = 1;
            for (int q = 0; q < static_cast<int>(t.slots.size()); ++q)
                if (std::find(past.begin(), past.end(), q) == past.end() && t.slots[q].dir == 'o') p *= t.slots[q].d;
            return p;
        }();
        Mat ref;
        for (const auto& el : elements) {
            Mat fut = proc::contract(t.choi, t.dims(), past, el);
            double p = fut.trace().real() / fut_norm;
            ++rep.elements;
            if (p <= 1e-12) continue;
            fut /= p;
            if (ref.size() == 0) {
                ref = fut;
                continue;
            }
            double dev = (fut - ref).cwiseAbs().maxCoeff();
            if (dev > rep.max_deviation) {
                rep.max_deviation = dev;
                rep.worst_time = tb;
            }
        }
    }
    rep.independent = rep.max_deviation <= tol;
    return rep;
}

MarkovVerdict is_markov(const ProcessTensor& t, double tol) {
    ProcessTensor m = closest_markov(t);
    double dist = trace_norm(normalized(t.choi) - normalized(m.choi));
    auto cb = causal_break_check(t, tol);
    return {dist <= tol && cb.independent, dist, cb, m};
}

Split split_by_times(const ProcessTensor& t, const std::vector<int>& f, const std::vector<int>& m,
                     const std::vector<int>& h) {
    Split s;
    auto add = [&](const std::vector<int>& times, std::vector<int>& out) {
        for (int tm : times) {
            auto sl = t.slots_of_time(tm);
            if (sl.empty()) throw std::invalid_argument("split: unknown time " + std::to_string(tm));
            out.insert(out.end(), sl.begin(), sl.end());
        }
        std::sort(out.begin(), out.end());
    };
    add(f, s.F);
    add(m, s.M);
    add(h, s.H);
    return s;
}

static void validate_split(const ProcessTensor& t, const Split& s) {
    auto all = merged(merged(s.H, s.M), s.F);
    std::vector<int> uniq = all;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() != all.size()) throw std::invalid_argument("split: parts overlap");
    for (int q : all)
        if (q < 0 || q >= static_cast<int>(t.slots.size())) throw std::invalid_argument("split: slot out of range");
    auto contiguous = [](const std::vector<int>& v) {
        for (std::size_t k = 1; k < v.size(); ++k)
            if (v[k] != v[k - 1] + 1) return false;
        return true;
    };
    if (!contiguous(s.F) || !contiguous(s.M) || !contiguous(s.H) || s.F.empty() || s.H.empty())
        throw std::invalid_argument("split: parts must be non-empty (F,H) and contiguous");
    if (!s.M.empty() && (s.H.back() >= s.M.front() || s.M.back() >= s.F.front()))
        throw std::invalid_argument("split: order must be H < M < F");
}

double qcmi(const ProcessTensor& t, const Split& s) {
    validate_split(t, s);
    Mat rho = normalized(t.choi);
    auto d = t.dims();
    // the remaining slots are traced
    return entropy_of(rho, d, merged(s.F, s.M)) + entropy_of(rho, d, merged(s.H, s.M)) -
           entropy_of(rho, d, s.M) - entropy_of(rho, d, merged(merged(s.F, s.H), s.M));
}

int schmidt_rank(const Mat& m, const Dims& dims, int cut) {
    Mat r = realign(m, dims, cut);
    Eigen::BDCSVD<Mat> svd(r);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0) return 0;
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) >= 1e-9 * sv(0)) ++rank;
    return rank;
}

OrderTest markov_order_test(const ProcessTensor& t, const Split& s, const std::vector<Mat>& elements, double tol) {
    validate_split(t, s);
    auto d = t.dims();
    std::vector<int> fh = merged(s.H, s.F);
    // slots not in the split are traced out first
    auto keep = merged(fh, s.M);
    Mat y = partial_trace(t.choi, d, keep);
    Dims dk;
    for (int q : keep) dk.push_back(d[q]);
    std::vector<int> m_local;
    for (int q : s.M) m_local.push_back(static_cast<int>(std::find(keep.begin(), keep.end(), q) - keep.begin()));
    int dh = 1, df = 1;
    for (int q : s.H) dh *= d[q];
    for (int q : s.F) df *= d[q];
    OrderTest r{true, {}, {}, {}};
    for (const auto& a : elements) {
        Mat c = proc::contract(y, dk, m_local, a);
        double tr = c.trace().real();
        r.probability.push_back(tr);
        if (std::abs(tr) <= 1e-12) {
            r.mutual_info.push_back(0);
            r.schmidt_rank.push_back(0);
            continue;
        }
        double mi = q_mutual_info(CMatrix({dh, df}, c / tr), {0});
        int rank = schmidt_rank(c, {dh, df}, 1);
        r.mutual_info.push_back(mi);
        r.schmidt_rank.push_back(rank);
        if (mi >= tol || rank != 1) r.ok = false;
    }
    return r;
}

FiniteOrder build_finite_order(const std::vector<Mat>& futures, const std::vector<Mat>& duals,
                               const std::vector<Mat>& histories,
                               const std::vector<std::pair<Mat, Mat>>& complement,
                               const std::vector<Slot>& h_slots, const std::vector<Slot>& m_slots,
                               const std::vector<Slot>& f_slots) {
    if (futures.size() != duals.size() || futures.size() != histories.size())
        throw std::invalid_argument("build_finite_order: ingredient counts differ");
    const int dh = dims_product(h_slots), dm = dims_product(m_slots), df = dims_product(f_slots);
    Mat y = Mat::Zero(dh * dm * df, dh * dm * df);
    for (std::size_t x = 0; x < futures.size(); ++x) {
        if (histories[x].rows() != dh || duals[x].rows() != dm || futures[x].rows() != df)
            throw std::invalid_argument("build_finite_order: ingredient dims do not match slots");
        y += kron(kron(histories[x], Mat(duals[x].conjugate())), futures[x]);
    }
    for (const auto& [fh, dbar] : complement) {
        // fh is ordered (H,F)
        Mat term = kron(fh, Mat(dbar.conjugate()));
        y += permute(term, {dh, df, dm}, {0, 2, 1});
    }
    FiniteOrder r;
    r.tensor.slots = h_slots;
    r.tensor.slots.insert(r.tensor.slots.end(), m_slots.begin(), m_slots.end());
    r.tensor.slots.insert(r.tensor.slots.end(), f_slots.begin(), f_slots.end());
    r.tensor.choi = y;
    r.causality = proc::check_causality(r.tensor);
    return r;
}

double recovery_error(const ProcessTensor& t, const Split& s, const std::vector<Mat>& elements,
                      const std::vector<Mat>& duals) {
    validate_split(t, s);
    if (s.H.front() != 0 || s.F.back() != static_cast<int>(t.slots.size()) - 1)
        throw std::invalid_argument("recovery_error: split must cover every slot");
    auto d = t.dims();
    double d_fo = 1;
    for (int q : s.F)
        if (t.slots[q].dir == 'o') d_fo *= t.slots[q].d;
    auto hm = merged(s.H, s.M);
    Mat y_mh = partial_trace(t.choi, d, hm) / d_fo;
    Dims dhm;
    for (int q : hm) dhm.push_back(d[q]);
    std::vector<int> m_local;
    for (int q : s.M) m_local.push_back(static_cast<int>(std::find(hm.begin(), hm.end(), q) - hm.begin()));
    int dh = 1, df = 1;
    for (int q : s.H) dh *= d[q];
    for (int q : s.F) df *= d[q];
    Mat w = Mat::Zero(t.choi.rows(), t.choi.cols());
    for (std::size_t x = 0; x < elements.size(); ++x) {
        Mat c = proc::contract(t.choi, d, s.M, elements[x]);
        cd cx = c.trace();
        if (std::abs(cx) <= 1e-12) continue;
        Mat fut = partial_trace(c, {dh, df}, {1}) / cx;
        Mat hist = proc::contract(y_mh, dhm, m_local, elements[x]);
        w += d_fo * kron(kron(hist, Mat(duals[x].conjugate())), fut);
    }
    return (w - t.choi).cwiseAbs().maxCoeff();
}

std::vector<int> mpo_bond_dims(const ProcessTensor& t) {
    std::vector<int> bonds;
    auto d = t.dims();
    for (int q = 0; q + 1 < static_cast<int>(t.slots.size()); ++q)
        if (t.slots[q].dir == 'i') bonds.push_back(schmidt_rank(t.choi, d, q + 1));
    return bonds;
}

Divisor infer_divisor(const Channel& e_t0, const Channel& e_s0) {
    if (e_s0.d_in != e_s0.d_out || e_t0.d_in != e_s0.d_in)
        throw std::invalid_argument("infer_divisor: maps must share one dimension");
    Mat st = channels::superop(e_t0), ss = channels::superop(e_s0);
    Eigen::JacobiSVD<Mat> svd(ss);
    const auto& sv = svd.singularValues();
    double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12)) throw std::domain_error("infer_divisor: intermediate map is not invertible");
    Mat zeta = st * ss.partialPivLu().inverse();
    Channel z = Channel::from_superop(zeta, e_s0.d_out, e_t0.d_out);
    auto cp = channels::is_cp(z);
    double res = (zeta * ss - st).cwiseAbs().maxCoeff();
    return {zeta, cp.ok, cp.min_eig, res, cond};
}

Snapshot snapshot_generator(const Channel& e_t0, double t, int samples) {
    Snapshot r;
    if (t <= 0) throw std::invalid_argument("snapshot_generator: t must be positive");
    Mat s = channels::superop(e_t0);
    Eigen::ComplexEigenSolver<Mat> es(s);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        cd l = es.eigenvalues()(k);
        double dist = l.real() < 0 ? std::abs(l.imag()) : std::abs(l);
        if (dist <= 1e-12) {
            r.diagnostic = "superoperator eigenvalue (" + std::to_string(l.real()) + "," + std::to_string(l.imag()) +
                           ") lies on the branch cut of the principal logarithm";
            return r;
        }
    }
    Mat lg = s.log();
    r.L = lg / t;
    Mat back = (r.L * t).exp();
    r.recon_error = (back - s).cwiseAbs().maxCoeff();
    if (r.recon_error > 1e-8) {
        r.diagnostic = "exp(L t) does not reproduce the map";
        return r;
    }
    r.ok = true;
    r.cp_semigroup = true;
    r.worst_eig = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= samples; ++m) {
        double sv = t * m / samples;
        Channel c = Channel::from_superop((r.L * sv).exp(), e_t0.d_in, e_t0.d_out);
        auto cp = channels::is_cp(c);
        if (cp.min_eig < r.worst_eig) {
            r.worst_eig = cp.min_eig;
            r.worst_s = sv;
        }
        if (!cp.ok) r.cp_semigroup = false;
    }
    return r;
}

BlpSeries blp_verdict(const std::vector<double>& times, const std::vector<double>& distances) {
    BlpSeries b;
    b.t = times;
    b.distance = distances;
    for (std::size_t k = 0; k < distances.size(); ++k) {
        double inc = k == 0 ? 0.0 : distances[k] - distances[k - 1];
        b.increase.push_back(inc > 1e-9);
        if (inc > 1e-9) b.non_markovian = true;
        b.max_increase = std::max(b.max_increase, inc);
    }
    return b;
}

BlpSeries blp_channel_family(const std::function<Channel(double)>& family, const Mat& rho, const Mat& sigma,
                             const std::vector<double>& times) {
    std::vector<double> ds;
    for (double tm : times) {
        Channel c = family(tm);
        ds.push_back(trace_distance(channels::apply(c, rho), channels::apply(c, sigma)));
    }
    return blp_verdict(times, ds);
}

std::vector<double> blp_tensor_distances(const ProcessTensor& t, const std::map<int, Mat>& ops, const Mat& rho,
                                         const Mat& sigma) {
    auto ts = t.times();
    std::vector<double> out;
    const int d0 = t.slots[0].d;
    for (std::size_t j = 1; j < ts.size(); ++j) {
        std::vector<int> keep(ts.begin(), ts.begin() + j + 1);
        ProcessTensor r = proc::reduce(t, keep, {});
        for (std::size_t q = 1; q < j; ++q) {
            auto it = ops.find(ts[q]);
            Mat op = it != ops.end() ? it->second : proc::op_choi(channels::identity(t.slots[r.slot_index(ts[q], 'i')].d));
            r = proc::contract_time(r, ts[q], op);
        }
        Mat mp_rho = proc::measure_prepare_choi(Mat::Identity(d0, d0), rho);
        Mat mp_sig = proc::measure_prepare_choi(Mat::Identity(d0, d0), sigma);
        Mat a = proc::contract_time(r, ts[0], mp_rho).choi;
        Mat b = proc::contract_time(r, ts[0], mp_sig).choi;
        out.push_back(trace_distance(a, b));
    }
    return out;
}

BlpSeries blp_shallow_pocket(double gamma, double t, const Mat& intervention, const Mat& rho, const Mat& sigma,
                             int points) {
    std::vector<double> times, ds;
    Mat op = proc::op_choi(channels::unitary(intervention));
    for (int m = 0; m < points; ++m) {
        double tau = 2 * t * m / (points - 1);
        double dist;
        if (tau <= t) {
            dist = blp_tensor_distances(proc::shallow_pocket_segments({gamma * tau}), {}, rho, sigma).back();
        } else {
            auto sp = proc::shallow_pocket_segments({gamma * t, gamma * (tau - t)});
            dist = blp_tensor_distances(sp, {{1, op}}, rho, sigma).back();
        }
        times.push_back(tau);
        ds.push_back(dist);
    }
    return blp_verdict(times, ds);
}

}  // namespace qproc::memory
