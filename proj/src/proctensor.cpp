#include "qproc/proctensor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace qproc {

using namespace qla;

Dims ProcessTensor::dims() const {
    Dims d;
    for (const auto& s : slots) d.push_back(s.d);
    return d;
}

std::vector<int> ProcessTensor::times() const {
    std::vector<int> ts;
    for (const auto& s : slots)
        if (ts.empty() || ts.back() != s.t) ts.push_back(s.t);
    return ts;
}

int ProcessTensor::slot_index(int t, char dir) const {
    for (int q = 0; q < static_cast<int>(slots.size()); ++q)
        if (slots[q].t == t && slots[q].dir == dir) return q;
    return -1;
}

std::vector<int> ProcessTensor::slots_of_time(int t) const {
    std::vector<int> r;
    for (int q = 0; q < static_cast<int>(slots.size()); ++q)
        if (slots[q].t == t) r.push_back(q);
    return r;
}

double ProcessTensor::output_dim_product() const {
    double p = 1;
    for (const auto& s : slots)
        if (s.dir == 'o') p *= s.d;
    return p;
}

namespace proc {

namespace {

std::vector<int> others(int n, const std::vector<int>& fs) {
    std::vector<int> r;
    for (int q = 0; q < n; ++q)
        if (std::find(fs.begin(), fs.end(), q) == fs.end()) r.push_back(q);
    return r;
}

int dim_of(const Dims& d, const std::vector<int>& fs) {
    int p = 1;
    for (int f : fs) p *= d[f];
    return p;
}

void apply_on_tail(Mat& x, const Mat& u) {
    const Eigen::Index m = u.rows(), blocks = x.rows() / m;
    for (Eigen::Index r = 0; r < blocks; ++r) x.middleRows(r * m, m) = u * x.middleRows(r * m, m);
    Mat ua = u.adjoint();
    for (Eigen::Index c = 0; c < blocks; ++c) x.middleCols(c * m, m) = x.middleCols(c * m, m) * ua;
}

}  // namespace

Linked link_product(const Mat& a, const Dims& da, const Mat& b, const Dims& db,
                    const std::vector<std::pair<int, int>>& shared) {
    std::vector<int> sa, sb;
    for (auto [x, y] : shared) {
        if (da.at(x) != db.at(y)) throw std::invalid_argument("link_product: shared slot dims differ");
        sa.push_back(x);
        sb.push_back(y);
    }
    auto ua = others(static_cast<int>(da.size()), sa);
    auto ub = others(static_cast<int>(db.size()), sb);
    std::vector<int> pa = ua, pb = sb;
    pa.insert(pa.end(), sa.begin(), sa.end());
    pb.insert(pb.end(), ub.begin(), ub.end());
    Mat ap = permute(a, da, pa), bp = permute(b, db, pb);
    const int na = dim_of(da, ua), ns = dim_of(da, sa), nb = dim_of(db, ub);
    // C[(x,y),(x',y')] = sum_{s,s'} A[(x,s),(x',s')] B[(s,y),(s',y')]
    Mat ar(na * na, ns * ns), br(ns * ns, nb * nb);
    for (int x = 0; x < na; ++x)
        for (int x2 = 0; x2 < na; ++x2)
            for (int s = 0; s < ns; ++s)
                for (int s2 = 0; s2 < ns; ++s2) ar(x * na + x2, s * ns + s2) = ap(x * ns + s, x2 * ns + s2);
    for (int s = 0; s < ns; ++s)
        for (int s2 = 0; s2 < ns; ++s2)
            for (int y = 0; y < nb; ++y)
                for (int y2 = 0; y2 < nb; ++y2) br(s * ns + s2, y * nb + y2) = bp(s * nb + y, s2 * nb + y2);
    Mat cr = ar * br;
    Mat c(na * nb, na * nb);
    for (int x = 0; x < na; ++x)
        for (int x2 = 0; x2 < na; ++x2)
            for (int y = 0; y < nb; ++y)
                for (int y2 = 0; y2 < nb; ++y2) c(x * nb + y, x2 * nb + y2) = cr(x * na + x2, y * nb + y2);
    Dims dc;
    for (int f : ua) dc.push_back(da[f]);
    for (int f : ub) dc.push_back(db[f]);
    return {c, dc};
}

Mat contract(const Mat& y, const Dims& dims, const std::vector<int>& slots, const Mat& a) {
    auto rest = others(static_cast<int>(dims.size()), slots);
    const int ns = dim_of(dims, slots), nr = dim_of(dims, rest);
    if (a.rows() != ns || a.cols() != ns) throw std::invalid_argument("contract: operator size does not match slots");
    std::vector<int> perm = rest;
    perm.insert(perm.end(), slots.begin(), slots.end());
    Mat yp = permute(y, dims, perm);
    Mat out(nr, nr);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nr; ++c) out(r, c) = yp.block(r * ns, c * ns, ns, ns).cwiseProduct(a).sum();
    return out;
}

double born_element(const ProcessTensor& t, const Mat& element) {
    if (element.rows() != t.choi.rows()) throw std::invalid_argument("born: element does not match the tensor slots");
    return t.choi.cwiseProduct(element).sum().real();
}

double born_multi(const ProcessTensor& t, const std::vector<Mat>& ops) {
    auto ts = t.times();
    if (ops.size() != ts.size()) throw std::invalid_argument("born_multi: one op per time required");
    for (std::size_t k = 0; k < ts.size(); ++k) {
        auto sl = t.slots_of_time(ts[k]);
        if (ops[k].rows() != dim_of(t.dims(), sl)) throw std::invalid_argument("born_multi: op dims do not match slots");
    }
    return born_element(t, kron_all(ops));
}

Mat effect_choi(const Mat& e) { return e.transpose(); }

Mat op_choi(const Channel& c) { return channels::choi_io(c); }

Mat measure_prepare_choi(const Mat& effect, const Mat& state) { return kron(Mat(effect.transpose()), state); }

CausalityReport check_causality(const ProcessTensor& t, double tol) {
    CausalityReport rep{true, 0.0, 0.0, {}, -1};
    Eig e = herm_eig(t.choi);
    rep.min_eig = e.vals(e.vals.size() - 1);
    if (rep.min_eig < -kTauPsd * std::max(e.vals(0), 1.0)) rep.ok = false;
    rep.trace_residual = std::abs(t.choi.trace() - t.output_dim_product());
    if (rep.trace_residual > tol) rep.ok = false;

    Mat w = t.choi;
    std::vector<Slot> sl = t.slots;
    while (sl.size() > 1) {
        if (sl.back().dir != 'i' || sl[sl.size() - 2].dir != 'o')
            throw std::invalid_argument("check_causality: slots must alternate and end with an input");
        Dims d;
        for (const auto& s : sl) d.push_back(s.d);
        std::vector<int> keep(sl.size() - 1);
        for (std::size_t q = 0; q < keep.size(); ++q) keep[q] = static_cast<int>(q);
        Mat r = partial_trace(w, d, keep);
        d.pop_back();
        const int dout = d.back();
        keep.pop_back();
        Mat lower = partial_trace(r, d, keep) / double(dout);
        double res = (r - kron(lower, Mat::Identity(dout, dout))).cwiseAbs().maxCoeff();
        rep.level_residuals.push_back(res);
        if (res > tol && rep.failed_level < 0) rep.failed_level = static_cast<int>(rep.level_residuals.size()) - 1;
        w = lower;
        sl.pop_back();
        sl.pop_back();
    }
    double res0 = std::abs(w.trace() - 1.0);
    rep.level_residuals.push_back(res0);
    if (res0 > tol && rep.failed_level < 0) rep.failed_level = static_cast<int>(rep.level_residuals.size()) - 1;
    if (rep.failed_level >= 0) rep.ok = false;
    return rep;
}

ProcessTensor contract_time(const ProcessTensor& t, int time, const Mat& op_io) {
    auto sl = t.slots_of_time(time);
    if (sl.empty()) throw std::invalid_argument("contract_time: no such time");
    ProcessTensor r;
    r.choi = contract(t.choi, t.dims(), sl, op_io);
    for (int q = 0; q < static_cast<int>(t.slots.size()); ++q)
        if (t.slots[q].t != time) r.slots.push_back(t.slots[q]);
    return r;
}

ProcessTensor reduce(const ProcessTensor& t, const std::vector<int>& keep_times, const std::map<int, Mat>& ops) {
    if (keep_times.empty()) throw std::invalid_argument("reduce: nothing to keep");
    std::set<int> keep(keep_times.begin(), keep_times.end());
    auto ts = t.times();
    for (int k : keep)
        if (std::find(ts.begin(), ts.end(), k) == ts.end()) throw std::invalid_argument("reduce: unknown time");
    const int last = *keep.rbegin();

    // trailing times are traced; the last kept time loses its output slot
    ProcessTensor r;
    std::vector<int> kept_slots;
    double scale = 1;
    for (int q = 0; q < static_cast<int>(t.slots.size()); ++q) {
        const auto& s = t.slots[q];
        if (s.t < last || (s.t == last && s.dir == 'i')) {
            kept_slots.push_back(q);
            r.slots.push_back(s);
        } else if (s.dir == 'o') {
            scale *= s.d;
        }
    }
    r.choi = partial_trace(t.choi, t.dims(), kept_slots) / scale;

    for (int tm : ts) {
        if (tm >= last || keep.count(tm)) continue;
        auto it = ops.find(tm);
        if (it == ops.end())
            throw std::invalid_argument("reduce: dropping an earlier time requires an operation at t=" + std::to_string(tm));
        r = contract_time(r, tm, it->second);
    }
    return r;
}

ProcessTensor condition_on_past(const ProcessTensor& t, const std::vector<int>& times, const Mat& element,
                                double* prob) {
    std::vector<int> sl;
    for (int tm : times) {
        auto s = t.slots_of_time(tm);
        if (s.empty()) throw std::invalid_argument("condition_on_past: unknown time");
        sl.insert(sl.end(), s.begin(), s.end());
    }
    std::sort(sl.begin(), sl.end());
    ProcessTensor r;
    r.choi = contract(t.choi, t.dims(), sl, element);
    for (int q = 0; q < static_cast<int>(t.slots.size()); ++q)
        if (std::find(sl.begin(), sl.end(), q) == sl.end()) r.slots.push_back(t.slots[q]);
    double p = r.choi.trace().real() / r.output_dim_product();
    if (prob) *prob = p;
    if (p <= 1e-12) throw std::domain_error("condition_on_past: conditioning element has zero probability");
    r.choi /= p;
    return r;
}

ProcessTensor process_from_circuit(const Mat& rho_se, int d_s, int d_e, const std::vector<Mat>& unitaries) {
    const int m = d_s * d_e;
    if (rho_se.rows() != m) throw std::invalid_argument("process_from_circuit: state dims");
    for (const auto& u : unitaries) {
        if (u.rows() != m || u.cols() != m) throw std::invalid_argument("process_from_circuit: unitary dims");
        if ((u * u.adjoint() - Mat::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-9)
            throw std::invalid_argument("process_from_circuit: non-unitary step");
    }
    Mat x = rho_se;
    Dims d{d_s, d_e};
    ProcessTensor t;
    Mat phi = max_entangled(d_s);
    const int k = static_cast<int>(unitaries.size());
    for (int j = 0; j < k; ++j) {
        t.slots.push_back({j, 'i', d_s});
        t.slots.push_back({j, 'o', d_s});
        x = kron(x, phi);
        d.push_back(d_s);
        d.push_back(d_s);
        const int n = static_cast<int>(d.size());
        std::vector<int> perm;
        for (int q = 0; q < n - 3; ++q) perm.push_back(q);
        perm.push_back(n - 2);
        perm.push_back(n - 1);
        perm.push_back(n - 3);
        x = permute(x, d, perm);
        Dims nd;
        for (int p : perm) nd.push_back(d[p]);
        d = nd;
        apply_on_tail(x, unitaries[j]);
    }
    t.slots.push_back({k, 'i', d_s});
    std::vector<int> keep(d.size() - 1);
    for (std::size_t q = 0; q < keep.size(); ++q) keep[q] = static_cast<int>(q);
    t.choi = partial_trace(x, d, keep);
    return t;
}

ProcessTensor superchannel_build(const Mat& rho_se, int d_s, int d_e, const Mat& U) {
    return process_from_circuit(rho_se, d_s, d_e, {U});
}

ProcessTensor markov_tensor(const Mat& rho0, const std::vector<Channel>& chans) {
    ProcessTensor t;
    const int d0 = static_cast<int>(rho0.rows());
    t.slots.push_back({0, 'i', d0});
    t.choi = rho0;
    for (int j = 0; j < static_cast<int>(chans.size()); ++j) {
        const auto& c = chans[j];
        if (!channels::is_cp(c).ok || !channels::is_tp(c).ok)
            throw std::invalid_argument("markov_tensor: channel is not CPTP");
        t.slots.push_back({j, 'o', c.d_in});
        t.slots.push_back({j + 1, 'i', c.d_out});
        t.choi = kron(t.choi, op_choi(c));
    }
    return t;
}

double simulate_circuit(const Mat& rho_se, int d_s, int d_e, const std::vector<Mat>& unitaries,
                        const std::vector<Channel>& ops, const Mat& effect) {
    if (ops.size() != unitaries.size()) throw std::invalid_argument("simulate_circuit: op count");
    Mat x = rho_se;
    Mat ie = Mat::Identity(d_e, d_e);
    for (std::size_t j = 0; j < unitaries.size(); ++j) {
        Mat y = Mat::Zero(x.rows(), x.cols());
        for (const auto& k : channels::kraus(ops[j])) {
            Mat kk = kron(k, ie);
            y += kk * x * kk.adjoint();
        }
        x = unitaries[j] * y * unitaries[j].adjoint();
    }
    if (effect.rows() != d_s) throw std::invalid_argument("simulate_circuit: effect dims");
    return (kron(effect, ie) * x).trace().real();
}

ProcessTensor shallow_pocket_segments(const std::vector<double>& gts) {
    for (double g : gts)
        if (g < 0) throw std::invalid_argument("shallow_pocket: negative gamma t");
    const int k = static_cast<int>(gts.size());
    ProcessTensor t;
    t.slots.push_back({0, 'i', 1});
    for (int j = 0; j < k; ++j) {
        t.slots.push_back({j, 'o', 2});
        t.slots.push_back({j + 1, 'i', 2});
    }
    const int n = 1 << (2 * k);
    // a row index is a chain (o_0, i_1, ..., o_{k-1}, i_k); the system only passes when o_j = i_{j+1}
    std::vector<double> phase(n, 0.0);
    std::vector<bool> valid(n, true);
    for (int idx = 0; idx < n; ++idx) {
        for (int j = 0; j < k; ++j) {
            int o = (idx >> (2 * (k - 1 - j) + 1)) & 1;
            int i = (idx >> (2 * (k - 1 - j))) & 1;
            if (o != i) valid[idx] = false;
            phase[idx] += (o == 0 ? 1.0 : -1.0) * gts[j];
        }
    }
    t.choi = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (valid[a] && valid[b]) t.choi(a, b) = std::exp(-0.5 * std::abs(phase[a] - phase[b]));
    return t;
}

ProcessTensor shallow_pocket(double gamma_t, int steps) {
    if (steps < 1) throw std::invalid_argument("shallow_pocket: steps < 1");
    return shallow_pocket_segments(std::vector<double>(steps, gamma_t));
}

Mat shallow_pocket_compressed(const ProcessTensor& t) {
    if (t.slots.size() != 5) throw std::invalid_argument("shallow_pocket_compressed: needs the 2-step tensor");
    Mat c(4, 4);
    auto full = [](int o0, int o1) { return o0 * 8 + o0 * 4 + o1 * 2 + o1; };
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) c(a, b) = t.choi(full(a >> 1, a & 1), full(b >> 1, b & 1));
    return c;
}

ProcessTensor stern_gerlach() {
    Mat plus = 0.5 * (Mat::Identity(2, 2) + pauli(1));
    return markov_tensor(plus, {channels::identity(2), channels::identity(2)});
}

Mat xyz_interaction(double omega_t) {
    Mat u = Mat::Identity(4, 4);
    for (int p = 1; p <= 3; ++p)
        u = u * (std::cos(omega_t) * Mat::Identity(4, 4) - cd(0, 1) * std::sin(omega_t) * kron(pauli(p), pauli(p)));
    return u;
}

Mat correlated_state(double a1, double a2, double a3, double g) {
    Mat i2 = Mat::Identity(2, 2);
    Mat s = a1 * pauli(1) + a2 * pauli(2) + a3 * pauli(3);
    return 0.25 * (kron(i2, i2) + kron(s, i2) + g * kron(pauli(2), pauli(3)));
}

OpBasis random_op_basis(Rng& rng, const ProcessTensor& shape) {
    OpBasis b;
    auto ts = shape.times();
    auto d = shape.dims();
    for (int tm : ts) {
        int n = dim_of(d, shape.slots_of_time(tm));
        std::vector<Mat> els;
        for (int attempt = 0; attempt < 50; ++attempt) {
            els.clear();
            for (int x = 0; x < n * n; ++x) {
                Mat g = random_ginibre(rng, n, 1);
                els.push_back(g * g.adjoint());
            }
            try {
                b.duals.push_back(tomo::dual_set(els));
                break;
            } catch (const std::domain_error&) {
                if (attempt == 49) throw;
            }
        }
        b.per_time.push_back(els);
    }
    return b;
}

std::vector<double> basis_probabilities(const ProcessTensor& t, const OpBasis& b, int threads) {
    const int k = static_cast<int>(b.per_time.size());
    std::size_t total = 1;
    for (const auto& v : b.per_time) total *= v.size();
    std::vector<double> probs(total);
    auto work = [&](std::size_t from, std::size_t to) {
        std::vector<std::size_t> idx(k, 0);
        std::vector<Mat> ops(k);
        for (std::size_t x = from; x < to; ++x) {
            std::size_t rem = x;
            for (int j = k - 1; j >= 0; --j) {
                idx[j] = rem % b.per_time[j].size();
                rem /= b.per_time[j].size();
            }
            for (int j = 0; j < k; ++j) ops[j] = b.per_time[j][idx[j]];
            probs[x] = born_multi(t, ops);
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min<std::size_t>(threads < 1 ? 1 : threads, total));
    if (n == 1) {
        work(0, total);
        return probs;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + n - 1) / n;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work, w * chunk, std::min(total, (w + 1) * chunk));
    for (auto& th : pool) th.join();
    return probs;
}

ProcessTensor reconstruct_process(const std::vector<double>& probs, const OpBasis& b, const std::vector<Slot>& slots) {
    const int k = static_cast<int>(b.per_time.size());
    std::size_t total = 1;
    for (const auto& v : b.per_time) {
        const auto n = v.at(0).rows();
        if (static_cast<Eigen::Index>(v.size()) != n * n)
            throw std::invalid_argument("reconstruct_process: basis is not informationally complete");
        total *= v.size();
    }
    if (probs.size() != total) throw std::invalid_argument("reconstruct_process: probability count");
    std::vector<std::vector<Mat>> conj_duals(k);
    for (int j = 0; j < k; ++j)
        for (const auto& d : b.duals[j]) conj_duals[j].push_back(d.conjugate());
    // accumulate time by time: sum over the last index first
    std::vector<Mat> layer;
    layer.reserve(total);
    for (std::size_t x = 0; x < total; ++x) layer.push_back(Mat::Constant(1, 1, probs[x]));
    for (int j = k - 1; j >= 0; --j) {
        const std::size_t nj = conj_duals[j].size();
        std::vector<Mat> next;
        next.reserve(layer.size() / nj);
        for (std::size_t head = 0; head < layer.size() / nj; ++head) {
            Mat acc;
            for (std::size_t x = 0; x < nj; ++x) {
                Mat term = kron(conj_duals[j][x], layer[head * nj + x]);
                if (x == 0)
                    acc = term;
                else
                    acc += term;
            }
            next.push_back(acc);
        }
        layer.swap(next);
    }
    ProcessTensor t;
    t.slots = slots;
    t.choi = layer.at(0);
    if (t.choi.rows() != prod(t.dims())) throw std::invalid_argument("reconstruct_process: slots do not match basis");
    return t;
}

Tester random_product_tester(Rng& rng, const ProcessTensor& shape, int outcomes) {
    auto ts = shape.times();
    std::vector<std::vector<Mat>> per_time;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        auto sl = shape.slots_of_time(ts[j]);
        std::vector<Mat> els;
        if (sl.size() == 2) {
            int di = shape.slots[sl[0]].d, dout = shape.slots[sl[1]].d;
            Channel c = channels::random_cptp(rng, di, dout, outcomes);
            for (const auto& k : c.kraus) els.push_back(op_choi(Channel::from_kraus({k})));
        } else {
            int d = shape.slots[sl[0]].d;
            Channel c = channels::random_cptp(rng, d, 1, outcomes);
            for (const auto& k : c.kraus) els.push_back(effect_choi(k.adjoint() * k));
        }
        per_time.push_back(els);
    }
    Tester te;
    std::vector<Mat> cur{Mat::Identity(1, 1)};
    for (const auto& els : per_time) {
        std::vector<Mat> nxt;
        for (const auto& c : cur)
            for (const auto& e : els) nxt.push_back(kron(c, e));
        cur.swap(nxt);
    }
    te.elements = cur;
    return te;
}

nlohmann::ordered_json to_json(const ProcessTensor& t) {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : t.slots) {
        nlohmann::ordered_json o;
        o["t"] = s.t;
        o["dir"] = std::string(1, s.dir);
        o["d"] = s.d;
        arr.push_back(o);
    }
    j["slots"] = arr;
    j["choi"] = qla::to_json(CMatrix(t.dims(), t.choi));
    return j;
}

ProcessTensor process_from_json(const nlohmann::json& j) {
    ProcessTensor t;
    for (const auto& o : j.at("slots")) {
        std::string dir = o.at("dir").get<std::string>();
        if (dir != "i" && dir != "o") throw std::invalid_argument("process json: dir must be i or o");
        t.slots.push_back({o.at("t").get<int>(), dir[0], o.at("d").get<int>()});
    }
    CMatrix c = cmatrix_from_json(j.at("choi"));
    if (c.rows_dims != t.dims() || c.cols_dims != t.dims())
        throw std::invalid_argument("process json: choi dims do not match slots");
    t.choi = c.m;
    return t;
}

}  // namespace proc
}  // namespace qproc
