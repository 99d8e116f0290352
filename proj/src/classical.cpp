#include "qproc/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace qproc::classical {

namespace {

int total(const std::vector<int>& dims) {
    int n = 1;
    for (int d : dims) n *= d;
    return n;
}

// flat index -> chronological outcomes
std::vector<int> decode(const JointDist& j, int flat) {
    const int k = j.times();
    std::vector<int> chrono(k);
    for (int a = k - 1; a >= 0; --a) {
        chrono[k - 1 - a] = flat % j.dims[a];
        flat /= j.dims[a];
    }
    return chrono;
}

std::vector<int> pick(const std::vector<int>& chrono, const std::vector<int>& times) {
    std::vector<int> r;
    for (int t : times) r.push_back(chrono[t]);
    return r;
}

std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double entropy_of(const JointDist& j, const std::vector<int>& times) {
    if (times.empty()) return 0.0;
    return shannon(marginalize(j, times).probs);
}

}  // namespace

double JointDist::at(const std::vector<int>& chrono) const {
    const int k = times();
    if (static_cast<int>(chrono.size()) != k) throw std::invalid_argument("JointDist::at: wrong arity");
    int idx = 0;
    for (int a = 0; a < k; ++a) idx = idx * dims[a] + chrono[k - 1 - a];
    return probs[idx];
}

void JointDist::check() const {
    if (static_cast<int>(probs.size()) != total(dims)) throw std::invalid_argument("JointDist: size mismatch");
    double s = 0;
    for (double p : probs) {
        if (p < -1e-15) throw std::invalid_argument("JointDist: negative probability");
        s += p;
    }
    if (std::abs(s - 1) > 1e-12) throw std::invalid_argument("JointDist: probabilities do not sum to 1");
}

bool is_column_stochastic(const StochMatrix& g, double tol) {
    if ((g.array() < -tol).any()) return false;
    for (Eigen::Index c = 0; c < g.cols(); ++c)
        if (std::abs(g.col(c).sum() - 1) > tol) return false;
    return true;
}

bool is_bistochastic(const StochMatrix& g, double tol) {
    if (!is_column_stochastic(g, tol) || g.rows() != g.cols()) return false;
    for (Eigen::Index r = 0; r < g.rows(); ++r)
        if (std::abs(g.row(r).sum() - 1) > tol) return false;
    return true;
}

Dist apply(const StochMatrix& g, const Dist& p) {
    if (g.cols() != p.size()) throw std::invalid_argument("apply: dim mismatch");
    return g * p;
}

StochMatrix chapman(const std::vector<StochMatrix>& chain) {
    if (chain.empty()) throw std::invalid_argument("chapman: empty chain");
    StochMatrix r = chain[0];
    for (std::size_t k = 1; k < chain.size(); ++k) {
        if (chain[k].cols() != r.rows()) throw std::invalid_argument("chapman: dim mismatch");
        r = chain[k] * r;
    }
    return r;
}

StochMatrix two_point_from_chain(const std::vector<StochMatrix>& chain, int j, int k) {
    if (j < 0 || k <= j || k > static_cast<int>(chain.size())) throw std::invalid_argument("two_point: bad times");
    const int dj = static_cast<int>(chain[j].cols()), dk = static_cast<int>(chain[k - 1].rows());
    StochMatrix r = StochMatrix::Zero(dk, dj);
    // enumerate intermediate trajectories r_{j+1..k-1}
    std::vector<int> dims;
    for (int m = j; m < k - 1; ++m) dims.push_back(static_cast<int>(chain[m].rows()));
    const int paths = total(dims);
    for (int a = 0; a < dj; ++a)
        for (int path = 0; path < paths; ++path) {
            std::vector<int> traj{a};
            int rem = path;
            std::vector<int> mid(dims.size());
            for (int q = static_cast<int>(dims.size()) - 1; q >= 0; --q) {
                mid[q] = rem % dims[q];
                rem /= dims[q];
            }
            traj.insert(traj.end(), mid.begin(), mid.end());
            for (int b = 0; b < dk; ++b) {
                double w = 1;
                std::vector<int> full = traj;
                full.push_back(b);
                for (int s = 0; s + 1 < static_cast<int>(full.size()); ++s) w *= chain[j + s](full[s + 1], full[s]);
                r(b, a) += w;
            }
        }
    return r;
}

JointDist markov_chain(const Dist& p0, const StochMatrix& g, int steps) {
    const int d = static_cast<int>(p0.size());
    JointDist j;
    j.dims.assign(steps + 1, d);
    j.probs.assign(total(j.dims), 0.0);
    for (int flat = 0; flat < static_cast<int>(j.probs.size()); ++flat) {
        auto x = decode(j, flat);
        double w = p0(x[0]);
        for (int t = 1; t <= steps; ++t) w *= g(x[t], x[t - 1]);
        j.probs[flat] = w;
    }
    return j;
}

JointDist marginalize(const JointDist& j, const std::vector<int>& keep_times) {
    auto keep = sorted_unique(keep_times);
    for (int t : keep)
        if (t < 0 || t >= j.times()) throw std::invalid_argument("marginalize: time out of range");
    JointDist m;
    for (auto it = keep.rbegin(); it != keep.rend(); ++it) m.dims.push_back(j.dims[j.axis(*it)]);
    m.probs.assign(total(m.dims), 0.0);
    for (int flat = 0; flat < static_cast<int>(j.probs.size()); ++flat) {
        auto x = pick(decode(j, flat), keep);
        int idx = 0;
        for (int a = 0; a < static_cast<int>(keep.size()); ++a) idx = idx * m.dims[a] + x[keep.size() - 1 - a];
        m.probs[idx] += j.probs[flat];
    }
    return m;
}

bool consistency_check(const std::map<std::vector<int>, JointDist>& family, double tol, double* worst) {
    double w = 0;
    for (const auto& [big, jb] : family)
        for (const auto& [small, js] : family) {
            if (small.size() >= big.size()) continue;
            if (!std::includes(big.begin(), big.end(), small.begin(), small.end())) continue;
            // positions of `small` inside `big`
            std::vector<int> local;
            for (int t : small) local.push_back(static_cast<int>(std::find(big.begin(), big.end(), t) - big.begin()));
            JointDist m = marginalize(jb, local);
            if (m.dims != js.dims) throw std::invalid_argument("consistency_check: incompatible dims");
            for (std::size_t q = 0; q < m.probs.size(); ++q) w = std::max(w, std::abs(m.probs[q] - js.probs[q]));
        }
    if (worst) *worst = w;
    return w <= tol;
}

double order_deviation(const JointDist& j, int l) {
    double dev = 0;
    for (int t = l + 1; t < j.times(); ++t) {
        std::vector<int> upto, hist, win, winh;
        for (int s = 0; s <= t; ++s) upto.push_back(s);
        for (int s = 0; s < t; ++s) hist.push_back(s);
        for (int s = t - l; s <= t; ++s) win.push_back(s);
        for (int s = t - l; s < t; ++s) winh.push_back(s);
        JointDist pf = marginalize(j, upto), ph = marginalize(j, hist), pw = marginalize(j, win);
        JointDist pwh = winh.empty() ? JointDist{{}, {1.0}} : marginalize(j, winh);
        for (int flat = 0; flat < static_cast<int>(pf.probs.size()); ++flat) {
            auto x = decode(pf, flat);
            double h = ph.at(std::vector<int>(x.begin(), x.end() - 1));
            if (h <= 1e-15) continue;  // undefined conditional
            double c_full = pf.probs[flat] / h;
            double c_win = pw.at(std::vector<int>(x.end() - (l + 1), x.end())) /
                           pwh.at(std::vector<int>(x.end() - (l + 1), x.end() - 1));
            dev = std::max(dev, std::abs(c_full - c_win));
        }
    }
    return dev;
}

int markov_order_estimate(const JointDist& j, double tol) {
    if (j.times() < 2) throw std::invalid_argument("markov_order_estimate: need at least two times");
    for (int l = 0; l < j.times(); ++l)
        if (order_deviation(j, l) <= tol) return l;
    return j.times() - 1;
}

StochMatrix hidden_markov_embed(const StochMatrix& gm, int d, int m) {
    int dm = 1;
    for (int q = 0; q < m; ++q) dm *= d;
    if (gm.rows() != d || gm.cols() != dm || !is_column_stochastic(gm, 1e-12))
        throw std::invalid_argument("hidden_markov_embed: Gamma must be a column-stochastic d x d^m matrix");
    StochMatrix xi = StochMatrix::Zero(dm, dm);
    const int head = dm / d;
    for (int col = 0; col < dm; ++col)
        for (int xk = 0; xk < d; ++xk) xi(xk * head + col / d, col) = gm(xk, col);
    return xi;
}

JointDist simulate_order_m(const StochMatrix& gm, int d, int m, const Dist& init_block, int steps) {
    JointDist j;
    j.dims.assign(m + steps, d);
    j.probs.assign(total(j.dims), 0.0);
    int dm = 1;
    for (int q = 0; q < m; ++q) dm *= d;
    for (int flat = 0; flat < static_cast<int>(j.probs.size()); ++flat) {
        auto x = decode(j, flat);
        // initial block index (x_{m-1},...,x_0)
        int b = 0;
        for (int t = m - 1; t >= 0; --t) b = b * d + x[t];
        double w = init_block(b);
        for (int t = m; t < m + steps && w > 0; ++t) {
            int col = 0;
            for (int s = t - 1; s >= t - m; --s) col = col * d + x[s];
            w *= gm(x[t], col);
        }
        j.probs[flat] = w;
    }
    (void)dm;
    return j;
}

double shannon(const std::vector<double>& p) {
    double h = 0;
    for (double x : p)
        if (x > 0) h -= x * std::log(x);
    return h;
}

double cmi(const JointDist& j, const std::vector<int>& f, const std::vector<int>& m, const std::vector<int>& h) {
    auto u = [](std::vector<int> a, const std::vector<int>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return sorted_unique(a);
    };
    return entropy_of(j, u(f, m)) + entropy_of(j, u(h, m)) - entropy_of(j, sorted_unique(m)) -
           entropy_of(j, u(u(f, m), h));
}

Recovery recovery(const JointDist& j, const std::vector<int>& f, const std::vector<int>& m, const std::vector<int>& h) {
    std::vector<int> all = f;
    all.insert(all.end(), m.begin(), m.end());
    all.insert(all.end(), h.begin(), h.end());
    all = sorted_unique(all);
    JointDist target = marginalize(j, all);
    std::vector<int> fm = f, mh = m;
    fm.insert(fm.end(), m.begin(), m.end());
    mh.insert(mh.end(), h.begin(), h.end());
    fm = sorted_unique(fm);
    mh = sorted_unique(mh);
    JointDist pfm = marginalize(j, fm), pmh = marginalize(j, mh), pm = marginalize(j, sorted_unique(m));
    auto local = [&](const std::vector<int>& sub) {
        std::vector<int> r;
        for (int t : sub) r.push_back(static_cast<int>(std::find(all.begin(), all.end(), t) - all.begin()));
        return r;
    };
    auto lfm = local(fm), lmh = local(mh), lm = local(sorted_unique(m));
    Recovery rec{target, 0.0};
    for (int flat = 0; flat < static_cast<int>(target.probs.size()); ++flat) {
        auto x = decode(target, flat);
        double denom = m.empty() ? 1.0 : pm.at(pick(x, lm));
        double v = denom > 0 ? pfm.at(pick(x, lfm)) * pmh.at(pick(x, lmh)) / denom : 0.0;
        rec.reconstructed.probs[flat] = v;
        rec.error = std::max(rec.error, std::abs(v - target.probs[flat]));
    }
    return rec;
}

DpiReport dpi_suite(const Dist& p, const Dist& q, const StochMatrix& g) {
    auto td = [](const Dist& a, const Dist& b) { return 0.5 * (a - b).cwiseAbs().sum(); };
    auto rel = [](const Dist& a, const Dist& b) {
        double s = 0;
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            if (a(k) <= 0) continue;
            if (b(k) <= 0) return std::numeric_limits<double>::infinity();
            s += a(k) * std::log(a(k) / b(k));
        }
        return s;
    };
    // X copied into Y, then Gamma acts on Y
    auto mi = [&](const StochMatrix& chan) {
        const int dx = static_cast<int>(p.size()), dy = static_cast<int>(chan.rows());
        std::vector<double> joint, px(dx), py(dy, 0.0);
        for (int x = 0; x < dx; ++x) {
            px[x] = p(x);
            for (int y = 0; y < dy; ++y) {
                double v = p(x) * chan(y, x);
                joint.push_back(v);
                py[y] += v;
            }
        }
        return shannon(px) + shannon(py) - shannon(joint);
    };
    DpiReport r;
    Dist gp = g * p, gq = g * q;
    r.trace_before = td(p, q);
    r.trace_after = td(gp, gq);
    r.rel_before = rel(p, q);
    r.rel_after = rel(gp, gq);
    r.mi_before = mi(StochMatrix::Identity(p.size(), p.size()));
    r.mi_after = mi(g);
    const double eps = 1e-12;
    r.contracts = r.trace_after <= r.trace_before + eps && r.mi_after <= r.mi_before + eps &&
                  (std::isinf(r.rel_before) || r.rel_after <= r.rel_before + eps);
    return r;
}

EuclidReport euclidean_counterexample(const Dist& p, const Dist& r) {
    const Eigen::Index d = p.size();
    Dist u = Dist::Constant(2, 0.5);
    Dist a(d * 2), b(d * 2);
    for (Eigen::Index x = 0; x < d; ++x)
        for (int y = 0; y < 2; ++y) {
            a(x * 2 + y) = p(x) * u(y);
            b(x * 2 + y) = r(x) * u(y);
        }
    EuclidReport e;
    e.initial = (a - b).norm();
    e.final_ = (p - r).norm();
    e.ratio = e.initial / e.final_;
    e.initial_sq = (a - b).squaredNorm();
    e.final_sq = (p - r).squaredNorm();
    e.ratio_sq = e.initial_sq / e.final_sq;
    return e;
}

StochMatrix fair_die() { return StochMatrix::Constant(6, 6, 1.0 / 6); }

StochMatrix biased_die(const Dist& p) {
    if (p.size() != 6 || std::abs(p.sum() - 1) > 1e-12 || (p.array() < 0).any())
        throw std::invalid_argument("biased_die: need a distribution over 6 faces");
    StochMatrix g(6, 6);
    for (int c = 0; c < 6; ++c) g.col(c) = p;
    return g;
}

StochMatrix perturbed_die(double p, double q, double s) {
    if (std::abs(p + 4 * q + s - 1) > 1e-12 || p < 0 || q < 0 || s < 0)
        throw std::invalid_argument("perturbed_die: need p + 4q + s = 1 with non-negative entries");
    StochMatrix g(6, 6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) g(r, c) = r == c ? p : (r + c == 5 ? s : q);
    return g;
}

StochMatrix escalating_die_matrix(int mu, const std::vector<double>& weights) {
    if (mu < 0 || mu > 3 || weights.size() != 4) throw std::invalid_argument("escalating_die: mu in 0..3");
    const double w = weights[mu];
    if (w < 0 || w > 1) throw std::invalid_argument("escalating_die: weight outside [0,1]");
    return w * perturbed_die() + (1 - w) * fair_die();
}

JointDist escalating_die(int tosses, const std::vector<double>& weights) {
    if (tosses < 1) throw std::invalid_argument("escalating_die: tosses < 1");
    std::vector<StochMatrix> g;
    for (int mu = 0; mu < 4; ++mu) g.push_back(escalating_die_matrix(mu, weights));
    JointDist j;
    j.dims.assign(tosses, 6);
    j.probs.assign(total(j.dims), 0.0);
    for (int flat = 0; flat < static_cast<int>(j.probs.size()); ++flat) {
        auto x = decode(j, flat);
        double w = 1.0 / 6;
        int mu = 0;
        for (int t = 1; t < tosses; ++t) {
            w *= g[mu](x[t], x[t - 1]);
            mu = x[t] == x[t - 1] ? (mu + 1) % 4 : 0;
        }
        j.probs[flat] = w;
    }
    return j;
}

JointDist coin_with_interventions(double p, CoinIntervention inter) {
    if (p < 0 || p > 1) throw std::invalid_argument("coin: p outside [0,1]");
    JointDist j;
    j.dims = {2, 2};  // (F2, F1)
    j.probs.assign(4, 0.0);
    auto step = [p](int from, int to) { return from == to ? 1 - p : p; };
    for (int f1 = 0; f1 < 2; ++f1) {
        double p1 = step(0, f1);
        int state = inter == CoinIntervention::Flip ? 1 - f1 : (inter == CoinIntervention::Reset ? 0 : f1);
        for (int f2 = 0; f2 < 2; ++f2) j.probs[f2 * 2 + f1] = p1 * step(state, f2);
    }
    return j;
}

JointDist coin_no_intervention(double p) { return coin_with_interventions(p, CoinIntervention::Identity); }

JointDist parity_process() {
    JointDist j;
    j.dims = {2, 2, 2, 2};
    j.probs.assign(16, 0.0);
    for (int flat = 0; flat < 16; ++flat) {
        auto x = decode(j, flat);
        j.probs[flat] = ((x[0] + x[1] + x[2]) % 2 == x[3]) ? 1.0 / 8 : 0.0;
    }
    return j;
}

JointDist long_memory(double p, int s, int d, int times) {
    if (p < 0 || p > 1 || s < 1 || d < 2 || times < 1) throw std::invalid_argument("long_memory: bad parameters");
    JointDist j;
    j.dims.assign(times, d);
    j.probs.assign(total(j.dims), 0.0);
    for (int flat = 0; flat < static_cast<int>(j.probs.size()); ++flat) {
        auto x = decode(j, flat);
        double w = 1;
        for (int t = 0; t < times; ++t)
            w *= t < s ? 1.0 / d : p * (x[t] == x[t - s] ? 1.0 : 0.0) + (1 - p) / d;
        j.probs[flat] = w;
    }
    return j;
}

nlohmann::ordered_json to_json(const JointDist& j) {
    nlohmann::ordered_json o;
    o["dims"] = j.dims;
    o["probs"] = j.probs;
    return o;
}

JointDist joint_from_json(const nlohmann::json& o) {
    JointDist j{o.at("dims").get<std::vector<int>>(), o.at("probs").get<std::vector<double>>()};
    j.check();
    return j;
}

}  // namespace qproc::classical
