#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qproc/classical.hpp"
#include "qproc/memory.hpp"

using namespace qproc;
using ojson = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string in, out, format = "json", split, kind, elements;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int steps = 2;
    // model parameters
    double gamma_t = 1.0, omega_t = 0.7, g = 0.5, p = 0.5, a1 = 0.3, a2 = 0.2, a3 = 0.4;
    double q = 0.115, s = 0.04, t = 1.0, s_time = 0.5, gamma = 1.0;
    int lag = 2, d = 2, times = 4, tosses = 4, points = 41, time = 1, d_env = 2;
};

int threads_from_env() {
    const char* v = std::getenv("QPROC_THREADS");
    if (!v || !*v) return 1;
    try {
        std::size_t pos = 0;
        int n = std::stoi(v, &pos);
        if (pos != std::string(v).size() || n < 1) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw UsageError("QPROC_THREADS must be a positive integer");
    }
}

void emit_text(const Config& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << text;
}

void emit(const Config& c, const ojson& j) {
    if (c.format != "json") throw UsageError("this command only writes json");
    emit_text(c, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::string& path) {
    if (path.empty()) throw UsageError("--in is required");
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(f);
}

ojson mat_json(const Mat& m, const Dims& d) { return qla::to_json(CMatrix(d, m)); }

ojson causality_json(const proc::CausalityReport& r) {
    ojson j;
    j["ok"] = r.ok;
    j["min_eig"] = r.min_eig;
    j["trace_residual"] = r.trace_residual;
    j["level_residuals"] = r.level_residuals;
    j["failed_level"] = r.failed_level;
    return j;
}

std::string csv_joint(const classical::JointDist& jd) {
    std::ostringstream os;
    os.precision(17);
    for (int t = 0; t < jd.times(); ++t) os << "x" << t << ",";
    os << "probability\n";
    const int n = static_cast<int>(jd.probs.size());
    for (int flat = 0; flat < n; ++flat) {
        std::vector<int> chrono(jd.times());
        int rem = flat;
        for (int a = jd.times() - 1; a >= 0; --a) {
            chrono[jd.times() - 1 - a] = rem % jd.dims[a];
            rem /= jd.dims[a];
        }
        for (int x : chrono) os << x << ",";
        os << jd.probs[flat] << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------- builders

ProcessTensor build_kind(const Config& c) {
    Rng rng(c.seed);
    if (c.kind == "shallow-pocket") return proc::shallow_pocket(c.gamma_t, c.steps);
    if (c.kind == "stern-gerlach") return proc::stern_gerlach();
    if (c.kind == "superchannel")
        return proc::superchannel_build(proc::correlated_state(c.a1, c.a2, c.a3, c.g), 2, 2,
                                        proc::xyz_interaction(c.omega_t));
    if (c.kind == "markov") {
        std::vector<Channel> chans;
        for (int j = 0; j < c.steps; ++j) chans.push_back(channels::random_cptp(rng, c.d, c.d, 2));
        return proc::markov_tensor(qla::random_density(rng, c.d), chans);
    }
    if (c.kind == "dephasing-markov") {
        std::vector<Channel> chans(c.steps, channels::dephasing(1.0, c.gamma_t));
        return proc::markov_tensor(Mat::Constant(2, 2, 0.5), chans);
    }
    if (c.kind == "circuit") {
        const int n = c.d * c.d_env;
        std::vector<Mat> us;
        Mat rho = qla::random_density(rng, n);
        for (int j = 0; j < c.steps; ++j) us.push_back(qla::random_unitary(rng, n));
        return proc::process_from_circuit(rho, c.d, c.d_env, us);
    }
    throw UsageError("unknown --kind " + c.kind +
                     " (shallow-pocket, stern-gerlach, superchannel, markov, dephasing-markov, circuit)");
}

Channel channel_kind(const Config& c, double time) {
    if (c.kind == "dephasing") return channels::dephasing(c.gamma, time);
    if (c.kind == "xz") return channels::xz_oscillatory(1.0, time);
    if (c.kind == "amplitude-damping") return channels::amplitude_damping(std::exp(-c.gamma * time));
    throw UsageError("unknown --kind " + c.kind + " (dephasing, xz, amplitude-damping)");
}

// ------------------------------------------------------------------- demos

int demo_shallow_pocket(const Config& c) {
    ProcessTensor t = proc::shallow_pocket(c.gamma_t, c.steps);
    ojson j;
    j["demo"] = "shallow-pocket";
    j["gamma_t"] = c.gamma_t;
    j["steps"] = c.steps;
    auto cr = proc::check_causality(t, c.tol);
    j["causality"] = causality_json(cr);
    if (c.steps == 2) {
        j["compressed_choi"] = mat_json(proc::shallow_pocket_compressed(t), {2, 2});
        Mat rho = t.choi / t.choi.trace();
        double mi = qla::q_mutual_info(CMatrix(t.dims(), rho), {0, 1, 2});
        j["mutual_information_nats"] = mi;
        j["mutual_information_bits"] = mi / std::log(2.0);
        RVec ev = qla::clamped_spectrum(rho);
        j["spectrum"] = std::vector<double>(ev.data(), ev.data() + 4);
        Mat id = proc::op_choi(channels::identity(2)), x = proc::op_choi(channels::unitary(qla::pauli(1)));
        auto through = [&](const Mat& op) {
            return qla::permute(proc::contract_time(t, 1, op).choi, {2, 2}, {1, 0});
        };
        j["channel_given_identity"] = mat_json(through(id), {2, 2});
        j["channel_given_x"] = mat_json(through(x), {2, 2});
    }
    auto nr = memory::nonmarkov_rel_entropy(t);
    j["nonmarkovianity_rel_entropy"] = nr.nr;
    j["is_markov"] = memory::is_markov(t, c.tol).markov;
    emit(c, j);
    return cr.ok ? 0 : 2;
}

int demo_stern_gerlach(const Config& c) {
    ProcessTensor sg = proc::stern_gerlach();
    auto zproj = [](int k) { return qla::ket_bra(2, k, k); };
    auto xproj = [](int k) {
        Mat p = Mat::Constant(2, 2, 0.5);
        p(0, 1) = p(1, 0) = k == 0 ? 0.5 : -0.5;
        return p;
    };
    const char* zn[2] = {"z+", "z-"};
    const char* xn[2] = {"x+", "x-"};
    ojson rows = ojson::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "t1,t2,t3,probability\n";
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int e = 0; e < 2; ++e) {
                double p = proc::born_multi(sg, {proc::op_choi(Channel::from_kraus({zproj(a)})),
                                                 proc::op_choi(Channel::from_kraus({xproj(b)})),
                                                 proc::effect_choi(zproj(e))});
                ojson r;
                r["sequence"] = {zn[a], xn[b], zn[e]};
                r["probability"] = p;
                rows.push_back(r);
                csv << zn[a] << "," << xn[b] << "," << zn[e] << "," << p << "\n";
            }
    double summed = 0;
    for (int b = 0; b < 2; ++b)
        summed += proc::born_multi(sg, {proc::op_choi(Channel::from_kraus({zproj(0)})),
                                        proc::op_choi(Channel::from_kraus({xproj(b)})), proc::effect_choi(zproj(0))});
    double none = proc::born_multi(sg, {proc::op_choi(Channel::from_kraus({zproj(0)})),
                                        proc::op_choi(channels::identity(2)), proc::effect_choi(zproj(0))});
    if (c.format == "csv") {
        csv << "z+,sum,z+," << summed << "\n" << "z+,none,z+," << none << "\n";
        emit_text(c, csv.str());
        return 0;
    }
    ojson j;
    j["demo"] = "stern-gerlach";
    j["sequences"] = rows;
    j["marginal_summed_t2"] = summed;
    j["no_measurement_t2"] = none;
    emit(c, j);
    return 0;
}

int demo_initial_correlations(const Config& c) {
    Mat rse = proc::correlated_state(c.a1, c.a2, c.a3, c.g);
    ProcessTensor sc = proc::superchannel_build(rse, 2, 2, proc::xyz_interaction(c.omega_t));
    ojson j;
    j["demo"] = "initial-correlations";
    j["params"] = {{"a1", c.a1}, {"a2", c.a2}, {"a3", c.a3}, {"g", c.g}, {"omega_t", c.omega_t}};
    j["superchannel"] = proc::to_json(sc);
    j["superchannel_min_eig"] = qla::min_eig(sc.choi);
    auto cr = proc::check_causality(sc, c.tol);
    j["causality"] = causality_json(cr);
    double cw = std::cos(2 * c.omega_t), sw = std::sin(2 * c.omega_t);
    j["example1_ncp_eigenvalues"] = {0.5 * (1 - cw * cw + c.g * cw * sw), 0.5 * (1 - cw * cw - c.g * cw * sw)};
    emit(c, j);
    return cr.ok ? 0 : 2;
}

int demo_classical(const Config& c, const std::string& kind) {
    using namespace classical;
    JointDist jd;
    ojson extra;
    if (kind == "coin") {
        jd = coin_with_interventions(c.p, CoinIntervention::Flip);
        extra["p_f2_heads_flip"] = marginalize(jd, {1}).probs[0];
        extra["p_f2_heads_identity"] = marginalize(coin_no_intervention(c.p), {1}).probs[0];
    } else if (kind == "parity") {
        jd = parity_process();
        extra["cmi_f3_m12_h0"] = cmi(jd, {3}, {1, 2}, {0});
    } else if (kind == "fair-die") {
        jd = markov_chain(Dist::Constant(6, 1.0 / 6), fair_die(), c.steps);
    } else if (kind == "perturbed-die") {
        jd = markov_chain(Dist::Constant(6, 1.0 / 6), perturbed_die(c.p, c.q, c.s), c.steps);
    } else if (kind == "escalating-die") {
        jd = escalating_die(c.tosses);
    } else if (kind == "long-memory") {
        jd = long_memory(c.p, c.lag, c.d, c.times);
    } else {
        throw UsageError("unknown classical kind " + kind +
                         " (coin, parity, fair-die, perturbed-die, escalating-die, long-memory)");
    }
    if (c.format == "csv") {
        emit_text(c, csv_joint(jd));
        return 0;
    }
    ojson j;
    j["demo"] = "classical-" + kind;
    j["joint"] = to_json(jd);
    j["markov_order"] = markov_order_estimate(jd);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    emit(c, j);
    return 0;
}

// ------------------------------------------------------------------ checks

int check_channel(const Config& c, bool cp) {
    Channel ch = channels::channel_from_json(read_json(c.in));
    ojson j;
    bool ok;
    if (cp) {
        auto r = channels::is_cp(ch);
        ok = r.ok;
        j["check"] = "cp";
        j["ok"] = ok;
        j["min_eig"] = r.min_eig;
    } else {
        auto r = channels::is_tp(ch, c.tol);
        ok = r.ok;
        j["check"] = "tp";
        j["ok"] = ok;
        j["residual"] = r.residual;
    }
    emit(c, j);
    return ok ? 0 : 2;
}

int check_causality(const Config& c) {
    ProcessTensor t = proc::process_from_json(read_json(c.in));
    auto r = proc::check_causality(t, c.tol);
    ojson j = causality_json(r);
    emit(c, j);
    return r.ok ? 0 : 2;
}

int check_markov(const Config& c) {
    ProcessTensor t = proc::process_from_json(read_json(c.in));
    auto v = memory::is_markov(t, c.tol);
    auto nr = memory::nonmarkov_rel_entropy(t);
    ojson j;
    j["markov"] = v.markov;
    j["distance_to_product"] = v.distance;
    j["nonmarkovianity_rel_entropy"] = nr.nr;
    j["causal_break_independent"] = v.breaks.independent;
    j["causal_break_max_deviation"] = v.breaks.max_deviation;
    j["bond_dims"] = memory::mpo_bond_dims(t);
    emit(c, j);
    return v.markov ? 0 : 2;
}

std::vector<int> parse_times(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("bad time index '" + tok + "' in --split");
        }
    }
    return out;
}

// "F=2 M=1 H=0" (times, comma separated lists allowed)
memory::Split parse_split(const ProcessTensor& t, const std::string& spec) {
    std::vector<int> f, m, h;
    std::stringstream ss(spec);
    std::string part;
    bool got_f = false, got_h = false;
    while (ss >> part) {
        auto eq = part.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--split expects F=.. M=.. H=..");
        std::string key = part.substr(0, eq);
        auto vals = parse_times(part.substr(eq + 1));
        if (key == "F") {
            f = vals;
            got_f = true;
        } else if (key == "M") {
            m = vals;
        } else if (key == "H") {
            h = vals;
            got_h = true;
        } else {
            throw UsageError("--split key must be F, M or H");
        }
    }
    if (!got_f || !got_h) throw UsageError("--split needs F and H");
    return memory::split_by_times(t, f, m, h);
}

// computational-basis elements on M: projectors on an input slot, measure-and-prepare on (i,o) pairs
std::vector<Mat> default_elements(const ProcessTensor& t, const memory::Split& s) {
    std::vector<Mat> els{Mat::Identity(1, 1)};
    std::size_t q = 0;
    while (q < s.M.size()) {
        const Slot& sl = t.slots[s.M[q]];
        std::vector<Mat> local;
        if (q + 1 < s.M.size() && t.slots[s.M[q + 1]].t == sl.t) {
            const int dout = t.slots[s.M[q + 1]].d;
            for (int a = 0; a < sl.d; ++a)
                for (int b = 0; b < dout; ++b)
                    local.push_back(proc::measure_prepare_choi(qla::ket_bra(sl.d, a, a), qla::ket_bra(dout, b, b)));
            q += 2;
        } else {
            for (int a = 0; a < sl.d; ++a) local.push_back(qla::ket_bra(sl.d, a, a));
            q += 1;
        }
        std::vector<Mat> nxt;
        for (const auto& e : els)
            for (const auto& l : local) nxt.push_back(qla::kron(e, l));
        els.swap(nxt);
    }
    return els;
}

std::vector<Mat> load_elements(const Config& c, const ProcessTensor& t, const memory::Split& s) {
    if (c.elements.empty()) return default_elements(t, s);
    std::vector<Mat> els;
    for (const auto& e : read_json(c.elements)) els.push_back(qla::cmatrix_from_json(e).m);
    return els;
}

ojson order_json(const memory::OrderTest& r) {
    ojson j;
    j["ok"] = r.ok;
    j["mutual_information"] = r.mutual_info;
    j["schmidt_rank"] = r.schmidt_rank;
    j["probability"] = r.probability;
    return j;
}

int check_order(const Config& c) {
    ProcessTensor t = proc::process_from_json(read_json(c.in));
    if (c.split.empty()) throw UsageError("check order needs --split");
    auto s = parse_split(t, c.split);
    auto r = memory::markov_order_test(t, s, load_elements(c, t, s), c.tol);
    ojson j = order_json(r);
    j["qcmi"] = memory::qcmi(t, s);
    emit(c, j);
    return r.ok ? 0 : 2;
}

// -------------------------------------------------------------- tomography

int tomo_state(const Config& c) {
    POVM p;
    std::vector<double> probs;
    Mat truth;
    if (!c.in.empty()) {
        auto j = read_json(c.in);
        p = tomo::povm_from_json(j.at("povm"));
        probs = j.at("probs").get<std::vector<double>>();
    } else {
        Rng rng(c.seed);
        p = tomo::random_ic_povm(rng, c.d);
        truth = qla::random_density(rng, c.d);
        probs = tomo::born_probs(truth, p);
    }
    Mat rho = tomo::state_tomography(probs, p);
    const int d = static_cast<int>(rho.rows());
    ojson j;
    j["state"] = mat_json(rho, {d});
    if (truth.size()) j["max_error"] = (rho - truth).cwiseAbs().maxCoeff();
    emit(c, j);
    return 0;
}

int tomo_channel(const Config& c) {
    std::vector<Mat> ins, outs;
    Channel truth;
    bool simulated = c.in.empty();
    if (!simulated) {
        auto j = read_json(c.in);
        for (const auto& m : j.at("inputs")) ins.push_back(qla::cmatrix_from_json(m).m);
        for (const auto& m : j.at("outputs")) outs.push_back(qla::cmatrix_from_json(m).m);
    } else {
        Rng rng(c.seed);
        truth = channels::random_cptp(rng, c.d, c.d, 2);
        for (int k = 0; k < c.d * c.d; ++k) {
            ins.push_back(qla::random_density(rng, c.d));
            outs.push_back(channels::apply(truth, ins.back()));
        }
    }
    Channel est = tomo::channel_tomography(ins, outs);
    ojson j;
    j["channel"] = channels::to_json(est);
    j["cp"] = channels::is_cp(est).ok;
    j["tp"] = channels::is_tp(est, c.tol).ok;
    if (simulated) j["max_error"] = (channels::choi(est) - channels::choi(truth)).cwiseAbs().maxCoeff();
    emit(c, j);
    return 0;
}

int tomo_process(const Config& c, int threads) {
    ProcessTensor t;
    Rng rng(c.seed);
    if (!c.in.empty()) {
        t = proc::process_from_json(read_json(c.in));
    } else {
        Mat rho = qla::random_density(rng, 4);
        std::vector<Mat> us;
        for (int j = 0; j < c.steps; ++j) us.push_back(qla::random_unitary(rng, 4));
        t = proc::process_from_circuit(rho, 2, 2, us);
    }
    proc::OpBasis b = proc::random_op_basis(rng, t);
    auto probs = proc::basis_probabilities(t, b, threads);
    ProcessTensor r = proc::reconstruct_process(probs, b, t.slots);
    ojson j;
    j["process"] = proc::to_json(r);
    j["sequences"] = probs.size();
    j["max_error"] = (r.choi - t.choi).cwiseAbs().maxCoeff();
    emit(c, j);
    return 0;
}

// --------------------------------------------------------------- witnesses

int witness_blp(const Config& c) {
    memory::BlpSeries b;
    Mat plus = Mat::Constant(2, 2, 0.5), minus = plus;
    minus(0, 1) = minus(1, 0) = -0.5;
    if (c.kind == "shallow-pocket") {
        Mat u = c.elements == "none" ? Mat(Mat::Identity(2, 2)) : qla::pauli(1);
        b = memory::blp_shallow_pocket(c.gamma, c.t, u, plus, qla::ket_bra(2, 0, 0), c.points);
    } else {
        Mat r = plus, s = minus;
        if (c.kind == "xz" || c.kind == "amplitude-damping") {
            r = qla::ket_bra(2, 0, 0);
            s = qla::ket_bra(2, 1, 1);
        }
        std::vector<double> ts;
        for (int k = 0; k < c.points; ++k) ts.push_back(c.t * k / std::max(1, c.points - 1));
        Config cc = c;
        b = memory::blp_channel_family([&](double tm) { return channel_kind(cc, tm); }, r, s, ts);
    }
    if (c.format == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "t,distance,verdict\n";
        for (std::size_t k = 0; k < b.t.size(); ++k)
            os << b.t[k] << "," << b.distance[k] << "," << (b.increase[k] ? "increase" : "ok") << "\n";
        emit_text(c, os.str());
    } else {
        ojson j;
        j["t"] = b.t;
        j["distance"] = b.distance;
        j["non_markovian"] = b.non_markovian;
        j["max_increase"] = b.max_increase;
        emit(c, j);
    }
    return b.non_markovian ? 2 : 0;
}

int witness_divisor(const Config& c) {
    auto d = memory::infer_divisor(channel_kind(c, c.t), channel_kind(c, c.s_time));
    ojson j;
    j["t"] = c.t;
    j["s"] = c.s_time;
    j["cp"] = d.cp;
    j["min_eig"] = d.min_eig;
    j["residual"] = d.residual;
    j["condition"] = d.cond;
    j["zeta"] = qla::to_json(CMatrix({2, 2}, {2, 2}, d.zeta));
    emit(c, j);
    return d.cp ? 0 : 2;
}

int witness_snapshot(const Config& c) {
    auto s = memory::snapshot_generator(channel_kind(c, c.t), c.t, c.steps < 2 ? 20 : c.steps);
    ojson j;
    j["ok"] = s.ok;
    j["diagnostic"] = s.diagnostic;
    if (s.ok) {
        j["generator"] = qla::to_json(CMatrix({2, 2}, {2, 2}, s.L));
        j["recon_error"] = s.recon_error;
        j["cp_semigroup"] = s.cp_semigroup;
        j["worst_eig"] = s.worst_eig;
        j["worst_s"] = s.worst_s;
    }
    emit(c, j);
    return s.ok && s.cp_semigroup ? 0 : 2;
}

// ------------------------------------------------------------------ memory

int memory_report(const Config& c) {
    ProcessTensor t = proc::process_from_json(read_json(c.in));
    ojson j;
    j["causality"] = causality_json(proc::check_causality(t, c.tol));
    auto nr = memory::nonmarkov_rel_entropy(t);
    j["nonmarkovianity_rel_entropy"] = nr.nr;
    ojson pc = ojson::array();
    for (auto [n, p] : nr.p_confusion) pc.push_back({{"n", n}, {"p", p}});
    j["p_confusion"] = pc;
    j["schatten_bound_p1"] = memory::schatten_bound(t, 1.0);
    auto v = memory::is_markov(t, c.tol);
    j["markov"] = v.markov;
    j["causal_break_max_deviation"] = v.breaks.max_deviation;
    j["bond_dims"] = memory::mpo_bond_dims(t);
    if (!c.split.empty()) {
        auto s = parse_split(t, c.split);
        j["qcmi"] = memory::qcmi(t, s);
        j["order_test"] = order_json(memory::markov_order_test(t, s, load_elements(c, t, s), c.tol));
    }
    emit(c, j);
    return 0;
}

// -------------------------------------------------------------------- proc

int proc_build(const Config& c) {
    ProcessTensor t = build_kind(c);
    emit(c, proc::to_json(t));
    return 0;
}

int proc_contract(const Config& c, const std::string& op_path) {
    ProcessTensor t = proc::process_from_json(read_json(c.in));
    if (op_path.empty()) throw UsageError("proc contract needs --op");
    auto sl = t.slots_of_time(c.time);
    if (sl.empty()) throw UsageError("no slots at --time " + std::to_string(c.time));
    auto oj = read_json(op_path);
    // channel json at an (i,o) time, a POVM element (CMatrix json) at the final input slot
    Mat op = sl.size() == 2 ? proc::op_choi(channels::channel_from_json(oj))
                            : proc::effect_choi(qla::cmatrix_from_json(oj).m);
    emit(c, proc::to_json(proc::contract_time(t, c.time, op)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qproc: channels, process tensors and memory diagnostics"};
    app.require_subcommand(1);
    Config cfg;
    std::function<int()> action;
    std::string op_path;

    auto common = [&](CLI::App* s) {
        s->add_option("--in", cfg.in, "input file");
        s->add_option("--out", cfg.out, "output file (stdout if absent)");
        s->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--tol", cfg.tol, "tolerance")->check(CLI::PositiveNumber);
        s->add_option("--seed", cfg.seed, "seed");
        s->add_option("--steps", cfg.steps, "number of steps or samples")->check(CLI::PositiveNumber);
    };
    auto params = [&](CLI::App* s) {
        s->add_option("--gamma-t", cfg.gamma_t);
        s->add_option("--omega-t", cfg.omega_t);
        s->add_option("--g", cfg.g);
        s->add_option("--p", cfg.p);
        s->add_option("--q", cfg.q);
        s->add_option("--s", cfg.s);
        s->add_option("--a1", cfg.a1);
        s->add_option("--a2", cfg.a2);
        s->add_option("--a3", cfg.a3);
        s->add_option("--lag", cfg.lag);
        s->add_option("--d", cfg.d)->check(CLI::Range(2, 8));
        s->add_option("--d-env", cfg.d_env)->check(CLI::Range(1, 8));
        s->add_option("--times", cfg.times)->check(CLI::PositiveNumber);
        s->add_option("--tosses", cfg.tosses)->check(CLI::PositiveNumber);
    };

    auto* demo = app.add_subcommand("demo", "run a worked example");
    demo->require_subcommand(1);
    auto* d_sp = demo->add_subcommand("shallow-pocket");
    auto* d_sg = demo->add_subcommand("stern-gerlach");
    auto* d_ic = demo->add_subcommand("initial-correlations");
    for (auto* s : {d_sp, d_sg, d_ic}) {
        common(s);
        params(s);
    }
    d_sp->callback([&] { action = [&] { return demo_shallow_pocket(cfg); }; });
    d_sg->callback([&] { action = [&] { return demo_stern_gerlach(cfg); }; });
    d_ic->callback([&] { action = [&] { return demo_initial_correlations(cfg); }; });
    for (std::string kind : {"coin", "parity", "fair-die", "perturbed-die", "escalating-die", "long-memory"}) {
        auto* s = demo->add_subcommand("classical-" + kind);
        common(s);
        params(s);
        s->callback([&, kind] { action = [&, kind] { return demo_classical(cfg, kind); }; });
    }

    auto add_build = [&](CLI::App* parent, const std::string& name) {
        auto* s = parent->add_subcommand(name, "build a process tensor");
        common(s);
        params(s);
        s->add_option("--kind", cfg.kind, "tensor kind")->required();
        s->callback([&] { action = [&] { return proc_build(cfg); }; });
    };
    add_build(&app, "build");

    auto* check = app.add_subcommand("check", "verify a property (exit 2 on failure)");
    check->require_subcommand(1);
    auto* c_cp = check->add_subcommand("cp");
    auto* c_tp = check->add_subcommand("tp");
    auto* c_ca = check->add_subcommand("causality");
    auto* c_mk = check->add_subcommand("markov");
    auto* c_or = check->add_subcommand("order");
    for (auto* s : {c_cp, c_tp, c_ca, c_mk, c_or}) common(s);
    c_or->add_option("--split", cfg.split, "e.g. \"F=2 M=1 H=0\" (time indices)");
    c_or->add_option("--elements", cfg.elements, "json list of CMatrix elements on M");
    c_cp->callback([&] { action = [&] { return check_channel(cfg, true); }; });
    c_tp->callback([&] { action = [&] { return check_channel(cfg, false); }; });
    c_ca->callback([&] { action = [&] { return check_causality(cfg); }; });
    c_mk->callback([&] { action = [&] { return check_markov(cfg); }; });
    c_or->callback([&] { action = [&] { return check_order(cfg); }; });

    int threads = 1;
    auto* tomo_cmd = app.add_subcommand("tomo", "linear-inversion tomography");
    tomo_cmd->require_subcommand(1);
    auto* t_st = tomo_cmd->add_subcommand("state");
    auto* t_ch = tomo_cmd->add_subcommand("channel");
    auto* t_pr = tomo_cmd->add_subcommand("process");
    for (auto* s : {t_st, t_ch, t_pr}) {
        common(s);
        params(s);
    }
    t_st->callback([&] { action = [&] { return tomo_state(cfg); }; });
    t_ch->callback([&] { action = [&] { return tomo_channel(cfg); }; });
    t_pr->callback([&] { action = [&] { return tomo_process(cfg, threads); }; });

    auto* wit = app.add_subcommand("witness", "non-Markovianity witnesses (exit 2 when memory is witnessed)");
    wit->require_subcommand(1);
    auto* w_blp = wit->add_subcommand("blp");
    auto* w_div = wit->add_subcommand("divisor");
    auto* w_snap = wit->add_subcommand("snapshot");
    for (auto* s : {w_blp, w_div, w_snap}) {
        common(s);
        s->add_option("--kind", cfg.kind, "dephasing, xz, amplitude-damping or shallow-pocket (blp)")->required();
        s->add_option("--gamma", cfg.gamma);
        s->add_option("--t", cfg.t);
    }
    w_blp->add_option("--points", cfg.points)->check(CLI::Range(2, 100000));
    w_blp->add_option("--intervention", cfg.elements, "x (default) or none, shallow-pocket only");
    w_div->add_option("--s", cfg.s_time, "intermediate time");
    w_blp->callback([&] { action = [&] { return witness_blp(cfg); }; });
    w_div->callback([&] { action = [&] { return witness_divisor(cfg); }; });
    w_snap->callback([&] { action = [&] { return witness_snapshot(cfg); }; });

    auto* mem = app.add_subcommand("memory", "memory analysis");
    mem->require_subcommand(1);
    auto* m_rep = mem->add_subcommand("report");
    common(m_rep);
    m_rep->add_option("--split", cfg.split, "e.g. \"F=2 M=1 H=0\" (time indices)");
    m_rep->add_option("--elements", cfg.elements, "json list of CMatrix elements on M");
    m_rep->callback([&] { action = [&] { return memory_report(cfg); }; });

    auto* pr = app.add_subcommand("proc", "process tensor files");
    pr->require_subcommand(1);
    add_build(pr, "build");
    auto* p_check = pr->add_subcommand("check");
    common(p_check);
    p_check->callback([&] { action = [&] { return check_causality(cfg); }; });
    auto* p_con = pr->add_subcommand("contract");
    common(p_con);
    p_con->add_option("--time", cfg.time)->required();
    p_con->add_option("--op", op_path, "channel json, or an effect matrix at the final time");
    p_con->callback([&] { action = [&] { return proc_contract(cfg, op_path); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        threads = threads_from_env();
        return action();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "malformed json: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
