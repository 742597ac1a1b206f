#include "textrl/net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "textrl/kernels.hpp"
#include "textrl/rng.hpp"

namespace textrl {

const char* const kGateNames[kGateCount] = {"input", "forget", "output", "candidate"};

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_finite(double v, const char* layer) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("non-finite value in ") + layer);
}

NetworkParams make_shapes(const NetConfig& cfg, std::size_t vocab_size) {
    NetworkParams p;
    p.cfg = cfg;
    p.vocab_size = vocab_size;
    p.embedding.assign(vocab_size * cfg.embedding_dim, 0.0);
    for (std::size_t g = 0; g < kGateCount; ++g) {
        p.lstm.wx[g].assign(cfg.lstm_dim * cfg.embedding_dim, 0.0);
        p.lstm.wh[g].assign(cfg.lstm_dim * cfg.lstm_dim, 0.0);
        p.lstm.b[g].assign(cfg.lstm_dim, 0.0);
    }
    p.dense_state.w.assign(cfg.dense_dim * cfg.lstm_dim, 0.0);
    p.dense_state.b.assign(cfg.dense_dim, 0.0);
    p.dense_action.w.assign(cfg.dense_dim * cfg.lstm_dim, 0.0);
    p.dense_action.b.assign(cfg.dense_dim, 0.0);
    return p;
}

} // namespace

std::vector<BlockView> param_blocks(NetworkParams& p) {
    std::vector<BlockView> blocks;
    blocks.push_back({"embedding", p.embedding.data(), p.embedding.size()});
    for (std::size_t g = 0; g < kGateCount; ++g) {
        const std::string gate = kGateNames[g];
        blocks.push_back({"lstm_wx_" + gate, p.lstm.wx[g].data(), p.lstm.wx[g].size()});
        blocks.push_back({"lstm_wh_" + gate, p.lstm.wh[g].data(), p.lstm.wh[g].size()});
        blocks.push_back({"lstm_b_" + gate, p.lstm.b[g].data(), p.lstm.b[g].size()});
    }
    blocks.push_back({"dense_state_w", p.dense_state.w.data(), p.dense_state.w.size()});
    blocks.push_back({"dense_state_b", p.dense_state.b.data(), p.dense_state.b.size()});
    blocks.push_back({"dense_action_w", p.dense_action.w.data(), p.dense_action.w.size()});
    blocks.push_back({"dense_action_b", p.dense_action.b.data(), p.dense_action.b.size()});
    return blocks;
}

OptimizerState OptimizerState::create(NetworkParams& params, double learning_rate) {
    OptimizerState opt;
    opt.learning_rate = learning_rate;
    for (const BlockView& block : param_blocks(params))
        opt.cache.emplace_back(block.size, 0.0);
    return opt;
}

NetworkParams init_params(const NetConfig& cfg, std::size_t vocab_size, uint64_t seed) {
    if (cfg.embedding_dim < 1 || cfg.lstm_dim < 1 || cfg.dense_dim < 1)
        throw std::invalid_argument("network dimensions must be >= 1");
    if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");

    NetworkParams p = make_shapes(cfg, vocab_size);
    Rng rng(derive_seed(seed, "init_params"));
    const double r = cfg.init_range;
    auto fill = [&](std::vector<double>& block) {
        for (double& w : block) w = rng.uniform(-r, r);
    };
    fill(p.embedding);
    for (std::size_t g = 0; g < kGateCount; ++g) {
        fill(p.lstm.wx[g]);
        fill(p.lstm.wh[g]);
    }
    fill(p.dense_state.w);
    fill(p.dense_action.w);
    std::fill(p.lstm.b[kGateForget].begin(), p.lstm.b[kGateForget].end(), 1.0);
    return p;
}

void lstm_step(const NetworkParams& p, const double* input_vec,
               const double* h_prev, const double* c_prev, double* h_out, double* c_out) {
    const auto& k = kernels::active();
    const std::size_t L = p.cfg.lstm_dim;
    const std::size_t E = p.cfg.embedding_dim;

    for (std::size_t d = 0; d < E; ++d) check_finite(input_vec[d], "lstm input");

    std::array<std::vector<double>, kGateCount> pre;
    for (std::size_t g = 0; g < kGateCount; ++g) {
        pre[g] = p.lstm.b[g];
        k.matvec_acc(pre[g].data(), p.lstm.wx[g].data(), input_vec, L, E);
        k.matvec_acc(pre[g].data(), p.lstm.wh[g].data(), h_prev, L, L);
    }
    for (std::size_t u = 0; u < L; ++u) {
        const double i = sigmoid(pre[kGateInput][u]);
        const double f = sigmoid(pre[kGateForget][u]);
        const double o = sigmoid(pre[kGateOutput][u]);
        const double g = std::tanh(pre[kGateCandidate][u]);
        c_out[u] = f * c_prev[u] + i * g;
        h_out[u] = o * std::tanh(c_out[u]);
        check_finite(h_out[u], "lstm cell");
    }
}

namespace {

// Per-timestep forward cache of one branch, pad positions excluded.
struct LstmTrace {
    std::vector<TokenId> tokens;
    std::vector<std::array<std::vector<double>, kGateCount>> gates; // post-activation
    std::vector<std::vector<double>> c;
    std::vector<std::vector<double>> h;
};

struct BranchTrace {
    LstmTrace lstm;
    std::vector<double> dense_out; // u = tanh(W h_T + b)
};

BranchTrace run_branch(const NetworkParams& p, const TokenSeq& seq, Branch branch) {
    const auto& k = kernels::active();
    const std::size_t L = p.cfg.lstm_dim;
    const std::size_t E = p.cfg.embedding_dim;
    const std::size_t D = p.cfg.dense_dim;

    BranchTrace trace;
    std::vector<double> h(L, 0.0), c(L, 0.0);
    for (TokenId id : seq.ids) {
        if (id == kPadId) continue; // mask: padding never updates the state
        if (id >= p.vocab_size)
            throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
        const double* x = p.embedding.data() + static_cast<std::size_t>(id) * E;

        std::array<std::vector<double>, kGateCount> pre;
        for (std::size_t g = 0; g < kGateCount; ++g) {
            pre[g] = p.lstm.b[g];
            k.matvec_acc(pre[g].data(), p.lstm.wx[g].data(), x, L, E);
            k.matvec_acc(pre[g].data(), p.lstm.wh[g].data(), h.data(), L, L);
        }
        std::vector<double> c_next(L), h_next(L);
        for (std::size_t u = 0; u < L; ++u) {
            pre[kGateInput][u] = sigmoid(pre[kGateInput][u]);
            pre[kGateForget][u] = sigmoid(pre[kGateForget][u]);
            pre[kGateOutput][u] = sigmoid(pre[kGateOutput][u]);
            pre[kGateCandidate][u] = std::tanh(pre[kGateCandidate][u]);
            c_next[u] = pre[kGateForget][u] * c[u] + pre[kGateInput][u] * pre[kGateCandidate][u];
            h_next[u] = pre[kGateOutput][u] * std::tanh(c_next[u]);
            check_finite(h_next[u], "lstm cell");
        }
        trace.lstm.tokens.push_back(id);
        trace.lstm.gates.push_back(std::move(pre));
        c = std::move(c_next);
        h = std::move(h_next);
        trace.lstm.c.push_back(c);
        trace.lstm.h.push_back(h);
    }
    if (trace.lstm.tokens.empty())
        throw std::invalid_argument("branch_forward: empty sequence");

    const DenseWeights& dense = p.dense(branch);
    std::vector<double> u = dense.b;
    k.matvec_acc(u.data(), dense.w.data(), h.data(), D, L);
    for (double& v : u) {
        v = std::tanh(v);
        check_finite(v, "dense layer");
    }
    trace.dense_out = std::move(u);
    return trace;
}

} // namespace

std::vector<double> branch_forward(const NetworkParams& p, const TokenSeq& seq, Branch branch) {
    return run_branch(p, seq, branch).dense_out;
}

double cosine_similarity(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("cosine_similarity: length mismatch");
    const auto& k = kernels::active();
    const double nx = std::sqrt(k.dot(x.data(), x.data(), x.size()));
    const double ny = std::sqrt(k.dot(y.data(), y.data(), y.size()));
    if (nx == 0.0 || ny == 0.0)
        throw std::domain_error("cosine_similarity: zero-norm input");
    const double c = k.dot(x.data(), y.data(), x.size()) / (nx * ny);
    return std::clamp(c, -1.0, 1.0);
}

double q_value(const NetworkParams& p, const TokenSeq& state_seq, const TokenSeq& action_seq) {
    return p.reward_scale * cosine_similarity(branch_forward(p, state_seq, Branch::state),
                                              branch_forward(p, action_seq, Branch::action));
}

std::vector<double> q_values(const NetworkParams& p, const TokenSeq& state_seq,
                             const std::vector<TokenSeq>& action_seqs) {
    const std::vector<double> s = branch_forward(p, state_seq, Branch::state);
    std::vector<double> out;
    out.reserve(action_seqs.size());
    for (const TokenSeq& a : action_seqs)
        out.push_back(p.reward_scale * cosine_similarity(s, branch_forward(p, a, Branch::action)));
    return out;
}

double mse_loss(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("mse_loss: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("mse_loss: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(predictions.size());
}

double batch_loss(const NetworkParams& p, const std::vector<BatchEntry>& batch) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    std::vector<double> preds, targets;
    preds.reserve(batch.size());
    targets.reserve(batch.size());
    for (const BatchEntry& e : batch) {
        preds.push_back(q_value(p, e.state_seq, e.action_seq));
        targets.push_back(e.target);
    }
    return mse_loss(preds, targets);
}

namespace {

// BPTT for one branch given d(dense output); accumulates into the shared
// embedding/LSTM gradients and the branch's dense gradients.
void branch_backward(const NetworkParams& p, const BranchTrace& trace, Branch branch,
                     const std::vector<double>& d_out, NetworkParams& g) {
    const auto& k = kernels::active();
    const std::size_t L = p.cfg.lstm_dim;
    const std::size_t E = p.cfg.embedding_dim;
    const std::size_t D = p.cfg.dense_dim;
    const std::size_t T = trace.lstm.tokens.size();

    const DenseWeights& dense = p.dense(branch);
    DenseWeights& gdense = g.dense(branch);

    // Dense head: u = tanh(z), z = W h_T + b.
    std::vector<double> dz(D);
    for (std::size_t j = 0; j < D; ++j)
        dz[j] = d_out[j] * (1.0 - trace.dense_out[j] * trace.dense_out[j]);
    const std::vector<double>& h_last = trace.lstm.h[T - 1];
    k.ger_acc(gdense.w.data(), dz.data(), h_last.data(), D, L);
    k.axpy(gdense.b.data(), 1.0, dz.data(), D);

    std::vector<double> dh(L, 0.0), dc(L, 0.0);
    k.matvec_t_acc(dh.data(), dense.w.data(), dz.data(), D, L);

    std::array<std::vector<double>, kGateCount> da;
    for (auto& v : da) v.assign(L, 0.0);

    for (std::size_t t = T; t-- > 0;) {
        const auto& gates = trace.lstm.gates[t];
        const std::vector<double>& c_t = trace.lstm.c[t];
        const std::vector<double>* c_prev = t > 0 ? &trace.lstm.c[t - 1] : nullptr;
        const std::vector<double>* h_prev = t > 0 ? &trace.lstm.h[t - 1] : nullptr;

        for (std::size_t u = 0; u < L; ++u) {
            const double i = gates[kGateInput][u];
            const double f = gates[kGateForget][u];
            const double o = gates[kGateOutput][u];
            const double cand = gates[kGateCandidate][u];
            const double tc = std::tanh(c_t[u]);
            const double cp = c_prev ? (*c_prev)[u] : 0.0;

            const double do_ = dh[u] * tc;
            const double dct = dc[u] + dh[u] * o * (1.0 - tc * tc);
            const double di = dct * cand;
            const double dg = dct * i;
            const double df = dct * cp;

            da[kGateInput][u] = di * i * (1.0 - i);
            da[kGateForget][u] = df * f * (1.0 - f);
            da[kGateOutput][u] = do_ * o * (1.0 - o);
            da[kGateCandidate][u] = dg * (1.0 - cand * cand);
            dc[u] = dct * f;
        }

        const TokenId token = trace.lstm.tokens[t];
        const double* x = p.embedding.data() + static_cast<std::size_t>(token) * E;
        double* demb = g.embedding.data() + static_cast<std::size_t>(token) * E;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t gate = 0; gate < kGateCount; ++gate) {
            k.ger_acc(g.lstm.wx[gate].data(), da[gate].data(), x, L, E);
            if (h_prev) k.ger_acc(g.lstm.wh[gate].data(), da[gate].data(), h_prev->data(), L, L);
            k.axpy(g.lstm.b[gate].data(), 1.0, da[gate].data(), L);
            k.matvec_t_acc(demb, p.lstm.wx[gate].data(), da[gate].data(), L, E);
            k.matvec_t_acc(dh.data(), p.lstm.wh[gate].data(), da[gate].data(), L, L);
        }
    }
}

} // namespace

Gradients backward(const NetworkParams& p, const std::vector<BatchEntry>& batch) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    const auto& k = kernels::active();
    const std::size_t D = p.cfg.dense_dim;

    Gradients grads;
    grads.blocks = make_shapes(p.cfg, p.vocab_size);

    std::vector<double> preds, targets;
    preds.reserve(batch.size());
    for (const BatchEntry& e : batch) {
        if (!std::isfinite(e.target)) throw std::invalid_argument("backward: non-finite target");
        targets.push_back(e.target);
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (const BatchEntry& entry : batch) {
        const BranchTrace st = run_branch(p, entry.state_seq, Branch::state);
        const BranchTrace at = run_branch(p, entry.action_seq, Branch::action);
        const std::vector<double>& x = st.dense_out;
        const std::vector<double>& y = at.dense_out;

        const double nx = std::sqrt(k.dot(x.data(), x.data(), D));
        const double ny = std::sqrt(k.dot(y.data(), y.data(), D));
        if (nx == 0.0 || ny == 0.0)
            throw std::domain_error("backward: zero-norm dense activation in cosine layer");
        const double cos = k.dot(x.data(), y.data(), D) / (nx * ny);
        const double pred = p.reward_scale * cos;
        check_finite(pred, "cosine layer");
        preds.push_back(pred);

        // d(batch MSE)/d(cos), then through cs(x,y).
        const double dcos = 2.0 * (pred - entry.target) * inv_b * p.reward_scale;
        std::vector<double> dx(D), dy(D);
        for (std::size_t j = 0; j < D; ++j) {
            dx[j] = dcos * (y[j] / (nx * ny) - cos * x[j] / (nx * nx));
            dy[j] = dcos * (x[j] / (nx * ny) - cos * y[j] / (ny * ny));
        }
        branch_backward(p, st, Branch::state, dx, grads.blocks);
        branch_backward(p, at, Branch::action, dy, grads.blocks);
    }
    grads.loss = mse_loss(preds, targets);
    check_finite(grads.loss, "loss");
    return grads;
}

void rmsprop_step(NetworkParams& params, OptimizerState& opt, Gradients& grads) {
    const auto& k = kernels::active();
    const auto pblocks = param_blocks(params);
    const auto gblocks = param_blocks(grads.blocks);
    if (opt.cache.size() != pblocks.size())
        throw std::invalid_argument("rmsprop_step: optimizer state shape mismatch");
    for (std::size_t i = 0; i < pblocks.size(); ++i) {
        if (pblocks[i].size != gblocks[i].size || opt.cache[i].size() != pblocks[i].size)
            throw std::invalid_argument("rmsprop_step: block shape mismatch at " + pblocks[i].name);
        k.rmsprop_update(pblocks[i].data, opt.cache[i].data(), gblocks[i].data, pblocks[i].size,
                         opt.decay, opt.learning_rate, opt.epsilon_stability);
    }
}

FiniteDiffReport finite_diff_check(const NetworkParams& params, const std::vector<BatchEntry>& batch,
                                   double tolerance, double step) {
    NetworkParams work = params;
    Gradients analytic = backward(work, batch);

    FiniteDiffReport report;
    report.tolerance = tolerance;
    const auto pblocks = param_blocks(work);
    const auto gblocks = param_blocks(analytic.blocks);
    for (std::size_t b = 0; b < pblocks.size(); ++b) {
        double worst = 0.0;
        for (std::size_t i = 0; i < pblocks[b].size; ++i) {
            double& theta = pblocks[b].data[i];
            const double saved = theta;
            theta = saved + step;
            const double up = batch_loss(work, batch);
            theta = saved - step;
            const double down = batch_loss(work, batch);
            theta = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic_g = gblocks[b].data[i];
            const double denom = std::max({std::abs(numeric), std::abs(analytic_g), 1e-3});
            worst = std::max(worst, std::abs(numeric - analytic_g) / denom);
        }
        report.blocks.push_back({pblocks[b].name, worst});
    }
    report.pass = std::all_of(report.blocks.begin(), report.blocks.end(),
                              [&](const auto& b) { return b.max_rel_error <= tolerance; });
    return report;
}

std::string FiniteDiffReport::to_string() const {
    std::ostringstream out;
    char buf[64];
    for (const auto& block : blocks) {
        std::snprintf(buf, sizeof buf, "%.3e", block.max_rel_error);
        out << block.name << ": " << buf
            << (block.max_rel_error <= tolerance ? "" : "  <-- above tolerance") << "\n";
    }
    out << (pass ? "pass" : "fail") << "\n";
    return out.str();
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

} // namespace

void save_params(const NetworkParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    write_u32(out, static_cast<uint32_t>(params.cfg.embedding_dim));
    write_u32(out, static_cast<uint32_t>(params.cfg.lstm_dim));
    write_u32(out, static_cast<uint32_t>(params.cfg.dense_dim));
    write_u32(out, static_cast<uint32_t>(params.vocab_size));
    write_f64(out, params.reward_scale);
    NetworkParams& mutable_params = const_cast<NetworkParams&>(params);
    for (const BlockView& block : param_blocks(mutable_params))
        out.write(reinterpret_cast<const char*>(block.data),
                  static_cast<std::streamsize>(block.size * sizeof(double)));
    if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

NetworkParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    NetConfig cfg;
    cfg.embedding_dim = read_u32(in);
    cfg.lstm_dim = read_u32(in);
    cfg.dense_dim = read_u32(in);
    const uint32_t vocab_size = read_u32(in);
    const double reward_scale = read_f64(in);
    if (!in || cfg.embedding_dim == 0 || cfg.lstm_dim == 0 || cfg.dense_dim == 0 || vocab_size < 2)
        throw std::runtime_error("corrupt checkpoint header: " + path);
    NetworkParams params = make_shapes(cfg, vocab_size);
    params.reward_scale = reward_scale;
    for (const BlockView& block : param_blocks(params)) {
        in.read(reinterpret_cast<char*>(block.data),
                static_cast<std::streamsize>(block.size * sizeof(double)));
        if (!in) throw std::runtime_error("truncated checkpoint block " + block.name + ": " + path);
    }
    return params;
}

} // namespace textrl
