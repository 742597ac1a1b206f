#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "textrl/text.hpp"

namespace textrl {

struct NetConfig {
    std::size_t embedding_dim = 16;
    std::size_t lstm_dim = 32;
    std::size_t dense_dim = 8;
    double init_range = 0.05;
};

// Gate order is fixed everywhere (weights, gradients, checkpoints).
constexpr std::size_t kGateInput = 0;
constexpr std::size_t kGateForget = 1;
constexpr std::size_t kGateOutput = 2;
constexpr std::size_t kGateCandidate = 3;
constexpr std::size_t kGateCount = 4;
extern const char* const kGateNames[kGateCount];

struct LstmWeights {
    // Per gate: wx (lstm_dim x embedding_dim), wh (lstm_dim x lstm_dim),
    // b (lstm_dim). Row-major, rows = output units.
    std::array<std::vector<double>, kGateCount> wx;
    std::array<std::vector<double>, kGateCount> wh;
    std::array<std::vector<double>, kGateCount> b;
};

struct DenseWeights {
    std::vector<double> w; // dense_dim x lstm_dim, row-major
    std::vector<double> b; // dense_dim
};

enum class Branch { state, action };

// All trainable weights. The embedding and LSTM blocks are shared between
// the state and action paths; only the dense heads differ.
struct NetworkParams {
    NetConfig cfg;
    std::size_t vocab_size = 0;
    std::vector<double> embedding; // vocab_size x embedding_dim
    LstmWeights lstm;
    DenseWeights dense_state;
    DenseWeights dense_action;
    double reward_scale = 1.0;

    const DenseWeights& dense(Branch br) const {
        return br == Branch::state ? dense_state : dense_action;
    }
    DenseWeights& dense(Branch br) {
        return br == Branch::state ? dense_state : dense_action;
    }
};

// Named view over one parameter (or gradient) block; blocks enumerate in the
// declared field order used by checkpoints and the optimizer.
struct BlockView {
    std::string name;
    double* data;
    std::size_t size;
};
std::vector<BlockView> param_blocks(NetworkParams& params);

struct Gradients {
    NetworkParams blocks; // same shapes as the parameters, reward_scale unused
    double loss = 0.0;
};

struct OptimizerState {
    double learning_rate = 0.001;
    double decay = 0.9;
    double epsilon_stability = 1e-8;
    std::vector<std::vector<double>> cache; // squared-gradient cache per block

    static OptimizerState create(NetworkParams& params, double learning_rate);
};

// Weights uniform in [-init_range, init_range], biases zero except the
// forget-gate bias which starts at 1. Deterministic for a given seed.
NetworkParams init_params(const NetConfig& cfg, std::size_t vocab_size, uint64_t seed);

// Standard LSTM cell: i,f,o sigmoid gates, candidate g = tanh,
// c = f*c_prev + i*g, h = o*tanh(c).
void lstm_step(const NetworkParams& params, const double* input_vec,
               const double* h_prev, const double* c_prev, double* h_out, double* c_out);

// Embeds the ids (pad positions skipped), runs the shared LSTM, applies the
// branch dense layer with tanh. Output entries are in (-1, 1).
std::vector<double> branch_forward(const NetworkParams& params, const TokenSeq& seq, Branch branch);

double cosine_similarity(const std::vector<double>& x, const std::vector<double>& y);

// reward_scale * cos(state branch, action branch); always within
// [-reward_scale, reward_scale].
double q_value(const NetworkParams& params, const TokenSeq& state_seq, const TokenSeq& action_seq);

// State branch evaluated once, one cosine per candidate action.
std::vector<double> q_values(const NetworkParams& params, const TokenSeq& state_seq,
                             const std::vector<TokenSeq>& action_seqs);

double mse_loss(const std::vector<double>& predictions, const std::vector<double>& targets);

struct BatchEntry {
    TokenSeq state_seq;
    TokenSeq action_seq;
    double target = 0.0;
};

// Forward-only batch MSE (used by the finite-difference oracle).
double batch_loss(const NetworkParams& params, const std::vector<BatchEntry>& batch);

// Exact gradients of the batch MSE: backpropagation through time over the
// LSTM, shared embeddings accumulating both branches, and the cosine head.
// The pad embedding row receives zero gradient.
Gradients backward(const NetworkParams& params, const std::vector<BatchEntry>& batch);

// cache = decay*cache + (1-decay)*g^2; p -= lr*g/(sqrt(cache)+eps), elementwise.
void rmsprop_step(NetworkParams& params, OptimizerState& opt, Gradients& grads);

struct FiniteDiffReport {
    struct BlockResult {
        std::string name;
        double max_rel_error = 0.0;
    };
    std::vector<BlockResult> blocks;
    bool pass = false;
    double tolerance = 0.0;
    std::string to_string() const;
};

// Central-difference check of backward, per parameter block.
FiniteDiffReport finite_diff_check(const NetworkParams& params, const std::vector<BatchEntry>& batch,
                                   double tolerance, double step = 1e-5);

// Flat binary checkpoint: u32 embedding_dim, lstm_dim, dense_dim, vocab_size;
// f64 reward_scale; then every block in declared order, f64 little-endian.
void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

} // namespace textrl
