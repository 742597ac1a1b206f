#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "textrl/net.hpp"
#include "textrl/simulator.hpp"
#include "textrl/text.hpp"

namespace textrl {

// One transition tuple. next_action_seqs empty <=> the transition ended the
// episode (real ending or truncation), in which case targets never bootstrap.
struct Experience {
    TokenSeq state_seq;
    TokenSeq action_seq;
    double reward = 0.0;
    TokenSeq next_state_seq;
    std::vector<TokenSeq> next_action_seqs;
    std::string game_id;

    bool terminal() const { return next_action_seqs.empty(); }
};

// Ring buffer with FIFO eviction plus an index of positive-reward entries
// for prioritized sampling. Eviction removes entries from both structures.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Experience e);
    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t positive_count() const { return positive_slots_.size(); }
    const Experience& at(std::size_t slot) const { return buffer_[slot]; }
    bool is_positive(std::size_t slot) const { return slot_to_positive_[slot] >= 0; }
    std::size_t positive_slot(std::size_t i) const { return positive_slots_[i]; }

private:
    std::size_t capacity_;
    std::vector<Experience> buffer_;
    std::size_t head_ = 0;
    std::vector<std::size_t> positive_slots_;
    std::vector<long> slot_to_positive_; // -1 when the slot holds a non-positive entry
};

// floor(p*b) entries uniformly from the positive index (with replacement if
// it is smaller than needed), the rest uniformly from the non-positive
// entries so each batch carries exactly the prioritized fraction. With no
// positives, or p*b rounding to zero, the whole batch is uniform.
std::vector<const Experience*> sample_batch(const ReplayMemory& mem, int batch_size,
                                            double prioritized_fraction, Rng& rng);

// Per-episode visit counts keyed on the exact (state text, action text) pair.
class HistoryCounter {
public:
    void clear() { counts_.clear(); }
    int count(const std::string& state_text, const std::string& action_text) const;
    void increment(const std::string& state_text, const std::string& action_text);

private:
    std::unordered_map<std::string, int> counts_;
};

// Maps a normalized q in [-1,1] to [0,1], raises it to the (h+1)-th power,
// and maps back. Strictly increasing in q; strictly decreasing in h for
// q inside (-1,1).
double history_transform(double q_norm, int visit_count);

// Epsilon-greedy choice over the observation's actions, with the history
// function damping repeated picks. Increments h for the chosen pair.
int select_action(const NetworkParams& params, const Vocabulary& vocab, const Observation& obs,
                  double epsilon, HistoryCounter& history, Rng& rng, bool use_history = true);

struct TrainConfig {
    double gamma = 0.95;
    double epsilon = 1.0;
    double epsilon_decay = 0.99;
    int batch_size = 32;
    double prioritized_fraction = 0.25;
    int episodes = 500;
    double learning_rate = 0.001;
    uint64_t seed = 0;
    std::size_t replay_capacity = 100000;
    int eval_every = 10;
    int eval_episodes = 20;
    NetConfig net;

    void validate() const; // throws std::invalid_argument on a bad field
};

struct CurvePoint {
    int episode = 0;
    std::string game;
    double epsilon = 0.0;
    double eval_reward = 0.0;
    double eval_steps = 0.0;
    double loss = 0.0;
};

struct EvalResult {
    double mean_reward = 0.0;
    double mean_steps = 0.0;
};

struct TrainResult {
    NetworkParams params;
    std::vector<CurvePoint> curve;
    // Gradient-batch participation per game (sampled experience count);
    // a game absent from training stays at zero.
    std::unordered_map<std::string, long long> batch_uses;
    std::unordered_map<std::string, long long> episodes_played;
};

struct TrainHooks {
    // Called after each scheduled evaluation with the current parameters.
    std::function<void(int episode, double epsilon, double loss, const NetworkParams&)> on_eval;
};

// Unclipped learning target: r, plus gamma * max_a q(s', a) when the
// transition did not end the episode.
double bootstrap_target(const NetworkParams& params, const Experience& e, double gamma);

// DQN-variant loop: every episode samples each game once under the
// epsilon-greedy policy, takes one RMSProp step on a replayed batch, and
// decays epsilon.
TrainResult train(const std::vector<const GameDefinition*>& games, const Vocabulary& vocab,
                  const TrainConfig& cfg, const TrainHooks& hooks = {},
                  const NetworkParams* initial_params = nullptr,
                  std::optional<double> reward_scale_override = std::nullopt);

// Greedy episodes (epsilon 0, fresh history per episode); mean undiscounted
// reward and step count per game.
std::unordered_map<std::string, EvalResult> evaluate_greedy(
    const NetworkParams& params, const Vocabulary& vocab,
    const std::vector<const GameDefinition*>& games, int episodes_per_game, uint64_t seed,
    bool use_history = true);

// Learning-curve CSV: episode, game, scenario, seed, epsilon, eval_reward,
// eval_steps, loss.
std::string curve_to_csv(const std::vector<CurvePoint>& curve, const std::string& scenario,
                         uint64_t seed);

} // namespace textrl
