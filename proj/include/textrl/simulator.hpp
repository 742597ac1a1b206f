#pragma once

#include <functional>
#include <string>
#include <vector>

#include "textrl/game.hpp"
#include "textrl/rng.hpp"

namespace textrl {

// What the agent sees after reset or a step. `reward` belongs to the
// transition that produced the observation (0 at reset). `terminal` covers
// both real endings and truncation at max_steps; it always implies an empty
// action list.
struct Observation {
    std::string state_text;
    std::vector<std::string> action_texts;
    double reward = 0.0;
    bool terminal = false;
};

struct TraceStep {
    int index = 0;
    std::string state_text;
    std::string action_text;
    double reward = 0.0;
};

struct EpisodeTrace {
    std::vector<TraceStep> steps;
    double total_reward = 0.0;
    int step_count = 0;

    // One step per line: index, state text hash, action text, reward.
    std::string to_log() const;
};

// One live playthrough. Owns an independent RNG stream so that concurrent
// sessions over a shared GameDefinition never coordinate.
class SimSession {
public:
    SimSession(const GameDefinition& game, uint64_t seed);

    // Convenience: stream derived from (experiment seed, game name, episode).
    static SimSession for_episode(const GameDefinition& game, uint64_t experiment_seed,
                                  uint64_t episode_index) {
        return SimSession(game, derive_seed(experiment_seed, game.name, episode_index));
    }

    Observation reset();
    Observation step(int action_index);

    bool finished() const { return finished_; }
    int steps_taken() const { return steps_taken_; }
    double total_reward() const { return total_reward_; }
    const std::string& current_node() const { return current_; }
    const GameDefinition& game() const { return *game_; }
    Rng& rng() { return rng_; }

private:
    Observation observe(double reward);

    const GameDefinition* game_;
    std::string current_;
    int steps_taken_ = 0;
    double total_reward_ = 0.0;
    bool finished_ = false;
    bool started_ = false;
    Rng rng_;
};

// Picks an action index given the observation; draws come from the session's
// own stream so seeded replays are bit-identical.
using Policy = std::function<int(const Observation&, Rng&)>;

// Resets, then steps until the session finishes (terminal node or max_steps).
EpisodeTrace play_episode(SimSession& session, const Policy& policy);

inline int uniform_random_policy(const Observation& obs, Rng& rng) {
    return static_cast<int>(rng.uniform_index(obs.action_texts.size()));
}

} // namespace textrl
