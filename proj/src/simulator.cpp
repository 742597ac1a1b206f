#include "textrl/simulator.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace textrl {
namespace {

// Inverse-CDF draw over explicit probabilities. Distributions are validated
// to sum to 1 within 1e-9; the final entry absorbs the round-off.
template <typename Item>
std::size_t sample_index(const std::vector<Item>& items, Rng& rng) {
    if (items.size() == 1) return 0;
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
        acc += items[i].prob;
        if (u < acc) return i;
    }
    return items.size() - 1;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

SimSession::SimSession(const GameDefinition& game, uint64_t seed)
    : game_(&game), current_(game.start_node), rng_(seed) {}

Observation SimSession::observe(double reward) {
    const Node& node = *game_->find(current_);
    Observation obs;
    obs.state_text = node.descriptions[sample_index(node.descriptions, rng_)].text;
    obs.reward = reward;
    finished_ = node.terminal || steps_taken_ >= game_->max_steps;
    obs.terminal = finished_;
    if (!finished_)
        for (const ActionEdge& action : node.actions) obs.action_texts.push_back(action.text);
    return obs;
}

Observation SimSession::reset() {
    current_ = game_->start_node;
    steps_taken_ = 0;
    total_reward_ = 0.0;
    finished_ = false;
    started_ = true;
    return observe(0.0);
}

Observation SimSession::step(int action_index) {
    if (!started_) throw std::logic_error("step before reset");
    if (finished_) throw std::logic_error("step on a finished session");
    const Node& node = *game_->find(current_);
    if (action_index < 0 || static_cast<std::size_t>(action_index) >= node.actions.size())
        throw std::out_of_range("action index " + std::to_string(action_index) + " out of range for node \"" +
                                node.id + "\" with " + std::to_string(node.actions.size()) + " actions");

    const ActionEdge& action = node.actions[static_cast<std::size_t>(action_index)];
    const Outcome& outcome = action.outcomes[sample_index(action.outcomes, rng_)];
    current_ = outcome.target;
    total_reward_ += outcome.reward;
    ++steps_taken_;
    return observe(outcome.reward);
}

EpisodeTrace play_episode(SimSession& session, const Policy& policy) {
    EpisodeTrace trace;
    Observation obs = session.reset();
    while (!session.finished()) {
        const int choice = policy(obs, session.rng());
        if (choice < 0 || static_cast<std::size_t>(choice) >= obs.action_texts.size())
            throw std::out_of_range("policy returned invalid action index " + std::to_string(choice));
        TraceStep step;
        step.index = session.steps_taken();
        step.state_text = obs.state_text;
        step.action_text = obs.action_texts[static_cast<std::size_t>(choice)];
        obs = session.step(choice);
        step.reward = obs.reward;
        trace.steps.push_back(std::move(step));
    }
    trace.total_reward = session.total_reward();
    trace.step_count = session.steps_taken();
    return trace;
}

std::string EpisodeTrace::to_log() const {
    std::ostringstream out;
    char buf[64];
    for (const TraceStep& step : steps) {
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a(step.state_text)));
        out << step.index << '\t' << buf << '\t' << step.action_text << '\t';
        std::snprintf(buf, sizeof buf, "%.10g", step.reward);
        out << buf << '\n';
    }
    return out.str();
}

} // namespace textrl
