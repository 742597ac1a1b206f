#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace textrl {

// One possible result of taking an action: where the player lands, with what
// probability, and the reward attached to the transition.
struct Outcome {
    std::string target;
    double prob = 1.0;
    double reward = 0.0;

    bool operator==(const Outcome&) const = default;
};

struct ActionEdge {
    std::string text;
    std::vector<Outcome> outcomes;

    bool operator==(const ActionEdge&) const = default;
};

struct DescriptionVariant {
    std::string text;
    double prob = 1.0;

    bool operator==(const DescriptionVariant&) const = default;
};

struct Node {
    std::string id;
    std::vector<DescriptionVariant> descriptions;
    bool terminal = false;
    std::vector<ActionEdge> actions;

    bool operator==(const Node&) const = default;
};

// Immutable game graph. Nodes keep document order so that downstream
// vocabulary construction is deterministic for a given file.
struct GameDefinition {
    std::string name;
    std::string start_node;
    int max_steps = 500;
    std::vector<Node> nodes;
    std::unordered_map<std::string, std::size_t> node_index;

    const Node* find(const std::string& id) const {
        auto it = node_index.find(id);
        return it == node_index.end() ? nullptr : &nodes[it->second];
    }
    const Node& start() const { return nodes[node_index.at(start_node)]; }

    bool operator==(const GameDefinition& other) const {
        return name == other.name && start_node == other.start_node &&
               max_steps == other.max_steps && nodes == other.nodes;
    }
};

struct ValidationFinding {
    std::string code;    // e.g. "dangling-target"
    std::string where;   // node / action context
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationFinding> errors;
    std::vector<ValidationFinding> warnings;

    bool ok() const { return errors.empty(); }
    bool empty() const { return errors.empty() && warnings.empty(); }
    std::string to_string() const;
};

// Parses a game document. Structural problems (bad JSON, missing or
// mistyped fields) throw std::runtime_error with position or field name;
// semantic problems are left to validate_game.
GameDefinition parse_game(const std::string& document, const std::string& fallback_name = "");
GameDefinition load_game_file(const std::string& path);

// Lists every violated invariant. Unreachable nodes are warnings.
ValidationReport validate_game(const GameDefinition& game);

struct GameClass {
    bool deterministic_transitions = false;
    bool deterministic_descriptions = false;
    bool deterministic() const { return deterministic_transitions && deterministic_descriptions; }
};

GameClass classify_game(const GameDefinition& game);

// Serializes back to the document format; parse(serialize(g)) == g.
std::string serialize_game(const GameDefinition& game);

// Largest |reward| in the game (0 for a game with no actions).
double max_abs_reward(const GameDefinition& game);

} // namespace textrl
