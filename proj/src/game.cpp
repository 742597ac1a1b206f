#include "textrl/game.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace textrl {
namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& what) {
    throw std::runtime_error("schema error: " + what);
}

const ordered_json& require(const ordered_json& obj, const char* field,
                            const std::string& context) {
    auto it = obj.find(field);
    if (it == obj.end())
        schema_error("missing field \"" + std::string(field) + "\" in " + context);
    return *it;
}

std::string require_string(const ordered_json& obj, const char* field,
                           const std::string& context) {
    const auto& v = require(obj, field, context);
    if (!v.is_string())
        schema_error("field \"" + std::string(field) + "\" in " + context + " must be a string");
    return v.get<std::string>();
}

double require_number(const ordered_json& v, const std::string& context) {
    if (!v.is_number())
        schema_error(context + " must be a number");
    return v.get<double>();
}

// "prob" omitted means a uniform share; mixing explicit and omitted
// probabilities inside one distribution is rejected.
template <typename Item>
void fill_probs(std::vector<Item>& items, const std::vector<bool>& given,
                const std::string& context) {
    std::size_t n_given = 0;
    for (bool g : given) n_given += g ? 1 : 0;
    if (n_given == 0) {
        for (auto& item : items) item.prob = 1.0 / static_cast<double>(items.size());
    } else if (n_given != items.size()) {
        schema_error("mixed explicit and omitted \"prob\" entries in " + context);
    }
}

} // namespace

GameDefinition parse_game(const std::string& document, const std::string& fallback_name) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) schema_error("top-level document must be an object");

    GameDefinition game;

    const auto& meta = require(doc, "meta", "document");
    if (!meta.is_object()) schema_error("\"meta\" must be an object");
    game.name = require_string(meta, "name", "meta");
    if (game.name.empty()) game.name = fallback_name;
    if (auto it = meta.find("max_steps"); it != meta.end()) {
        if (!it->is_number_integer() || it->get<long long>() <= 0)
            schema_error("\"max_steps\" must be a positive integer");
        game.max_steps = it->get<int>();
    }

    game.start_node = require_string(doc, "start", "document");

    const auto& nodes = require(doc, "nodes", "document");
    if (!nodes.is_object() || nodes.empty()) schema_error("\"nodes\" must be a non-empty object");

    for (const auto& [id, body] : nodes.items()) {
        Node node;
        node.id = id;
        if (!body.is_object()) schema_error("node \"" + id + "\" must be an object");

        const auto& descs = require(body, "descriptions", "node \"" + id + "\"");
        if (!descs.is_array() || descs.empty())
            schema_error("\"descriptions\" of node \"" + id + "\" must be a non-empty array");
        std::vector<bool> given;
        for (const auto& d : descs) {
            DescriptionVariant variant;
            variant.text = require_string(d, "text", "description of node \"" + id + "\"");
            if (auto it = d.find("prob"); it != d.end()) {
                variant.prob = require_number(*it, "description prob of node \"" + id + "\"");
                given.push_back(true);
            } else {
                given.push_back(false);
            }
            node.descriptions.push_back(std::move(variant));
        }
        fill_probs(node.descriptions, given, "descriptions of node \"" + id + "\"");

        const auto& term = require(body, "terminal", "node \"" + id + "\"");
        if (!term.is_boolean()) schema_error("\"terminal\" of node \"" + id + "\" must be a boolean");
        node.terminal = term.get<bool>();

        if (auto acts = body.find("actions"); acts != body.end()) {
            if (!acts->is_array()) schema_error("\"actions\" of node \"" + id + "\" must be an array");
            for (const auto& a : *acts) {
                ActionEdge edge;
                edge.text = require_string(a, "text", "action of node \"" + id + "\"");
                const auto& outs = require(a, "outcomes", "action \"" + edge.text + "\"");
                if (!outs.is_array() || outs.empty())
                    schema_error("\"outcomes\" of action \"" + edge.text + "\" must be a non-empty array");
                std::vector<bool> ogiven;
                for (const auto& o : outs) {
                    Outcome outcome;
                    outcome.target = require_string(o, "target", "outcome of action \"" + edge.text + "\"");
                    outcome.reward = require_number(require(o, "reward", "outcome of action \"" + edge.text + "\""),
                                                    "reward of action \"" + edge.text + "\"");
                    if (auto it = o.find("prob"); it != o.end()) {
                        outcome.prob = require_number(*it, "outcome prob of action \"" + edge.text + "\"");
                        ogiven.push_back(true);
                    } else {
                        ogiven.push_back(false);
                    }
                    edge.outcomes.push_back(std::move(outcome));
                }
                fill_probs(edge.outcomes, ogiven, "outcomes of action \"" + edge.text + "\"");
                node.actions.push_back(std::move(edge));
            }
        }
        game.node_index.emplace(node.id, game.nodes.size());
        game.nodes.push_back(std::move(node));
    }
    return game;
}

GameDefinition load_game_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open game file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_game(buf.str(), path);
}

namespace {

constexpr double kProbTolerance = 1e-9;

void check_distribution(double sum, const std::string& where, ValidationReport& report) {
    if (std::abs(sum - 1.0) > kProbTolerance)
        report.errors.push_back({"probability-sum", where,
                                 where + ": probabilities sum to " + std::to_string(sum)});
}

} // namespace

ValidationReport validate_game(const GameDefinition& game) {
    ValidationReport report;
    auto error = [&](std::string code, std::string where, std::string message) {
        report.errors.push_back({std::move(code), std::move(where), std::move(message)});
    };

    if (game.name.empty())
        error("empty-name", "meta", "game name is empty");
    if (!game.find(game.start_node))
        error("missing-start", game.start_node,
              "start node \"" + game.start_node + "\" does not exist");

    for (const Node& node : game.nodes) {
        double dsum = 0.0;
        for (const auto& d : node.descriptions) {
            if (d.text.empty())
                error("empty-text", node.id, "node \"" + node.id + "\" has an empty description");
            if (!(d.prob > 0.0) || d.prob > 1.0)
                error("bad-probability", node.id,
                      "description prob " + std::to_string(d.prob) + " of node \"" + node.id +
                          "\" outside (0,1]");
            dsum += d.prob;
        }
        check_distribution(dsum, "descriptions of node \"" + node.id + "\"", report);

        if (node.terminal && !node.actions.empty())
            error("terminal-with-actions", node.id,
                  "terminal node \"" + node.id + "\" lists actions");
        if (!node.terminal && node.actions.empty())
            error("no-actions", node.id,
                  "non-terminal node \"" + node.id + "\" has no actions");

        for (const ActionEdge& action : node.actions) {
            if (action.text.empty())
                error("empty-text", node.id, "node \"" + node.id + "\" has an empty action text");
            double osum = 0.0;
            for (const Outcome& outcome : action.outcomes) {
                if (!game.find(outcome.target))
                    error("dangling-target", outcome.target,
                          "action \"" + action.text + "\" of node \"" + node.id +
                              "\" targets unknown node \"" + outcome.target + "\"");
                if (!(outcome.prob > 0.0) || outcome.prob > 1.0)
                    error("bad-probability", node.id,
                          "outcome prob " + std::to_string(outcome.prob) + " of action \"" +
                              action.text + "\" outside (0,1]");
                if (!std::isfinite(outcome.reward))
                    error("non-finite-reward", node.id,
                          "action \"" + action.text + "\" of node \"" + node.id +
                              "\" has a non-finite reward");
                osum += outcome.prob;
            }
            check_distribution(osum, "outcomes of action \"" + action.text + "\" in node \"" + node.id + "\"",
                               report);
        }
    }

    // Reachability sweep; staged-but-unlinked content is only a warning.
    if (game.find(game.start_node)) {
        std::unordered_set<std::string> seen{game.start_node};
        std::deque<const Node*> queue{&game.start()};
        while (!queue.empty()) {
            const Node* node = queue.front();
            queue.pop_front();
            for (const auto& action : node->actions)
                for (const auto& outcome : action.outcomes)
                    if (const Node* next = game.find(outcome.target); next && seen.insert(outcome.target).second)
                        queue.push_back(next);
        }
        for (const Node& node : game.nodes)
            if (!seen.count(node.id))
                report.warnings.push_back({"unreachable-node", node.id,
                                           "node \"" + node.id + "\" is unreachable from start"});
    }
    return report;
}

GameClass classify_game(const GameDefinition& game) {
    GameClass cls{true, true};
    for (const Node& node : game.nodes) {
        if (node.descriptions.size() != 1) cls.deterministic_descriptions = false;
        for (const ActionEdge& action : node.actions)
            if (action.outcomes.size() != 1) cls.deterministic_transitions = false;
    }
    return cls;
}

std::string serialize_game(const GameDefinition& game) {
    ordered_json doc;
    doc["meta"] = {{"name", game.name}, {"max_steps", game.max_steps}};
    doc["start"] = game.start_node;
    ordered_json nodes = ordered_json::object();
    for (const Node& node : game.nodes) {
        ordered_json body;
        ordered_json descs = ordered_json::array();
        for (const auto& d : node.descriptions)
            descs.push_back({{"text", d.text}, {"prob", d.prob}});
        body["descriptions"] = std::move(descs);
        body["terminal"] = node.terminal;
        ordered_json actions = ordered_json::array();
        for (const ActionEdge& action : node.actions) {
            ordered_json outs = ordered_json::array();
            for (const Outcome& o : action.outcomes)
                outs.push_back({{"target", o.target}, {"prob", o.prob}, {"reward", o.reward}});
            actions.push_back({{"text", action.text}, {"outcomes", std::move(outs)}});
        }
        body["actions"] = std::move(actions);
        nodes[node.id] = std::move(body);
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2);
}

double max_abs_reward(const GameDefinition& game) {
    double best = 0.0;
    for (const Node& node : game.nodes)
        for (const ActionEdge& action : node.actions)
            for (const Outcome& outcome : action.outcomes)
                best = std::max(best, std::abs(outcome.reward));
    return best;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& f : errors) out << "error: [" << f.code << "] " << f.message << "\n";
    for (const auto& f : warnings) out << "warning: [" << f.code << "] " << f.message << "\n";
    if (empty()) out << "ok\n";
    return out.str();
}

} // namespace textrl
