#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "textrl/game.hpp"

namespace textrl {

using TokenId = uint32_t;

constexpr TokenId kPadId = 0;
constexpr TokenId kUnknownId = 1;

// Lowercase, strip HTML tags, map every non-alphanumeric byte to a space,
// split on whitespace.
std::vector<std::string> preprocess_text(const std::string& raw);

struct TokenSeq {
    std::vector<TokenId> ids;
    std::string source_text;

    bool empty() const { return ids.empty(); }
    std::size_t size() const { return ids.size(); }
};

// Dense token ids; 0 and 1 are reserved for padding and out-of-vocabulary
// tokens. Immutable after build.
class Vocabulary {
public:
    Vocabulary();

    // Tokens from every description and action text of the given games, ids
    // in first-occurrence order (deterministic for a fixed game order).
    static Vocabulary build(const std::vector<const GameDefinition*>& games);
    static Vocabulary build(const std::vector<GameDefinition>& games);

    TokenId id_of(const std::string& token) const {
        auto it = token_to_id_.find(token);
        return it == token_to_id_.end() ? kUnknownId : it->second;
    }
    const std::string& token_of(TokenId id) const { return id_to_token_.at(id); }
    bool contains(const std::string& token) const { return token_to_id_.count(token) != 0; }
    std::size_t size() const { return id_to_token_.size(); }

    TokenSeq encode(const std::string& text) const;

    // Newline-delimited token list, line number = id.
    std::string serialize() const;
    static Vocabulary deserialize(const std::string& data);

private:
    void add(const std::string& token);
    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<std::string> id_to_token_;
};

struct PaddedBatch {
    std::vector<std::vector<TokenId>> ids; // batch x max_len, right-padded with kPadId
    std::vector<std::size_t> lengths;      // true lengths for masking
    std::size_t max_len = 0;
};

// Right-pads to the batch max length. Throws if the batch is empty or every
// sequence is empty (nothing to embed).
PaddedBatch pad_batch(const std::vector<TokenSeq>& seqs);

} // namespace textrl
