#include "textrl/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace textrl {

std::vector<std::string> preprocess_text(const std::string& raw) {
    std::string flat;
    flat.reserve(raw.size());
    // Drop <...> spans first; a '<' with no closing '>' is plain punctuation.
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '<') {
            const std::size_t close = raw.find('>', i);
            if (close != std::string::npos) {
                flat.push_back(' ');
                i = close;
                continue;
            }
        }
        flat.push_back(raw[i]);
    }
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : flat) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary::Vocabulary() {
    add("<pad>");
    add("<unk>");
}

void Vocabulary::add(const std::string& token) {
    if (token_to_id_.count(token)) return;
    token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<const GameDefinition*>& games) {
    Vocabulary vocab;
    for (const GameDefinition* game : games) {
        for (const Node& node : game->nodes) {
            for (const auto& desc : node.descriptions)
                for (const auto& token : preprocess_text(desc.text)) vocab.add(token);
            for (const auto& action : node.actions)
                for (const auto& token : preprocess_text(action.text)) vocab.add(token);
        }
    }
    return vocab;
}

Vocabulary Vocabulary::build(const std::vector<GameDefinition>& games) {
    std::vector<const GameDefinition*> ptrs;
    ptrs.reserve(games.size());
    for (const auto& g : games) ptrs.push_back(&g);
    return build(ptrs);
}

TokenSeq Vocabulary::encode(const std::string& text) const {
    TokenSeq seq;
    seq.source_text = text;
    for (const auto& token : preprocess_text(text)) seq.ids.push_back(id_of(token));
    return seq;
}

std::string Vocabulary::serialize() const {
    std::ostringstream out;
    for (const auto& token : id_to_token_) out << token << '\n';
    return out.str();
}

Vocabulary Vocabulary::deserialize(const std::string& data) {
    Vocabulary vocab;
    std::istringstream in(data);
    std::string line;
    TokenId id = 0;
    while (std::getline(in, line)) {
        if (id >= 2) vocab.add(line); // lines 0/1 are the reserved entries
        else if (line != vocab.id_to_token_[id])
            throw std::runtime_error("vocabulary file does not start with reserved tokens");
        ++id;
    }
    if (id < 2) throw std::runtime_error("vocabulary file too short");
    return vocab;
}

PaddedBatch pad_batch(const std::vector<TokenSeq>& seqs) {
    if (seqs.empty()) throw std::invalid_argument("pad_batch: empty batch");
    PaddedBatch batch;
    for (const TokenSeq& seq : seqs) batch.max_len = std::max(batch.max_len, seq.size());
    if (batch.max_len == 0) throw std::invalid_argument("pad_batch: every sequence is empty");
    for (const TokenSeq& seq : seqs) {
        std::vector<TokenId> row = seq.ids;
        row.resize(batch.max_len, kPadId);
        batch.ids.push_back(std::move(row));
        batch.lengths.push_back(seq.size());
    }
    return batch;
}

} // namespace textrl
