#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "difflogue/errors.hpp"
#include "difflogue/rng.hpp"

namespace difflogue {

using TokenId = std::int32_t;

/**
 * Closed token set shared by the sampler, the environments and the metrics.
 *
 * Four reserved tokens occupy fixed ids: MASK (the absorbing symbol of the
 * diffusion process), the two turn-boundary markers, and END (terminates a
 * sampled trajectory). Reserved tokens come first in the serialized file;
 * file order defines token ids.
 */
class Vocabulary {
public:
    static constexpr TokenId kMask = 0;
    static constexpr TokenId kTurnSys = 1;
    static constexpr TokenId kTurnUsr = 2;
    static constexpr TokenId kEnd = 3;
    static constexpr int kReservedCount = 4;

    static const char* mask_name() { return "<mask>"; }
    static const char* turn_sys_name() { return "<sys>"; }
    static const char* turn_usr_name() { return "<usr>"; }
    static const char* end_name() { return "<end>"; }

    /// Builds a vocabulary from the ordinary (non-reserved) token names.
    explicit Vocabulary(const std::vector<std::string>& words) {
        tokens_ = {mask_name(), turn_sys_name(), turn_usr_name(), end_name()};
        tokens_.insert(tokens_.end(), words.begin(), words.end());
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (tokens_[i].empty())
                throw Error("vocabulary: empty token at id " + std::to_string(i));
            auto [it, inserted] = ids_.emplace(tokens_[i], static_cast<TokenId>(i));
            if (!inserted)
                throw Error("vocabulary: duplicate token '" + tokens_[i] + "'");
        }
    }

    int size() const { return static_cast<int>(tokens_.size()); }

    bool contains(const std::string& name) const { return ids_.count(name) > 0; }

    TokenId id(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end()) throw UnknownToken("unknown token '" + name + "'");
        return it->second;
    }

    const std::string& name(TokenId id) const {
        if (id < 0 || id >= size())
            throw UnknownToken("token id out of range: " + std::to_string(id));
        return tokens_[static_cast<std::size_t>(id)];
    }

    static bool is_reserved(TokenId id) { return id >= 0 && id < kReservedCount; }
    static bool is_marker(TokenId id) { return id == kTurnSys || id == kTurnUsr; }

    /// Hash over the full ordered token list; checkpoints store this to
    /// reject loads against a different vocabulary.
    std::uint64_t hash() const {
        std::string joined;
        for (const auto& t : tokens_) {
            joined += t;
            joined += '\n';
        }
        return fnv1a64(joined.data(), joined.size());
    }

    /// One token per line, reserved tokens first; line order defines ids.
    void save(std::ostream& out) const {
        for (const auto& t : tokens_) out << t << '\n';
    }

    static Vocabulary load(std::istream& in) {
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            lines.push_back(line);
        }
        if (lines.size() < kReservedCount)
            throw IoError("vocabulary file too short");
        const char* expected[] = {mask_name(), turn_sys_name(), turn_usr_name(), end_name()};
        for (int i = 0; i < kReservedCount; ++i) {
            if (lines[static_cast<std::size_t>(i)] != expected[i])
                throw IoError("vocabulary file: reserved token mismatch at line " +
                              std::to_string(i + 1));
        }
        return Vocabulary(std::vector<std::string>(lines.begin() + kReservedCount, lines.end()));
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace difflogue
