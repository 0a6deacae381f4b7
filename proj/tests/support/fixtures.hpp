#pragma once

#include <string>
#include <vector>

#include "difflogue/rng.hpp"
#include "difflogue/trajectory.hpp"
#include "difflogue/vocabulary.hpp"

namespace difflogue::test {

inline Vocabulary make_test_vocab() {
    return Vocabulary({"pad", "greet", "hello", "hi", "how", "are", "you", "good", "thanks",
                       "bye", "apple", "pear", "plum", "fig", "kiwi", "lime"});
}

/// Random well-formed dialogue: 1..5 turns, spans of 0..4 non-reserved tokens.
inline std::vector<DialogueTurn> random_dialogue(SplitMix64& rng, const Vocabulary& vocab,
                                                 int max_turns = 5) {
    int turns = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_turns)));
    std::vector<DialogueTurn> out;
    auto span = [&] {
        std::vector<TokenId> s;
        int len = static_cast<int>(rng.next_below(5));
        for (int i = 0; i < len; ++i) {
            s.push_back(static_cast<TokenId>(
                Vocabulary::kReservedCount +
                rng.next_below(static_cast<std::uint64_t>(vocab.size() - Vocabulary::kReservedCount))));
        }
        return s;
    };
    for (int t = 0; t < turns; ++t) out.push_back({span(), span()});
    return out;
}

}  // namespace difflogue::test
