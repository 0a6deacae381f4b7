#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "difflogue/condition.hpp"
#include "difflogue/errors.hpp"
#include "difflogue/levenshtein.hpp"
#include "difflogue/trajectory.hpp"

namespace difflogue {

/**
 * Slot assignment policy for word-level guidance.
 *
 * The default spreads k keywords evenly over the first min(T_max, 2k)
 * turns, keyword i landing in the first content slot of the system span
 * of turn floor(i * M / k). With `alternate_sides` the keywords alternate
 * between system and user spans. Explicit per-keyword assignments
 * override the rule entirely.
 */
struct KeywordPlacement {
    struct Assignment {
        int turn = 0;
        bool user_side = false;
        int offset = 0;  // content slot within the span
    };

    TurnLayout layout;
    int max_turns = kMaxTurns;
    bool alternate_sides = false;
    std::vector<Assignment> explicit_slots;  // when non-empty, used verbatim

    static KeywordPlacement even_spacing(const TurnLayout& layout, int max_turns = kMaxTurns,
                                         bool alternate_sides = false) {
        KeywordPlacement p;
        p.layout = layout;
        p.max_turns = max_turns;
        p.alternate_sides = alternate_sides;
        return p;
    }

    static KeywordPlacement at(const TurnLayout& layout, std::vector<Assignment> slots,
                               int max_turns = kMaxTurns) {
        KeywordPlacement p;
        p.layout = layout;
        p.max_turns = max_turns;
        p.explicit_slots = std::move(slots);
        return p;
    }

    /// Slots for k keywords, strictly increasing.
    std::vector<int> assign(int k) const {
        std::vector<int> slots;
        if (!explicit_slots.empty()) {
            if (static_cast<int>(explicit_slots.size()) != k)
                throw PlacementOverflow("placement: " + std::to_string(explicit_slots.size()) +
                                        " explicit assignments for " + std::to_string(k) +
                                        " keywords");
            for (const Assignment& a : explicit_slots) slots.push_back(slot_of(a));
        } else {
            int window = std::min(max_turns, 2 * k);
            for (int i = 0; i < k; ++i) {
                Assignment a;
                a.turn = static_cast<int>((static_cast<long long>(i) * window) / k);
                a.user_side = alternate_sides && (i % 2 == 1);
                a.offset = 0;
                slots.push_back(slot_of(a));
            }
        }
        for (std::size_t i = 0; i + 1 < slots.size(); ++i)
            if (slots[i] >= slots[i + 1])
                throw PlacementOverflow("placement: slots not strictly increasing");
        return slots;
    }

private:
    int slot_of(const Assignment& a) const {
        if (a.turn < 0 || a.turn >= max_turns)
            throw PlacementOverflow("placement: turn " + std::to_string(a.turn) +
                                    " outside the first " + std::to_string(max_turns) + " turns");
        int width = (a.user_side ? layout.user_width : layout.system_width) - 2;
        if (a.offset < 0 || a.offset >= width)
            throw PlacementOverflow("placement: content offset " + std::to_string(a.offset) +
                                    " outside span");
        int slot = a.user_side ? layout.user_content_slot(a.turn, a.offset)
                               : layout.system_content_slot(a.turn, a.offset);
        if (slot >= kTrajectoryCapacity)
            throw PlacementOverflow("placement: slot " + std::to_string(slot) + " beyond capacity");
        return slot;
    }
};

/**
 * Word-level guidance: pin each target keyword at its assigned slot. The
 * pin order matches the keyword order, so any sample honoring the pins
 * mentions the keywords in the given order.
 */
inline InpaintingCondition word_level_condition(const std::vector<TokenId>& keywords,
                                                const KeywordPlacement& placement) {
    InpaintingCondition cond;
    if (keywords.empty()) return cond;  // unconditional sampling
    std::vector<int> slots = placement.assign(static_cast<int>(keywords.size()));
    for (std::size_t i = 0; i < keywords.size(); ++i)
        cond.pin(slots[i], keywords[i], PinSource::kWord);
    return cond;
}

/**
 * Semantic-level guidance: one condition per paraphrase of the target
 * state, all pinning the same slot region starting at `region_start`.
 * The region is sized to the longest alternative; shorter ones are
 * padded with the filler token so every variant fixes the same slots.
 */
inline std::vector<InpaintingCondition> semantic_level_condition(
    const std::vector<std::vector<TokenId>>& alternatives, int region_start, TokenId pad_token) {
    if (alternatives.empty())
        throw EmptyAlternatives("semantic guidance needs at least one alternative");
    std::size_t region = 0;
    for (const auto& alt : alternatives) {
        if (alt.empty()) throw EmptyAlternatives("semantic alternative is empty");
        region = std::max(region, alt.size());
    }
    std::vector<InpaintingCondition> out;
    out.reserve(alternatives.size());
    for (const auto& alt : alternatives) {
        InpaintingCondition cond;
        for (std::size_t i = 0; i < region; ++i) {
            TokenId tok = i < alt.size() ? alt[i] : pad_token;
            cond.pin(region_start + static_cast<int>(i), tok, PinSource::kSemantic);
        }
        out.push_back(std::move(cond));
    }
    return out;
}

// ---- minimum Bayes risk decoding --------------------------------------

struct MBRCandidate {
    Trajectory trajectory;
    int condition_variant = 0;
    double risk = 0.0;  // filled by mbr_decode
};

using RiskFn = std::function<double(const Trajectory&, const Trajectory&)>;

/// Default risk: token-level edit distance.
inline double edit_distance_risk(const Trajectory& a, const Trajectory& b) {
    return static_cast<double>(levenshtein(a.tokens(), b.tokens()));
}

/**
 * Picks the candidate with the least mean pairwise risk against all the
 * others (consensus decoding). Fills every candidate's risk field.
 * Ties break to the lowest index; a single candidate has risk zero.
 */
inline MBRCandidate mbr_decode(std::vector<MBRCandidate>& candidates,
                               const RiskFn& risk = edit_distance_risk) {
    if (candidates.empty()) throw Error("mbr_decode: no candidates");
    const std::size_t n = candidates.size();
    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            sum += risk(candidates[i].trajectory, candidates[j].trajectory);
        }
        candidates[i].risk = n > 1 ? sum / static_cast<double>(n - 1) : 0.0;
        if (candidates[i].risk < best_risk) {
            best_risk = candidates[i].risk;
            best = i;
        }
    }
    return candidates[best];
}

// ---- optimality --------------------------------------------------------

/**
 * The binary optimality variable: evaluates to 1 iff the trajectory
 * reaches the target. Environments supply the evaluator for reward-style
 * targets; keyword and semantic targets have generic evaluators below.
 */
struct OptimalityPredicate {
    Target target;
    std::function<int(const Trajectory&)> evaluate;
};

/// 1 iff `needle` occurs as a (not necessarily contiguous) subsequence.
inline bool contains_subsequence(const std::vector<TokenId>& haystack,
                                 const std::vector<TokenId>& needle) {
    std::size_t i = 0;
    for (TokenId t : haystack) {
        if (i < needle.size() && t == needle[i]) ++i;
    }
    return i == needle.size();
}

/// 1 iff `needle` occurs contiguously.
inline bool contains_span(const std::vector<TokenId>& haystack,
                          const std::vector<TokenId>& needle) {
    if (needle.empty() || haystack.size() < needle.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool hit = true;
        for (std::size_t j = 0; j < needle.size(); ++j)
            if (haystack[i + j] != needle[j]) {
                hit = false;
                break;
            }
        if (hit) return true;
    }
    return false;
}

/// Generic evaluators: keyword targets need an in-order subsequence,
/// semantic targets need one alternative to appear as a contiguous span.
/// RewardMax targets must come from their environment.
inline OptimalityPredicate make_optimality_predicate(const Target& target) {
    OptimalityPredicate pred;
    pred.target = target;
    if (const auto* kw = std::get_if<KeywordSequenceTarget>(&target.kind)) {
        std::vector<TokenId> keywords = kw->keywords;
        pred.evaluate = [keywords](const Trajectory& traj) {
            return contains_subsequence(traj.tokens(), keywords) ? 1 : 0;
        };
    } else if (const auto* sem = std::get_if<SemanticStateTarget>(&target.kind)) {
        std::vector<std::vector<TokenId>> alts = sem->alternatives;
        pred.evaluate = [alts](const Trajectory& traj) {
            for (const auto& alt : alts)
                if (contains_span(traj.tokens(), alt)) return 1;
            return 0;
        };
    } else {
        throw Error("make_optimality_predicate: reward targets need an environment evaluator");
    }
    return pred;
}

/// The guidance factor p(O=1 | trajectory) in {0,1}.
inline int optimality_filter(const Trajectory& traj, const OptimalityPredicate& pred) {
    if (traj.contains_mask()) throw ContainsMask("optimality_filter: trajectory has masks");
    return pred.evaluate(traj) ? 1 : 0;
}

}  // namespace difflogue
