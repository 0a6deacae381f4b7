#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "difflogue/errors.hpp"
#include "difflogue/vocabulary.hpp"

namespace difflogue {

/// Fixed trajectory capacity: bounds denoiser input size.
constexpr int kTrajectoryCapacity = 256;

/// Maximum number of conversational turns per dialogue.
constexpr int kMaxTurns = 10;

/**
 * A dialogue trajectory: one flat token sequence holding alternating
 * system/user spans, each introduced by its turn marker. The same object
 * carries complete dialogues, partially masked sampler states, and
 * generated plans.
 *
 * Layout of a complete 2-turn dialogue:
 *   [<sys> s0... <usr> u0... <sys> s1... <usr> u1...]
 * Sampled trajectories additionally end with a single <end> token.
 */
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<TokenId> tokens) : tokens_(std::move(tokens)) {
        if (static_cast<int>(tokens_.size()) > kTrajectoryCapacity)
            throw CapacityExceeded("trajectory length " + std::to_string(tokens_.size()) +
                                   " exceeds capacity " + std::to_string(kTrajectoryCapacity));
    }

    int length() const { return static_cast<int>(tokens_.size()); }
    bool empty() const { return tokens_.empty(); }

    TokenId at(int slot) const { return tokens_.at(static_cast<std::size_t>(slot)); }
    void set(int slot, TokenId token) { tokens_.at(static_cast<std::size_t>(slot)) = token; }

    const std::vector<TokenId>& tokens() const { return tokens_; }
    std::vector<TokenId>& tokens() { return tokens_; }

    bool contains_mask() const {
        for (TokenId t : tokens_)
            if (t == Vocabulary::kMask) return true;
        return false;
    }

    /// Number of system turn markers, i.e. the turn count.
    int turn_count() const {
        int n = 0;
        for (TokenId t : tokens_)
            if (t == Vocabulary::kTurnSys) ++n;
        return n;
    }

    /// Marker discipline of a finished trajectory: markers strictly
    /// alternate <sys>, <usr>, ...; a non-empty trajectory starts with
    /// <sys>; <end>, when present, is the final token and unique.
    bool markers_valid() const {
        bool expect_sys = true;
        for (int i = 0; i < length(); ++i) {
            TokenId t = tokens_[static_cast<std::size_t>(i)];
            if (t == Vocabulary::kEnd) {
                if (i != length() - 1) return false;
                continue;
            }
            if (i == 0 && t != Vocabulary::kTurnSys) return false;
            if (t == Vocabulary::kTurnSys) {
                if (!expect_sys) return false;
                expect_sys = false;
            } else if (t == Vocabulary::kTurnUsr) {
                if (expect_sys) return false;
                expect_sys = true;
            }
        }
        return turn_count() <= kMaxTurns;
    }

    /// Turn index of a slot (number of <sys> markers at or before it, minus 1).
    /// Slots before the first marker map to turn -1.
    int turn_of_slot(int slot) const {
        int turn = -1;
        for (int i = 0; i <= slot && i < length(); ++i)
            if (tokens_[static_cast<std::size_t>(i)] == Vocabulary::kTurnSys) ++turn;
        return turn;
    }

    bool operator==(const Trajectory& other) const = default;

    std::string to_string(const Vocabulary& vocab) const {
        std::ostringstream out;
        for (int i = 0; i < length(); ++i) {
            if (i) out << ' ';
            out << vocab.name(tokens_[static_cast<std::size_t>(i)]);
        }
        return out.str();
    }

private:
    std::vector<TokenId> tokens_;
};

/// One conversational turn: the system span followed by the user span,
/// marker tokens excluded. Spans may be empty.
struct DialogueTurn {
    std::vector<TokenId> system;
    std::vector<TokenId> user;

    bool operator==(const DialogueTurn&) const = default;
};

/// Environment-specific dialogue context (item listing, user profile,
/// keyword list). Scenarios derive from this; states hold a non-owning
/// pointer since scenarios outlive their episodes.
struct DialogueContext {
    virtual ~DialogueContext() = default;
};

/**
 * The conversational MDP state at turn t: every system and user response
 * from turns 0..t-1, plus the dialogue context.
 */
struct DialogueState {
    Trajectory prefix;
    int turn = 0;
    const DialogueContext* context = nullptr;
};

/// A system move: the action strategy plus the response tokens that carry it.
struct DialogueAction {
    TokenId strategy_tag = 0;
    std::vector<TokenId> content;
};

enum class Role { kBuyer, kSeller };

inline const char* role_name(Role r) { return r == Role::kBuyer ? "buyer" : "seller"; }

/// Target kinds a dialogue can be steered toward.
struct KeywordSequenceTarget {
    std::vector<TokenId> keywords;  // ordered, must be mentioned in this order
};
struct SemanticStateTarget {
    std::vector<std::vector<TokenId>> alternatives;  // any one span reaching the state
};
struct RewardMaxTarget {
    Role role = Role::kBuyer;
};

struct Target {
    std::variant<KeywordSequenceTarget, SemanticStateTarget, RewardMaxTarget> kind;
    double discount = 0.95;

    static Target keywords(std::vector<TokenId> list, double gamma = 0.95) {
        if (list.empty()) throw Error("keyword target must be non-empty");
        return make(KeywordSequenceTarget{std::move(list)}, gamma);
    }
    static Target semantic(std::vector<std::vector<TokenId>> alts, double gamma = 0.95) {
        if (alts.empty()) throw Error("semantic target must have alternatives");
        return make(SemanticStateTarget{std::move(alts)}, gamma);
    }
    static Target reward_max(Role role, double gamma = 0.95) {
        return make(RewardMaxTarget{role}, gamma);
    }

private:
    template <typename K>
    static Target make(K kind, double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw Error("discount must lie in (0,1)");
        Target t;
        t.kind = std::move(kind);
        t.discount = gamma;
        return t;
    }
};

/// Sparse episodic reward: zero until a terminal step.
struct RewardSignal {
    double value = 0.0;
    bool terminal = false;
};

/**
 * Encodes turn spans into one trajectory by concatenation, inserting the
 * alternating turn markers. Inverse of decode_trajectory.
 */
inline Trajectory encode_dialogue(const std::vector<DialogueTurn>& turns,
                                  const Vocabulary& vocab,
                                  int capacity = kTrajectoryCapacity) {
    std::vector<TokenId> out;
    auto push_span = [&](TokenId marker, const std::vector<TokenId>& span) {
        out.push_back(marker);
        for (TokenId t : span) {
            if (t < 0 || t >= vocab.size())
                throw UnknownToken("encode: token id " + std::to_string(t) + " not in vocabulary");
            if (Vocabulary::is_reserved(t))
                throw UnknownToken("encode: reserved token '" + vocab.name(t) + "' inside a span");
            out.push_back(t);
        }
    };
    if (static_cast<int>(turns.size()) > kMaxTurns)
        throw CapacityExceeded("encode: " + std::to_string(turns.size()) + " turns exceeds " +
                               std::to_string(kMaxTurns));
    for (const auto& turn : turns) {
        push_span(Vocabulary::kTurnSys, turn.system);
        push_span(Vocabulary::kTurnUsr, turn.user);
    }
    if (static_cast<int>(out.size()) > capacity)
        throw CapacityExceeded("encode: length " + std::to_string(out.size()) +
                               " exceeds capacity " + std::to_string(capacity));
    return Trajectory(std::move(out));
}

/**
 * Splits a complete trajectory back into turn spans. A trailing <end>
 * token is accepted and dropped; <end> anywhere else, a mask token, or
 * broken marker alternation is an error.
 */
inline std::vector<DialogueTurn> decode_trajectory(const Trajectory& traj,
                                                   const Vocabulary& vocab) {
    if (traj.contains_mask()) throw ContainsMask("decode: trajectory contains mask tokens");
    if (!traj.markers_valid()) throw MalformedMarkers("decode: marker alternation violated");
    std::vector<DialogueTurn> turns;
    enum class Side { kNone, kSystem, kUser } side = Side::kNone;
    for (int i = 0; i < traj.length(); ++i) {
        TokenId t = traj.at(i);
        if (t == Vocabulary::kEnd) break;  // markers_valid guarantees final slot
        if (t == Vocabulary::kTurnSys) {
            turns.emplace_back();
            side = Side::kSystem;
        } else if (t == Vocabulary::kTurnUsr) {
            side = Side::kUser;
        } else {
            if (t < 0 || t >= vocab.size())
                throw UnknownToken("decode: token id " + std::to_string(t) + " not in vocabulary");
            if (side == Side::kSystem)
                turns.back().system.push_back(t);
            else if (side == Side::kUser)
                turns.back().user.push_back(t);
            else
                throw MalformedMarkers("decode: content before first marker");
        }
    }
    return turns;
}

/**
 * State of the conversation entering turn t: the prefix covering turns
 * 0..t-1 exactly. t must not exceed the trajectory's turn count.
 */
inline DialogueState state_at(const Trajectory& traj, int turn) {
    if (turn < 0 || turn > traj.turn_count())
        throw TurnOutOfRange("state_at: turn " + std::to_string(turn) + " out of range (have " +
                             std::to_string(traj.turn_count()) + " turns)");
    int cut = traj.length();
    int seen = 0;
    for (int i = 0; i < traj.length(); ++i) {
        if (traj.at(i) == Vocabulary::kTurnSys) {
            if (seen == turn) {
                cut = i;
                break;
            }
            ++seen;
        }
    }
    // Drop a trailing <end> when the full trajectory is taken as prefix.
    std::vector<TokenId> prefix(traj.tokens().begin(), traj.tokens().begin() + cut);
    if (!prefix.empty() && prefix.back() == Vocabulary::kEnd) prefix.pop_back();
    DialogueState state;
    state.prefix = Trajectory(std::move(prefix));
    state.turn = turn;
    return state;
}

/// Parses a whitespace-separated token string. Convenience for tests,
/// configs and the REPL.
inline std::vector<TokenId> tokenize(const Vocabulary& vocab, const std::string& text) {
    std::vector<TokenId> out;
    std::istringstream in(text);
    std::string word;
    while (in >> word) out.push_back(vocab.id(word));
    return out;
}

/**
 * Fixed-width turn layout used by the synthetic environments: every span
 * occupies a constant number of slots (marker + strategy/act + content),
 * short spans padded with the environment's filler token. Keyword
 * placement and rollout pinning rely on this slot arithmetic.
 */
struct TurnLayout {
    int system_width = 4;  // <sys> + strategy + 2 content slots
    int user_width = 4;    // <usr> + act + 2 content slots

    int turn_width() const { return system_width + user_width; }
    int turn_base(int turn) const { return turn * turn_width(); }
    int system_marker_slot(int turn) const { return turn_base(turn); }
    int system_strategy_slot(int turn) const { return turn_base(turn) + 1; }
    int system_content_slot(int turn, int offset) const { return turn_base(turn) + 2 + offset; }
    int user_marker_slot(int turn) const { return turn_base(turn) + system_width; }
    int user_act_slot(int turn) const { return user_marker_slot(turn) + 1; }
    int user_content_slot(int turn, int offset) const { return user_marker_slot(turn) + 2 + offset; }

    /// Slot of the <end> token when the dialogue runs `turns` full turns.
    int end_slot(int turns) const { return turn_base(turns); }
    int length_for_turns(int turns) const { return end_slot(turns) + 1; }

    /// Pads a span's payload to the fixed width (marker excluded).
    std::vector<TokenId> pad_span(std::vector<TokenId> payload, int width, TokenId pad) const {
        if (static_cast<int>(payload.size()) > width - 1)
            throw CapacityExceeded("span payload exceeds layout width");
        while (static_cast<int>(payload.size()) < width - 1) payload.push_back(pad);
        return payload;
    }
};

}  // namespace difflogue
