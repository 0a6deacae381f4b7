#pragma once

#include <string>
#include <vector>

#include "difflogue/env/base.hpp"

namespace difflogue {

/**
 * Ordered-keyword chitchat: the system must steer the conversation so
 * the target keywords are first mentioned in exactly the given order,
 * by either side, within the turn limit.
 */
struct KeywordScenario : DialogueContext {
    std::string id = "kw";
    std::vector<TokenId> target_keywords;  // ordered, distinct, non-reserved
    std::vector<TokenId> distractors;      // user chatter pool
    double user_mention_prob = 0.3;        // chance the user helps when prompted
};

class KeywordEnv : public Environment {
public:
    explicit KeywordEnv(KeywordScenario scenario) : scenario_(std::move(scenario)) {
        if (scenario_.target_keywords.empty()) throw Error("keyword scenario needs targets");
        for (TokenId t : scenario_.target_keywords)
            if (Vocabulary::is_reserved(t)) throw Error("keyword target is a reserved token");
    }

    static const std::vector<std::string>& word_pool() {
        static const std::vector<std::string> pool = {
            "garden",  "music",   "coffee",  "travel",  "books",   "cinema",  "soccer",
            "tennis",  "cooking", "baking",  "painting","drawing", "hiking",  "camping",
            "fishing", "sailing", "winter",  "summer",  "autumn",  "spring",  "ocean",
            "river",   "forest",  "desert",  "city",    "village", "market",  "museum",
            "library", "school",  "guitar",  "piano",   "violin",  "drums",   "jazz",
            "blues",   "opera",   "theater", "poetry",  "novels",  "history", "science",
            "physics", "biology", "melody" , "flowers", "roses",   "tulips",  "birds",
            "eagles",  "owls",    "cats",    "dogs",    "horses",  "rabbits", "turtles",
            "cheese",  "bread",   "honey",   "apples",  "pears",   "grapes",  "oranges",
            "lemons",  "dinner",  "breakfast","picnic",  "recipe",  "spices",  "pepper",
            "trains",  "planes",  "bicycle", "sledding","skiing",  "skating", "running",
            "swimming","climbing","chess",   "puzzles", "cards",   "dancing", "singing",
            "photos",  "camera",  "stars",   "planets", "comets",  "moonlight","sunrise",
            "sunset",  "rainbow", "thunder", "snowfall","meadow",  "valley",  "mountain",
            "island",  "harbor",  "bridge",  "castle",  "lighthouse", "lantern", "candle",
            "pottery", "weaving", "knitting","origami", "bonsai",  "aquarium","telescope",
            "compass", "journal", "letters", "stamps",  "coins",   "antiques","vinyl",
            "radio",   "arcade" , "magic",   "circus",  "carnival","festival","parade",
            "fireworks","bonfire" ,"temple" , "terrace", "fountain","statue",  "gallery",
            "sketch",  "canvas",  "easel",   "palette", "charcoal","pastels", "marble",
            "cottage", "cabin",   "hearth",  "orchard", "vineyard","harvest", "basket",
            "teapot",  "saucer",  "brunch",  "noodles", "dumplings","sushi",   "curry",
            "tacos",   "paella",  "espresso","latte",   "matcha",  "cocoa"};
        return pool;
    }

    static Vocabulary build_vocabulary() {
        std::vector<std::string> words = {"pad", "done", "greet", "chat", "mention", "ask"};
        for (const auto& w : word_pool()) words.push_back(w);
        return Vocabulary(words);
    }

    static const Vocabulary& shared_vocabulary() {
        static const Vocabulary vocab = build_vocabulary();
        return vocab;
    }

    const std::string& family() const override {
        static const std::string f = "keyword";
        return f;
    }
    const std::string& scenario_id() const override { return scenario_.id; }
    const Vocabulary& vocab() const override { return shared_vocabulary(); }
    const TurnLayout& layout() const override {
        static const TurnLayout l{};
        return l;
    }
    TokenId pad_token() const override { return vocab().id("pad"); }
    TokenId done_token() const override { return vocab().id("done"); }

    const std::vector<TokenId>& strategies() const override {
        static const std::vector<TokenId> ids = [] {
            std::vector<TokenId> out;
            for (const char* s : {"greet", "chat", "mention", "ask"})
                out.push_back(shared_vocabulary().id(s));
            return out;
        }();
        return ids;
    }

    const KeywordScenario& scenario() const { return scenario_; }

    std::vector<TokenId> opening_payload() const override {
        return {vocab().id("greet"), pad_token(), pad_token()};
    }

    // ---- keyword progress -------------------------------------------------

    struct Progress {
        std::vector<TokenId> first_mentions;  // target keywords in first-mention order
        bool complete = false;                // all mentioned, exactly in order
        bool broken = false;                  // an out-of-order first mention happened
        int complete_turn = -1;
    };

    Progress progress(const Trajectory& traj) const {
        Progress p;
        const auto& targets = scenario_.target_keywords;
        int turn = -1;
        for (int i = 0; i < traj.length(); ++i) {
            TokenId t = traj.at(i);
            if (t == Vocabulary::kTurnSys) ++turn;
            if (t == Vocabulary::kEnd) break;
            bool is_target = false;
            for (TokenId k : targets)
                if (k == t) is_target = true;
            if (!is_target) continue;
            bool seen = false;
            for (TokenId k : p.first_mentions)
                if (k == t) seen = true;
            if (seen) continue;
            p.first_mentions.push_back(t);
            std::size_t idx = p.first_mentions.size() - 1;
            if (targets[idx] != t) p.broken = true;
            if (!p.broken && p.first_mentions.size() == targets.size()) {
                p.complete = true;
                p.complete_turn = std::max(turn, 1);
            }
        }
        return p;
    }

    TrajectoryEvaluation evaluate(const Trajectory& traj) const override {
        TrajectoryEvaluation ev;
        Progress p = progress(traj);
        if (p.complete) {
            ev.success = true;
            ev.terminal_turn = p.complete_turn;
            ev.reward = 1.0;
        } else {
            ev.success = false;
            ev.terminal_turn = std::min(traj.turn_count(), canvas_turns());
            ev.reward = failure_reward();
        }
        return ev;
    }

    OptimalityPredicate target_predicate() const override {
        return make_optimality_predicate(Target::keywords(scenario_.target_keywords));
    }

    /// The scripted user mentions the next pending keyword with
    /// probability user_mention_prob when the system's span this turn
    /// touched any target keyword; otherwise it chats from the
    /// distractor pool.
    std::vector<TokenId> user_payload(const Trajectory& after_system, int turn,
                                      std::uint64_t seed) const override {
        (void)turn;
        SplitMix64 rng(seed);
        Progress p = progress(after_system);

        bool prompted = false;
        // Tokens of the current (last) system span.
        const auto& toks = after_system.tokens();
        int span_start = 0;
        for (int i = 0; i < after_system.length(); ++i)
            if (toks[static_cast<std::size_t>(i)] == Vocabulary::kTurnSys) span_start = i;
        for (int i = span_start; i < after_system.length(); ++i)
            for (TokenId k : scenario_.target_keywords)
                if (toks[static_cast<std::size_t>(i)] == k) prompted = true;

        if (prompted && !p.broken && !p.complete &&
            rng.next_double() < scenario_.user_mention_prob) {
            TokenId pending = scenario_.target_keywords[p.first_mentions.size()];
            return {vocab().id("mention"), pending, chatter(rng)};
        }
        return {vocab().id("chat"), chatter(rng), chatter(rng)};
    }

    DialogueAction scripted_action(const DialogueState& state, bool strong,
                                   std::uint64_t seed) const override {
        return strong ? strong_policy(state, seed) : random_policy(state, seed);
    }

    TokenId chatter_strategy() const override { return vocab().id("chat"); }

    double progress_score(const DialogueState& before, const StepResult& after) const override {
        if (after.reward.terminal) return 10.0 + after.reward.value;
        return static_cast<double>(progress(after.state.prefix).first_mentions.size()) -
               static_cast<double>(progress(before.prefix).first_mentions.size());
    }

    DialogueAction strong_policy(const DialogueState& state, std::uint64_t seed) const {
        SplitMix64 rng(seed);
        Progress p = progress(state.prefix);
        if (!p.complete && !p.broken) {
            TokenId pending = scenario_.target_keywords[p.first_mentions.size()];
            return {vocab().id("mention"), {pending, chatter(rng)}};
        }
        return {vocab().id("chat"), {chatter(rng), chatter(rng)}};
    }

    DialogueAction random_policy(const DialogueState& state, std::uint64_t seed) const {
        (void)state;
        SplitMix64 rng(seed);
        const auto& strats = strategies();
        TokenId strategy = strats[rng.next_below(strats.size())];
        // Random policies draw from the full pool, targets included.
        TokenId w1 = static_cast<TokenId>(6 + rng.next_below(static_cast<std::uint64_t>(
                                                  vocab().size() - 6)));
        TokenId w2 = static_cast<TokenId>(6 + rng.next_below(static_cast<std::uint64_t>(
                                                  vocab().size() - 6)));
        return {strategy, {w1, w2}};
    }

private:
    TokenId chatter(SplitMix64& rng) const {
        if (scenario_.distractors.empty()) return pad_token();
        return scenario_.distractors[rng.next_below(scenario_.distractors.size())];
    }

    KeywordScenario scenario_;
};

}  // namespace difflogue
