#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "difflogue/env/base.hpp"

namespace difflogue {

/**
 * Conversational recommendation: the system should warm the user up on
 * profile-aligned topics and then recommend the target item. The
 * scripted user accepts a recommendation with probability
 * sigmoid(slope * aligned + intercept), where `aligned` is the summed
 * weight of the distinct preferred topics mentioned before the
 * recommending act.
 */
struct RecommendScenario : DialogueContext {
    std::string id = "rec";
    TokenId target_item = 0;
    std::map<TokenId, double> user_profile;  // preference weight per topic token
    struct AcceptanceModel {
        double slope = 1.0;
        double intercept = -1.5;
    } acceptance;
    double tell_preferred_prob = 0.6;  // chance user chatter reveals a preference

    double acceptance_probability(double aligned) const {
        double z = acceptance.slope * aligned + acceptance.intercept;
        return 1.0 / (1.0 + std::exp(-z));
    }
};

class RecommendEnv : public Environment {
public:
    explicit RecommendEnv(RecommendScenario scenario) : scenario_(std::move(scenario)) {
        if (scenario_.target_item == 0) throw Error("recommend scenario needs a target item");
    }

    static const std::vector<std::string>& topic_names() {
        static const std::vector<std::string> topics = {
            "jazz",   "rock",    "classical", "electronic", "folk",    "scifi",
            "comedy", "drama",   "thriller",  "romance",    "sushi",   "pizza",
            "pasta",  "ramen",   "barbecue",  "salads",     "hiking",  "cycling",
            "yoga",   "surfing", "museums",   "concerts",   "gaming",  "gardening"};
        return topics;
    }

    static const std::vector<std::string>& item_names() {
        static const std::vector<std::string> items = {
            "nightride",  "bluenote",   "starfall",  "moonpath",  "redcanyon", "silverlake",
            "wildcoast",  "stonebridge","palmgrove", "northwind", "goldleaf",  "rainvalley",
            "firefly",    "driftwood",  "clearwater","ironpeak"};
        return items;
    }

    static Vocabulary build_vocabulary() {
        std::vector<std::string> words = {"pad",  "done",   "greet",  "chat", "ask",
                                          "recommend", "offer", "suggest", "tell", "accept",
                                          "reject", "today", "great", "try"};
        for (const auto& t : topic_names()) words.push_back(t);
        for (const auto& i : item_names()) words.push_back(i);
        return Vocabulary(words);
    }

    static const Vocabulary& shared_vocabulary() {
        static const Vocabulary vocab = build_vocabulary();
        return vocab;
    }

    const std::string& family() const override {
        static const std::string f = "recommend";
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
            for (const char* s : {"greet", "chat", "ask", "recommend", "offer", "suggest"})
                out.push_back(shared_vocabulary().id(s));
            return out;
        }();
        return ids;
    }

    const RecommendScenario& scenario() const { return scenario_; }

    bool is_recommending_act(TokenId act) const {
        return act == vocab().id("recommend") || act == vocab().id("offer") ||
               act == vocab().id("suggest");
    }

    std::vector<TokenId> opening_payload() const override {
        return {vocab().id("greet"), pad_token(), pad_token()};
    }

    /// Summed weight of distinct preferred topics mentioned in the first
    /// `limit` slots (the whole trajectory when limit < 0).
    double aligned_weight(const Trajectory& traj, int limit = -1) const {
        double sum = 0.0;
        std::vector<TokenId> seen;
        int n = limit < 0 ? traj.length() : std::min(limit, traj.length());
        for (int i = 0; i < n; ++i) {
            TokenId t = traj.at(i);
            auto it = scenario_.user_profile.find(t);
            if (it == scenario_.user_profile.end()) continue;
            bool dup = false;
            for (TokenId s : seen) dup |= (s == t);
            if (dup) continue;
            seen.push_back(t);
            sum += it->second;
        }
        return sum;
    }

    /// First slot of a recommending act naming the target item, with the
    /// turn it happens in; {-1, -1} when absent.
    struct RecommendEvent {
        int slot = -1;
        int turn = -1;
        bool accepted = false;
        int accept_turn = -1;
    };

    RecommendEvent first_acceptance(const Trajectory& traj) const {
        RecommendEvent ev;
        const TokenId accept = vocab().id("accept");
        int turn = -1;
        bool user_side = false;
        int span_pos = 0;
        TokenId act = 0;
        bool rec_pending = false;  // a target recommendation was made
        for (int i = 0; i < traj.length(); ++i) {
            TokenId t = traj.at(i);
            if (t == Vocabulary::kEnd) break;
            if (t == Vocabulary::kTurnSys) {
                ++turn;
                user_side = false;
                span_pos = 0;
                act = 0;
                continue;
            }
            if (t == Vocabulary::kTurnUsr) {
                user_side = true;
                span_pos = 0;
                act = 0;
                continue;
            }
            ++span_pos;
            if (span_pos == 1) {
                act = t;
                if (user_side && rec_pending && act == accept) {
                    ev.accepted = true;
                    ev.accept_turn = std::max(turn, 1);
                    return ev;
                }
                continue;
            }
            if (!user_side && is_recommending_act(act) && t == scenario_.target_item) {
                if (ev.slot < 0) {
                    ev.slot = i;
                    ev.turn = turn;
                }
                rec_pending = true;
            }
        }
        return ev;
    }

    TrajectoryEvaluation evaluate(const Trajectory& traj) const override {
        TrajectoryEvaluation ev;
        RecommendEvent rec = first_acceptance(traj);
        if (rec.accepted) {
            ev.success = true;
            ev.terminal_turn = rec.accept_turn;
            ev.reward = 1.0;
        } else {
            ev.success = false;
            ev.terminal_turn = std::min(traj.turn_count(), canvas_turns());
            ev.reward = failure_reward();
        }
        return ev;
    }

    /// Paraphrase spans of "the system recommends the target item".
    std::vector<std::vector<TokenId>> recommend_paraphrases() const {
        return {
            {vocab().id("recommend"), scenario_.target_item, pad_token()},
            {vocab().id("offer"), scenario_.target_item, pad_token()},
            {vocab().id("suggest"), scenario_.target_item, pad_token()},
            {vocab().id("recommend"), scenario_.target_item, vocab().id("today")},
            {vocab().id("suggest"), scenario_.target_item, vocab().id("try")},
        };
    }

    OptimalityPredicate target_predicate() const override {
        std::vector<std::vector<TokenId>> alts;
        for (auto& p : recommend_paraphrases())
            alts.push_back({p[0], p[1]});  // act + item is the semantic core
        return make_optimality_predicate(Target::semantic(std::move(alts)));
    }

    std::vector<TokenId> user_payload(const Trajectory& after_system, int turn,
                                      std::uint64_t seed) const override {
        (void)turn;
        SplitMix64 rng(seed);
        // Inspect the system span just uttered.
        const auto& toks = after_system.tokens();
        int span_start = 0;
        for (int i = 0; i < after_system.length(); ++i)
            if (toks[static_cast<std::size_t>(i)] == Vocabulary::kTurnSys) span_start = i;
        TokenId act = span_start + 1 < after_system.length()
                          ? toks[static_cast<std::size_t>(span_start + 1)]
                          : pad_token();
        TokenId offered = 0;
        for (int i = span_start + 2; i < after_system.length(); ++i) {
            TokenId t = toks[static_cast<std::size_t>(i)];
            if (is_item(t)) offered = t;
        }
        if (is_recommending_act(act) && offered != 0) {
            if (offered == scenario_.target_item) {
                double aligned = aligned_weight(after_system, span_start);
                if (rng.next_double() < scenario_.acceptance_probability(aligned))
                    return {vocab().id("accept"), offered, vocab().id("great")};
            }
            return {vocab().id("reject"), offered, pad_token()};
        }
        // Ordinary chatter reveals a preference most of the time.
        if (!scenario_.user_profile.empty() &&
            rng.next_double() < scenario_.tell_preferred_prob) {
            std::size_t pick = rng.next_below(scenario_.user_profile.size());
            auto it = scenario_.user_profile.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(pick));
            return {vocab().id("tell"), it->first, pad_token()};
        }
        return {vocab().id("tell"), random_topic(rng), pad_token()};
    }

    DialogueAction scripted_action(const DialogueState& state, bool strong,
                                   std::uint64_t seed) const override {
        return strong ? strong_policy(state, seed) : random_policy(state, seed);
    }

    TokenId chatter_strategy() const override { return vocab().id("chat"); }

    double progress_score(const DialogueState& before, const StepResult& after) const override {
        if (after.reward.terminal) return 10.0 + after.reward.value;
        return aligned_weight(after.state.prefix) - aligned_weight(before.prefix);
    }

    DialogueAction strong_policy(const DialogueState& state, std::uint64_t seed) const {
        SplitMix64 rng(seed);
        double aligned = aligned_weight(state.prefix);
        if (aligned >= 2.0 || state.turn >= 5) {
            return {vocab().id("recommend"), {scenario_.target_item, pad_token()}};
        }
        // Warm up on a preferred topic.
        if (!scenario_.user_profile.empty()) {
            std::size_t pick = rng.next_below(scenario_.user_profile.size());
            auto it = scenario_.user_profile.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(pick));
            return {vocab().id("chat"), {it->first, pad_token()}};
        }
        return {vocab().id("chat"), {random_topic(rng), pad_token()}};
    }

    DialogueAction random_policy(const DialogueState& state, std::uint64_t seed) const {
        (void)state;
        SplitMix64 rng(seed);
        const auto& strats = strategies();
        TokenId strategy = strats[rng.next_below(strats.size())];
        std::vector<TokenId> content;
        if (is_recommending_act(strategy)) {
            // Random recommenders sometimes pitch the wrong item.
            if (rng.next_double() < 0.5)
                content.push_back(scenario_.target_item);
            else
                content.push_back(random_item(rng));
        } else {
            content.push_back(random_topic(rng));
        }
        return {strategy, content};
    }

    bool is_item(TokenId t) const {
        TokenId first = vocab().id(item_names().front());
        return t >= first && t < first + static_cast<TokenId>(item_names().size());
    }

private:
    TokenId random_topic(SplitMix64& rng) const {
        return vocab().id(topic_names()[rng.next_below(topic_names().size())]);
    }
    TokenId random_item(SplitMix64& rng) const {
        return vocab().id(item_names()[rng.next_below(item_names().size())]);
    }

    RecommendScenario scenario_;
};

}  // namespace difflogue
