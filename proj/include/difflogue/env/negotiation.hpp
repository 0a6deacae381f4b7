#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "difflogue/env/base.hpp"

namespace difflogue {

/// Discrete price grid: 21 levels spanning [buyer target, listing price].
constexpr int kPriceLevels = 21;

/**
 * A bargaining scenario. The planner controls `role`; the scripted
 * opponent plays the other side with a concession policy: it opens at
 * its own target (shifted by opening_offset), concedes a fixed fraction
 * of the gap toward the planner's standing offer each turn (plus or
 * minus one seeded grid step), and accepts once the planner's offer is
 * within its accept threshold.
 */
struct NegotiationScenario : DialogueContext {
    std::string id = "neg";
    double listing_price = 400.0;
    double buyer_target = 200.0;   // grid level 0
    double seller_target = 360.0;  // must lie on the grid
    Role role = Role::kBuyer;

    struct OpponentPolicy {
        double opening_offset = 0.0;    // 0 = open exactly at own target
        double concession_rate = 0.15;  // fraction of the gap conceded per turn
        double accept_threshold = 0.05; // fraction of listing price
        std::uint64_t noise_seed = 0;   // stream for the +/-1 step jitter
    } opponent;

    double price_of(int level) const {
        return buyer_target + (listing_price - buyer_target) *
                                  (static_cast<double>(level) / (kPriceLevels - 1));
    }

    int seller_level() const {
        double step = (listing_price - buyer_target) / (kPriceLevels - 1);
        double exact = (seller_target - buyer_target) / step;
        int level = static_cast<int>(std::floor(exact + 0.5));
        if (std::abs(exact - level) > 1e-9)
            throw DegenerateScenario("seller target is not on the price grid");
        return level;
    }

    void validate() const {
        if (!(buyer_target < seller_target && seller_target <= listing_price))
            throw DegenerateScenario("need buyer_target < seller_target <= listing_price");
        (void)seller_level();
    }
};

class NegotiationEnv : public Environment {
public:
    explicit NegotiationEnv(NegotiationScenario scenario) : scenario_(std::move(scenario)) {
        scenario_.validate();
    }

    static const std::vector<std::string>& strategy_names() {
        static const std::vector<std::string> names = {
            "greet",   "inquire", "inform", "propose", "counter", "counter-noprice",
            "confirm", "affirm",  "deny",   "agree",   "disagree"};
        return names;
    }

    static Vocabulary build_vocabulary() {
        std::vector<std::string> words = {"pad", "done"};
        for (const auto& s : strategy_names()) words.push_back(s);
        for (int k = 0; k < kPriceLevels; ++k) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "p%02d", k);
            words.emplace_back(buf);
        }
        for (const char* w : {"item", "nice", "old", "new", "works", "look", "deal", "firm",
                              "best", "cash", "today", "meet"})
            words.emplace_back(w);
        return Vocabulary(words);
    }

    static const Vocabulary& shared_vocabulary() {
        static const Vocabulary vocab = build_vocabulary();
        return vocab;
    }

    const std::string& family() const override {
        static const std::string f = "negotiation";
        return f;
    }
    const std::string& scenario_id() const override { return scenario_.id; }
    const Vocabulary& vocab() const override { return shared_vocabulary(); }
    // Width-3 spans keep every price token within one context radius
    // of the prices it depends on, so the concession dynamics are
    // learnable by a windowed model.
    const TurnLayout& layout() const override {
        static const TurnLayout l{3, 3};
        return l;
    }
    TokenId pad_token() const override { return vocab().id("pad"); }
    TokenId done_token() const override { return vocab().id("done"); }

    const std::vector<TokenId>& strategies() const override {
        static const std::vector<TokenId> ids = [] {
            std::vector<TokenId> out;
            for (const auto& s : strategy_names()) out.push_back(shared_vocabulary().id(s));
            return out;
        }();
        return ids;
    }

    const NegotiationScenario& scenario() const { return scenario_; }

    std::vector<TokenId> opening_payload() const override {
        return {vocab().id("greet"), vocab().id("item")};
    }

    TokenId price_token(int level) const {
        char buf[8];
        std::snprintf(buf, sizeof buf, "p%02d", level);
        return vocab().id(buf);
    }

    /// Price level of a token, or -1.
    int level_of(TokenId token) const {
        TokenId first = price_token(0);
        if (token >= first && token < first + kPriceLevels) return token - first;
        return -1;
    }

    // ---- trajectory parsing --------------------------------------------

    /// Running bargaining position after each parsed span.
    struct Tally {
        int sys_offer = -1;  // grid level of the system's standing offer
        int usr_offer = -1;
        int deal_level = -1;
        int deal_turn = -1;
        bool dealt() const { return deal_level >= 0; }
    };

    /// Scans spans in order; a deal happens at the first agree (taken at
    /// the other side's standing offer) or when both standing offers
    /// coincide.
    Tally scan(const Trajectory& traj) const {
        Tally tally;
        const TokenId agree = vocab().id("agree");
        int turn = -1;
        bool user_side = false;
        int span_pos = 0;  // position within the current span payload
        TokenId act = 0;
        for (int i = 0; i < traj.length() && !tally.dealt(); ++i) {
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
                if (act == agree) {
                    int other = user_side ? tally.sys_offer : tally.usr_offer;
                    if (other >= 0) {
                        tally.deal_level = other;
                        tally.deal_turn = turn;
                    }
                }
                continue;
            }
            int level = level_of(t);
            if (level >= 0 && (act == vocab().id("propose") || act == vocab().id("counter") ||
                               act == agree)) {
                if (act != agree) {
                    (user_side ? tally.usr_offer : tally.sys_offer) = level;
                    if (tally.sys_offer >= 0 && tally.sys_offer == tally.usr_offer) {
                        tally.deal_level = level;
                        tally.deal_turn = turn;
                    }
                }
            }
        }
        return tally;
    }

    double slr(double deal_price) const {
        double denom = scenario_.buyer_target - scenario_.seller_target;
        if (scenario_.role == Role::kBuyer)
            return (deal_price - scenario_.seller_target) / denom;
        return (scenario_.buyer_target - deal_price) / denom;
    }

    TrajectoryEvaluation evaluate(const Trajectory& traj) const override {
        TrajectoryEvaluation ev;
        Tally tally = scan(traj);
        if (tally.dealt()) {
            ev.success = true;
            ev.terminal_turn = std::max(tally.deal_turn, 1);
            ev.deal_level = tally.deal_level;
            ev.reward = slr(scenario_.price_of(tally.deal_level));
        } else {
            ev.success = false;
            ev.terminal_turn = std::min(traj.turn_count(), canvas_turns());
            ev.reward = failure_reward();
        }
        return ev;
    }

    OptimalityPredicate target_predicate() const override {
        OptimalityPredicate pred;
        pred.target = Target::reward_max(scenario_.role);
        pred.evaluate = [this](const Trajectory& traj) { return scan(traj).dealt() ? 1 : 0; };
        return pred;
    }

    // ---- scripted opponent ----------------------------------------------

    /// Opponent's standing demand before responding, given the history.
    int opponent_demand(const Tally& tally) const {
        int current = tally.usr_offer;
        if (current >= 0) return current;
        return opponent_opening_level();
    }

    int opponent_opening_level() const {
        bool opp_is_seller = scenario_.role == Role::kBuyer;
        int target = opp_is_seller ? scenario_.seller_level() : 0;
        int extreme = opp_is_seller ? kPriceLevels - 1 : 0;
        double open = target + scenario_.opponent.opening_offset * (extreme - target);
        return static_cast<int>(std::floor(open + 0.5));
    }

    /**
     * Concession recurrence (seller-side opponent; buyer mirrors):
     *   demand' = demand - floor(rate * (demand - bid) + 0.5) + jitter,
     *     jitter in {-1, 0, +1} seeded,
     *   clamped to never rise; crossing the bid means acceptance, as
     *   does a gap within accept_threshold * listing_price.
     */
    std::vector<TokenId> user_payload(const Trajectory& after_system, int turn,
                                      std::uint64_t seed) const override {
        Tally tally = scan(after_system);
        const TokenId agree = vocab().id("agree");
        const TokenId counter = vocab().id("counter");
        if (tally.dealt())  // the system just accepted; acknowledge
            return {vocab().id("affirm"), price_token(tally.deal_level)};

        bool opp_is_seller = scenario_.role == Role::kBuyer;
        int demand = opponent_demand(tally);
        int bid = tally.sys_offer;
        if (bid < 0)  // nothing to react to: state the demand
            return {counter, price_token(demand)};

        double gap_dollars = opp_is_seller
                                 ? scenario_.price_of(demand) - scenario_.price_of(bid)
                                 : scenario_.price_of(bid) - scenario_.price_of(demand);
        if (gap_dollars <= scenario_.opponent.accept_threshold * scenario_.listing_price)
            return {agree, price_token(bid)};

        int gap_levels = opp_is_seller ? demand - bid : bid - demand;
        int concession =
            static_cast<int>(std::floor(scenario_.opponent.concession_rate * gap_levels + 0.5));
        SplitMix64 rng(derive_seed(seed, scenario_.opponent.noise_seed));
        int jitter = static_cast<int>(rng.next_below(3)) - 1;
        int next = opp_is_seller ? demand - concession + jitter : demand + concession + jitter;
        if (opp_is_seller) {
            next = std::min(next, demand);  // concessions never back up
            if (next <= bid) return {agree, price_token(bid)};
        } else {
            next = std::max(next, demand);
            if (next >= bid) return {agree, price_token(bid)};
        }
        return {counter, price_token(next)};
    }

    DialogueAction scripted_action(const DialogueState& state, bool strong,
                                   std::uint64_t seed) const override {
        return strong ? strong_policy(state, seed) : random_policy(state, seed);
    }

    TokenId chatter_strategy() const override { return vocab().id("inform"); }

    /// Myopic signal: how far the opponent's demand moved toward us, a
    /// dealt turn dominating everything.
    double progress_score(const DialogueState& before, const StepResult& after) const override {
        if (after.reward.terminal) return 10.0 + after.reward.value;
        int d0 = opponent_demand(scan(before.prefix));
        int d1 = opponent_demand(scan(after.state.prefix));
        return scenario_.role == Role::kBuyer ? static_cast<double>(d0 - d1)
                                              : static_cast<double>(d1 - d0);
    }

    std::optional<double> deal_price(const TrajectoryEvaluation& ev) const override {
        if (!ev.deal_level) return std::nullopt;
        return scenario_.price_of(*ev.deal_level);
    }

    // ---- scripted planner policies (corpus + baselines) ------------------

    /// Strong scripted policy: open well inside the bracket, concede
    /// stepwise, accept once the opponent's demand is good enough.
    DialogueAction strong_policy(const DialogueState& state, std::uint64_t seed) const {
        Tally tally = scan(state.prefix);
        bool planner_is_buyer = scenario_.role == Role::kBuyer;
        SplitMix64 rng(seed);
        int demand = tally.usr_offer;
        int bid = tally.sys_offer;
        const TokenId counter = vocab().id("counter");
        if (bid < 0) {
            int open = planner_is_buyer ? 2 + static_cast<int>(rng.next_below(3))
                                        : kPriceLevels - 3 - static_cast<int>(rng.next_below(3));
            return {vocab().id("propose"), {price_token(open)}};
        }
        if (demand >= 0) {
            double quality = slr(scenario_.price_of(demand));
            if (quality >= 0.5 || state.turn >= canvas_turns() - 1)
                return {vocab().id("agree"), {price_token(demand)}};
        }
        int gap = demand < 0 ? 4 : std::abs(demand - bid);
        int step = std::max(1, static_cast<int>(std::floor(0.25 * gap + 0.5)));
        int next = planner_is_buyer ? std::min(bid + step, kPriceLevels - 1)
                                    : std::max(bid - step, 0);
        return {counter, {price_token(next)}};
    }

    /// Random-legal policy: uniform strategy, uniform price where one is
    /// needed.
    DialogueAction random_policy(const DialogueState& state, std::uint64_t seed) const {
        (void)state;
        SplitMix64 rng(seed);
        const auto& strats = strategies();
        TokenId strategy = strats[rng.next_below(strats.size())];
        std::vector<TokenId> content;
        if (strategy == vocab().id("propose") || strategy == vocab().id("counter") ||
            strategy == vocab().id("agree")) {
            content.push_back(price_token(static_cast<int>(rng.next_below(kPriceLevels))));
        } else {
            const char* chatter[] = {"item", "nice", "old", "works", "look"};
            content.push_back(vocab().id(chatter[rng.next_below(5)]));
        }
        return {strategy, content};
    }

private:
    NegotiationScenario scenario_;
};

}  // namespace difflogue
