#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "difflogue/condition.hpp"
#include "difflogue/denoiser.hpp"
#include "difflogue/env/base.hpp"
#include "difflogue/mcts.hpp"
#include "difflogue/sampler.hpp"
#include "difflogue/schedule.hpp"

namespace difflogue {

/// Inpainting frame for "continue this conversation": the prefix, the
/// upcoming system marker, optional strategy control, any guidance pins,
/// and <end> at the canvas edge.
inline InpaintingCondition continuation_condition(const Environment& env,
                                                  const DialogueState& state,
                                                  std::optional<TokenId> strategy,
                                                  const InpaintingCondition* extra) {
    InpaintingCondition cond;
    cond.pin_prefix(state.prefix);
    if (state.turn < env.canvas_turns()) {
        int base = state.prefix.length();
        cond.pin(base, Vocabulary::kTurnSys, PinSource::kStructural);
        if (strategy) cond.pin(base + 1, *strategy, PinSource::kSearch);
    }
    cond.pin(env.layout().end_slot(env.canvas_turns()), Vocabulary::kEnd, PinSource::kStructural);
    if (extra) {
        for (const Pin& p : extra->sorted()) {
            if (!cond.pinned(p.slot)) cond.pin(p.slot, p.token, p.source);
        }
    }
    return cond;
}

struct RealizedAction {
    DialogueAction action;
    Trajectory plan;  // the full sampled continuation the action came from
};

/**
 * Instantiates the system's next move by sampling the whole remaining
 * trajectory (the action's content is chosen with lookahead, not greedily)
 * and reading the next system span out of the sample. A sampled act
 * outside the environment's strategy set degrades to the chatter
 * strategy.
 */
inline RealizedAction realize_action(const CountDenoiser& model, const Environment& env,
                                     const DialogueState& state, std::optional<TokenId> strategy,
                                     const InpaintingCondition* extra,
                                     const NoiseSchedule& schedule, std::uint64_t seed) {
    InpaintingCondition cond = continuation_condition(env, state, strategy, extra);
    SampleOutcome sampled = sample(model, cond, schedule, seed);
    int base = state.prefix.length();
    RealizedAction out;
    out.plan = std::move(sampled.trajectory);
    TokenId act = out.plan.at(base + 1);
    bool legal = false;
    for (TokenId s : env.strategies()) legal |= (s == act);
    out.action.strategy_tag = legal ? act : env.chatter_strategy();
    for (int i = base + 2; i < base + env.layout().system_width; ++i)
        out.action.content.push_back(out.plan.at(i));
    return out;
}

struct RolloutResult {
    Trajectory trajectory;
    double reward = 0.0;
    TrajectoryEvaluation evaluation;
    bool sampled = false;  // false when the prefix was already terminal
};

/**
 * Conversation simulation for search-based guidance: pin the prefix plus
 * the chosen action's strategy tag (word-level control of the action
 * type), let the diffusion model inpaint how the rest of the dialogue
 * unfolds, and score the simulated outcome with the environment's own
 * evaluator. A prefix that already reached a terminal event returns its
 * reward without sampling.
 */
inline RolloutResult simulate_rollout(const CountDenoiser& model, const DialogueState& state,
                                      std::optional<TokenId> action_strategy,
                                      const Environment& env, const NoiseSchedule& schedule,
                                      std::uint64_t seed,
                                      const InpaintingCondition* extra = nullptr) {
    RolloutResult out;
    TrajectoryEvaluation now = env.evaluate(state.prefix);
    if (now.success || state.turn >= env.canvas_turns()) {
        out.trajectory = state.prefix;
        out.evaluation = now;
        out.reward = now.reward;
        return out;
    }
    if (action_strategy) {
        bool legal = false;
        for (TokenId s : env.strategies()) legal |= (s == *action_strategy);
        if (!legal) throw IllegalAction("simulate_rollout: strategy not in this environment");
    }
    InpaintingCondition cond = continuation_condition(env, state, action_strategy, extra);
    SampleOutcome sampled = sample(model, cond, schedule, seed);
    out.trajectory = std::move(sampled.trajectory);
    out.evaluation = env.evaluate(out.trajectory);
    out.reward = out.evaluation.reward;
    out.sampled = true;
    return out;
}

/**
 * The dialogue planning world driven by the diffusion model: tree edges
 * realize their system response by sampling, the scripted environment
 * answers, and leaf evaluation inpaints the remaining conversation.
 */
class DialogueWorld {
public:
    using State = DialogueState;

    DialogueWorld(const CountDenoiser& model, const Environment& env,
                  const NoiseSchedule& schedule, const InpaintingCondition* extra = nullptr,
                  int rollouts_per_leaf = 3)
        : model_(model), env_(env), schedule_(schedule), extra_(extra),
          rollouts_per_leaf_(std::max(1, rollouts_per_leaf)) {}

    int num_actions(const State&) const { return static_cast<int>(env_.strategies().size()); }

    struct Step {
        State state;
        double reward = 0.0;
        bool terminal = false;
    };

    Step step(const State& state, int action, SplitMix64& rng) const {
        TokenId strategy = env_.strategies().at(static_cast<std::size_t>(action));
        RealizedAction realized =
            realize_action(model_, env_, state, strategy, extra_, schedule_, rng.next());
        StepResult result = env_.env_step(state, realized.action, rng.next());
        return {std::move(result.state), result.reward.value, result.terminal};
    }

    /// Discounted tail value of `state`, averaged over a few simulated
    /// completions of the conversation. Returned as a single entry at
    /// offset zero; each completion's reward is pre-discounted by its
    /// distance, so back-propagation sees the same return as it would
    /// from the per-turn reward vector.
    std::vector<double> rollout(const State& state, SplitMix64& rng) const {
        double gamma = discount_;
        double total = 0.0;
        for (int m = 0; m < rollouts_per_leaf_; ++m) {
            RolloutResult sim =
                simulate_rollout(model_, state, std::nullopt, env_, schedule_, rng.next(), extra_);
            int offset = std::max(0, sim.evaluation.terminal_turn - state.turn);
            total += std::pow(gamma, offset) * sim.reward;
        }
        return {total / rollouts_per_leaf_};
    }

    void set_discount(double gamma) { discount_ = gamma; }

private:
    const CountDenoiser& model_;
    const Environment& env_;
    const NoiseSchedule& schedule_;
    const InpaintingCondition* extra_;
    int rollouts_per_leaf_;
    double discount_ = 0.95;
};

struct PlanConfig {
    int budget = 10;           // K
    double exploration = 1.5;  // w
    double discount = 0.95;    // gamma
    int rollouts_per_leaf = 3; // completions averaged per simulation stage
    bool keep_trace = false;
};

struct PlanDecision {
    int strategy_index = -1;
    DialogueAction action;
    Trajectory plan;
    PlanOutcome<DialogueState> search;
};

/**
 * Search-based guidance: K iterations of select / expand / simulate /
 * backpropagate from the current state, then the root action with the
 * highest Q. The returned action's content is realized under the chosen
 * strategy pin. Deterministic given the seed.
 */
inline PlanDecision plan(const DialogueState& root_state, const CountDenoiser& model,
                         const Environment& env, const NoiseSchedule& schedule,
                         const PlanConfig& config, std::uint64_t seed,
                         const InpaintingCondition* extra = nullptr) {
    DialogueWorld world(model, env, schedule, extra, config.rollouts_per_leaf);
    world.set_discount(config.discount);
    PlanDecision decision;
    decision.search = mcts_search(world, root_state, config.budget, config.exploration,
                                  config.discount, derive_seed(seed, 0x73656172ull),
                                  config.keep_trace);
    decision.strategy_index = decision.search.action;
    TokenId strategy = env.strategies().at(static_cast<std::size_t>(decision.search.action));
    RealizedAction realized = realize_action(model, env, root_state, strategy, extra, schedule,
                                             derive_seed(seed, 0x61637421ull));
    decision.action = std::move(realized.action);
    decision.plan = std::move(realized.plan);
    return decision;
}

/// One-step lookahead baseline: take the strategy whose immediate effect
/// on the scripted opponent scores best (ties to the lowest index).
inline DialogueAction greedy_action(const CountDenoiser& model, const Environment& env,
                                    const DialogueState& state, const NoiseSchedule& schedule,
                                    std::uint64_t seed) {
    const auto& strategies = env.strategies();
    int best = 0;
    double best_score = 0.0;
    DialogueAction best_action;
    for (std::size_t a = 0; a < strategies.size(); ++a) {
        std::uint64_t branch = derive_seed(seed, static_cast<std::uint64_t>(a));
        RealizedAction realized = realize_action(model, env, state, strategies[a], nullptr,
                                                 schedule, derive_seed(branch, 1));
        StepResult step = env.env_step(state, realized.action, derive_seed(branch, 2));
        double score = env.progress_score(state, step);
        if (a == 0 || score > best_score) {
            best = static_cast<int>(a);
            best_score = score;
            best_action = realized.action;
        }
    }
    (void)best;
    return best_action;
}

}  // namespace difflogue
