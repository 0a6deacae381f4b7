#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "difflogue/errors.hpp"
#include "difflogue/guidance.hpp"
#include "difflogue/rng.hpp"
#include "difflogue/trajectory.hpp"
#include "difflogue/vocabulary.hpp"

namespace difflogue {

struct EpisodeResult {
    Trajectory trajectory;
    bool success = false;
    int turns_used = kMaxTurns;           // terminal turn; failures count T_max
    std::optional<double> deal_price;     // negotiation only, present iff success
    double final_reward = 0.0;
};

/// Outcome of one environment step.
struct StepResult {
    DialogueState state;
    RewardSignal reward;
    bool terminal = false;
};

/// Pure re-evaluation of a complete (possibly simulated) trajectory.
struct TrajectoryEvaluation {
    bool success = false;
    int terminal_turn = kMaxTurns;
    double reward = 0.0;
    std::optional<int> deal_level;  // negotiation only
};

/**
 * A scripted synthetic world: transition via the scripted user policy,
 * sparse terminal reward, target predicate, and the fixed-width canvas
 * conventions shared with the sampler.
 *
 * Episodes live on a fixed canvas of kMaxTurns turns; turns after the
 * terminal event are filled with `done` filler spans so every encoded
 * trajectory has the same length and <end> position. evaluate() reads
 * the earliest terminal event out of the text, which makes it applicable
 * to model-simulated futures as well as real episodes.
 */
class Environment {
public:
    virtual ~Environment() = default;

    virtual const std::string& family() const = 0;
    virtual const std::string& scenario_id() const = 0;
    virtual const Vocabulary& vocab() const = 0;
    virtual const TurnLayout& layout() const = 0;
    virtual TokenId pad_token() const = 0;
    virtual TokenId done_token() const = 0;

    /// Legal action strategies, index order fixed; MCTS actions are
    /// indices into this list.
    virtual const std::vector<TokenId>& strategies() const = 0;

    /// Payload of the predefined system opening (strategy + content).
    virtual std::vector<TokenId> opening_payload() const = 0;

    /// Scripted user reply to the dialogue so far (payload after <usr>).
    /// Pure function of (scenario, history, seed).
    virtual std::vector<TokenId> user_payload(const Trajectory& after_system, int turn,
                                              std::uint64_t seed) const = 0;

    /// Earliest terminal event in the trajectory, if any.
    virtual TrajectoryEvaluation evaluate(const Trajectory& traj) const = 0;

    /// The target predicate g for this scenario (optimality variable).
    virtual OptimalityPredicate target_predicate() const = 0;

    /// Scripted planner move, either the strong or the random-legal
    /// policy; used for corpus generation and baselines.
    virtual DialogueAction scripted_action(const DialogueState& state, bool strong,
                                           std::uint64_t seed) const = 0;

    /// Strategy a sampled-but-illegal act degrades to.
    virtual TokenId chatter_strategy() const = 0;

    /// One-step progress measure for the greedy baseline. Defaults to
    /// the terminal reward; environments add a myopic signal.
    virtual double progress_score(const DialogueState& before, const StepResult& after) const {
        (void)before;
        return after.reward.terminal ? after.reward.value : 0.0;
    }

    /// Dollar price of a dealt episode, when the family has one.
    virtual std::optional<double> deal_price(const TrajectoryEvaluation&) const {
        return std::nullopt;
    }

    /// Reward on hitting the turn limit without reaching the target.
    virtual double failure_reward() const { return -0.1; }

    // ---- canvas helpers ------------------------------------------------

    int canvas_turns() const { return kMaxTurns; }
    int canvas_length() const { return layout().length_for_turns(kMaxTurns); }

    std::vector<TokenId> filler_payload() const { return {done_token()}; }

    /// Appends one span (marker + payload padded to layout width).
    void append_span(std::vector<TokenId>& tokens, TokenId marker,
                     std::vector<TokenId> payload, bool user_side) const {
        int width = user_side ? layout().user_width : layout().system_width;
        tokens.push_back(marker);
        auto padded = layout().pad_span(std::move(payload), width, pad_token());
        tokens.insert(tokens.end(), padded.begin(), padded.end());
    }

    /// Pads a finished dialogue with filler turns up to the full canvas
    /// and the trailing <end>.
    Trajectory to_canvas(const Trajectory& dialogue) const {
        std::vector<TokenId> tokens = dialogue.tokens();
        int turns = dialogue.turn_count();
        for (int t = turns; t < canvas_turns(); ++t) {
            append_span(tokens, Vocabulary::kTurnSys, filler_payload(), false);
            append_span(tokens, Vocabulary::kTurnUsr, filler_payload(), true);
        }
        tokens.push_back(Vocabulary::kEnd);
        return Trajectory(std::move(tokens));
    }

    /// Turn-0 state: the predefined system opening (or a planned
    /// replacement span) followed by the scripted user reply.
    DialogueState bootstrap(std::uint64_t seed,
                            const std::vector<TokenId>* system_payload = nullptr) const {
        std::vector<TokenId> tokens;
        append_span(tokens, Vocabulary::kTurnSys,
                    system_payload ? *system_payload : opening_payload(), false);
        Trajectory after_system(tokens);
        auto user = user_payload(after_system, 0, derive_seed(seed, 0));
        append_span(tokens, Vocabulary::kTurnUsr, std::move(user), true);
        DialogueState state;
        state.prefix = Trajectory(std::move(tokens));
        state.turn = 1;
        return state;
    }

    /**
     * One conversational turn: the system takes `action`, the scripted
     * user answers, terminal conditions are read off the updated text.
     */
    StepResult env_step(const DialogueState& state, const DialogueAction& action,
                        std::uint64_t seed) const {
        if (state.turn >= canvas_turns())
            throw IllegalAction("env_step: episode already at the turn limit");
        bool legal = false;
        for (TokenId s : strategies())
            if (s == action.strategy_tag) legal = true;
        if (!legal)
            throw IllegalAction("env_step: strategy '" + vocab().name(action.strategy_tag) +
                                "' not in this environment");

        std::vector<TokenId> tokens = state.prefix.tokens();
        std::vector<TokenId> payload = {action.strategy_tag};
        payload.insert(payload.end(), action.content.begin(), action.content.end());
        append_span(tokens, Vocabulary::kTurnSys, std::move(payload), false);

        StepResult out;
        Trajectory after_system(tokens);
        TrajectoryEvaluation ev = evaluate(after_system);
        if (ev.success) {
            // The system's own move reached the target (e.g. accepting a
            // standing offer); the user still closes the turn.
            auto user = user_payload(after_system, state.turn, seed);
            append_span(tokens, Vocabulary::kTurnUsr, std::move(user), true);
        } else {
            auto user = user_payload(after_system, state.turn, seed);
            append_span(tokens, Vocabulary::kTurnUsr, std::move(user), true);
            ev = evaluate(Trajectory(tokens));
        }

        out.state.prefix = Trajectory(std::move(tokens));
        out.state.turn = state.turn + 1;
        out.state.context = state.context;
        if (ev.success) {
            out.terminal = true;
            out.reward.value = ev.reward;
            out.reward.terminal = true;
        } else if (out.state.turn >= canvas_turns()) {
            out.terminal = true;
            out.reward.value = failure_reward();
            out.reward.terminal = true;
        }
        return out;
    }
};

}  // namespace difflogue
