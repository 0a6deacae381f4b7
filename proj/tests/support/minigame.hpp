#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "difflogue/rng.hpp"

namespace difflogue::test {

/**
 * Enumerable 3-turn / 5-action bargaining mini-game for checking the
 * search against exhaustive expectimax. The planner is the buyer on a
 * 0..8 price ladder; the opponent opens at 8, accepts a bid with a
 * probability that grows as the gap closes, and otherwise concedes a
 * fraction of the gap (a small or a large cut, stochastically). Rewards:
 * deal at price p pays (8-p)/8 on the turn it lands, running out of
 * turns pays -0.1.
 */
struct MiniGame {
    static constexpr int kTop = 8;
    static constexpr int kTurns = 3;
    static constexpr double kConcedeSmallProb = 0.7;
    static constexpr double kSmallCut = 0.35;
    static constexpr double kLargeCut = 0.7;
    static constexpr double kFail = -0.1;

    static double accept_prob(int gap) {
        if (gap <= 0) return 1.0;
        if (gap == 1) return 0.7;
        if (gap == 2) return 0.4;
        return 0.0;
    }
    static int cut(double fraction, int gap) {
        return std::max(1, static_cast<int>(std::floor(fraction * gap + 0.5)));
    }

    struct State {
        int turn = 0;
        int bid = -1;  // no bid yet
        int demand = kTop;
    };

    using Outcome = std::pair<State, double>;  // next state, reward (terminal if reward != 0 case handled via struct below)

    struct Step {
        State state;
        double reward = 0.0;
        bool terminal = false;
    };

    int num_actions(const State&) const { return 5; }

    static double deal_value(int price) { return static_cast<double>(kTop - price) / kTop; }

    /// Deterministic part of the transition: the planner's move. Returns
    /// the new bid, or a terminal deal (agree / overshoot).
    static Step apply_action(const State& s, int action) {
        Step out;
        out.state = s;
        if (action == 4) {  // agree at the standing demand
            out.terminal = true;
            out.reward = deal_value(s.demand);
            return out;
        }
        int bid = std::max(s.bid, 0) + action;  // action = raise amount, 0..3
        bid = std::min(bid, kTop);
        if (bid >= s.demand) {  // overshoot: deal at the bid
            out.terminal = true;
            out.reward = deal_value(bid);
            return out;
        }
        out.state.bid = bid;
        return out;
    }

    /// Stochastic opponent branches after a non-terminal planner move:
    /// (probability, step). The turn counter advances here.
    static std::vector<std::pair<double, Step>> opponent_branches(const State& after_action) {
        std::vector<std::pair<double, Step>> out;
        int bid = after_action.bid;
        int demand = after_action.demand;
        int gap = demand - bid;
        auto advance = [&](double prob, int new_demand, bool deal) {
            Step s;
            s.state = after_action;
            s.state.turn = after_action.turn + 1;
            s.state.demand = new_demand;
            if (deal) {
                s.terminal = true;
                s.reward = deal_value(bid);
            } else if (s.state.turn >= kTurns) {
                s.terminal = true;
                s.reward = kFail;
            }
            out.push_back({prob, s});
        };
        double stay = 1.0;
        double pa = accept_prob(gap);
        if (pa > 0.0) {
            advance(pa, demand, true);
            stay -= pa;
        }
        if (stay > 0.0) {
            auto concede = [&](double prob, int steps) {
                int nd = std::max(demand - steps, bid);
                advance(prob, nd, nd == bid);
            };
            concede(stay * kConcedeSmallProb, cut(kSmallCut, gap));
            concede(stay * (1.0 - kConcedeSmallProb), cut(kLargeCut, gap));
        }
        return out;
    }

    Step step(const State& s, int action, SplitMix64& rng) const {
        Step moved = apply_action(s, action);
        if (moved.terminal) return moved;
        auto branches = opponent_branches(moved.state);
        double u = rng.next_double();
        double acc = 0.0;
        for (auto& [p, next] : branches) {
            acc += p;
            if (u < acc) return next;
        }
        return branches.back().second;
    }

    /// Uniform-random playout; rewards indexed by turn offset.
    std::vector<double> rollout(const State& s, SplitMix64& rng) const {
        std::vector<double> rewards;
        State cur = s;
        while (true) {
            int action = static_cast<int>(rng.next_below(5));
            Step next = step(cur, action, rng);
            rewards.push_back(next.reward);
            if (next.terminal) break;
            cur = next.state;
        }
        return rewards;
    }
};

/// Exhaustive expectimax over the full mini-game tree.
struct MiniGameOracle {
    double gamma;

    double value(const MiniGame::State& s) const {
        double best = -1e9;
        for (int a = 0; a < 5; ++a) best = std::max(best, q_value(s, a));
        return best;
    }

    double q_value(const MiniGame::State& s, int action) const {
        MiniGame::Step moved = MiniGame::apply_action(s, action);
        if (moved.terminal) return moved.reward;
        double q = 0.0;
        for (auto& [p, next] : MiniGame::opponent_branches(moved.state)) {
            double v = next.reward;
            if (!next.terminal) v += gamma * value(next.state);
            q += p * v;
        }
        return q;
    }

    int best_action(const MiniGame::State& s) const {
        int best = 0;
        double best_q = q_value(s, 0);
        for (int a = 1; a < 5; ++a) {
            double q = q_value(s, a);
            if (q > best_q) {
                best = a;
                best_q = q;
            }
        }
        return best;
    }
};

}  // namespace difflogue::test
