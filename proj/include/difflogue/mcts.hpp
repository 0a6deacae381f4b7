#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "difflogue/errors.hpp"
#include "difflogue/rng.hpp"

namespace difflogue {

/**
 * Node of the conversational search tree. Children are keyed by action
 * index; Q(s,a) is the running mean of the discounted tail return of
 * every simulation through that edge.
 *
 * The tree is open-loop: an edge stands for "take action a here", and
 * each traversal re-samples the (stochastic) transition, so Q estimates
 * the expectation over environment responses. `state` holds the most
 * recently sampled state at this node.
 */
template <typename State>
struct SearchNode {
    State state;
    bool terminal = false;
    int visits = 0;  // N(s)
    std::vector<int> untried;
    std::map<int, std::unique_ptr<SearchNode>> children;
    std::map<int, double> q;
    std::map<int, int> child_visits;

    explicit SearchNode(State s) : state(std::move(s)) {}

    bool fully_expanded() const { return untried.empty(); }
};

/**
 * UCT selection: argmax over expanded children of
 *     Q(s,a) + w * sqrt(log N(s) / N(c(s,a))).
 * A child with zero visits is taken before any comparison (the bonus is
 * undefined there); ties always break to the lowest action index.
 */
template <typename State>
int uct_select(const SearchNode<State>& node, double w) {
    if (node.children.empty()) throw NoChildren("uct_select: node has no expanded children");
    for (const auto& [action, child] : node.children) {
        auto it = node.child_visits.find(action);
        if (it == node.child_visits.end() || it->second == 0) return action;
    }
    int best_action = -1;
    double best_score = 0.0;
    for (const auto& [action, child] : node.children) {
        double q = node.q.at(action);
        double bonus = w * std::sqrt(std::log(static_cast<double>(node.visits)) /
                                     static_cast<double>(node.child_visits.at(action)));
        double score = q + bonus;
        if (best_action < 0 || score > best_score) {
            best_action = action;
            best_score = score;
        }
    }
    return best_action;
}

/**
 * Reward back-propagation. `rewards` lists the per-turn rewards from the
 * root edge onward and may extend past the tree path with simulated tail
 * rewards; entry t of the path absorbs the discounted tail return
 * G_t = sum_{t' >= t} gamma^(t'-t) r_t' as a running mean. Returns G_0,
 * the return seen by the root edge.
 */
template <typename State>
double backpropagate(std::vector<std::pair<SearchNode<State>*, int>>& path,
                     const std::vector<double>& rewards, double gamma) {
    if (path.empty()) throw Error("backpropagate: empty path");
    std::vector<double> tail(rewards.size() + 1, 0.0);
    for (std::size_t t = rewards.size(); t-- > 0;)
        tail[t] = rewards[t] + gamma * tail[t + 1];
    for (std::size_t t = 0; t < path.size(); ++t) {
        auto [node, action] = path[t];
        node->visits += 1;
        int& n = node->child_visits[action];
        n += 1;
        double& q = node->q[action];
        q += (tail[t] - q) / static_cast<double>(n);
    }
    return tail[0];
}

/// One line per simulation for the planning trace export.
struct TraceRow {
    int iteration = 0;
    std::vector<int> path;
    double rollout_reward = 0.0;
    std::map<int, double> root_q;
};

template <typename State>
struct PlanOutcome {
    int action = -1;
    std::map<int, double> root_q;
    std::map<int, int> root_visits;
    std::vector<TraceRow> trace;
};

/**
 * Monte Carlo tree search over a World:
 *
 *   struct World {
 *     using State = ...;
 *     int num_actions(const State&);                     // fixed per depth
 *     Step step(const State&, int action, SplitMix64&);  // {state, reward, terminal}
 *     std::vector<double> rollout(const State&, SplitMix64&);  // tail rewards by turn
 *   };
 *
 * Runs `budget` iterations of select / expand / simulate / backpropagate
 * and returns the root action with the highest Q (ties to the lowest
 * index). Deterministic given the seed. Iteration k draws from the
 * derived stream (seed, k), so traversals are independent and the
 * transition expectation is sampled afresh on every pass.
 */
template <typename World>
PlanOutcome<typename World::State> mcts_search(World& world,
                                               const typename World::State& root_state,
                                               int budget, double w, double gamma,
                                               std::uint64_t seed, bool keep_trace = false) {
    using State = typename World::State;
    if (budget < 1) throw Error("mcts_search: budget must be >= 1");
    int root_actions = world.num_actions(root_state);
    if (root_actions < 1) throw NoLegalActions("mcts_search: no legal actions at the root");

    SearchNode<State> root(root_state);
    for (int a = 0; a < root_actions; ++a) root.untried.push_back(a);

    PlanOutcome<State> outcome;
    for (int k = 0; k < budget; ++k) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        SearchNode<State>* node = &root;
        std::vector<std::pair<SearchNode<State>*, int>> path;
        std::vector<double> rewards;
        double rollout_reward = 0.0;

        // Selection: descend through fully expanded nodes, re-sampling
        // each transition.
        while (!node->terminal && node->fully_expanded() && !node->children.empty()) {
            int action = uct_select(*node, w);
            auto step = world.step(node->state, action, rng);
            path.emplace_back(node, action);
            rewards.push_back(step.reward);
            SearchNode<State>* child = node->children.at(action).get();
            child->state = step.state;
            child->terminal = step.terminal;
            if (!step.terminal && child->untried.empty() && child->children.empty()) {
                int n = world.num_actions(step.state);
                for (int a = 0; a < n; ++a) child->untried.push_back(a);
            }
            node = child;
        }

        // Expansion: one uniformly random untried action.
        if (!node->terminal && !node->untried.empty()) {
            std::size_t pick = rng.next_below(node->untried.size());
            int action = node->untried[pick];
            node->untried.erase(node->untried.begin() + static_cast<std::ptrdiff_t>(pick));
            auto step = world.step(node->state, action, rng);
            path.emplace_back(node, action);
            rewards.push_back(step.reward);
            auto child = std::make_unique<SearchNode<State>>(step.state);
            child->terminal = step.terminal;
            if (!step.terminal) {
                int n = world.num_actions(step.state);
                for (int a = 0; a < n; ++a) child->untried.push_back(a);
            }
            SearchNode<State>* leaf = child.get();
            node->children.emplace(action, std::move(child));
            node = leaf;
        }

        // Simulation: predict how the rest of the conversation unfolds.
        if (!node->terminal) {
            std::vector<double> tail = world.rollout(node->state, rng);
            for (double r : tail) {
                rewards.push_back(r);
                rollout_reward += r;
            }
        }

        backpropagate(path, rewards, gamma);
        if (keep_trace) {
            TraceRow row;
            row.iteration = k;
            for (auto& [n, a] : path) row.path.push_back(a);
            row.rollout_reward = rollout_reward;
            row.root_q = root.q;
            outcome.trace.push_back(std::move(row));
        }
    }

    int best = -1;
    double best_q = 0.0;
    for (const auto& [action, q] : root.q) {
        if (best < 0 || q > best_q) {
            best = action;
            best_q = q;
        }
    }
    outcome.action = best;
    outcome.root_q = root.q;
    outcome.root_visits = root.child_visits;
    return outcome;
}

}  // namespace difflogue
