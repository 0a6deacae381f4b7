#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "difflogue/env/base.hpp"
#include "difflogue/env/negotiation.hpp"
#include "difflogue/errors.hpp"
#include "difflogue/levenshtein.hpp"
#include "difflogue/trajectory.hpp"

namespace difflogue {

/// Ratio of episodes that reached the target within the turn limit.
inline double success_rate(const std::vector<EpisodeResult>& results) {
    if (results.empty()) throw EmptyResults("success_rate: no episodes");
    double hits = 0.0;
    for (const auto& r : results) hits += r.success ? 1.0 : 0.0;
    return hits / static_cast<double>(results.size());
}

/**
 * Mean number of turns to reach the target. Failed episodes contribute
 * T_max turns by convention; pass success_only to average over the
 * successful episodes instead (reported with a distinct label).
 */
inline double average_turn(const std::vector<EpisodeResult>& results, bool success_only = false) {
    if (results.empty()) throw EmptyResults("average_turn: no episodes");
    double sum = 0.0;
    int n = 0;
    for (const auto& r : results) {
        if (success_only && !r.success) continue;
        sum += r.success ? r.turns_used : kMaxTurns;
        ++n;
    }
    if (n == 0) throw EmptyResults("average_turn: no successful episodes");
    return sum / static_cast<double>(n);
}

/**
 * Sell-to-list ratio: the fraction of the negotiable bracket captured by
 * the planner's side; 0 at the opponent's target, 1 at its own. A failed
 * negotiation scores 0. The formula is affine, so deals outside the
 * bracket fall outside [0,1] with the correct sign.
 */
inline double sell_to_list_ratio(const NegotiationScenario& scenario,
                                 std::optional<double> deal_price) {
    if (scenario.buyer_target == scenario.seller_target)
        throw DegenerateScenario("sell_to_list_ratio: buyer and seller targets coincide");
    if (!deal_price) return 0.0;
    double denom = scenario.buyer_target - scenario.seller_target;
    if (scenario.role == Role::kBuyer) return (*deal_price - scenario.seller_target) / denom;
    return (scenario.buyer_target - *deal_price) / denom;
}

/// Fraction of target keywords mentioned anywhere in the trajectory.
inline double keyword_coverage_ratio(const std::vector<TokenId>& target, const Trajectory& traj) {
    if (target.empty()) throw EmptyResults("keyword_coverage_ratio: empty target");
    double covered = 0.0;
    for (TokenId k : target) {
        for (TokenId t : traj.tokens()) {
            if (t == k) {
                covered += 1.0;
                break;
            }
        }
    }
    return covered / static_cast<double>(target.size());
}

/// Target keywords in the order of their first mention.
inline std::vector<TokenId> first_mention_sequence(const std::vector<TokenId>& target,
                                                   const Trajectory& traj) {
    std::vector<TokenId> seq;
    for (TokenId t : traj.tokens()) {
        bool is_target = false;
        for (TokenId k : target) is_target |= (k == t);
        if (!is_target) continue;
        bool seen = false;
        for (TokenId s : seq) seen |= (s == t);
        if (!seen) seq.push_back(t);
    }
    return seq;
}

/// Levenshtein distance between the target keyword list and the sequence
/// of first mentions; repeated mentions are ignored.
inline int keyword_order_distance(const std::vector<TokenId>& target, const Trajectory& traj) {
    if (target.empty()) throw EmptyResults("keyword_order_distance: empty target");
    return levenshtein(target, first_mention_sequence(target, traj));
}

/// Harmonic mean of token-multiset precision and recall between two
/// trajectories, reserved tokens excluded.
inline double token_f1(const Trajectory& candidate, const Trajectory& reference) {
    if (candidate.contains_mask() || reference.contains_mask())
        throw ContainsMask("token_f1: trajectory has masks");
    auto multiset = [](const Trajectory& t) {
        std::map<TokenId, int> counts;
        for (TokenId tok : t.tokens())
            if (!Vocabulary::is_reserved(tok)) counts[tok] += 1;
        return counts;
    };
    std::map<TokenId, int> a = multiset(candidate), b = multiset(reference);
    double overlap = 0.0, na = 0.0, nb = 0.0;
    for (auto& [tok, c] : a) na += c;
    for (auto& [tok, c] : b) nb += c;
    for (auto& [tok, c] : a) {
        auto it = b.find(tok);
        if (it != b.end()) overlap += std::min(c, it->second);
    }
    if (na == 0.0 || nb == 0.0 || overlap == 0.0) return 0.0;
    double precision = overlap / na;
    double recall = overlap / nb;
    return 2.0 * precision * recall / (precision + recall);
}

/**
 * Aggregate report over one run. Fields are optional because each
 * scenario family reports its own subset. The machine-readable row has
 * the fixed column order
 *   fingerprint,suite,guidance,planner,n,sr,at,slr,kcr,dist,f1
 * with '-' for absent values, so runs diff cleanly.
 */
struct MetricReport {
    std::string fingerprint;
    std::string suite;
    std::string guidance;
    std::string planner;
    int n_episodes = 0;
    std::optional<double> success_rate;
    std::optional<double> average_turn;
    std::optional<double> mean_slr;
    std::optional<double> kcr;
    std::optional<double> mean_edit_distance;
    std::optional<double> token_f1;

    void validate() const {
        auto in01 = [](std::optional<double> v) { return !v || (*v >= 0.0 && *v <= 1.0); };
        if (!in01(success_rate) || !in01(kcr))
            throw Error("metric report: rate outside [0,1]");
        if (average_turn && (*average_turn < 1.0 || *average_turn > kMaxTurns))
            throw Error("metric report: average turn outside [1, T_max]");
    }

    static std::string cell(std::optional<double> v) {
        if (!v) return "-";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return buf;
    }

    std::string row() const {
        std::string out = fingerprint + "," + suite + "," + guidance + "," + planner + "," +
                          std::to_string(n_episodes);
        for (auto v : {success_rate, average_turn, mean_slr, kcr, mean_edit_distance, token_f1})
            out += "," + cell(v);
        return out;
    }

    void print(std::ostream& out) const {
        out << "difflogue report v1\n";
        out << "fingerprint=" << fingerprint << " suite=" << suite << " guidance=" << guidance
            << " planner=" << planner << " episodes=" << n_episodes << '\n';
        auto line = [&](const char* name, std::optional<double> v) {
            if (v) out << name << ' ' << cell(v) << '\n';
        };
        line("SR", success_rate);
        line("AT", average_turn);
        line("SLR", mean_slr);
        line("KCR", kcr);
        line("Dist", mean_edit_distance);
        line("F1", token_f1);
    }
};

}  // namespace difflogue
