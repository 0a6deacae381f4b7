#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "difflogue/condition.hpp"
#include "difflogue/denoiser.hpp"
#include "difflogue/errors.hpp"
#include "difflogue/masking.hpp"
#include "difflogue/rng.hpp"
#include "difflogue/schedule.hpp"
#include "difflogue/trajectory.hpp"

namespace difflogue {

/// One token assignment during reverse sampling.
struct UnmaskEvent {
    int step = 0;  // schedule step at which the slot was unmasked
    int slot = 0;
    TokenId token = 0;
    double log_prob = 0.0;
};

struct SampleOutcome {
    Trajectory trajectory;
    double log_score = 0.0;           // sum of event log-probabilities
    std::vector<UnmaskEvent> events;  // chronological; replayable when !repaired
    bool repaired = false;
};

namespace detail {

/// Work length of a sample: the <end> pin decides it; otherwise a seeded
/// draw from the model's length histogram, stretched to clear every pin.
inline int resolve_length(const CountDenoiser& model, InpaintingCondition& cond,
                          SplitMix64& rng) {
    int end = cond.end_slot();
    if (end >= 0) return end + 1;
    int len = model.sample_length(rng);
    len = std::max(len, cond.max_slot() + 2);
    len = std::min(len, kTrajectoryCapacity);
    cond.pin(len - 1, Vocabulary::kEnd, PinSource::kStructural);
    return len;
}

}  // namespace detail

/**
 * Reverse denoising with inpainting (the conditional part is carried
 * entirely by the pins):
 *
 *   1. Start from tau^N: every unpinned slot masked.
 *   2. At step n the masked count drops to masked_count(n-1, #unpinned);
 *      the slots to unmask are the masked slots of highest predictor
 *      confidence (max probability, ties to the lowest slot), their
 *      tokens drawn categorically from predictions computed at the start
 *      of the step.
 *   3. If the finished trajectory violates marker discipline, one repair
 *      pass re-samples only the offending marker/<end> slots conditioned
 *      on everything else; a second failure raises NonconvergentSample.
 *
 * Deterministic given (model, condition, schedule, seed). Pins are
 * preserved verbatim, always.
 */
inline SampleOutcome sample(const CountDenoiser& model, const InpaintingCondition& condition,
                            const NoiseSchedule& schedule, std::uint64_t seed) {
    condition.validate_markers();
    InpaintingCondition cond = condition;
    SplitMix64 rng(seed);
    int length = detail::resolve_length(model, cond, rng);

    Trajectory work(std::vector<TokenId>(static_cast<std::size_t>(length), Vocabulary::kMask));
    for (const Pin& p : cond.sorted()) work.set(p.slot, p.token);

    std::vector<int> free_slots = unpinned_slots(work, cond);
    // All free slots start masked; pinned slots never re-enter the pool.
    int masked = static_cast<int>(free_slots.size());

    SampleOutcome outcome;
    std::vector<std::optional<std::vector<double>>> cache(static_cast<std::size_t>(length));

    auto invalidate_near = [&](int slot) {
        for (int d = -model.context_radius(); d <= model.context_radius(); ++d) {
            int j = slot + d;
            if (j >= 0 && j < length) cache[static_cast<std::size_t>(j)].reset();
        }
    };

    for (int n = schedule.steps; n >= 1 && masked > 0; --n) {
        int target = schedule.masked_count(n - 1, static_cast<int>(free_slots.size()));
        int to_unmask = masked - target;
        if (to_unmask <= 0) continue;

        struct Ranked {
            double confidence;
            int slot;
        };
        std::vector<Ranked> ranked;
        ranked.reserve(static_cast<std::size_t>(masked));
        for (int s : free_slots) {
            if (work.at(s) != Vocabulary::kMask) continue;
            auto& entry = cache[static_cast<std::size_t>(s)];
            if (!entry) entry = model.predict(work, s);
            double best = 0.0;
            for (double p : *entry) best = std::max(best, p);
            ranked.push_back({best, s});
        }
        std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
            return a.confidence != b.confidence ? a.confidence > b.confidence : a.slot < b.slot;
        });

        for (int i = 0; i < to_unmask && i < static_cast<int>(ranked.size()); ++i) {
            int slot = ranked[static_cast<std::size_t>(i)].slot;
            const std::vector<double>& probs = *cache[static_cast<std::size_t>(slot)];
            TokenId token = static_cast<TokenId>(rng.next_categorical(probs));
            double lp = std::log(probs[static_cast<std::size_t>(token)]);
            work.set(slot, token);
            outcome.events.push_back({n, slot, token, lp});
            outcome.log_score += lp;
            --masked;
        }
        for (int i = 0; i < to_unmask && i < static_cast<int>(ranked.size()); ++i)
            invalidate_near(ranked[static_cast<std::size_t>(i)].slot);
    }

    if (!work.markers_valid()) {
        // Repair pass: re-sample the slots carrying the broken structure.
        std::vector<int> bad;
        for (int s : free_slots) {
            TokenId t = work.at(s);
            if (Vocabulary::is_marker(t) || (t == Vocabulary::kEnd && s != length - 1))
                bad.push_back(s);
        }
        if (bad.empty()) throw NonconvergentSample("sample: invalid markers, nothing to repair");
        outcome.repaired = true;
        for (int s : bad) {
            work.set(s, Vocabulary::kMask);
            // Drop the superseded events so log_score stays the sum over
            // the surviving assignments.
            for (auto it = outcome.events.begin(); it != outcome.events.end(); ++it) {
                if (it->slot == s) {
                    outcome.log_score -= it->log_prob;
                    outcome.events.erase(it);
                    break;
                }
            }
        }
        // Sequential max-confidence resampling over the repair set.
        std::vector<int> pending = bad;
        while (!pending.empty()) {
            int best_slot = -1;
            double best_conf = -1.0;
            std::vector<double> best_probs;
            for (int s : pending) {
                std::vector<double> probs = model.predict(work, s);
                double conf = 0.0;
                for (double p : probs) conf = std::max(conf, p);
                if (conf > best_conf) {
                    best_conf = conf;
                    best_slot = s;
                    best_probs = std::move(probs);
                }
            }
            TokenId token = static_cast<TokenId>(rng.next_categorical(best_probs));
            double lp = std::log(best_probs[static_cast<std::size_t>(token)]);
            work.set(best_slot, token);
            outcome.events.push_back({0, best_slot, token, lp});
            outcome.log_score += lp;
            pending.erase(std::find(pending.begin(), pending.end(), best_slot));
        }
        if (!work.markers_valid())
            throw NonconvergentSample("sample: markers invalid after repair pass");
    }

    outcome.trajectory = std::move(work);
    return outcome;
}

}  // namespace difflogue
