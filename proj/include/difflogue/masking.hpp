#pragma once

#include <vector>

#include "difflogue/condition.hpp"
#include "difflogue/rng.hpp"
#include "difflogue/schedule.hpp"
#include "difflogue/trajectory.hpp"

namespace difflogue {

/// Unpinned slot indices of a trajectory, ascending.
inline std::vector<int> unpinned_slots(const Trajectory& traj, const InpaintingCondition& cond) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(traj.length()));
    for (int i = 0; i < traj.length(); ++i)
        if (!cond.pinned(i)) out.push_back(i);
    return out;
}

/**
 * Forward (noising) direction: masks round(mask_fraction(n) * #unpinned)
 * unpinned slots, chosen by a partial Fisher-Yates shuffle over the
 * ascending unpinned slot list driven by SplitMix64(seed). Pinned slots
 * are never touched.
 *
 * In strict mode a pin whose token disagrees with the trajectory is a
 * conflict; otherwise pins are trusted as the fixed portion.
 */
inline Trajectory forward_mask(const Trajectory& traj, int n, const InpaintingCondition& cond,
                               const NoiseSchedule& schedule, std::uint64_t seed,
                               bool strict = true) {
    if (traj.contains_mask()) throw ContainsMask("forward_mask: input already masked");
    if (strict) {
        for (const Pin& p : cond.sorted()) {
            if (p.slot < traj.length() && traj.at(p.slot) != p.token)
                throw PinConflict("forward_mask: pin disagrees with trajectory at slot " +
                                  std::to_string(p.slot));
        }
    }
    std::vector<int> free_slots = unpinned_slots(traj, cond);
    int m = schedule.masked_count(n, static_cast<int>(free_slots.size()));
    Trajectory out = traj;
    SplitMix64 rng(seed);
    // Partial Fisher-Yates: the first m entries become the masked set.
    for (int i = 0; i < m; ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        rng.next_below(free_slots.size() - static_cast<std::size_t>(i));
        std::swap(free_slots[static_cast<std::size_t>(i)], free_slots[j]);
        out.set(free_slots[static_cast<std::size_t>(i)], Vocabulary::kMask);
    }
    return out;
}

}  // namespace difflogue
