#pragma once

#include <cmath>

#include "difflogue/errors.hpp"

namespace difflogue {

/**
 * Linear absorbing-noise schedule: at step n of N, a fraction n/N of the
 * unpinned slots is masked. Boundary guarantees the sampler relies on:
 * mask_fraction(0) == 0 and mask_fraction(N) == 1, monotone in between.
 */
struct NoiseSchedule {
    int steps = 32;

    explicit NoiseSchedule(int n = 32) : steps(n) {
        if (steps < 1) throw Error("noise schedule needs at least one step");
    }

    double mask_fraction(int n) const {
        if (n < 0 || n > steps)
            throw Error("schedule step out of range: " + std::to_string(n));
        return static_cast<double>(n) / static_cast<double>(steps);
    }

    /// Number of masked slots at step n out of `unpinned` free slots.
    /// Rounding is half-up; the boundaries are exact by construction.
    int masked_count(int n, int unpinned) const {
        return static_cast<int>(std::floor(mask_fraction(n) * unpinned + 0.5));
    }
};

}  // namespace difflogue
