#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "difflogue/errors.hpp"
#include "difflogue/trajectory.hpp"
#include "difflogue/vocabulary.hpp"

namespace difflogue {

/// Which guidance mechanism produced a pin. Structural pins carry the
/// dialogue frame (prefix tokens, markers, <end>).
enum class PinSource { kStructural, kWord, kSemantic, kSearch };

inline const char* pin_source_name(PinSource s) {
    switch (s) {
        case PinSource::kStructural: return "structural";
        case PinSource::kWord: return "word";
        case PinSource::kSemantic: return "semantic";
        case PinSource::kSearch: return "search";
    }
    return "?";
}

struct Pin {
    int slot = 0;
    TokenId token = 0;
    PinSource source = PinSource::kStructural;
};

/**
 * The fixed portion of a trajectory during inpainting. All guidance in the
 * library reduces to a set of (slot, token) pins; the sampler never touches
 * a pinned slot, so pins are preserved verbatim in every sample.
 */
class InpaintingCondition {
public:
    InpaintingCondition() = default;

    /// Adds a pin. Re-pinning a slot with the same token is a no-op;
    /// a different token is a conflict.
    void pin(int slot, TokenId token, PinSource source) {
        if (slot < 0 || slot >= kTrajectoryCapacity)
            throw PinConflict("pin slot " + std::to_string(slot) + " outside capacity");
        if (token == Vocabulary::kMask)
            throw PinConflict("cannot pin the mask token");
        auto it = pins_.find(slot);
        if (it != pins_.end()) {
            if (it->second.token != token)
                throw PinConflict("slot " + std::to_string(slot) + " pinned twice with different tokens");
            return;
        }
        pins_.emplace(slot, Pin{slot, token, source});
    }

    /// Pins a whole prefix starting at slot 0 (the conversation so far).
    void pin_prefix(const Trajectory& prefix, PinSource source = PinSource::kStructural) {
        for (int i = 0; i < prefix.length(); ++i) pin(i, prefix.at(i), source);
    }

    bool pinned(int slot) const { return pins_.count(slot) > 0; }

    const Pin* find(int slot) const {
        auto it = pins_.find(slot);
        return it == pins_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return pins_.size(); }
    bool empty() const { return pins_.empty(); }

    /// Pins in slot order.
    std::vector<Pin> sorted() const {
        std::vector<Pin> out;
        out.reserve(pins_.size());
        for (const auto& [slot, pin] : pins_) out.push_back(pin);
        return out;
    }

    int max_slot() const { return pins_.empty() ? -1 : pins_.rbegin()->first; }

    /// Slot of the <end> pin, or -1. Multiple <end> pins are a conflict.
    int end_slot() const {
        int found = -1;
        for (const auto& [slot, pin] : pins_) {
            if (pin.token == Vocabulary::kEnd) {
                if (found >= 0) throw PinConflict("multiple <end> pins");
                found = slot;
            }
        }
        return found;
    }

    /// Necessary marker-consistency check: marker pins, read in slot
    /// order, must alternate <sys>/<usr>, and a pin at slot 0 must be
    /// <sys>. Full alternation is re-checked on the sampled output.
    void validate_markers() const {
        int last_marker = -1;
        for (const auto& [slot, pin] : pins_) {
            if (slot == 0 && pin.token != Vocabulary::kTurnSys)
                throw PinConflict("slot 0 pin must be the <sys> marker");
            if (!Vocabulary::is_marker(pin.token)) continue;
            if (last_marker == pin.token)
                throw PinConflict("marker pins do not alternate near slot " + std::to_string(slot));
            last_marker = pin.token;
        }
        int e = end_slot();
        if (e >= 0 && max_slot() > e)
            throw PinConflict("pins beyond the <end> pin");
    }

private:
    std::map<int, Pin> pins_;  // ordered: deterministic iteration
};

}  // namespace difflogue
