#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "difflogue/errors.hpp"
#include "difflogue/masking.hpp"
#include "difflogue/rng.hpp"
#include "difflogue/schedule.hpp"
#include "difflogue/trajectory.hpp"
#include "difflogue/vocabulary.hpp"

namespace difflogue {

struct TrainConfig {
    int context_radius = 3;  // unmasked neighbors considered on each side
    double alpha = 0.1;      // additive smoothing per token
    int masking_reps = 8;    // noising draws per corpus trajectory
    std::uint64_t seed = 1;
    std::string corpus_id = "unnamed";
};

/**
 * Windowed count-based categorical denoiser.
 *
 * Training masks each corpus trajectory at random schedule steps and, for
 * every masked slot, counts the true token under a ladder of context
 * signatures of increasing specificity:
 *
 *   ()
 *   (pattern_r)       for r = 1 .. radius
 *   (pos)
 *   (pos, pattern_r)  for r = 1 .. radius
 *
 * where pattern_r packs the tokens of the unmasked neighbors within
 * distance r (masked or out-of-range neighbors are hidden). predict()
 * interpolates up the ladder: starting from the uniform distribution
 * over the vocabulary minus <mask>, each level blends its counts with
 * the estimate so far,
 *
 *     P_k(v) = (c_k(v) + b * P_{k-1}(v)) / (C_k + b),   b = alpha * (|V| - 1),
 *
 * so a well-observed specific context dominates while sparse contexts
 * fall back smoothly. With counts at a single level this reduces to
 * plain additive smoothing (c(v) + alpha) / (C + alpha * (|V| - 1)).
 * A prediction never puts mass on <mask>.
 *
 * Any predictor honoring the predict() contract can replace this model;
 * the count model keeps every number hand-checkable.
 */
class CountDenoiser {
public:
    static constexpr int kMaxRadius = 3;  // packing grants 10 bits per neighbor field

    /// Packed visible-neighbor pattern around `slot` at full radius.
    /// Field order is offsets -R..-1,+1..+R (R = kMaxRadius), 10 bits each
    /// holding token id + 1; 0 means hidden.
    static std::uint64_t pack_pattern(const std::vector<TokenId>& tokens, int slot) {
        std::uint64_t pattern = 0;
        int field = 0;
        for (int d = -kMaxRadius; d <= kMaxRadius; ++d) {
            if (d == 0) continue;
            int j = slot + d;
            std::uint64_t code = 0;
            if (j >= 0 && j < static_cast<int>(tokens.size()) &&
                tokens[static_cast<std::size_t>(j)] != Vocabulary::kMask) {
                code = static_cast<std::uint64_t>(tokens[static_cast<std::size_t>(j)]) + 1;
            }
            pattern |= code << (10 * field);
            ++field;
        }
        return pattern;
    }

    /// Restriction of a full-radius pattern to |offset| <= r.
    static std::uint64_t restrict_pattern(std::uint64_t pattern, int r) {
        int lo_field = kMaxRadius - r;        // first kept field
        int n_fields = 2 * r;                 // kept fields are contiguous
        std::uint64_t mask = ((std::uint64_t{1} << (10 * n_fields)) - 1) << (10 * lo_field);
        return pattern & mask;
    }

    CountDenoiser() = default;

    int context_radius() const { return radius_; }
    double alpha() const { return alpha_; }
    const std::string& trained_on() const { return corpus_id_; }
    std::uint64_t vocab_hash() const { return vocab_hash_; }
    int vocab_size() const { return vocab_size_; }

    /// p(token | visible context) for a masked slot, dense over the
    /// vocabulary with zero mass on <mask>.
    std::vector<double> predict(const Trajectory& masked, int slot) const {
        if (slot < 0 || slot >= masked.length())
            throw SlotNotMasked("predict: slot " + std::to_string(slot) + " out of range");
        if (masked.at(slot) != Vocabulary::kMask)
            throw SlotNotMasked("predict: slot " + std::to_string(slot) + " is not masked");
        std::vector<double> probs(static_cast<std::size_t>(vocab_size_), 0.0);
        double uniform = 1.0 / static_cast<double>(vocab_size_ - 1);
        for (int v = 0; v < vocab_size_; ++v)
            if (v != Vocabulary::kMask) probs[static_cast<std::size_t>(v)] = uniform;

        double b = alpha_ * static_cast<double>(vocab_size_ - 1);
        auto blend = [&](const CountList* counts) {
            if (!counts || counts->empty()) return;
            double total = 0.0;
            for (const auto& [tok, c] : *counts) total += c;
            double scale = b / (total + b);
            for (double& p : probs) p *= scale;
            for (const auto& [tok, c] : *counts)
                probs[static_cast<std::size_t>(tok)] += static_cast<double>(c) / (total + b);
        };

        std::uint64_t pattern = pack_pattern(masked.tokens(), slot);
        blend(global_.empty() ? nullptr : &global_);
        for (int r = 1; r <= radius_; ++r) {
            const auto& table = pattern_only_[static_cast<std::size_t>(r)];
            if (auto it = table.find(restrict_pattern(pattern, r)); it != table.end())
                blend(&it->second);
        }
        // Position outranks position-free patterns: the turn scaffold is
        // positional, and pins can fabricate look-alike contexts.
        if (auto it = positional_.find(slot); it != positional_.end()) blend(&it->second);
        for (int r = 1; r <= radius_; ++r) {
            const auto& table = positional_pattern_[static_cast<std::size_t>(r)];
            if (auto it = table.find(SigKey{slot, restrict_pattern(pattern, r)}); it != table.end())
                blend(&it->second);
        }
        return probs;
    }

    /// Draws a trajectory length from the training length histogram.
    int sample_length(SplitMix64& rng) const {
        if (length_total_ == 0) throw EmptyCorpus("denoiser has no length histogram");
        std::uint64_t u = rng.next_below(length_total_);
        std::uint64_t acc = 0;
        for (const auto& [len, count] : length_hist_) {
            acc += count;
            if (u < acc) return len;
        }
        return length_hist_.rbegin()->first;
    }

    const std::map<int, std::uint64_t>& length_histogram() const { return length_hist_; }

    // ---- training ----------------------------------------------------

    static CountDenoiser train(const std::vector<Trajectory>& corpus, const Vocabulary& vocab,
                               const NoiseSchedule& schedule, const TrainConfig& config) {
        if (corpus.empty()) throw EmptyCorpus("train: corpus is empty");
        if (config.context_radius < 1 || config.context_radius > kMaxRadius)
            throw Error("context_radius must be in [1, " + std::to_string(kMaxRadius) + "]");
        if (vocab.size() > 1023)
            throw Error("vocabulary too large for pattern packing (max 1023)");
        CountDenoiser model;
        model.radius_ = config.context_radius;
        model.alpha_ = config.alpha;
        model.corpus_id_ = config.corpus_id;
        model.vocab_hash_ = vocab.hash();
        model.vocab_size_ = vocab.size();
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const Trajectory& traj = corpus[i];
            if (traj.contains_mask())
                throw ContainsMask("train: corpus trajectory " + std::to_string(i) + " has masks");
            if (!traj.markers_valid())
                throw MalformedMarkers("train: corpus trajectory " + std::to_string(i) +
                                       " has invalid markers");
            if (traj.empty()) continue;
            model.length_hist_[traj.length()] += 1;
            model.length_total_ += 1;
            std::uint64_t traj_seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
            for (int rep = 0; rep < config.masking_reps; ++rep) {
                std::uint64_t rep_seed = derive_seed(traj_seed, static_cast<std::uint64_t>(rep));
                SplitMix64 rng(rep_seed);
                int n = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(schedule.steps)));
                Trajectory masked =
                    forward_mask(traj, n, InpaintingCondition{}, schedule, derive_seed(rep_seed, 0x6d61736bull));
                for (int s = 0; s < masked.length(); ++s) {
                    if (masked.at(s) != Vocabulary::kMask) continue;
                    model.observe(masked.tokens(), s, traj.at(s));
                }
            }
        }
        return model;
    }

    // ---- checkpoint io -------------------------------------------------

    /// Text checkpoint; all tables are written sorted so retraining on the
    /// same corpus and seed reproduces the file byte for byte.
    void save(std::ostream& out) const {
        out << "difflogue-denoiser v1\n";
        out << "vocab_hash " << std::hex << vocab_hash_ << std::dec << '\n';
        out << "vocab_size " << vocab_size_ << '\n';
        out << "context_radius " << radius_ << '\n';
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", alpha_);
        out << "alpha " << buf << '\n';
        out << "corpus_id " << corpus_id_ << '\n';
        out << "lengths";
        for (const auto& [len, c] : length_hist_) out << ' ' << len << ':' << c;
        out << '\n';
        out << "G";
        write_counts(out, global_);
        out << '\n';
        for (const auto& [pos, counts] : sorted_keys(positional_)) {
            out << "POS " << pos;
            write_counts(out, *counts);
            out << '\n';
        }
        for (int r = 1; r <= radius_; ++r) {
            for (const auto& [pat, counts] : sorted_keys(pattern_only_[static_cast<std::size_t>(r)])) {
                out << "Q" << r << ' ' << std::hex << pat << std::dec;
                write_counts(out, *counts);
                out << '\n';
            }
        }
        for (int r = 1; r <= radius_; ++r) {
            std::vector<std::pair<SigKey, const CountList*>> keys;
            const auto& table = positional_pattern_[static_cast<std::size_t>(r)];
            keys.reserve(table.size());
            for (const auto& [k, v] : table) keys.emplace_back(k, &v);
            std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
                return a.first.pos != b.first.pos ? a.first.pos < b.first.pos
                                                  : a.first.pattern < b.first.pattern;
            });
            for (const auto& [k, counts] : keys) {
                out << "P" << r << ' ' << k.pos << ' ' << std::hex << k.pattern << std::dec;
                write_counts(out, *counts);
                out << '\n';
            }
        }
        out << "end\n";
    }

    static CountDenoiser load(std::istream& in, const Vocabulary& vocab) {
        CountDenoiser model;
        std::string line;
        if (!std::getline(in, line) || line != "difflogue-denoiser v1")
            throw IoError("checkpoint: bad header");
        while (std::getline(in, line)) {
            if (line == "end") break;
            std::istringstream ls(line);
            std::string tag;
            ls >> tag;
            if (tag == "vocab_hash") {
                ls >> std::hex >> model.vocab_hash_ >> std::dec;
            } else if (tag == "vocab_size") {
                ls >> model.vocab_size_;
            } else if (tag == "context_radius") {
                ls >> model.radius_;
            } else if (tag == "alpha") {
                ls >> model.alpha_;
            } else if (tag == "corpus_id") {
                std::string rest;
                std::getline(ls, rest);
                model.corpus_id_ = rest.empty() ? "" : rest.substr(1);
            } else if (tag == "lengths") {
                std::string item;
                while (ls >> item) {
                    auto [k, v] = split_kv(item);
                    model.length_hist_[static_cast<int>(k)] = v;
                    model.length_total_ += v;
                }
            } else if (tag == "G") {
                read_counts(ls, model.global_);
            } else if (tag == "POS") {
                int pos;
                ls >> pos;
                read_counts(ls, model.positional_[pos]);
            } else if (tag == "Q1" || tag == "Q2" || tag == "Q3") {
                std::uint64_t pat;
                ls >> std::hex >> pat >> std::dec;
                read_counts(ls, model.pattern_only_[static_cast<std::size_t>(tag[1] - '0')][pat]);
            } else if (tag == "P1" || tag == "P2" || tag == "P3") {
                SigKey key;
                ls >> key.pos >> std::hex >> key.pattern >> std::dec;
                read_counts(ls, model.positional_pattern_[static_cast<std::size_t>(tag[1] - '0')][key]);
            } else {
                throw IoError("checkpoint: unknown record '" + tag + "'");
            }
        }
        if (model.vocab_hash_ != vocab.hash())
            throw CheckpointMismatch("checkpoint vocabulary hash does not match");
        if (model.vocab_size_ != vocab.size())
            throw CheckpointMismatch("checkpoint vocabulary size does not match");
        return model;
    }

    struct SigKey {
        int pos = 0;
        std::uint64_t pattern = 0;
        bool operator==(const SigKey&) const = default;
    };
    using CountList = std::vector<std::pair<TokenId, std::uint32_t>>;

private:
    struct SigHash {
        std::size_t operator()(const SigKey& k) const {
            std::uint64_t h = k.pattern * 0x9e3779b97f4a7c15ull;
            h ^= static_cast<std::uint64_t>(k.pos) + 0x100000001b3ull + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };

    static void bump(CountList& counts, TokenId token) {
        for (auto& [tok, c] : counts) {
            if (tok == token) {
                ++c;
                return;
            }
        }
        counts.emplace_back(token, 1u);
    }

    void observe(const std::vector<TokenId>& tokens, int slot, TokenId truth) {
        std::uint64_t pattern = pack_pattern(tokens, slot);
        for (int r = radius_; r >= 1; --r) {
            std::uint64_t pr = restrict_pattern(pattern, r);
            bump(positional_pattern_[static_cast<std::size_t>(r)][SigKey{slot, pr}], truth);
            bump(pattern_only_[static_cast<std::size_t>(r)][pr], truth);
        }
        bump(positional_[slot], truth);
        bump(global_, truth);
    }

    static void write_counts(std::ostream& out, const CountList& counts) {
        CountList sorted = counts;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [tok, c] : sorted) out << ' ' << tok << ':' << c;
    }

    static void read_counts(std::istream& in, CountList& counts) {
        std::string item;
        while (in >> item) {
            auto [k, v] = split_kv(item);
            counts.emplace_back(static_cast<TokenId>(k), v);
        }
    }

    static std::pair<std::int64_t, std::uint32_t> split_kv(const std::string& item) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw IoError("checkpoint: malformed count '" + item + "'");
        return {std::stoll(item.substr(0, colon)),
                static_cast<std::uint32_t>(std::stoul(item.substr(colon + 1)))};
    }

    template <typename Map>
    static std::vector<std::pair<typename Map::key_type, const CountList*>> sorted_keys(
        const Map& map) {
        std::vector<std::pair<typename Map::key_type, const CountList*>> out;
        out.reserve(map.size());
        for (const auto& [k, v] : map) out.emplace_back(k, &v);
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    int radius_ = 3;
    double alpha_ = 0.1;
    std::string corpus_id_ = "unnamed";
    std::uint64_t vocab_hash_ = 0;
    int vocab_size_ = 0;
    std::map<int, std::uint64_t> length_hist_;
    std::uint64_t length_total_ = 0;
    // Index r in [1, kMaxRadius]; slot 0 unused.
    std::array<std::unordered_map<SigKey, CountList, SigHash>, kMaxRadius + 1> positional_pattern_;
    std::array<std::unordered_map<std::uint64_t, CountList>, kMaxRadius + 1> pattern_only_;
    std::unordered_map<int, CountList> positional_;
    CountList global_;
};

}  // namespace difflogue
