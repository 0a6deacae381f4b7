#pragma once

#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "difflogue/env/base.hpp"
#include "difflogue/errors.hpp"
#include "difflogue/rng.hpp"
#include "difflogue/trajectory.hpp"

namespace difflogue {

struct CorpusRecord {
    std::string scenario_id;
    std::uint64_t seed = 0;
    Trajectory trajectory;  // full canvas, <end>-terminated
    bool success = false;
};

/// Builds one environment per episode (scenario variation lives here).
using EnvFactory = std::function<std::unique_ptr<Environment>(int index, std::uint64_t seed)>;

/// Runs one episode driven entirely by the scripted policies.
inline EpisodeResult run_scripted_episode(const Environment& env, bool strong,
                                          std::uint64_t seed) {
    DialogueState state = env.bootstrap(seed);
    for (int t = 1; t < env.canvas_turns(); ++t) {
        DialogueAction action =
            env.scripted_action(state, strong, derive_seed(derive_seed(seed, 0x706f6cull), t));
        StepResult step =
            env.env_step(state, action, derive_seed(derive_seed(seed, 0x656e76ull), t));
        state = std::move(step.state);
        if (step.terminal) break;
    }
    TrajectoryEvaluation ev = env.evaluate(state.prefix);
    EpisodeResult result;
    result.trajectory = env.to_canvas(state.prefix);
    result.success = ev.success;
    result.turns_used = ev.success ? ev.terminal_turn : env.canvas_turns();
    result.final_reward = ev.reward;
    if (ev.success) result.deal_price = env.deal_price(ev);
    return result;
}

/**
 * Mixed-quality training corpus: a quality_mix fraction of the episodes
 * is driven by the strong scripted policy, the rest by the random-legal
 * policy, so the data contains valid but often suboptimal action
 * strategies.
 */
inline std::vector<CorpusRecord> generate_corpus(const EnvFactory& make_env, int size,
                                                 double quality_mix, std::uint64_t seed) {
    if (size < 1) throw Error("generate_corpus: size must be >= 1");
    if (quality_mix < 0.0 || quality_mix > 1.0)
        throw Error("generate_corpus: quality_mix must lie in [0,1]");
    std::vector<CorpusRecord> out;
    out.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        std::uint64_t episode_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        auto env = make_env(i, episode_seed);
        bool strong = SplitMix64(derive_seed(episode_seed, 0x6d6978ull)).next_double() < quality_mix;
        EpisodeResult episode = run_scripted_episode(*env, strong, episode_seed);
        CorpusRecord record;
        record.scenario_id = env->scenario_id();
        record.seed = episode_seed;
        record.trajectory = std::move(episode.trajectory);
        record.success = episode.success;
        out.push_back(std::move(record));
    }
    return out;
}

// ---- corpus file io ------------------------------------------------------

/// Line-oriented corpus file: a versioned header, then one record per
/// line as `scenario_id|seed|token ids|success`.
inline void save_corpus(std::ostream& out, const std::vector<CorpusRecord>& corpus,
                        const std::string& family, std::uint64_t vocab_hash) {
    out << "# difflogue-corpus v1 family=" << family << " vocab_hash=" << std::hex << vocab_hash
        << std::dec << '\n';
    for (const auto& r : corpus) {
        out << r.scenario_id << '|' << r.seed << '|';
        const auto& toks = r.trajectory.tokens();
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (i) out << ' ';
            out << toks[i];
        }
        out << '|' << (r.success ? 1 : 0) << '\n';
    }
}

struct CorpusFile {
    std::string family;
    std::uint64_t vocab_hash = 0;
    std::vector<CorpusRecord> records;

    std::vector<Trajectory> trajectories() const {
        std::vector<Trajectory> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.trajectory);
        return out;
    }
};

inline CorpusFile load_corpus(std::istream& in) {
    CorpusFile file;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# difflogue-corpus v1 ", 0) != 0)
        throw IoError("corpus file: bad header");
    {
        std::istringstream hs(line);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("family=", 0) == 0) file.family = tok.substr(7);
            if (tok.rfind("vocab_hash=", 0) == 0)
                file.vocab_hash = std::stoull(tok.substr(11), nullptr, 16);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t p1 = line.find('|');
        std::size_t p2 = line.find('|', p1 + 1);
        std::size_t p3 = line.rfind('|');
        if (p1 == std::string::npos || p2 == std::string::npos || p3 <= p2)
            throw IoError("corpus file: malformed record");
        CorpusRecord r;
        r.scenario_id = line.substr(0, p1);
        r.seed = std::stoull(line.substr(p1 + 1, p2 - p1 - 1));
        std::istringstream ts(line.substr(p2 + 1, p3 - p2 - 1));
        std::vector<TokenId> toks;
        TokenId t;
        while (ts >> t) toks.push_back(t);
        r.trajectory = Trajectory(std::move(toks));
        r.success = line.substr(p3 + 1) == "1";
        file.records.push_back(std::move(r));
    }
    return file;
}

}  // namespace difflogue
