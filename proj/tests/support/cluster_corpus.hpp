#pragma once

#include <string>
#include <vector>

#include "difflogue/trajectory.hpp"
#include "difflogue/vocabulary.hpp"

namespace difflogue::test {

/// Two-cluster toy world: a small vocabulary and two fixed 2-turn
/// trajectories that differ only in the turn-1 system content (slots 10
/// and 11, adjacent). Differing slots sit within one context radius, so
/// a sampler that conditions on its neighbors reproduces whole clusters.
struct ClusterWorld {
    Vocabulary vocab;
    Trajectory cluster_a;
    Trajectory cluster_b;

    static ClusterWorld make() {
        std::vector<std::string> words = {"pad", "chat"};
        for (int i = 0; i < 20; ++i) words.push_back("w" + std::to_string(i));
        Vocabulary vocab(words);
        auto traj = [&](const std::string& c0, const std::string& c1) {
            std::vector<TokenId> toks;
            auto span = [&](TokenId marker, const std::string& a, const std::string& b) {
                toks.push_back(marker);
                toks.push_back(vocab.id("chat"));
                toks.push_back(vocab.id(a));
                toks.push_back(vocab.id(b));
            };
            span(Vocabulary::kTurnSys, "w0", "w1");
            span(Vocabulary::kTurnUsr, "w2", "w3");
            span(Vocabulary::kTurnSys, c0, c1);
            span(Vocabulary::kTurnUsr, "w6", "w7");
            toks.push_back(Vocabulary::kEnd);
            return Trajectory(toks);
        };
        ClusterWorld world{vocab, traj("w4", "w5"), traj("w8", "w9")};
        return world;
    }

    /// 50/50 corpus of the two clusters.
    std::vector<Trajectory> corpus(int per_cluster) const {
        std::vector<Trajectory> out;
        for (int i = 0; i < per_cluster; ++i) {
            out.push_back(cluster_a);
            out.push_back(cluster_b);
        }
        return out;
    }
};

}  // namespace difflogue::test
