#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "difflogue/sampler.hpp"
#include "support/cluster_corpus.hpp"
#include "support/fixtures.hpp"

using namespace difflogue;
using test::make_test_vocab;

namespace {

/// Replays the recorded unmasking order against fresh predictions and
/// checks every event's probability and the final trajectory.
void verify_events(const CountDenoiser& model, const InpaintingCondition& cond,
                   const SampleOutcome& outcome) {
    REQUIRE_FALSE(outcome.repaired);
    int length = outcome.trajectory.length();
    Trajectory work(std::vector<TokenId>(static_cast<std::size_t>(length), Vocabulary::kMask));
    for (const Pin& p : cond.sorted()) work.set(p.slot, p.token);
    if (!cond.pinned(length - 1)) work.set(length - 1, Vocabulary::kEnd);  // structural frame pin
    double total = 0.0;
    for (const UnmaskEvent& ev : outcome.events) {
        auto probs = model.predict(work, ev.slot);
        REQUIRE(std::abs(std::log(probs[static_cast<std::size_t>(ev.token)]) - ev.log_prob) <= 1e-12);
        work.set(ev.slot, ev.token);
        total += ev.log_prob;
    }
    REQUIRE(std::abs(total - outcome.log_score) <= 1e-9);
    REQUIRE(work == outcome.trajectory);
}

}  // namespace

TEST_CASE("schedule boundaries and monotonicity", "[schedule][property]") {
    NoiseSchedule s(32);
    CHECK(s.mask_fraction(0) == 0.0);
    CHECK(s.mask_fraction(32) == 1.0);
    for (int n = 1; n <= 32; ++n) CHECK(s.mask_fraction(n) >= s.mask_fraction(n - 1));
    CHECK_THROWS_AS(NoiseSchedule(0), Error);
}

TEST_CASE("forward_mask at n=0 is the identity", "[sampler]") {
    Vocabulary v = make_test_vocab();
    Trajectory t(tokenize(v, "<sys> greet hello <usr> hi <end>"));
    NoiseSchedule s(16);
    CHECK(forward_mask(t, 0, {}, s, 123) == t);
}

TEST_CASE("forward_mask at n=N masks every unpinned slot", "[sampler]") {
    Vocabulary v = make_test_vocab();
    Trajectory t(tokenize(v, "<sys> greet hello <usr> hi <end>"));
    NoiseSchedule s(16);
    Trajectory all = forward_mask(t, 16, {}, s, 123);
    for (int i = 0; i < all.length(); ++i) CHECK(all.at(i) == Vocabulary::kMask);

    InpaintingCondition cond;
    cond.pin(1, v.id("greet"), PinSource::kWord);
    Trajectory kept = forward_mask(t, 16, cond, s, 123);
    CHECK(kept.at(1) == v.id("greet"));
    for (int i = 0; i < kept.length(); ++i)
        if (i != 1) CHECK(kept.at(i) == Vocabulary::kMask);
}

TEST_CASE("forward_mask pin conflicts are detected in strict mode", "[sampler]") {
    Vocabulary v = make_test_vocab();
    Trajectory t(tokenize(v, "<sys> greet hello <usr> hi <end>"));
    InpaintingCondition cond;
    cond.pin(1, v.id("bye"), PinSource::kWord);  // trajectory holds "greet"
    CHECK_THROWS_AS(forward_mask(t, 4, cond, NoiseSchedule(16), 1), PinConflict);
    CHECK_NOTHROW(forward_mask(t, 4, cond, NoiseSchedule(16), 1, /*strict=*/false));
}

TEST_CASE("forward_mask selection replays an independent Fisher-Yates", "[sampler][oracle]") {
    Vocabulary v = make_test_vocab();
    std::vector<TokenId> toks(16, v.id("hello"));
    toks[0] = Vocabulary::kTurnSys;
    toks[8] = Vocabulary::kTurnUsr;
    Trajectory t(toks);
    NoiseSchedule s(16);
    const std::uint64_t seed = 7;
    const int n = 8;
    Trajectory masked = forward_mask(t, n, {}, s, seed);

    // Oracle: partial Fisher-Yates over ascending slots with splitmix64
    // draws, m = floor(n/N * 16 + 0.5).
    std::vector<int> slots;
    for (int i = 0; i < 16; ++i) slots.push_back(i);
    int m = static_cast<int>(std::floor((static_cast<double>(n) / 16.0) * 16 + 0.5));
    SplitMix64 rng(seed);
    std::set<int> expected;
    for (int i = 0; i < m; ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        rng.next_below(slots.size() - static_cast<std::size_t>(i));
        std::swap(slots[static_cast<std::size_t>(i)], slots[j]);
        expected.insert(slots[static_cast<std::size_t>(i)]);
    }
    std::set<int> actual;
    for (int i = 0; i < masked.length(); ++i)
        if (masked.at(i) == Vocabulary::kMask) actual.insert(i);
    REQUIRE(actual == expected);
}

TEST_CASE("degenerate model reproduces its memorized trajectory", "[sampler]") {
    Vocabulary v = make_test_vocab();
    Trajectory memorized(tokenize(v, "<sys> greet hello <usr> greet hi <end>"));
    std::vector<Trajectory> corpus(200, memorized);
    NoiseSchedule schedule(16);
    CountDenoiser model = CountDenoiser::train(corpus, v, schedule, {});
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
        SampleOutcome out = sample(model, {}, schedule, seed);
        REQUIRE(out.trajectory == memorized);
    }
}

TEST_CASE("pins covering every slot leave nothing to sample", "[sampler]") {
    test::ClusterWorld world = test::ClusterWorld::make();
    NoiseSchedule schedule(16);
    CountDenoiser model = CountDenoiser::train(world.corpus(10), world.vocab, schedule, {});
    InpaintingCondition cond;
    cond.pin_prefix(world.cluster_a);
    SampleOutcome out = sample(model, cond, schedule, 5);
    CHECK(out.trajectory == world.cluster_a);
    CHECK(out.log_score == 0.0);
    CHECK(out.events.empty());
}

TEST_CASE("sampling is deterministic in the seed", "[sampler]") {
    test::ClusterWorld world = test::ClusterWorld::make();
    NoiseSchedule schedule(32);
    CountDenoiser model = CountDenoiser::train(world.corpus(100), world.vocab, schedule, {});
    SampleOutcome a = sample(model, {}, schedule, 13);
    SampleOutcome b = sample(model, {}, schedule, 13);
    REQUIRE(a.trajectory == b.trajectory);
    REQUIRE(a.log_score == b.log_score);
    SampleOutcome c = sample(model, {}, schedule, 14);
    CHECK((c.trajectory == a.trajectory) == (c.log_score == a.log_score));
}

TEST_CASE("unconditional unigram marginals track the corpus", "[sampler][oracle]") {
    test::ClusterWorld world = test::ClusterWorld::make();
    NoiseSchedule schedule(32);
    CountDenoiser model = CountDenoiser::train(world.corpus(400), world.vocab, schedule, {});

    std::map<TokenId, double> corpus_freq;
    double corpus_tokens = 0.0;
    for (const Trajectory& t : {world.cluster_a, world.cluster_b})
        for (TokenId tok : t.tokens()) {
            corpus_freq[tok] += 0.5;
            corpus_tokens += 0.5;
        }

    std::map<TokenId, double> sample_freq;
    double sampled_tokens = 0.0;
    const int kSamples = 2000;
    for (int i = 0; i < kSamples; ++i) {
        SampleOutcome out = sample(model, {}, schedule, derive_seed(42, static_cast<std::uint64_t>(i)));
        for (TokenId tok : out.trajectory.tokens()) {
            sample_freq[tok] += 1.0;
            sampled_tokens += 1.0;
        }
    }
    double l1 = 0.0;
    std::set<TokenId> all;
    for (auto& [t, c] : corpus_freq) all.insert(t);
    for (auto& [t, c] : sample_freq) all.insert(t);
    for (TokenId t : all) {
        double p = corpus_freq.count(t) ? corpus_freq[t] / corpus_tokens : 0.0;
        double q = sample_freq.count(t) ? sample_freq[t] / sampled_tokens : 0.0;
        l1 += std::abs(p - q);
    }
    REQUIRE(l1 <= 0.05);
}

TEST_CASE("pins survive sampling verbatim under random conditions", "[sampler][property]") {
    test::ClusterWorld world = test::ClusterWorld::make();
    NoiseSchedule schedule(32);
    CountDenoiser model = CountDenoiser::train(world.corpus(100), world.vocab, schedule, {});
    SplitMix64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        InpaintingCondition cond;
        // Random content pins at non-marker slots of the cluster frame.
        int n_pins = 1 + static_cast<int>(rng.next_below(4));
        for (int p = 0; p < n_pins; ++p) {
            int turn = static_cast<int>(rng.next_below(2));
            int side = static_cast<int>(rng.next_below(2));
            int offset = static_cast<int>(rng.next_below(2));
            int slot = turn * 8 + side * 4 + 2 + offset;
            TokenId token = static_cast<TokenId>(6 + rng.next_below(12));
            if (!cond.pinned(slot)) cond.pin(slot, token, PinSource::kWord);
        }
        SampleOutcome out = sample(model, cond, schedule, rng.next());
        for (const Pin& p : cond.sorted()) REQUIRE(out.trajectory.at(p.slot) == p.token);
    }
}

TEST_CASE("log score is the sum over replayable unmasking events", "[sampler][property]") {
    test::ClusterWorld world = test::ClusterWorld::make();
    NoiseSchedule schedule(32);
    CountDenoiser model = CountDenoiser::train(world.corpus(100), world.vocab, schedule, {});
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        InpaintingCondition cond;
        if (seed % 2 == 0) cond.pin(10, world.vocab.id("w4"), PinSource::kWord);
        SampleOutcome out = sample(model, cond, schedule, seed);
        verify_events(model, cond, out);
    }
}

TEST_CASE("irreparable marker structure raises NonconvergentSample", "[sampler]") {
    Vocabulary v = make_test_vocab();
    std::stringstream crafted;
    crafted << "difflogue-denoiser v1\n"
            << "vocab_hash " << std::hex << v.hash() << std::dec << '\n'
            << "vocab_size " << v.size() << '\n'
            << "context_radius 3\n"
            << "alpha 0.1\n"
            << "corpus_id crafted\n"
            << "lengths 8:1\n"
            << "G 1:1000\n"  // everything predicts <sys>
            << "end\n";
    CountDenoiser model = CountDenoiser::load(crafted, v);
    CHECK_THROWS_AS(sample(model, {}, NoiseSchedule(8), 1), NonconvergentSample);
}

TEST_CASE("repair pass can rescue a marginally broken sample", "[sampler]") {
    Vocabulary v = make_test_vocab();
    // Slot 1 is a coin flip between <sys> and <usr>; a <sys> draw breaks
    // alternation and must be repaired or rejected.
    std::stringstream crafted;
    crafted << "difflogue-denoiser v1\n"
            << "vocab_hash " << std::hex << v.hash() << std::dec << '\n'
            << "vocab_size " << v.size() << '\n'
            << "context_radius 3\n"
            << "alpha 0.1\n"
            << "corpus_id crafted\n"
            << "lengths 4:1\n"
            << "POS 0 1:1000\n"
            << "POS 1 1:500 2:500\n"
            << "POS 2 4:1000\n"
            << "G 4:1\n"
            << "end\n";
    CountDenoiser model = CountDenoiser::load(crafted, v);
    int repaired = 0, failed = 0, clean = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        try {
            SampleOutcome out = sample(model, {}, NoiseSchedule(8), seed);
            REQUIRE(out.trajectory.markers_valid());
            (out.repaired ? repaired : clean) += 1;
        } catch (const NonconvergentSample&) {
            ++failed;
        }
    }
    CHECK(repaired > 0);
    CHECK(failed > 0);
    CHECK(clean > 0);
}
