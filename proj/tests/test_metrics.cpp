#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "difflogue/metrics.hpp"
#include "support/fixtures.hpp"

using namespace difflogue;
using test::make_test_vocab;

namespace {

EpisodeResult episode(bool success, int turns, std::optional<double> price = std::nullopt) {
    EpisodeResult r;
    r.success = success;
    r.turns_used = turns;
    r.deal_price = price;
    return r;
}

NegotiationScenario scenario(Role role) {
    NegotiationScenario s;
    s.listing_price = 400.0;
    s.buyer_target = 100.0;
    s.seller_target = 200.0;
    s.role = role;
    return s;
}

}  // namespace

TEST_CASE("success rate counts", "[metrics]") {
    std::vector<EpisodeResult> all(10, episode(true, 2));
    CHECK(success_rate(all) == 1.0);
    std::vector<EpisodeResult> none(10, episode(false, 10));
    CHECK(success_rate(none) == 0.0);
    std::vector<EpisodeResult> seven;
    for (int i = 0; i < 10; ++i) seven.push_back(episode(i < 7, 3));
    CHECK(success_rate(seven) == Catch::Approx(0.7));
    CHECK_THROWS_AS(success_rate({}), EmptyResults);
}

TEST_CASE("average turn uses the T_max failure convention", "[metrics]") {
    std::vector<EpisodeResult> ones(5, episode(true, 1));
    CHECK(average_turn(ones) == 1.0);
    std::vector<EpisodeResult> fails(5, episode(false, 10));
    CHECK(average_turn(fails) == 10.0);
    std::vector<EpisodeResult> mixed = {episode(true, 3), episode(true, 5), episode(false, 7)};
    CHECK(average_turn(mixed) == Catch::Approx((3 + 5 + 10) / 3.0));
    CHECK(average_turn(mixed, /*success_only=*/true) == Catch::Approx(4.0));
}

TEST_CASE("sell-to-list ratio endpoints and symmetry", "[metrics]") {
    NegotiationScenario buyer = scenario(Role::kBuyer);
    CHECK(sell_to_list_ratio(buyer, 200.0) == Catch::Approx(0.0));
    CHECK(sell_to_list_ratio(buyer, 100.0) == Catch::Approx(1.0));
    CHECK(sell_to_list_ratio(buyer, 150.0) == Catch::Approx(0.5));
    CHECK(sell_to_list_ratio(scenario(Role::kSeller), 150.0) == Catch::Approx(0.5));
    CHECK(sell_to_list_ratio(buyer, std::nullopt) == 0.0);  // failure convention

    NegotiationScenario degenerate = buyer;
    degenerate.seller_target = degenerate.buyer_target;
    CHECK_THROWS_AS(sell_to_list_ratio(degenerate, 150.0), DegenerateScenario);
}

TEST_CASE("keyword coverage counts mentions anywhere", "[metrics]") {
    Vocabulary v = make_test_vocab();
    auto target = tokenize(v, "apple pear plum fig");
    Trajectory all(tokenize(v, "<sys> apple pear <usr> plum fig"));
    CHECK(keyword_coverage_ratio(target, all) == 1.0);
    Trajectory none(tokenize(v, "<sys> hello <usr> hi"));
    CHECK(keyword_coverage_ratio(target, none) == 0.0);
    Trajectory three(tokenize(v, "<sys> apple pear <usr> fig"));
    CHECK(keyword_coverage_ratio(target, three) == Catch::Approx(0.75));
}

TEST_CASE("keyword order distance on first mentions", "[metrics]") {
    Vocabulary v = make_test_vocab();
    auto target = tokenize(v, "apple pear plum");
    CHECK(keyword_order_distance(target, Trajectory(tokenize(v, "<sys> apple pear plum"))) == 0);
    CHECK(keyword_order_distance(target, Trajectory(tokenize(v, "<sys> hello"))) == 3);
    // target [a,b,c], mentioned [a,c,b] -> distance 2 by the DP oracle.
    CHECK(keyword_order_distance(target, Trajectory(tokenize(v, "<sys> apple plum pear"))) == 2);
    // repeated mentions do not change the first-mention sequence
    CHECK(keyword_order_distance(
              target, Trajectory(tokenize(v, "<sys> apple pear apple plum"))) == 0);
}

TEST_CASE("token F1 over multisets without reserved tokens", "[metrics]") {
    Vocabulary v = make_test_vocab();
    Trajectory a(tokenize(v, "<sys> apple pear <usr> plum"));
    CHECK(token_f1(a, a) == 1.0);
    Trajectory b(tokenize(v, "<sys> fig kiwi <usr> lime"));
    CHECK(token_f1(a, b) == 0.0);
    // Half-overlapping equal-size multisets -> 0.5.
    Trajectory c(tokenize(v, "<sys> apple pear <usr> fig kiwi"));
    Trajectory d(tokenize(v, "<sys> apple pear <usr> plum lime"));
    CHECK(token_f1(c, d) == Catch::Approx(0.5));
}

TEST_CASE("metrics agree with naive reimplementations on random cases", "[metrics][oracle]") {
    Vocabulary v = make_test_vocab();
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        auto d = test::random_dialogue(rng, v, 4);
        Trajectory traj = encode_dialogue(d, v);
        std::vector<TokenId> target;
        int k = 1 + static_cast<int>(rng.next_below(4));
        for (int i = 0; i < k; ++i) {
            TokenId t;
            bool dup = true;
            while (dup) {
                t = static_cast<TokenId>(Vocabulary::kReservedCount +
                                         rng.next_below(static_cast<std::uint64_t>(
                                             v.size() - Vocabulary::kReservedCount)));
                dup = false;
                for (TokenId u : target) dup |= (u == t);
            }
            target.push_back(t);
        }

        // Naive coverage: membership count.
        int covered = 0;
        for (TokenId kw : target) {
            bool found = false;
            for (TokenId t : traj.tokens()) found |= (t == kw);
            covered += found ? 1 : 0;
        }
        REQUIRE(std::abs(keyword_coverage_ratio(target, traj) -
                         static_cast<double>(covered) / k) <= 1e-12);

        // Naive order distance: quadratic DP over the first mentions.
        std::vector<TokenId> mentions;
        for (TokenId t : traj.tokens()) {
            bool is_target = false;
            for (TokenId kw : target) is_target |= (kw == t);
            if (!is_target) continue;
            bool seen = false;
            for (TokenId m : mentions) seen |= (m == t);
            if (!seen) mentions.push_back(t);
        }
        std::vector<std::vector<int>> dp(target.size() + 1,
                                         std::vector<int>(mentions.size() + 1, 0));
        for (std::size_t i = 0; i <= target.size(); ++i) dp[i][0] = static_cast<int>(i);
        for (std::size_t j = 0; j <= mentions.size(); ++j) dp[0][j] = static_cast<int>(j);
        for (std::size_t i = 1; i <= target.size(); ++i)
            for (std::size_t j = 1; j <= mentions.size(); ++j)
                dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1,
                                     dp[i - 1][j - 1] +
                                         (target[i - 1] == mentions[j - 1] ? 0 : 1)});
        REQUIRE(keyword_order_distance(target, traj) == dp[target.size()][mentions.size()]);

        // Zero distance forces full ordered coverage.
        if (keyword_order_distance(target, traj) == 0)
            REQUIRE(keyword_coverage_ratio(target, traj) == 1.0);
    }
}

TEST_CASE("metric report validates and renders fixed columns", "[metrics]") {
    MetricReport report;
    report.fingerprint = "abc";
    report.suite = "neg";
    report.guidance = "search";
    report.planner = "diffusion";
    report.n_episodes = 10;
    report.success_rate = 0.8;
    report.average_turn = 4.5;
    report.mean_slr = 0.42;
    report.validate();
    CHECK(report.row() == "abc,neg,search,diffusion,10,0.800000,4.500000,0.420000,-,-,-");

    MetricReport bad = report;
    bad.success_rate = 1.5;
    CHECK_THROWS_AS(bad.validate(), Error);
}
