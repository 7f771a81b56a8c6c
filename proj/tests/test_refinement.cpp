#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "camref/errors.hpp"
#include "camref/refinement.hpp"
#include "oracles.hpp"

using namespace camref;

namespace {

struct Instance {
    std::vector<CameraId> cams;
    ClusterAssignment global;
    std::vector<CameraClustering> locals;
    std::vector<ClusterLabel> local_labels;  // per item
    DistanceMatrix dist;
};

// Random instance: global clusters and per-camera local clusters drawn
// independently.
Instance random_instance(std::size_t n, std::uint32_t cameras, std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Instance inst;
    inst.cams.resize(n);
    for (std::size_t i = 0; i < n; ++i) inst.cams[i] = static_cast<CameraId>(i < cameras ? i : rng() % cameras);
    inst.global.num_clusters = k;
    inst.global.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        inst.global.labels[i] = static_cast<ClusterLabel>(i < k ? i : rng() % k);
    inst.local_labels.resize(n);
    for (std::uint32_t c = 0; c < cameras; ++c) {
        CameraClustering cc{static_cast<CameraId>(c), {}, {}};
        for (std::size_t i = 0; i < n; ++i)
            if (inst.cams[i] == c) cc.indices.push_back(i);
        const std::size_t kc = std::max<std::size_t>(1, cc.indices.size() / 3);
        cc.assignment.num_clusters = kc;
        for (std::size_t r = 0; r < cc.indices.size(); ++r) {
            const auto l = static_cast<ClusterLabel>(r < kc ? r : rng() % kc);
            cc.assignment.labels.push_back(l);
            inst.local_labels[cc.indices[r]] = l;
        }
        inst.locals.push_back(std::move(cc));
    }
    inst.dist = pairwise_distance(oracle::random_unit_rows(n, 6, seed * 31 + 1));
    return inst;
}

RefinementConfig config_with(std::size_t neighbors = 15) {
    RefinementConfig c;
    c.neighbor_count = neighbors;
    return c;
}

} // namespace

TEST_CASE("centrality of two members at distance 0.5") {
    DistanceMatrix d(2);
    d.set(0, 1, 0.5);
    const std::vector<std::size_t> members{0, 1};
    const auto r = centrality_scores(members, d, 15);
    CHECK(r.scores[0] == doctest::Approx(1.0));
    CHECK(r.scores[1] == doctest::Approx(1.0));
    CHECK(r.threshold == doctest::Approx(1.0));
    CHECK(r.information_nodes == std::vector<std::size_t>{0});
}

TEST_CASE("equilateral triple has equal scores and one information node") {
    DistanceMatrix d(5);
    const std::vector<std::size_t> members{4, 1, 3};
    d.set(4, 1, 0.3);
    d.set(4, 3, 0.3);
    d.set(1, 3, 0.3);
    const auto r = centrality_scores(members, d, 15);
    for (double s : r.scores) CHECK(s == doctest::Approx(2.0 / 0.6));
    CHECK(r.information_nodes == std::vector<std::size_t>{1});
}

TEST_CASE("singleton cluster is its own information node") {
    DistanceMatrix d(3);
    const std::vector<std::size_t> members{2};
    const auto r = centrality_scores(members, d, 15);
    CHECK(r.scores == std::vector<double>{0.0});
    CHECK(r.information_nodes == std::vector<std::size_t>{2});
}

TEST_CASE("coincident members score zero and promote the lowest index") {
    DistanceMatrix d(3);
    const std::vector<std::size_t> members{2, 0, 1};
    const auto r = centrality_scores(members, d, 15);
    CHECK(r.information_nodes == std::vector<std::size_t>{0});
}

TEST_CASE("20-point cluster matches brute-force scoring") {
    const auto d = pairwise_distance(oracle::random_unit_rows(40, 5, 12));
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < 40; i += 2) members.push_back(i);
    const auto r = centrality_scores(members, d, 15);
    const auto expect = oracle::centrality(members, d, 15);
    double mean = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
        CHECK(std::abs(r.scores[a] - expect[a]) < 1e-12);
        mean += expect[a];
    }
    mean /= static_cast<double>(members.size());
    CHECK(std::abs(r.threshold - mean) < 1e-12);
    for (std::size_t a = 0; a < members.size(); ++a) {
        const bool is_info = std::ranges::binary_search(r.information_nodes, members[a]);
        CHECK(is_info == (expect[a] > mean));
    }
}

TEST_CASE("centrality is invariant under member permutation") {
    const auto d = pairwise_distance(oracle::random_unit_rows(30, 4, 3));
    std::vector<std::size_t> members(30);
    std::iota(members.begin(), members.end(), 0);
    const auto base = centrality_scores(members, d, 15);
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 5; ++rep) {
        auto shuffled = members;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto r = centrality_scores(shuffled, d, 15);
        CHECK(r.information_nodes == base.information_nodes);
        CHECK(r.threshold == base.threshold);
        for (std::size_t a = 0; a < 30; ++a) CHECK(r.scores[a] == base.scores[shuffled[a]]);
    }
}

TEST_CASE("decay schedules") {
    RefinementConfig c;
    c.p0 = 1.0;
    c.total_epochs = 51;
    c.schedule = DecaySchedule::Cosine;
    CHECK(decay_probability(c, 0) == 1.0);
    CHECK(decay_probability(c, 50) == doctest::Approx(0.0).epsilon(1e-15));
    c.schedule = DecaySchedule::Linear;
    CHECK(decay_probability(c, 25) == doctest::Approx(0.5));
    CHECK(decay_probability(c, 50) == 0.0);
    c.schedule = DecaySchedule::Exponential;
    CHECK(decay_probability(c, 2) == doctest::Approx(0.81));
    c.schedule = DecaySchedule::None;
    c.p0 = 0.7;
    CHECK(decay_probability(c, 40) == 0.7);
    CHECK_THROWS_AS(decay_probability(c, 51), ArgumentError);
    c.total_epochs = 1;
    c.schedule = DecaySchedule::Cosine;
    CHECK(decay_probability(c, 0) == 0.7);
    for (auto s : {DecaySchedule::Linear, DecaySchedule::Exponential, DecaySchedule::Cosine}) {
        c.total_epochs = 20;
        c.schedule = s;
        for (std::size_t e = 1; e < 20; ++e) CHECK(decay_probability(c, e) <= decay_probability(c, e - 1));
    }
}

TEST_CASE("same-camera member not vouched for by the information node is discarded") {
    // items: a1 = 0, a2 = 1 (camera 0), b1 = 2 (camera 1); a1 is central
    DistanceMatrix d(3);
    d.set(0, 1, 0.2);
    d.set(0, 2, 0.2);
    d.set(1, 2, 1.0);
    const std::vector<CameraId> cams{0, 0, 1};
    const ClusterAssignment global{{0, 0, 0}, 1};
    const std::vector<CameraClustering> locals{{0, {0, 1}, {{0, 1}, 2}}, {1, {2}, {{0}, 1}}};

    const auto refined = refine_labels(global, locals, d, cams, config_with(), 1.0, {});
    CHECK(refined.information_nodes == std::vector<std::size_t>{0});
    CHECK(refined.labels == std::vector<ClusterLabel>{0, kDiscarded, 0});
    CHECK(refined.discarded_count == 1);
    CHECK(refined.kept_count == 2);

    const auto stats = refinement_stats(refined, global, cams, 2);
    CHECK(stats.discarded == 1);
    CHECK(stats.kept == 2);
    CHECK(stats.discarded_per_camera == std::vector<std::size_t>{1, 0});
    CHECK(stats.discarded_per_cluster == std::vector<std::size_t>{1});

    const auto none = refine_labels(global, locals, d, cams, config_with(), 0.0, {});
    CHECK(none.labels == global.labels);
    CHECK(none.discarded_count == 0);
    const auto zero_stats = refinement_stats(none, global, cams, 2);
    CHECK(zero_stats.discarded == 0);
    CHECK(zero_stats.discarded_per_camera == std::vector<std::size_t>{0, 0});
}

TEST_CASE("p = 1 matches set algebra on random 60-item instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = random_instance(60, 4, 6, seed);
        const auto refined = refine_labels(inst.global, inst.locals, inst.dist, inst.cams, config_with(), 1.0,
                                           {seed, 0});
        CHECK(refined.labels ==
              oracle::refine_p1(inst.global.labels, inst.local_labels, inst.cams, refined.information_nodes));
        // information nodes as independently scored
        std::vector<std::size_t> expected_info;
        for (const auto& members : inst.global.members()) {
            const auto scores = oracle::centrality(members, inst.dist, 15);
            const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
            std::size_t before = expected_info.size();
            for (std::size_t a = 0; a < members.size(); ++a)
                if (scores[a] > mean * (1 + 1e-12)) expected_info.push_back(members[a]);
            if (expected_info.size() == before) {
                const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
                expected_info.push_back(members[static_cast<std::size_t>(best)]);
            }
        }
        std::ranges::sort(expected_info);
        CHECK(refined.information_nodes == expected_info);
        const auto stats = refinement_stats(refined, inst.global, inst.cams, 4);
        CHECK(stats.discarded == inst.cams.size() - refined.kept_count);
    }
}

TEST_CASE("refinement properties") {
    const auto inst = random_instance(80, 3, 5, 99);
    const RefinementDraws draws{1234, 3};
    std::vector<std::vector<ClusterLabel>> by_p;
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto r = refine_labels(inst.global, inst.locals, inst.dist, inst.cams, config_with(), p, draws);
        for (std::size_t i = 0; i < 80; ++i) {
            // discard-only: a kept item keeps its global label
            CHECK((r.labels[i] == kDiscarded || r.labels[i] == inst.global.labels[i]));
        }
        for (std::size_t i : r.information_nodes) CHECK(r.labels[i] != kDiscarded);
        by_p.push_back(r.labels);
    }
    for (std::size_t t = 1; t < by_p.size(); ++t)
        for (std::size_t i = 0; i < 80; ++i)
            if (by_p[t - 1][i] == kDiscarded) CHECK(by_p[t][i] == kDiscarded);
    CHECK(by_p.front() == inst.global.labels);

    // same draws, same result
    const auto again = refine_labels(inst.global, inst.locals, inst.dist, inst.cams, config_with(), 0.5, draws);
    CHECK(again.labels == by_p[2]);
}

TEST_CASE("missing camera in local clusterings is a configuration error") {
    const auto inst = random_instance(30, 3, 4, 5);
    std::vector<CameraClustering> partial(inst.locals.begin(), inst.locals.begin() + 2);
    CHECK_THROWS_AS(refine_labels(inst.global, partial, inst.dist, inst.cams, config_with(), 1.0, {}), ConfigError);
    CHECK_THROWS_AS(refine_labels(inst.global, inst.locals, inst.dist, inst.cams, config_with(), 1.5, {}),
                    ArgumentError);
}
