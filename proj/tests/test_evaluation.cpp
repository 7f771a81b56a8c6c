#include <doctest.h>

#include <cmath>
#include <random>

#include "camref/errors.hpp"
#include "camref/evaluation.hpp"
#include "oracles.hpp"

using namespace camref;

namespace {

void check_against_oracle(std::span<const ClusterLabel> pred, std::span<const IdentityLabel> truth) {
    const auto got = pairwise_metrics(pred, truth);
    const auto want = oracle::pair_metrics(pred, truth);
    CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
    CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
    CHECK(got.f_score == doctest::Approx(want.f_score).epsilon(1e-12));
    CHECK(got.expansion == doctest::Approx(want.expansion).epsilon(1e-12));
}

EmbeddingSet angles(const std::vector<double>& theta, std::vector<CameraId> cams, std::vector<IdentityLabel> ids) {
    Matrix f(theta.size(), 2);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        f(i, 0) = std::cos(theta[i]);
        f(i, 1) = std::sin(theta[i]);
    }
    return EmbeddingSet(std::move(f), std::move(cams), 3, std::move(ids));
}

} // namespace

TEST_CASE("pairwise metrics examples") {
    SUBCASE("perfect clustering") {
        const std::vector<ClusterLabel> pred{4, 4, 1, 1, 1, 7};
        const std::vector<IdentityLabel> truth{0, 0, 2, 2, 2, 9};
        const auto q = pairwise_metrics(pred, truth);
        CHECK(q.precision == 1.0);
        CHECK(q.recall == 1.0);
        CHECK(q.f_score == 1.0);
        CHECK(q.expansion == 1.0);
    }
    SUBCASE("everything in one cluster") {
        const std::vector<ClusterLabel> pred{0, 0, 0};
        const std::vector<IdentityLabel> truth{1, 1, 2};
        const auto q = pairwise_metrics(pred, truth);
        CHECK(q.precision == doctest::Approx(1.0 / 3.0));
        CHECK(q.recall == 1.0);
        CHECK(q.f_score == doctest::Approx(0.5));
    }
    SUBCASE("all singletons") {
        const std::vector<ClusterLabel> pred{0, 1, 2, 3};
        const std::vector<IdentityLabel> truth{5, 5, 6, 6};
        const auto q = pairwise_metrics(pred, truth);
        CHECK(q.precision == 1.0);
        CHECK(q.recall == 0.0);
        CHECK(q.f_score == 0.0);
        CHECK(q.expansion == 2.0);
    }
    SUBCASE("length mismatch") {
        const std::vector<ClusterLabel> pred{0, 1};
        const std::vector<IdentityLabel> truth{0};
        CHECK_THROWS_AS(pairwise_metrics(pred, truth), ArgumentError);
    }
}

TEST_CASE("pairwise metrics match enumeration") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        std::vector<ClusterLabel> pred(n);
        std::vector<IdentityLabel> truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = static_cast<ClusterLabel>(rng() % 8) - (trial % 3 == 0 ? 1 : 0);
            truth[i] = static_cast<IdentityLabel>(rng() % 6);
        }
        check_against_oracle(pred, truth);
    }
}

TEST_CASE("pairwise metrics invariances") {
    std::mt19937_64 rng(5);
    std::vector<ClusterLabel> pred(40);
    std::vector<IdentityLabel> truth(40);
    for (std::size_t i = 0; i < 40; ++i) {
        pred[i] = static_cast<ClusterLabel>(rng() % 7);
        truth[i] = static_cast<IdentityLabel>(rng() % 5);
    }
    const auto base = pairwise_metrics(pred, truth);
    SUBCASE("label renaming") {
        auto renamed = pred;
        for (auto& l : renamed) l = 100 - 3 * l;
        auto truth2 = truth;
        for (auto& t : truth2) t = 17 + t * 2;
        const auto q = pairwise_metrics(renamed, truth2);
        CHECK(q.precision == base.precision);
        CHECK(q.recall == base.recall);
        CHECK(q.expansion == base.expansion);
    }
    SUBCASE("discarding an item never adds predicted pairs") {
        auto fewer = pred;
        fewer[0] = kDiscarded;
        check_against_oracle(fewer, truth);
    }
}

TEST_CASE("average precision hand case") {
    // query camera 0, identity 1; relevant hits at ranks 1 and 3 once the
    // same-camera duplicate is filtered
    const auto set = angles({0.0, 0.05, 0.3, 0.6, 0.9, 2.0}, {0, 0, 1, 2, 1, 2}, {1, 1, 1, 2, 1, 3});
    const RetrievalSplit split{set.subset(std::vector<std::size_t>{0}),
                               set.subset(std::vector<std::size_t>{1, 2, 3, 4, 5})};
    const auto r = cmc_map(split);
    CHECK(r.valid_queries == 1);
    CHECK(r.mean_ap == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.rank(1) == 1.0);
}

TEST_CASE("retrieval on a perfectly separated set") {
    SyntheticSpec spec;
    spec.num_identities = 6;
    spec.cameras = 3;
    spec.images_per_identity_per_camera = 2;
    spec.dim = 16;
    spec.identity_spread = 0.0;
    spec.camera_shift_strength = 0.0;
    const auto set = generate_synthetic(spec);
    const auto r = self_retrieval(set);
    CHECK(r.mean_ap == doctest::Approx(1.0));
    CHECK(r.rank(1) == 1.0);
    CHECK(r.valid_queries == set.size());
}

TEST_CASE("retrieval matches per-query enumeration") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t nq = 10, ng = 40, d = 6;
        const auto fq = oracle::random_unit_rows(nq, d, rng());
        const auto fg = oracle::random_unit_rows(ng, d, rng());
        std::vector<CameraId> qc(nq), gc(ng);
        std::vector<IdentityLabel> qi(nq), gi(ng);
        for (std::size_t i = 0; i < nq; ++i) {
            qc[i] = static_cast<CameraId>(rng() % 3);
            qi[i] = static_cast<IdentityLabel>(rng() % 5);
        }
        for (std::size_t i = 0; i < ng; ++i) {
            gc[i] = static_cast<CameraId>(i % 3);
            gi[i] = static_cast<IdentityLabel>(rng() % 5);
        }
        std::vector<double> sims(ng);
        double ap_sum = 0.0;
        std::size_t valid = 0;
        std::vector<std::size_t> hits(ng, 0);
        for (std::size_t q = 0; q < nq; ++q) {
            for (std::size_t g = 0; g < ng; ++g) sims[g] = dot(fq.row(q), fg.row(g));
            const auto a = oracle::average_precision(sims, qc[q], qi[q], gc, gi);
            if (!a.valid) continue;
            ++valid;
            ap_sum += a.ap;
            ++hits[a.first_hit];
        }
        const RetrievalSplit split{EmbeddingSet(fq, qc, 3, qi), EmbeddingSet(fg, gc, 3, gi)};
        const auto r = cmc_map(split);
        REQUIRE(r.valid_queries == valid);
        CHECK(r.excluded_queries == nq - valid);
        CHECK(r.mean_ap == doctest::Approx(ap_sum / static_cast<double>(valid)).epsilon(1e-12));
        REQUIRE(r.cmc.size() == ng);
        std::size_t cum = 0;
        for (std::size_t k = 0; k < ng; ++k) {
            cum += hits[k];
            CHECK(r.cmc[k] == doctest::Approx(static_cast<double>(cum) / static_cast<double>(valid)));
            if (k > 0) CHECK(r.cmc[k] >= r.cmc[k - 1]);
        }
    }
}

TEST_CASE("retrieval requires identities") {
    const auto f = oracle::random_unit_rows(4, 3, 1);
    const RetrievalSplit split{EmbeddingSet(f, {0, 1, 0, 1}, 2), EmbeddingSet(f, {0, 1, 0, 1}, 2)};
    CHECK_THROWS(cmc_map(split));
}
