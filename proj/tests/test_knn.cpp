#include <gtest/gtest.h>

#include <random>

#include "hspc/error.hpp"
#include "hspc/knn.hpp"
#include "support.hpp"

using namespace hspc;

TEST(KnnSearch, SmallExample) {
    const LabeledDataset d({0, 0, 1, 0, 5, 0}, 2, {0, 0, 0});
    const std::vector<float> q{0.1f, 0.0f};
    const auto r = knnSearch(d, q, 2);
    EXPECT_EQ(r.ids(), (std::vector<Id>{0, 1}));
    EXPECT_EQ(r.k, 2u);
}

TEST(KnnSearch, KAtOrAboveNReturnsEverythingSorted) {
    const LabeledDataset d({5, 0, 1, 0, 3, 0, 0, 0}, 2, {0, 0, 0, 0});
    const std::vector<float> q{0, 0};
    EXPECT_EQ(knnSearch(d, q, 4).ids(), (std::vector<Id>{3, 1, 2, 0}));
    EXPECT_EQ(knnSearch(d, q, 10).ids(), (std::vector<Id>{3, 1, 2, 0}));
}

TEST(KnnSearch, MatchesSortAllOracle) {
    const auto d = fixtures::uniformDataset(2000, 32, 5);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const auto q = fixtures::randomQuery(32, rng);
        EXPECT_EQ(knnSearch(d, q, 10).entries, fixtures::oracle::sortAllKnn(d, q, 10));
    }
}

TEST(KnnSearch, TieOrderMatchesOracleOnGrid) {
    const auto d = fixtures::gridDataset(500, 3, 8, 3);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> u(0, 3);
    for (int i = 0; i < 50; ++i) {
        const std::vector<float> q{float(u(rng)), float(u(rng)), float(u(rng))};
        for (std::size_t k : {1u, 7u, 40u, 500u}) {
            EXPECT_EQ(knnSearch(d, q, k).entries, fixtures::oracle::sortAllKnn(d, q, k));
        }
    }
}

TEST(KnnSearch, PrefixProperty) {
    const auto d = fixtures::gridDataset(300, 2, 10, 5);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto q = fixtures::randomQuery(2, rng, 0.0f, 5.0f);
        const auto full = knnSearch(d, q, d.size()).entries;
        for (std::size_t k = 1; k < d.size(); k += 37) {
            const auto part = knnSearch(d, q, k).entries;
            EXPECT_TRUE(std::equal(part.begin(), part.end(), full.begin()));
        }
    }
}

TEST(KnnSearch, ExcludeDropsOneId) {
    const auto d = fixtures::uniformDataset(100, 4, 2);
    const auto r = knnSearch(d, d.vector(17), 5, Id{17});
    for (const auto& e : r.entries) EXPECT_NE(e.id, 17u);
    EXPECT_EQ(r.entries, fixtures::oracle::sortAllKnn(d, d.vector(17), 5, Id{17}));
    EXPECT_EQ(knnSearch(d, d.vector(17), 1).ids().front(), 17u);
}

TEST(KnnSearch, Errors) {
    const LabeledDataset empty(std::vector<float>{}, 2, std::vector<ClassId>{});
    const std::vector<float> q{0, 0};
    EXPECT_THROW(knnSearch(empty, q, 1), EmptyDatasetError);
    const LabeledDataset d({0, 0}, 2, {0});
    EXPECT_THROW(knnSearch(d, q, 0), ContractError);
    const std::vector<float> bad{0, 0, 0};
    EXPECT_THROW(knnSearch(d, bad, 1), DimensionError);
}
