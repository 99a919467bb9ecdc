#include <gtest/gtest.h>

#include <latch>
#include <set>
#include <thread>

#include "tabling/bucket_array.hpp"

using namespace tabling;

TEST(BucketCell, Examples) {
    EXPECT_EQ(bucket_cell(5, 32, 32), (BucketCell{true, 5, 0}));
    EXPECT_EQ(bucket_cell(32, 32, 32), (BucketCell{false, 0, 0}));
    EXPECT_EQ(bucket_cell(100, 32, 32), (BucketCell{false, 2, 4}));
}

TEST(BucketCell, CapacityIsEnforced) {
    EXPECT_NO_THROW(bucket_cell(32 + 32 * 32 - 1));
    EXPECT_THROW(bucket_cell(32 + 32 * 32), ConfigError);
    EXPECT_THROW(bucket_cell(10, 4, 2), ConfigError);
    EXPECT_GE(kDirectCells + kIndirectCells * kIndirectCells, kMaxThreads);
}

TEST(BucketCell, InjectiveOverFullCapacity) {
    for (std::size_t s : {1u, 4u, 32u})
        for (std::size_t u : {1u, 3u, 32u}) {
            std::set<std::tuple<bool, std::size_t, std::size_t>> seen;
            for (std::size_t t = 0; t < s + u * u; ++t) {
                const BucketCell c = bucket_cell(t, s, u);
                EXPECT_TRUE(seen.emplace(c.direct, c.first, c.second).second);
                if (c.direct) {
                    EXPECT_LT(c.first, s);
                } else {
                    EXPECT_LT(c.first, u);
                    EXPECT_LT(c.second, u);
                }
            }
        }
}

TEST(BucketArray, DirectAndIndirectCells) {
    BucketArray<int> ba;
    EXPECT_EQ(ba.get(3), nullptr);
    auto s1 = ba.get_or_create(3, [] { return std::make_unique<int>(3); });
    EXPECT_TRUE(s1.created);
    EXPECT_FALSE(s1.level_created);
    auto s2 = ba.get_or_create(3, [] { return std::make_unique<int>(99); });
    EXPECT_FALSE(s2.created);
    EXPECT_EQ(s2.value, s1.value);
    EXPECT_EQ(*ba.get(3), 3);

    auto s3 = ba.get_or_create(100, [] { return std::make_unique<int>(100); });
    EXPECT_TRUE(s3.level_created);
    auto s4 = ba.get_or_create(101, [] { return std::make_unique<int>(101); });
    EXPECT_FALSE(s4.level_created);
    EXPECT_EQ(ba.level_count(), 1u);
    EXPECT_EQ(ba.get(99), nullptr);
    int sum = 0;
    ba.for_each([&](int v) { sum += v; });
    EXPECT_EQ(sum, 3 + 100 + 101);
}

TEST(BucketArray, ConcurrentCreationPublishesOnce) {
    BucketArray<std::size_t> ba;
    constexpr int kThreads = 16;
    std::vector<std::vector<std::size_t*>> got(kThreads);
    std::vector<int> levels(kThreads, 0);
    std::latch start(kThreads);
    {
        std::vector<std::jthread> ws;
        for (int ti = 0; ti < kThreads; ++ti)
            ws.emplace_back([&, ti] {
                start.arrive_and_wait();
                for (std::size_t t = 0; t < kMaxThreads; ++t) {
                    auto slot = ba.get_or_create(t, [t] { return std::make_unique<std::size_t>(t); });
                    got[ti].push_back(slot.value);
                    levels[ti] += slot.level_created;
                }
            });
    }
    int total_levels = 0;
    for (int ti = 0; ti < kThreads; ++ti) {
        total_levels += levels[ti];
        EXPECT_EQ(got[ti], got[0]);
    }
    EXPECT_EQ(static_cast<std::size_t>(total_levels), ba.level_count());
    EXPECT_EQ(ba.level_count(), (kMaxThreads - kDirectCells + kIndirectCells - 1) / kIndirectCells);
    for (std::size_t t = 0; t < kMaxThreads; ++t)
        EXPECT_EQ(*ba.get(t), t);
}
