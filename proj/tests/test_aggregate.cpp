#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "bbreach/aggregate.hpp"

using namespace bbreach;

namespace {

IntervalBox box2(double l1, double u1, double l2, double u2)
{
    return IntervalBox({Interval(l1, u1), Interval(l2, u2)});
}

// Example boxes used throughout: two pairs that merge into two hulls.
std::vector<IntervalBox> example_boxes()
{
    return {box2(0.08, 0.16, 0.3, 0.4), box2(0.17, 0.25, 0.32, 0.42),
            box2(0.19, 0.27, 0.07, 0.2), box2(0.2, 0.28, 0.1, 0.21)};
}

const std::vector<double> h_02{0.02, 0.02};

// Independent reference: union-find over the same classify edges, hulls per
// component.
struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n)
    {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::vector<IntervalBox> union_find_reference(const std::vector<IntervalBox>& boxes,
                                              const std::vector<double>& h)
{
    UnionFind uf(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j)
            if (classify(boxes[i], boxes[j], h) != AdjacencyRelation::NotAdjacent)
                uf.unite(i, j);
    std::map<std::size_t, IntervalBox> hulls;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const std::size_t root = uf.find(i);
        auto it = hulls.find(root);
        if (it == hulls.end())
            hulls.emplace(root, boxes[i]);
        else
            it->second = hull(it->second, boxes[i]);
    }
    std::vector<IntervalBox> out;
    for (auto& [root, box] : hulls)
        out.push_back(box);
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

IntervalBox random_box(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    std::uniform_real_distribution<double> width(0.0, 0.25);
    const double l1 = pos(rng), l2 = pos(rng);
    return box2(l1, l1 + width(rng), l2, l2 + width(rng));
}

}  // namespace

TEST_CASE("classification of the worked pairs")
{
    const auto boxes = example_boxes();
    CHECK(classify(boxes[0], boxes[1], h_02) == AdjacencyRelation::Separation);
    CHECK(classify(boxes[2], boxes[3], h_02) == AdjacencyRelation::Intersection);
    // cross pairs are not adjacent
    CHECK(classify(boxes[0], boxes[2], h_02) == AdjacencyRelation::NotAdjacent);
    CHECK(classify(boxes[0], boxes[3], h_02) == AdjacencyRelation::NotAdjacent);
    CHECK(classify(boxes[1], boxes[2], h_02) == AdjacencyRelation::NotAdjacent);
    CHECK(classify(boxes[1], boxes[3], h_02) == AdjacencyRelation::NotAdjacent);
}

TEST_CASE("strict containment classifies as inclusion")
{
    const auto outer = box2(0.0, 1.0, 0.0, 1.0);
    const auto inner = box2(0.2, 0.4, 0.3, 0.5);
    CHECK(classify(inner, outer, h_02) == AdjacencyRelation::Inclusion);
    CHECK(classify(outer, inner, h_02) == AdjacencyRelation::Inclusion);
}

TEST_CASE("classification is symmetric")
{
    std::mt19937_64 rng(109);
    for (int round = 0; round < 2000; ++round) {
        const auto a = random_box(rng);
        const auto b = random_box(rng);
        const bool adj_ab = classify(a, b, h_02) != AdjacencyRelation::NotAdjacent;
        const bool adj_ba = classify(b, a, h_02) != AdjacencyRelation::NotAdjacent;
        CHECK(adj_ab == adj_ba);
    }
}

TEST_CASE("classify validates dimensions")
{
    CHECK_THROWS_AS(classify(box2(0, 1, 0, 1), IntervalBox({Interval(0, 1)}), h_02),
                    DimensionMismatch);
    const std::vector<double> short_h{0.02};
    CHECK_THROWS_AS(classify(box2(0, 1, 0, 1), box2(0, 1, 0, 1), short_h),
                    DimensionMismatch);
}

TEST_CASE("aggregate the worked example")
{
    const auto result = aggregate(example_boxes(), h_02);
    REQUIRE(result.size() == 2);
    const auto expected_a = box2(0.08, 0.25, 0.3, 0.42);
    const auto expected_b = box2(0.19, 0.28, 0.07, 0.21);
    for (std::size_t d = 0; d < 2; ++d) {
        CHECK_THAT(result[0][d].lo, Catch::Matchers::WithinAbs(expected_a[d].lo, 1e-12));
        CHECK_THAT(result[0][d].hi, Catch::Matchers::WithinAbs(expected_a[d].hi, 1e-12));
        CHECK_THAT(result[1][d].lo, Catch::Matchers::WithinAbs(expected_b[d].lo, 1e-12));
        CHECK_THAT(result[1][d].hi, Catch::Matchers::WithinAbs(expected_b[d].hi, 1e-12));
    }
}

TEST_CASE("pairwise-far boxes pass through unchanged")
{
    std::vector<IntervalBox> boxes{box2(0.0, 0.1, 0.0, 0.1), box2(0.5, 0.6, 0.5, 0.6),
                                   box2(0.9, 1.0, 0.0, 0.1)};
    auto result = aggregate(boxes, h_02);
    std::sort(boxes.begin(), boxes.end(), lex_less);
    CHECK(result == boxes);
}

TEST_CASE("aggregate agrees with the union-find reference")
{
    std::mt19937_64 rng(113);
    for (int round = 0; round < 200; ++round) {
        std::vector<IntervalBox> boxes;
        for (int i = 0; i < 50; ++i)
            boxes.push_back(random_box(rng));
        const auto ours = aggregate(boxes, h_02);
        const auto reference = union_find_reference(boxes, h_02);
        CHECK(ours == reference);

        // soundness: every input is contained in some output
        for (const auto& box : boxes) {
            bool covered = false;
            for (const auto& agg : ours)
                covered = covered || agg.contains(box);
            CHECK(covered);
        }
        CHECK(ours.size() <= boxes.size());
    }
}

TEST_CASE("aggregation is independent of input order")
{
    std::mt19937_64 rng(127);
    std::vector<IntervalBox> boxes;
    for (int i = 0; i < 30; ++i)
        boxes.push_back(random_box(rng));
    const auto reference = aggregate(boxes, h_02);
    for (int round = 0; round < 20; ++round) {
        std::shuffle(boxes.begin(), boxes.end(), rng);
        CHECK(aggregate(boxes, h_02) == reference);
    }
}

TEST_CASE("touching boxes with aligned faces merge")
{
    // [0,1] and [1,2] in dimension 0, identical in dimension 1: gap 0
    const auto a = box2(0.0, 1.0, 0.0, 1.0);
    const auto b = box2(1.0, 2.0, 0.0, 1.0);
    CHECK(classify(a, b, h_02) != AdjacencyRelation::NotAdjacent);
    const auto merged = aggregate({a, b}, h_02);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0] == box2(0.0, 2.0, 0.0, 1.0));
}
