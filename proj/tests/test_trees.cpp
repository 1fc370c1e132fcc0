#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "honeycomb/trees.hpp"

using namespace honeycomb;

namespace {

// independent tree count by dynamic programming over (leaves, scale): a =
// subtrees that are a lone local leaf, b = everything else; an internal node
// with a single child may not take an a-subtree
struct CountDP {
    int h1star;
    std::map<std::pair<int, int>, std::pair<std::uint64_t, std::uint64_t>> memo;

    std::pair<std::uint64_t, std::uint64_t> ab(int n, int scale) {
        const auto key = std::make_pair(n, scale);
        if (const auto it = memo.find(key); it != memo.end()) return it->second;
        std::uint64_t a = 0, b = 0;
        if (n == 1) {
            if (scale <= h1star) a += 1;
            if (scale == h1star + 1) {
                a += 1;  // local
                b += 1;  // irrelevant
            }
        }
        if (scale <= h1star) {
            b += ab(n, scale + 1).second;  // single child, not a lone local leaf
            b += branch(n, scale + 1);
        }
        memo[key] = {a, b};
        return {a, b};
    }

    // ordered compositions into >= 2 parts, each part any subtree
    std::uint64_t branch(int n, int child_scale) {
        std::uint64_t total = 0;
        std::vector<std::uint64_t> conv(static_cast<std::size_t>(n) + 1, 0);
        conv[0] = 1;
        for (int parts = 1; parts <= n; ++parts) {
            std::vector<std::uint64_t> next(static_cast<std::size_t>(n) + 1, 0);
            for (int x = 0; x <= n; ++x) {
                if (conv[static_cast<std::size_t>(x)] == 0) continue;
                for (int y = 1; x + y <= n; ++y) {
                    const auto [ay, by] = ab(y, child_scale);
                    next[static_cast<std::size_t>(x + y)] +=
                        conv[static_cast<std::size_t>(x)] * (ay + by);
                }
            }
            conv = next;
            if (parts >= 2) total += conv[static_cast<std::size_t>(n)];
        }
        return total;
    }

    std::uint64_t trees(int n, int h) {
        // first node at h+1, at least one child, never itself a leaf
        std::uint64_t total = branch(n, h + 2);
        total += ab(n, h + 2).second;  // single child
        return total;
    }
};

constexpr std::uint32_t kPlusBits = 0x55555555u;  // bits 0,2,4,... = odd field indices

bool balanced(std::uint32_t m) {
    return std::popcount(m & kPlusBits) == std::popcount(m & ~kPlusBits);
}

// four-bullet re-validation written against the constraint list, not the
// library helper
bool check_labels(const GNTree& t, const std::vector<std::uint32_t>& p, int ell0) {
    for (int v = 0; v < static_cast<int>(t.nodes.size()); ++v) {
        const auto& node = t.nodes[static_cast<std::size_t>(v)];
        if (node.children.empty()) continue;
        std::uint32_t u = 0;
        for (const int c : node.children) u |= p[static_cast<std::size_t>(c)];
        if (p[static_cast<std::size_t>(v)] & ~u) return false;                   // containment
        if (!balanced(p[static_cast<std::size_t>(v)])) return false;             // parity balance
        if (node.children.size() >= 2)                                           // strictness
            for (const int c : node.children)
                if (p[static_cast<std::size_t>(v)] == p[static_cast<std::size_t>(c)]) return false;
        if (v != 0 && std::popcount(p[static_cast<std::size_t>(v)]) < 2 * ell0)  // size floor
            return false;
    }
    return true;
}

// exhaustive spanning-pairing oracle: all (s-1)-subsets of compatible lines
std::size_t spanning_oracle(const std::vector<std::vector<int>>& sets) {
    const int s = static_cast<int>(sets.size());
    struct L {
        int va, fa, vb, fb;
    };
    std::vector<L> lines;
    for (int va = 0; va < s; ++va)
        for (int vb = 0; vb < s; ++vb) {
            if (va == vb) continue;
            for (const int fa : sets[static_cast<std::size_t>(va)])
                for (const int fb : sets[static_cast<std::size_t>(vb)])
                    if (fa % 2 == 1 && fb % 2 == 0) lines.push_back({va, fa, vb, fb});
        }
    if (s == 1) return 1;
    const int need = s - 1;
    std::size_t count = 0;
    std::vector<int> idx(static_cast<std::size_t>(need));
    const auto ok = [&]() {
        std::set<std::pair<int, int>> used;
        std::vector<int> comp(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) comp[static_cast<std::size_t>(i)] = i;
        for (const int li : idx) {
            const L& l = lines[static_cast<std::size_t>(li)];
            if (!used.insert({l.va, l.fa}).second) return false;
            if (!used.insert({l.vb, l.fb}).second) return false;
            const int ca = comp[static_cast<std::size_t>(l.va)];
            const int cb = comp[static_cast<std::size_t>(l.vb)];
            if (ca == cb) return false;
            for (int& c : comp)
                if (c == cb) c = ca;
        }
        return true;
    };
    const auto rec = [&](auto&& self, int depth, int start) -> void {
        if (depth == need) {
            if (ok()) ++count;
            return;
        }
        for (int li = start; li < static_cast<int>(lines.size()); ++li) {
            idx[static_cast<std::size_t>(depth)] = li;
            self(self, depth + 1, li + 1);
        }
    };
    rec(rec, 0, 0);
    return count;
}

bool tree_well_formed(const GNTree& t) {
    if (t.nodes.empty() || t.nodes[0].parent != -1) return false;
    if (t.nodes[0].scale != t.root_scale + 1) return false;
    if (t.nodes[0].children.empty()) return false;
    for (int v = 0; v < static_cast<int>(t.nodes.size()); ++v) {
        const auto& n = t.nodes[static_cast<std::size_t>(v)];
        for (const int c : n.children) {
            if (t.nodes[static_cast<std::size_t>(c)].parent != v) return false;
            if (t.nodes[static_cast<std::size_t>(c)].scale != n.scale + 1) return false;
        }
        if (n.children.empty()) {
            if (t.mode == TreeMode::standard) {
                if (n.scale > t.h1star + 1) return false;
                if (n.local && n.scale > t.h1star + 1) return false;
                if (!n.local && n.scale != t.h1star + 1) return false;
                if (n.local &&
                    t.nodes[static_cast<std::size_t>(n.parent)].children.size() < 2 && v != 0)
                    return false;  // local leaves need a sibling
            } else {
                if (n.scale < t.root_scale + 2 || n.scale > t.h1star + 1) return false;
            }
        }
    }
    return true;
}

int leaves_below(const GNTree& t, int v) {
    if (t.is_leaf(v)) return 1;
    int n = 0;
    for (const int c : t.nodes[static_cast<std::size_t>(v)].children) n += leaves_below(t, c);
    return n;
}

}  // namespace

TEST_CASE("tree enumeration matches an independent dynamic-programming count") {
    for (int span = 1; span <= 5; ++span) {
        const int h = -2, h1star = h + span;
        CountDP dp{h1star, {}};
        for (int n = 1; n <= 5; ++n) {
            const auto trees = enumerate_trees(n, h, h1star);
            CAPTURE(n, span);
            CHECK(trees.size() == dp.trees(n, h));
            std::set<std::string> seen;
            for (const GNTree& t : trees) {
                REQUIRE(tree_well_formed(t));
                REQUIRE(t.leaf_count() == n);
                REQUIRE(seen.insert(t.encode()).second);  // duplicate-free
            }
        }
    }
}

TEST_CASE("single endpoint gives exactly the full chain") {
    for (int span = 2; span <= 5; ++span) {
        const auto trees = enumerate_trees(1, 0, span);
        REQUIRE(trees.size() == 1);
        // a lone local leaf has no sibling, so the only chain runs to the top
        const GNTree& t = trees[0];
        REQUIRE(static_cast<int>(t.nodes.size()) == span + 1);
        const auto& leaf = t.nodes.back();
        REQUIRE(leaf.children.empty());
        REQUIRE(leaf.scale == span + 1);
        REQUIRE_FALSE(leaf.local);
    }
}

TEST_CASE("unlabeled branching shapes follow the super-Catalan counts") {
    const std::uint64_t expected[] = {1, 1, 3, 11, 45, 197, 903};
    for (int n = 1; n <= 7; ++n) {
        CHECK(branching_tree_count(n) == expected[n - 1]);
        CHECK(static_cast<double>(branching_tree_count(n)) <= std::pow(4.0, n));
    }
    // enumerated shapes agree where enumeration is cheap
    for (int n = 1; n <= 4; ++n) {
        std::set<std::string> shapes;
        for (const GNTree& t : enumerate_trees(n, -2, 3)) shapes.insert(t.shape());
        CHECK(shapes.size() == branching_tree_count(n));
    }
    CHECK(branching_tree_count(3) == 3);
    CHECK_THROWS_AS(branching_tree_count(17), SizeLimit);
    CHECK_THROWS_AS(enumerate_trees(8, 0, 3), SizeLimit);
    CHECK_THROWS_AS(enumerate_trees(2, 0, 9), SizeLimit);
}

TEST_CASE("contracted trees keep two endpoints below every upper node") {
    // a single endpoint hangs directly off the first node
    const auto one = enumerate_trees(1, 0, 4, TreeMode::contracted);
    REQUIRE(one.size() == 1);
    REQUIRE(one[0].nodes.size() == 2);
    REQUIRE(one[0].nodes[1].scale == 2);
    // two endpoints: one tree per depth of the branching node
    for (int span = 2; span <= 5; ++span)
        CHECK(enumerate_trees(2, 0, span, TreeMode::contracted).size() ==
              static_cast<std::size_t>(span));
    for (int n = 1; n <= 4; ++n)
        for (const GNTree& t : enumerate_trees(n, 0, 4, TreeMode::contracted))
            for (int v = 1; v < static_cast<int>(t.nodes.size()); ++v)
                if (!t.is_leaf(v)) REQUIRE(leaves_below(t, v) >= 2);
}

TEST_CASE("label sets of a single endpoint are the balanced subsets") {
    const auto trees = enumerate_trees(1, -2, 0);
    REQUIRE(trees.size() == 1);
    const GNTree& t = trees[0];  // v0 -> chain node -> leaf, fields 1..4
    const auto labels = enumerate_labels(t, {2}, 2);
    // chain node: balanced, size >= 4, inside the leaf set -> forced to it;
    // first node: any balanced subset
    REQUIRE(labels.size() == 6);
    std::set<std::uint32_t> roots;
    for (const auto& f : labels) {
        REQUIRE(labels_valid(t, f, 2));
        REQUIRE(check_labels(t, f.p, 2));
        REQUIRE(f.p[1] == 0xFu);
        REQUIRE(balanced(f.p[0]));
        roots.insert(f.p[0]);
    }
    REQUIRE(roots.size() == 6);
    REQUIRE(roots.count(0x0u) == 1);
    REQUIRE(roots.count(0xFu) == 1);
    for (const std::uint32_t r : roots) REQUIRE((std::popcount(r) == 0 || std::popcount(r) == 2 ||
                                                 std::popcount(r) == 4));
}

TEST_CASE("local leaves with the threshold at the minimum size leave no labels") {
    // two local leaves directly under the first node
    GNTree t;
    t.root_scale = -2;
    t.h1star = 0;
    t.nodes.push_back({-1, -1, false, {1, 2}});
    t.nodes.push_back({0, 0, true, {}});
    t.nodes.push_back({0, 0, true, {}});
    REQUIRE(enumerate_labels(t, {2, 2}, 2).empty());  // local needs l < ell0 = q
    REQUIRE_FALSE(enumerate_labels(t, {2, 2}, 3).empty());
    CHECK_THROWS_AS(enumerate_labels(t, {2, 2, 2}, 3), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_labels(t, {4, 5}, 3), SizeLimit);
}

TEST_CASE("two-endpoint labels match a brute-force constraint filter") {
    std::size_t tested = 0;
    for (const GNTree& t : enumerate_trees(2, -2, 0)) {
        int internal_count = 0;
        for (int v = 0; v < static_cast<int>(t.nodes.size()); ++v)
            if (!t.is_leaf(v)) ++internal_count;
        if (internal_count > 2) continue;  // keep the 256^k oracle affordable
        ++tested;
        std::vector<int> lsz(static_cast<std::size_t>(t.leaf_count()), 2);
        bool feasible = true;
        for (const int leaf : t.leaves())
            if (t.nodes[static_cast<std::size_t>(leaf)].local) feasible = false;
        const auto labels = enumerate_labels(t, lsz, 2);
        if (!feasible) {
            REQUIRE(labels.empty());
            continue;
        }
        // brute force: assign every internal node any subset of the 8 fields
        const auto leaf_ids = t.leaves();
        std::vector<std::uint32_t> base(t.nodes.size(), 0);
        int at = 0;
        for (const int leaf : leaf_ids) {
            for (int j = 0; j < 4; ++j) base[static_cast<std::size_t>(leaf)] |= 1u << (at + j);
            at += 4;
        }
        std::vector<int> internal;
        for (int v = 0; v < static_cast<int>(t.nodes.size()); ++v)
            if (!t.is_leaf(v)) internal.push_back(v);
        std::size_t brute = 0;
        std::vector<std::uint32_t> p = base;
        const auto rec = [&](auto&& self, std::size_t i) -> void {
            if (i == internal.size()) {
                if (check_labels(t, p, 2)) ++brute;
                return;
            }
            for (std::uint32_t s = 0; s < 256; ++s) {
                p[static_cast<std::size_t>(internal[i])] = s;
                self(self, i + 1);
            }
        };
        rec(rec, 0);
        CAPTURE(t.encode());
        CHECK(labels.size() == brute);
        for (const auto& f : labels) REQUIRE(check_labels(t, f.p, 2));
    }
    REQUIRE(tested >= 2);
}

TEST_CASE("spanning trees over field sets") {
    // two vertices, one compatible line
    const auto two = spanning_trees({{1}, {2}});
    REQUIRE(two.size() == 1);
    REQUIRE(two[0].size() == 1);
    REQUIRE(two[0][0].va == 0);
    REQUIRE(two[0][0].fb == 2);
    // no compatible line at all
    REQUIRE(spanning_trees({{1}, {3}}).empty());
    // single vertex: one empty pairing
    REQUIRE(spanning_trees({{1, 2}}).size() == 1);
    REQUIRE(spanning_trees({{1, 2}})[0].empty());
    CHECK_THROWS_AS(spanning_trees(std::vector<std::vector<int>>(7)), SizeLimit);
    // star and random instances against the exhaustive oracle
    std::mt19937 rng(41);
    std::vector<std::vector<std::vector<int>>> cases = {
        {{1, 2}, {3, 4}, {5, 6}},
        {{1, 2, 3}, {4, 5}, {6}},
    };
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<std::vector<int>> sets(2 + rng() % 3);
        int f = 1;
        for (auto& s : sets)
            for (std::size_t j = 0; j < 1 + rng() % 3; ++j) s.push_back(f++);
        cases.push_back(sets);
    }
    for (const auto& sets : cases) {
        const auto trees = spanning_trees(sets);
        CHECK(trees.size() == spanning_oracle(sets));
        // count bound: product of per-vertex field powers times s!
        double c3 = 1.0, fact = 1.0;
        for (const auto& s : sets) c3 = std::max(c3, static_cast<double>(s.size()));
        for (std::size_t k = 2; k <= sets.size(); ++k) fact *= static_cast<double>(k);
        double bound = fact;
        for (const auto& s : sets) bound *= std::pow(c3, s.size() / 2.0);
        CHECK(static_cast<double>(trees.size()) <= bound);
        for (const auto& tr : trees) {
            REQUIRE(tr.size() + 1 == sets.size());
            std::set<std::pair<int, int>> used;
            for (const auto& l : tr) {
                REQUIRE(l.fa % 2 == 1);
                REQUIRE(l.fb % 2 == 0);
                REQUIRE(used.insert({l.va, l.fa}).second);
                REQUIRE(used.insert({l.vb, l.fb}).second);
            }
        }
    }
}

TEST_CASE("scaling dimensions classify label sizes per regime") {
    {
        const auto [v, c] = scaling_dimension(2, regime_first());
        CHECK(v == 1.0);
        CHECK(c == ScalingClass::relevant);
    }
    {
        const auto [v, c] = scaling_dimension(4, regime_second());
        CHECK(v == 0.0);
        CHECK(c == ScalingClass::marginal);
    }
    {
        const auto [v, c] = scaling_dimension(6, regime_second());
        CHECK(v == -1.0);
        CHECK(c == ScalingClass::irrelevant);
    }
    // first and third regimes share exponents: 3 - |P|
    for (int pv = 2; pv <= 8; pv += 2) {
        CHECK(scaling_dimension(pv, regime_first()).first == 3.0 - pv);
        CHECK(scaling_dimension(pv, regime_third()).first == 3.0 - pv);
    }
    CHECK_THROWS_AS(scaling_dimension(3, regime_first()), std::invalid_argument);
    // label threshold hypothesis holds in every infrared regime
    CHECK_NOTHROW(regime_first().validate_infrared());
    CHECK_NOTHROW(regime_second().validate_infrared());
    CHECK_NOTHROW(regime_third().validate_infrared());
    RegimeExponents bad{2.0, 1.0, 2, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(bad.validate_infrared(), std::invalid_argument);
}

TEST_CASE("power counting sum vanishes without a coupling and grows with the cap") {
    const PowerCountingConstants c;
    CHECK(power_counting_sum(1, -3, 0, regime_first(), c, 0.0, 3, 2).total == 0.0);
    const auto r1 = power_counting_sum(1, -3, 0, regime_first(), c, 1e-3, 1, 2);
    const auto r2 = power_counting_sum(1, -3, 0, regime_first(), c, 1e-3, 2, 2);
    const auto r3 = power_counting_sum(1, -3, 0, regime_first(), c, 1e-3, 3, 2);
    CHECK(r1.total > 0.0);
    CHECK(r1.total <= r2.total);
    CHECK(r2.total <= r3.total);
    REQUIRE(r3.by_n.size() == 3);
    CHECK(r3.by_n[0] == r1.by_n[0]);
    CHECK(r3.by_n[1] == r2.by_n[1]);
    CHECK_THROWS_AS(power_counting_sum(1, -3, 0, regime_first(), c, 1e-3, 7), SizeLimit);
}

TEST_CASE("two-field bound falls exactly two powers of two per scale") {
    // minimal sector: one endpoint of size two; the chain above the first
    // node is forced to the full four-field set and each chain link costs
    // 2^{-1}, so the sum is 16 |U| 2^{2h - top}
    const PowerCountingConstants c;
    const double u = 1e-3;
    std::vector<double> vals;
    for (int h = -6; h <= -3; ++h) {
        const auto r = power_counting_sum(1, h, 0, regime_first(), c, u, 1, 2);
        REQUIRE(r.by_n.size() == 1);
        const double expected = 16.0 * u * std::pow(2.0, 2 * h);
        CHECK(r.total == Catch::Approx(expected).epsilon(1e-13));
        vals.push_back(r.total);
    }
    for (std::size_t i = 1; i < vals.size(); ++i)
        CHECK(vals[i] / vals[i - 1] == Catch::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("endpoint series converges geometrically at small coupling") {
    const PowerCountingConstants c;
    {
        const auto r = power_counting_sum(1, -3, 0, regime_first(), c, 1e-3, 3, 2);
        REQUIRE(r.by_n.size() == 3);
        REQUIRE(r.by_n[0] > 0.0);
        CAPTURE(r.by_n[0], r.by_n[1], r.by_n[2]);
        CHECK(r.by_n[1] / r.by_n[0] < 1.0);
        if (r.by_n[1] > 0.0) CHECK(r.by_n[2] / r.by_n[1] < 1.0);
    }
    {
        // second-regime marginal sector, endpoints directly below the first
        // node: with a longer chain the size floor 2 ell0 = 6 removes every
        // four-field single-endpoint term and the leading order shifts
        const auto r = power_counting_sum(2, -3, -2, regime_second(), c, 1e-3, 2, 3);
        REQUIRE(r.by_n.size() == 2);
        REQUIRE(r.by_n[0] > 0.0);
        CAPTURE(r.by_n[0], r.by_n[1]);
        CHECK(r.by_n[1] / r.by_n[0] < 1.0);
    }
}

TEST_CASE("fixed endpoint count scales exactly by the dimension power") {
    const PowerCountingConstants c;
    for (const auto& [l, regime] : {std::pair{2, regime_first()}, std::pair{2, regime_second()}}) {
        const double dim = regime.c_k - (regime.c_k - regime.c_g) * l;
        std::vector<double> reduced;
        for (const int h : {-2, -5, -9}) {
            const auto r = power_counting_sum(l, h, h + 3, regime, c, 1e-3, 1, 3);
            reduced.push_back(r.total / std::pow(2.0, h * dim));
        }
        CAPTURE(l, reduced[0]);
        REQUIRE(reduced[0] > 0.0);
        CHECK(reduced[1] == Catch::Approx(reduced[0]).epsilon(1e-13));
        CHECK(reduced[2] == Catch::Approx(reduced[0]).epsilon(1e-13));
    }
}
