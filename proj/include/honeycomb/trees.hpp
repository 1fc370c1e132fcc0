#pragma once

// Scale-labeled tree expansion machinery: enumeration of rooted trees with
// per-level scale labels, external-field-label sets, spanning trees over
// field sets, scaling dimensions, and the explicit evaluator of the
// power-counting bound.

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "honeycomb/grassmann.hpp"

namespace honeycomb {

enum class TreeMode { standard, contracted };

// Rooted tree with ordered children; the root (scale h) is implicit and the
// first node v0 sits on scale h+1. Children of a scale-h' node sit on scale
// h'+1. Leaves on scales <= h1star are local; on scale h1star+1 they are
// either local or irrelevant. In standard mode every local leaf must have a
// sibling; in contracted mode leaves are unmarked and every non-leaf node
// other than v0 must have at least two leaves below it.
struct GNTree {
    struct Node {
        int scale = 0;
        int parent = -1;  // -1 for v0
        bool local = false;
        std::vector<int> children;
    };

    int root_scale = 0;
    int h1star = 0;
    TreeMode mode = TreeMode::standard;
    std::vector<Node> nodes;  // depth-first order, nodes[0] = v0

    bool is_leaf(int i) const { return nodes[static_cast<std::size_t>(i)].children.empty(); }

    std::vector<int> leaves() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (is_leaf(i)) out.push_back(i);
        return out;
    }

    int leaf_count() const { return static_cast<int>(leaves().size()); }

    // canonical encoding: children sequences in construction (left-to-right)
    // order, scales and leaf marks spelled out
    std::string encode() const { return encode_node(0); }

    // scale labels dropped and single-child chains contracted: the shape used
    // for unlabeled counting
    std::string shape() const { return shape_node(0); }

  private:
    std::string encode_node(int i) const {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        std::string s = "(" + std::to_string(n.scale);
        if (n.children.empty()) s += n.local ? "L" : "I";
        for (const int c : n.children) s += encode_node(c);
        return s + ")";
    }

    std::string shape_node(int i) const {
        const Node* n = &nodes[static_cast<std::size_t>(i)];
        while (n->children.size() == 1) n = &nodes[static_cast<std::size_t>(n->children[0])];
        if (n->children.empty()) return "*";
        std::string s = "(";
        for (const int c : n->children) s += shape_node(c);
        return s + ")";
    }
};

namespace detail {

struct TreeFrag {
    std::vector<GNTree::Node> nodes;  // relative indices, fragment root at 0
};

inline void append_frag(std::vector<GNTree::Node>& out, int parent, const TreeFrag& f) {
    const int base = static_cast<int>(out.size());
    for (const auto& n : f.nodes) {
        GNTree::Node m = n;
        m.parent = n.parent < 0 ? parent : n.parent + base;
        for (int& c : m.children) c += base;
        out.push_back(m);
    }
    if (parent >= 0) out[static_cast<std::size_t>(parent)].children.push_back(base);
}

// all subtrees rooted on `scale` carrying n leaves
inline std::vector<TreeFrag> tree_frags(int scale, int n, int h1star, TreeMode mode) {
    std::vector<TreeFrag> out;
    if (n == 1) {
        const auto leaf = [&](bool local) {
            TreeFrag f;
            f.nodes.push_back({scale, -1, local, {}});
            out.push_back(std::move(f));
        };
        if (mode == TreeMode::contracted) {
            leaf(false);
        } else {
            if (scale <= h1star) leaf(true);
            if (scale == h1star + 1) {
                leaf(true);
                leaf(false);
            }
        }
    }
    if (scale > h1star) return out;  // children would exceed the top scale
    if (mode == TreeMode::contracted && n < 2) return out;  // no trivial chains above v0
    // internal node: ordered compositions of n into k >= 1 children
    std::vector<std::vector<TreeFrag>> parts;
    const auto emit = [&]() {
        std::vector<std::size_t> idx(parts.size(), 0);
        while (true) {
            bool ok = true;
            if (parts.size() == 1 && mode == TreeMode::standard) {
                const TreeFrag& c = parts[0][idx[0]];
                if (c.nodes.size() == 1 && c.nodes[0].local) ok = false;  // lone local leaf
            }
            if (ok) {
                TreeFrag f;
                f.nodes.push_back({scale, -1, false, {}});
                for (std::size_t i = 0; i < parts.size(); ++i)
                    append_frag(f.nodes, 0, parts[i][idx[i]]);
                out.push_back(std::move(f));
            }
            std::size_t i = 0;
            while (i < parts.size() && ++idx[i] == parts[i].size()) idx[i++] = 0;
            if (i == parts.size()) break;
        }
    };
    const auto rec = [&](auto&& self, int rest, int kleft) -> void {
        if (rest == 0) {
            if (kleft == 0 && !parts.empty()) emit();
            return;
        }
        if (kleft == 0) return;
        for (int take = 1; take <= rest - (kleft - 1); ++take) {
            auto sub = tree_frags(scale + 1, take, h1star, mode);
            if (sub.empty()) continue;
            parts.push_back(std::move(sub));
            self(self, rest - take, kleft - 1);
            parts.pop_back();
        }
    };
    for (int k = 1; k <= n; ++k) rec(rec, n, k);
    return out;
}

}  // namespace detail

inline std::vector<GNTree> enumerate_trees(int nleaves, int h, int h1star,
                                           TreeMode mode = TreeMode::standard) {
    if (nleaves < 1 || nleaves > 7) throw SizeLimit("enumerate_trees: need 1 <= N <= 7");
    if (h1star - h < 1 || h1star - h > 8)
        throw SizeLimit("enumerate_trees: scale span outside [1, 8]");
    std::vector<GNTree> out;
    // v0 sits on scale h+1 and is never a leaf; the >= 2 endpoint rule of
    // contracted mode only binds strictly above it, so it is assembled here
    std::vector<std::vector<detail::TreeFrag>> parts;
    const auto emit = [&]() {
        std::vector<std::size_t> idx(parts.size(), 0);
        while (true) {
            bool ok = true;
            if (parts.size() == 1 && mode == TreeMode::standard) {
                const detail::TreeFrag& c = parts[0][idx[0]];
                if (c.nodes.size() == 1 && c.nodes[0].local) ok = false;
            }
            if (ok) {
                GNTree t;
                t.root_scale = h;
                t.h1star = h1star;
                t.mode = mode;
                t.nodes.push_back({h + 1, -1, false, {}});
                for (std::size_t i = 0; i < parts.size(); ++i)
                    detail::append_frag(t.nodes, 0, parts[i][idx[i]]);
                out.push_back(std::move(t));
            }
            std::size_t i = 0;
            while (i < parts.size() && ++idx[i] == parts[i].size()) idx[i++] = 0;
            if (i == parts.size()) break;
        }
    };
    const auto rec = [&](auto&& self, int rest, int kleft) -> void {
        if (rest == 0) {
            if (kleft == 0 && !parts.empty()) emit();
            return;
        }
        if (kleft == 0) return;
        for (int take = 1; take <= rest - (kleft - 1); ++take) {
            auto sub = detail::tree_frags(h + 2, take, h1star, mode);
            if (sub.empty()) continue;
            parts.push_back(std::move(sub));
            self(self, rest - take, kleft - 1);
            parts.pop_back();
        }
    };
    for (int k = 1; k <= nleaves; ++k) rec(rec, nleaves, k);
    return out;
}

// ordered rooted trees with n leaves whose internal nodes all branch; the
// unlabeled shapes left after contracting scale chains
inline std::uint64_t branching_tree_count(int nleaves) {
    if (nleaves < 1 || nleaves > 16) throw SizeLimit("branching_tree_count: need 1 <= N <= 16");
    std::vector<std::uint64_t> f(static_cast<std::size_t>(nleaves) + 1, 0);
    f[1] = 1;
    for (int n = 2; n <= nleaves; ++n) {
        // sum over ordered compositions into k >= 2 parts via a convolution
        // that tracks "at least two parts"
        std::vector<std::uint64_t> conv(static_cast<std::size_t>(n) + 1, 0);
        conv[0] = 1;
        std::vector<std::uint64_t> total(static_cast<std::size_t>(n) + 1, 0);
        for (int parts = 1; parts <= n; ++parts) {
            std::vector<std::uint64_t> next(static_cast<std::size_t>(n) + 1, 0);
            for (int a = 0; a <= n; ++a) {
                if (conv[static_cast<std::size_t>(a)] == 0) continue;
                for (int b = 1; a + b <= n; ++b)
                    next[static_cast<std::size_t>(a + b)] +=
                        conv[static_cast<std::size_t>(a)] * f[static_cast<std::size_t>(b)];
            }
            conv = next;
            if (parts >= 2) total[static_cast<std::size_t>(n)] += conv[static_cast<std::size_t>(n)];
        }
        f[static_cast<std::size_t>(n)] = total[static_cast<std::size_t>(n)];
    }
    return f[static_cast<std::size_t>(nleaves)];
}

// External field labels over a tree: per-node masks over the field index
// pool {1, ..., 2L}; odd indices are + fields, even indices - fields; bit
// j-1 of a mask stands for field j.
struct FieldLabels {
    std::vector<std::uint32_t> p;  // per tree node
    std::vector<int> lsizes;       // per leaf, in leaf order
};

namespace detail {

inline bool balanced_mask(std::uint32_t m) {
    constexpr std::uint32_t plus = 0x55555555u;  // bits 0,2,4,... = odd field indices
    return std::popcount(m & plus) == std::popcount(m & ~plus);
}

}  // namespace detail

// Enumerates the label sets compatible with the tree: P_v inside the union
// of the children's sets, balanced, distinct from every child of a branching
// node, and of size >= 2 ell0 off the first node and the local leaves. With
// root_size >= 0 only |P_v0| = root_size survives; with beta_restricted the
// nodes reached from v0 through single-child chains must satisfy
// |P_v| > root_size.
inline std::vector<FieldLabels> enumerate_labels(const GNTree& tree,
                                                 const std::vector<int>& lsizes, int ell0,
                                                 int q = 2, bool beta_restricted = false,
                                                 int root_size = -1) {
    const std::vector<int> leaf_ids = tree.leaves();
    if (lsizes.size() != leaf_ids.size())
        throw std::invalid_argument("enumerate_labels: one size per leaf");
    int total = 0;
    for (const int l : lsizes) total += l;
    if (total > 8) throw SizeLimit("enumerate_labels: sum of sizes above 8");
    const int nn = static_cast<int>(tree.nodes.size());

    // field index ranges per leaf; an invalid size assignment has no labels
    std::vector<std::uint32_t> base(static_cast<std::size_t>(nn), 0);
    int at = 0;
    for (std::size_t i = 0; i < leaf_ids.size(); ++i) {
        const int l = lsizes[i];
        if (l < q) return {};
        if (tree.nodes[static_cast<std::size_t>(leaf_ids[i])].local && l >= ell0) return {};
        for (int j = 0; j < 2 * l; ++j) base[static_cast<std::size_t>(leaf_ids[i])] |= 1u << (at + j);
        at += 2 * l;
    }

    // nodes reached from v0 by single-child chains (beta-function restriction)
    std::vector<bool> chain(static_cast<std::size_t>(nn), false);
    for (int w = 0; tree.nodes[static_cast<std::size_t>(w)].children.size() == 1;) {
        w = tree.nodes[static_cast<std::size_t>(w)].children[0];
        if (!tree.is_leaf(w)) chain[static_cast<std::size_t>(w)] = true;
    }

    // internal nodes in bottom-up (reverse depth-first) order
    std::vector<int> internal;
    for (int i = nn - 1; i >= 0; --i)
        if (!tree.is_leaf(i)) internal.push_back(i);

    std::vector<FieldLabels> out;
    std::vector<std::uint32_t> p = base;
    const auto rec = [&](auto&& self, std::size_t step) -> void {
        if (step == internal.size()) {
            out.push_back({p, lsizes});
            return;
        }
        const int v = internal[step];
        const auto& node = tree.nodes[static_cast<std::size_t>(v)];
        std::uint32_t u = 0;
        for (const int c : node.children) u |= p[static_cast<std::size_t>(c)];
        // iterate submasks of the children's union, empty set included
        std::uint32_t s = u;
        while (true) {
            bool ok = detail::balanced_mask(s);
            if (ok && v != 0 && std::popcount(s) < 2 * ell0) ok = false;
            if (ok && v == 0 && root_size >= 0 && std::popcount(s) != root_size) ok = false;
            if (ok && beta_restricted && chain[static_cast<std::size_t>(v)] && root_size >= 0 &&
                std::popcount(s) <= root_size)
                ok = false;
            if (ok && node.children.size() >= 2)
                for (const int c : node.children)
                    if (s == p[static_cast<std::size_t>(c)]) {
                        ok = false;
                        break;
                    }
            if (ok) {
                p[static_cast<std::size_t>(v)] = s;
                self(self, step + 1);
            }
            if (s == 0) break;
            s = (s - 1) & u;
        }
        p[static_cast<std::size_t>(v)] = base[static_cast<std::size_t>(v)];
    };
    rec(rec, 0);
    return out;
}

// independent re-validation of a label assignment (used by property tests)
inline bool labels_valid(const GNTree& tree, const FieldLabels& f, int ell0) {
    const int nn = static_cast<int>(tree.nodes.size());
    for (int v = 0; v < nn; ++v) {
        if (tree.is_leaf(v)) continue;
        const auto& node = tree.nodes[static_cast<std::size_t>(v)];
        std::uint32_t u = 0;
        for (const int c : node.children) u |= f.p[static_cast<std::size_t>(c)];
        const std::uint32_t s = f.p[static_cast<std::size_t>(v)];
        if (s & ~u) return false;
        if (!detail::balanced_mask(s)) return false;
        if (v != 0 && std::popcount(s) < 2 * ell0) return false;
        if (node.children.size() >= 2)
            for (const int c : node.children)
                if (s == f.p[static_cast<std::size_t>(c)]) return false;
    }
    return true;
}

// spanning trees over field sets: a line pairs a + field (odd index) of one
// vertex with a - field (even index) of another; a spanning tree is a set of
// s-1 lines with distinct fields connecting all vertices
struct SpanLine {
    int va, fa;  // + side
    int vb, fb;  // - side
};

inline std::vector<std::vector<SpanLine>> spanning_trees(
    const std::vector<std::vector<int>>& sets) {
    const int s = static_cast<int>(sets.size());
    if (s < 1 || s > 6) throw SizeLimit("spanning_trees: need 1 to 6 vertices");
    if (s == 1) return {{}};
    std::vector<SpanLine> lines;
    for (int va = 0; va < s; ++va)
        for (int vb = 0; vb < s; ++vb) {
            if (va == vb) continue;
            for (const int fa : sets[static_cast<std::size_t>(va)]) {
                if (fa % 2 == 0) continue;
                for (const int fb : sets[static_cast<std::size_t>(vb)])
                    if (fb % 2 == 0) lines.push_back({va, fa, vb, fb});
            }
        }
    std::vector<std::vector<SpanLine>> out;
    std::vector<int> pick(static_cast<std::size_t>(s - 1));
    const auto valid = [&]() {
        std::vector<int> parent(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) parent[static_cast<std::size_t>(i)] = i;
        const auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
            return x;
        };
        std::vector<std::pair<int, int>> used;
        for (const int li : pick) {
            const SpanLine& l = lines[static_cast<std::size_t>(li)];
            for (const auto& [v, f] : used)
                if ((v == l.va && f == l.fa) || (v == l.vb && f == l.fb)) return false;
            used.push_back({l.va, l.fa});
            used.push_back({l.vb, l.fb});
            const int a = find(l.va), b = find(l.vb);
            if (a == b) return false;
            parent[static_cast<std::size_t>(a)] = b;
        }
        return true;
    };
    const auto rec = [&](auto&& self, int depth, int start) -> void {
        if (depth == s - 1) {
            if (valid()) out.push_back([&] {
                std::vector<SpanLine> t;
                for (const int li : pick) t.push_back(lines[static_cast<std::size_t>(li)]);
                return t;
            }());
            return;
        }
        for (int li = start; li < static_cast<int>(lines.size()); ++li) {
            pick[static_cast<std::size_t>(depth)] = li;
            self(self, depth + 1, li + 1);
        }
    };
    rec(rec, 0, 0);
    return out;
}

// per-regime exponents: kernel decay c_k, propagator decay c_g, the label
// threshold ell0, and the per-component derivative weights (d0, d1, d2)
struct RegimeExponents {
    double c_k = 1.0;
    double c_g = 1.0;
    int ell0 = 1;
    double d0 = 1.0, d1 = 0.0, d2 = 0.0;

    void validate_infrared() const {
        if (static_cast<double>(ell0) <= c_k / (c_k - c_g))
            throw std::invalid_argument("RegimeExponents: need ell0 > c_k / (c_k - c_g)");
    }
};

inline RegimeExponents regime_uv() { return {1.0, 1.0, 1, 1.0, 0.0, 0.0}; }
inline RegimeExponents regime_first() { return {3.0, 1.0, 2, 1.0, 1.0, 1.0}; }
inline RegimeExponents regime_second() { return {2.0, 1.0, 3, 1.0, 0.5, 0.5}; }
inline RegimeExponents regime_third() { return {3.0, 1.0, 2, 1.0, 1.0, 1.0}; }

enum class ScalingClass { relevant, marginal, irrelevant };

inline std::pair<double, ScalingClass> scaling_dimension(int pv_size, const RegimeExponents& r) {
    if (pv_size < 2 || pv_size % 2 != 0)
        throw std::invalid_argument("scaling_dimension: need an even size >= 2");
    const double value = r.c_k - (r.c_k - r.c_g) * pv_size / 2.0;
    const ScalingClass cls = value > 0.0   ? ScalingClass::relevant
                             : value < 0.0 ? ScalingClass::irrelevant
                                           : ScalingClass::marginal;
    return {value, cls};
}

// constants of the power-counting bound; all default to one, the kernel
// constants per field count default to one as well
struct PowerCountingConstants {
    double c1 = 1.0, c2 = 1.0, c3 = 1.0, cg = 1.0, cG = 1.0;
    std::map<int, double> frak_c;  // keyed by 2l

    double kernel_const(int two_l) const {
        const auto it = frak_c.find(two_l);
        return it == frak_c.end() ? 1.0 : it->second;
    }
};

struct PowerCountingResult {
    double total = 0.0;
    std::vector<double> by_n;  // contribution per endpoint count
};

// Explicit evaluation of the power-counting bound truncated at nmax
// endpoints: the analytic prefactor 2^{h (c_k - (c_k - c_g) l)} times the
// enumerated sum over trees, endpoint sizes (q <= l_v <= lmax), and
// beta-restricted labels with |P_v0| = 2l, each label set weighted by
// prod_v 2^{c_k - (c_k - c_g)|P_v|/2} and the endpoint factors
// (c2 cG)^{l_v} frak_c_{2 l_v} |U|^{max(1, l_v - 1)}.
inline PowerCountingResult power_counting_sum(int l, int h, int h1star, const RegimeExponents& r,
                                              const PowerCountingConstants& c, double u, int nmax,
                                              int lmax = 3, int q = 2) {
    if (nmax < 1 || nmax > 6) throw SizeLimit("power_counting_sum: need 1 <= nmax <= 6");
    if (l < 1) throw std::invalid_argument("power_counting_sum: need l >= 1");
    r.validate_infrared();
    PowerCountingResult res;
    const double prefactor = std::pow(2.0, h * (r.c_k - (r.c_k - r.c_g) * l)) *
                             std::pow(c.c3 / c.cG, l);
    for (int n = 1; n <= nmax; ++n) {
        double acc = 0.0;
        for (const GNTree& tree : enumerate_trees(n, h, h1star)) {
            const std::vector<int> leaf_ids = tree.leaves();
            std::vector<int> lsz(static_cast<std::size_t>(n), q);
            const auto sizes = [&](auto&& self, std::size_t i) -> void {
                if (i == lsz.size()) {
                    int total = 0;
                    for (const int lv : lsz) total += lv;
                    if (total > 8) return;
                    double endpoint = 1.0;
                    for (const int lv : lsz)
                        endpoint *= std::pow(c.c2 * c.cG, lv) * c.kernel_const(2 * lv) *
                                    std::pow(std::abs(u), std::max(1, lv - 1));
                    if (endpoint == 0.0) return;
                    for (const auto& labels :
                         enumerate_labels(tree, lsz, r.ell0, q, true, 2 * l)) {
                        double w = 1.0;
                        for (int v = 0; v < static_cast<int>(tree.nodes.size()); ++v) {
                            if (tree.is_leaf(v)) continue;
                            const int pv = std::popcount(labels.p[static_cast<std::size_t>(v)]);
                            w *= std::pow(2.0, r.c_k - (r.c_k - r.c_g) * pv / 2.0);
                        }
                        acc += w * endpoint;
                    }
                    return;
                }
                const bool local = tree.nodes[static_cast<std::size_t>(leaf_ids[i])].local;
                for (int lv = q; lv <= lmax; ++lv) {
                    if (local && lv >= r.ell0) continue;
                    lsz[i] = lv;
                    self(self, i + 1);
                }
            };
            sizes(sizes, 0);
        }
        acc *= std::pow(c.c1, n) * std::pow(c.cg / c.cG, n - 1);
        res.by_n.push_back(prefactor * acc);
        res.total += prefactor * acc;
    }
    return res;
}

}  // namespace honeycomb
