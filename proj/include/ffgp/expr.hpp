// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_EXPR_HPP
#define FFGP_EXPR_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "random.hpp"

namespace ffgp {

enum class OpKind : std::uint8_t { Add, Sub, Mul, Div, Pow, Abs };

inline constexpr std::size_t operator_count = 6;
inline constexpr std::array<OpKind, operator_count> all_operators {
    OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div, OpKind::Pow, OpKind::Abs
};

constexpr auto arity(OpKind op) noexcept -> int { return op == OpKind::Abs ? 1 : 2; }

constexpr auto symbol(OpKind op) noexcept -> std::string_view
{
    switch (op) {
    case OpKind::Add: return "+";
    case OpKind::Sub: return "-";
    case OpKind::Mul: return "*";
    case OpKind::Div: return "/";
    case OpKind::Pow: return "^";
    case OpKind::Abs: return "abs";
    }
    return "?";
}

enum class NodeType : std::uint8_t { Operator, Variable, Constant };

struct Node {
    NodeType type { NodeType::Variable };
    OpKind op { OpKind::Add };  // meaningful for operators only
    std::int32_t value { 0 };   // meaningful for constants only
    std::uint32_t size { 1 };   // nodes in the subtree rooted here

    static constexpr auto variable() noexcept -> Node { return { NodeType::Variable, OpKind::Add, 0, 1 }; }
    static constexpr auto constant(std::int32_t v) noexcept -> Node { return { NodeType::Constant, OpKind::Add, v, 1 }; }
    static constexpr auto op_node(OpKind k) noexcept -> Node { return { NodeType::Operator, k, 0, 1 }; }

    [[nodiscard]] constexpr auto is_leaf() const noexcept -> bool { return type != NodeType::Operator; }
    [[nodiscard]] constexpr auto arity() const noexcept -> int { return is_leaf() ? 0 : ffgp::arity(op); }

    // Structural identity; the cached subtree size is derived data.
    friend constexpr auto operator==(Node const& a, Node const& b) noexcept -> bool
    {
        if (a.type != b.type) {
            return false;
        }
        switch (a.type) {
        case NodeType::Operator: return a.op == b.op;
        case NodeType::Constant: return a.value == b.value;
        case NodeType::Variable: return true;
        }
        return false;
    }
};

struct DepthLimits {
    int k_min { 3 };
    int k_max { 4 };

    [[nodiscard]] constexpr auto valid() const noexcept -> bool { return k_min >= 1 && k_max >= k_min; }
    [[nodiscard]] constexpr auto admits(int depth) const noexcept -> bool { return depth >= k_min && depth <= k_max; }

    friend constexpr auto operator==(DepthLimits, DepthLimits) noexcept -> bool = default;
};

// An algebraic expression in the pair distance R. Nodes are stored in prefix
// order, so every subtree is a contiguous range starting at its root. Trees
// are immutable values; variation operators return new trees.
class ExprTree {
public:
    ExprTree() : nodes_ { Node::variable() } { }

    // Takes prefix-ordered nodes; subtree sizes are recomputed. Throws
    // std::invalid_argument when the sequence is not exactly one tree.
    explicit ExprTree(std::vector<Node> prefix)
        : nodes_(std::move(prefix))
    {
        if (nodes_.empty()) {
            throw std::invalid_argument("expression tree must have at least one node");
        }
        std::size_t pos = 0;
        index_sizes(pos);
        if (pos != nodes_.size()) {
            throw std::invalid_argument("trailing nodes after a complete expression tree");
        }
    }

    static auto variable() -> ExprTree { return ExprTree { std::vector { Node::variable() } }; }
    static auto constant(std::int32_t v) -> ExprTree { return ExprTree { std::vector { Node::constant(v) } }; }

    static auto unary(OpKind op, ExprTree const& child) -> ExprTree
    {
        if (arity(op) != 1) {
            throw std::invalid_argument("operator is not unary");
        }
        std::vector<Node> nodes;
        nodes.reserve(child.size() + 1);
        nodes.push_back(Node::op_node(op));
        nodes.insert(nodes.end(), child.nodes_.begin(), child.nodes_.end());
        return ExprTree { std::move(nodes) };
    }

    static auto binary(OpKind op, ExprTree const& lhs, ExprTree const& rhs) -> ExprTree
    {
        if (arity(op) != 2) {
            throw std::invalid_argument("operator is not binary");
        }
        std::vector<Node> nodes;
        nodes.reserve(lhs.size() + rhs.size() + 1);
        nodes.push_back(Node::op_node(op));
        nodes.insert(nodes.end(), lhs.nodes_.begin(), lhs.nodes_.end());
        nodes.insert(nodes.end(), rhs.nodes_.begin(), rhs.nodes_.end());
        return ExprTree { std::move(nodes) };
    }

    [[nodiscard]] auto nodes() const noexcept -> std::span<Node const> { return nodes_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return nodes_.size(); }
    [[nodiscard]] auto node_count() const noexcept -> std::size_t { return nodes_.size(); }
    [[nodiscard]] auto operator[](std::size_t i) const noexcept -> Node const& { return nodes_[i]; }

    // Index of the k-th child of the operator at i.
    [[nodiscard]] auto child(std::size_t i, int k) const noexcept -> std::size_t
    {
        auto c = i + 1;
        for (int j = 0; j < k; ++j) {
            c += nodes_[c].size;
        }
        return c;
    }

    // Level of every node; the root is level 1.
    [[nodiscard]] auto levels() const -> std::vector<int>
    {
        std::vector<int> level(nodes_.size(), 1);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto const& n = nodes_[i];
            auto c = i + 1;
            for (int k = 0; k < n.arity(); ++k) {
                level[c] = level[i] + 1;
                c += nodes_[c].size;
            }
        }
        return level;
    }

    // Number of node levels; a lone leaf has depth 1.
    [[nodiscard]] auto depth() const -> int
    {
        auto const lv = levels();
        return *std::max_element(lv.begin(), lv.end());
    }

    [[nodiscard]] auto subtree(std::size_t i) const -> ExprTree
    {
        return ExprTree { std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(i),
            nodes_.begin() + static_cast<std::ptrdiff_t>(i + nodes_[i].size)) };
    }

    // Copy of this tree with the subtree rooted at `at` replaced by `donor`.
    [[nodiscard]] auto replace_subtree(std::size_t at, std::span<Node const> donor) const -> ExprTree
    {
        std::vector<Node> out;
        out.reserve(nodes_.size() - nodes_[at].size + donor.size());
        auto const first = nodes_.begin() + static_cast<std::ptrdiff_t>(at);
        out.insert(out.end(), nodes_.begin(), first);
        out.insert(out.end(), donor.begin(), donor.end());
        out.insert(out.end(), first + nodes_[at].size, nodes_.end());
        return ExprTree { std::move(out) };
    }

    friend auto operator==(ExprTree const& a, ExprTree const& b) -> bool
    {
        return std::equal(a.nodes_.begin(), a.nodes_.end(), b.nodes_.begin(), b.nodes_.end());
    }

private:
    auto index_sizes(std::size_t& pos) -> std::uint32_t
    {
        if (pos >= nodes_.size()) {
            throw std::invalid_argument("operator is missing operands");
        }
        auto const self = pos++;
        std::uint32_t size = 1;
        for (int k = 0; k < nodes_[self].arity(); ++k) {
            size += index_sizes(pos);
        }
        nodes_[self].size = size;
        return size;
    }

    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// random generation

namespace detail {
    inline auto random_leaf(int p_max, Rng& rng) -> Node
    {
        // 2P+1 integers plus R, equiprobable
        auto const outcomes = static_cast<std::uint64_t>(2 * p_max + 2);
        auto const draw = static_cast<int>(rng.uniform_index(outcomes));
        if (draw == 2 * p_max + 1) {
            return Node::variable();
        }
        return Node::constant(draw - p_max);
    }

    // Grow: `budget` levels remain below and including this node; `required`
    // is the subtree depth this node must reach (0 when off the spine).
    inline void grow(std::vector<Node>& out, int budget, int required, int p_max, Rng& rng)
    {
        auto const self = out.size();
        bool make_op = false;
        if (budget > 1) {
            make_op = required > 1 || rng.bernoulli(0.5);
        }
        if (!make_op) {
            out.push_back(random_leaf(p_max, rng));
            return;
        }
        auto const op = all_operators[rng.uniform_index(operator_count)];
        out.push_back(Node::op_node(op));
        auto const n = arity(op);
        auto const spine = required > 1 ? static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n))) : -1;
        for (int k = 0; k < n; ++k) {
            grow(out, budget - 1, k == spine ? required - 1 : 0, p_max, rng);
        }
        out[self].size = static_cast<std::uint32_t>(out.size() - self);
    }
} // namespace detail

inline auto random_tree(DepthLimits limits, int p_max, Rng& rng) -> ExprTree
{
    if (!limits.valid() || p_max < 0) {
        throw std::invalid_argument("random_tree: invalid depth limits or constant bound");
    }
    std::vector<Node> nodes;
    detail::grow(nodes, limits.k_max, limits.k_min, p_max, rng);
    return ExprTree { std::move(nodes) };
}

// ---------------------------------------------------------------------------
// variation

inline constexpr int crossover_retries = 16;

// Crossover levels eligible for a first parent of depth `depth`:
// [2, min(depth, k_max) - 1], excluding the root and the deepest level.
// Returns {lo, hi}; empty when hi < lo.
constexpr auto crossover_levels(int depth, DepthLimits limits) noexcept -> std::pair<int, int>
{
    return { 2, std::min(depth, limits.k_max) - 1 };
}

namespace detail {
    inline auto pick_at_level(std::vector<int> const& levels, int level, Rng& rng) -> std::size_t
    {
        auto const count = static_cast<std::uint64_t>(std::count(levels.begin(), levels.end(), level));
        auto k = rng.uniform_index(count);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (levels[i] == level && k-- == 0) {
                return i;
            }
        }
        return 0; // unreachable for count > 0
    }
} // namespace detail

// One child: parent_a with a subtree at the selected level replaced by a
// subtree of parent_b. Falls back to a copy of parent_a when no legal child
// is found within `crossover_retries` attempts.
inline auto crossover(ExprTree const& parent_a, ExprTree const& parent_b, DepthLimits limits, Rng& rng) -> ExprTree
{
    auto const levels_a = parent_a.levels();
    auto const levels_b = parent_b.levels();
    auto const depth_a = *std::max_element(levels_a.begin(), levels_a.end());
    auto const depth_b = *std::max_element(levels_b.begin(), levels_b.end());

    auto const [lo, hi] = crossover_levels(depth_a, limits);
    if (hi < lo || depth_b < 2) {
        return parent_a;
    }
    for (int attempt = 0; attempt < crossover_retries; ++attempt) {
        auto const level = lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
        auto const level_b = std::min(level, depth_b);
        auto const at = detail::pick_at_level(levels_a, level, rng);
        auto const from = detail::pick_at_level(levels_b, level_b, rng);
        auto child = parent_a.replace_subtree(at, parent_b.nodes().subspan(from, parent_b[from].size));
        if (limits.admits(child.depth())) {
            return child;
        }
    }
    return parent_a;
}

// Uniform over all nodes, root and leaves included.
inline auto select_mutation_point(ExprTree const& tree, Rng& rng) -> std::size_t
{
    return static_cast<std::size_t>(rng.uniform_index(tree.size()));
}

// Replace the subtree at `at` by a fresh random subtree sized so the whole
// tree stays within `limits`.
inline auto mutate_at(ExprTree const& tree, std::size_t at, DepthLimits limits, int p_max, Rng& rng) -> ExprTree
{
    auto const levels = tree.levels();
    auto const level = levels[at];
    auto const end = at + tree[at].size;
    int rest_depth = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i < at || i >= end) {
            rest_depth = std::max(rest_depth, levels[i]);
        }
    }
    DepthLimits sub;
    sub.k_max = std::max(1, limits.k_max - level + 1);
    sub.k_min = rest_depth >= limits.k_min ? 1 : std::max(1, limits.k_min - level + 1);
    sub.k_min = std::min(sub.k_min, sub.k_max);
    auto const fresh = random_tree(sub, p_max, rng);
    return tree.replace_subtree(at, fresh.nodes());
}

inline auto mutate(ExprTree const& tree, DepthLimits limits, int p_max, Rng& rng) -> ExprTree
{
    auto const at = select_mutation_point(tree, rng);
    return mutate_at(tree, at, limits, p_max, rng);
}

// ---------------------------------------------------------------------------
// infix text

namespace detail {
    inline void print_infix(ExprTree const& t, std::size_t i, std::string& out);

    inline void print_operand(ExprTree const& t, std::size_t i, std::string& out)
    {
        auto const& n = t[i];
        bool const atomic = n.is_leaf() || n.op == OpKind::Abs;
        if (!atomic) {
            out += '(';
        }
        print_infix(t, i, out);
        if (!atomic) {
            out += ')';
        }
    }

    inline void print_infix(ExprTree const& t, std::size_t i, std::string& out)
    {
        auto const& n = t[i];
        switch (n.type) {
        case NodeType::Variable:
            out += 'R';
            return;
        case NodeType::Constant:
            if (n.value < 0) {
                out += '(';
                out += std::to_string(n.value);
                out += ')';
            } else {
                out += std::to_string(n.value);
            }
            return;
        case NodeType::Operator:
            break;
        }
        if (n.op == OpKind::Abs) {
            out += "abs(";
            print_infix(t, i + 1, out);
            out += ')';
            return;
        }
        print_operand(t, t.child(i, 0), out);
        if (n.op == OpKind::Add || n.op == OpKind::Sub) {
            out += ' ';
            out += symbol(n.op);
            out += ' ';
        } else {
            out += symbol(n.op);
        }
        print_operand(t, t.child(i, 1), out);
    }
} // namespace detail

inline auto to_infix(ExprTree const& tree) -> std::string
{
    std::string out;
    detail::print_infix(tree, 0, out);
    return out;
}

class ParseError : public std::runtime_error {
public:
    ParseError(std::string const& message, std::size_t offset)
        : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message)
        , offset_(offset)
    {
    }

    [[nodiscard]] auto offset() const noexcept -> std::size_t { return offset_; }

private:
    std::size_t offset_;
};

namespace detail {
    // expr   := term (('+' | '-') term)*
    // term   := factor (('*' | '/') factor)*
    // factor := '-' INT ['^' factor] | '-' power | power
    // power  := atom ['^' factor]
    // atom   := 'R' | INT | 'abs' '(' expr ')' | '(' expr ')'
    // A '-' directly followed by digits is a negative literal; any other
    // unary minus becomes (0 - x).
    class InfixParser {
    public:
        explicit InfixParser(std::string_view text) : text_(text) { }

        auto parse() -> ExprTree
        {
            auto tree = expr();
            skip_space();
            if (pos_ != text_.size()) {
                fail("unexpected trailing input");
            }
            return tree;
        }

    private:
        [[noreturn]] void fail(std::string const& message) const { throw ParseError(message, pos_); }

        void skip_space()
        {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
                ++pos_;
            }
        }

        auto peek() -> char
        {
            skip_space();
            return pos_ < text_.size() ? text_[pos_] : '\0';
        }

        auto accept(char c) -> bool
        {
            if (peek() == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        void expect(char c)
        {
            if (!accept(c)) {
                fail(std::string("expected '") + c + "'");
            }
        }

        auto expr() -> ExprTree
        {
            auto lhs = term();
            for (;;) {
                if (accept('+')) {
                    lhs = ExprTree::binary(OpKind::Add, lhs, term());
                } else if (accept('-')) {
                    lhs = ExprTree::binary(OpKind::Sub, lhs, term());
                } else {
                    return lhs;
                }
            }
        }

        auto term() -> ExprTree
        {
            auto lhs = factor();
            for (;;) {
                if (accept('*')) {
                    lhs = ExprTree::binary(OpKind::Mul, lhs, factor());
                } else if (accept('/')) {
                    lhs = ExprTree::binary(OpKind::Div, lhs, factor());
                } else {
                    return lhs;
                }
            }
        }

        auto factor() -> ExprTree
        {
            if (accept('-')) {
                if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
                    auto base = ExprTree::constant(-integer());
                    return power_tail(std::move(base));
                }
                return ExprTree::binary(OpKind::Sub, ExprTree::constant(0), power());
            }
            return power();
        }

        auto power() -> ExprTree { return power_tail(atom()); }

        auto power_tail(ExprTree base) -> ExprTree
        {
            if (accept('^')) {
                return ExprTree::binary(OpKind::Pow, base, factor());
            }
            return base;
        }

        auto integer() -> std::int32_t
        {
            auto const start = pos_;
            std::int64_t v = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
                v = v * 10 + (text_[pos_] - '0');
                if (v > std::numeric_limits<std::int32_t>::max()) {
                    pos_ = start;
                    fail("integer literal out of range");
                }
                ++pos_;
            }
            return static_cast<std::int32_t>(v);
        }

        auto atom() -> ExprTree
        {
            auto const c = peek();
            if (c == '(') {
                ++pos_;
                auto inner = expr();
                expect(')');
                return inner;
            }
            if (c == 'R') {
                ++pos_;
                return ExprTree::variable();
            }
            if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
                return ExprTree::constant(integer());
            }
            if (text_.substr(pos_, 3) == "abs") {
                pos_ += 3;
                expect('(');
                auto inner = expr();
                expect(')');
                return ExprTree::unary(OpKind::Abs, inner);
            }
            if (c == '\0') {
                fail("unexpected end of input");
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        std::string_view text_;
        std::size_t pos_ { 0 };
    };
} // namespace detail

inline auto parse_infix(std::string_view text) -> ExprTree
{
    return detail::InfixParser { text }.parse();
}

// ---------------------------------------------------------------------------
// search-space size

using BigInt = boost::multiprecision::cpp_int;

// Trees that are maximal at depth k over m binary operators, with leaves
// drawn from 2p+2 values: (2p+2)^(2^k) * m^(2^k - 1).
inline auto count_search_space(int m, int k, int p) -> BigInt
{
    if (m < 1 || k < 1 || p < 0) {
        throw std::invalid_argument("count_search_space: need m >= 1, k >= 1, p >= 0");
    }
    if (k > 24) {
        throw std::invalid_argument("count_search_space: depth above 24 is not supported");
    }
    auto const leaves = 1U << static_cast<unsigned>(k);
    BigInt const values = boost::multiprecision::pow(BigInt(2 * p + 2), leaves);
    BigInt const ops = boost::multiprecision::pow(BigInt(m), leaves - 1);
    return values * ops;
}

} // namespace ffgp

#endif
