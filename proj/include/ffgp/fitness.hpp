// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_FITNESS_HPP
#define FFGP_FITNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "expr.hpp"
#include "parallel.hpp"

namespace ffgp {

inline constexpr double worst_fitness = -std::numeric_limits<double>::infinity();

// Tolerance for treating a pow exponent as an integer when the base is negative.
inline constexpr double integral_exponent_tolerance = 1e-9;

// Total power: x^y for x > 0; 0^y is 0, 1 or +inf by the sign of y; a
// negative base needs an integral exponent, anything else is NaN.
inline auto power(double x, double y) noexcept -> double
{
    if (std::isnan(x) || std::isnan(y)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (x > 0) {
        return std::pow(x, y);
    }
    if (x == 0) {
        if (y > 0) {
            return 0.0;
        }
        if (y == 0) {
            return 1.0;
        }
        return std::numeric_limits<double>::infinity();
    }
    auto const n = std::nearbyint(y);
    if (std::abs(y - n) <= integral_exponent_tolerance) {
        return std::pow(x, n);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline auto apply_binary(OpKind op, double a, double b) noexcept -> double
{
    switch (op) {
    case OpKind::Add: return a + b;
    case OpKind::Sub: return a - b;
    case OpKind::Mul: return a * b;
    case OpKind::Div: return a / b;
    case OpKind::Pow: return power(a, b);
    case OpKind::Abs: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline auto apply_unary(OpKind op, double a) noexcept -> double
{
    return op == OpKind::Abs ? std::abs(a) : std::numeric_limits<double>::quiet_NaN();
}

enum class InstrKind : std::uint8_t { PushConst, PushR, Apply };

struct Instruction {
    InstrKind kind { InstrKind::PushR };
    OpKind op { OpKind::Add };
    double value { 0.0 };

    friend auto operator==(Instruction const&, Instruction const&) -> bool = default;
};

struct CompiledProgram {
    std::vector<Instruction> code;
    std::size_t max_stack { 0 };
};

namespace detail {
    inline void emit_postfix(ExprTree const& t, std::size_t i, std::vector<Instruction>& out)
    {
        auto const& n = t[i];
        switch (n.type) {
        case NodeType::Variable:
            out.push_back({ InstrKind::PushR, OpKind::Add, 0.0 });
            return;
        case NodeType::Constant:
            out.push_back({ InstrKind::PushConst, OpKind::Add, static_cast<double>(n.value) });
            return;
        case NodeType::Operator:
            break;
        }
        auto c = i + 1;
        for (int k = 0; k < n.arity(); ++k) {
            emit_postfix(t, c, out);
            c += t[c].size;
        }
        out.push_back({ InstrKind::Apply, n.op, 0.0 });
    }
} // namespace detail

inline auto compile(ExprTree const& tree) -> CompiledProgram
{
    CompiledProgram prog;
    prog.code.reserve(tree.size());
    detail::emit_postfix(tree, 0, prog.code);
    std::size_t depth = 0;
    for (auto const& ins : prog.code) {
        if (ins.kind == InstrKind::Apply) {
            depth -= static_cast<std::size_t>(arity(ins.op) - 1);
        } else {
            prog.max_stack = std::max(prog.max_stack, ++depth);
        }
    }
    return prog;
}

inline auto eval_program(CompiledProgram const& prog, double r) -> double
{
    std::vector<double> stack;
    stack.reserve(prog.max_stack);
    for (auto const& ins : prog.code) {
        switch (ins.kind) {
        case InstrKind::PushConst:
            stack.push_back(ins.value);
            break;
        case InstrKind::PushR:
            stack.push_back(r);
            break;
        case InstrKind::Apply:
            if (arity(ins.op) == 1) {
                stack.back() = apply_unary(ins.op, stack.back());
            } else {
                auto const b = stack.back();
                stack.pop_back();
                stack.back() = apply_binary(ins.op, stack.back(), b);
            }
            break;
        }
    }
    return stack.back();
}

// Dataset distances laid out contiguously, one segment per box, for
// instruction-major evaluation of a program over every distance at once.
class FitnessEvaluator {
public:
    // Per-thread scratch space.
    class Workspace {
        friend class FitnessEvaluator;
        std::vector<std::vector<double>> columns;
        std::vector<unsigned char> uniform; // column holds one broadcast value
        std::vector<double> scalar;
    };

    explicit FitnessEvaluator(Dataset const& dataset)
    {
        if (dataset.cases.empty()) {
            throw DatasetError("fitness: dataset has no cases");
        }
        offsets_.push_back(0);
        for (auto const& c : dataset.cases) {
            distances_.insert(distances_.end(), c.distances.begin(), c.distances.end());
            offsets_.push_back(distances_.size());
            targets_.push_back(c.target_energy);
        }
    }

    [[nodiscard]] auto box_count() const noexcept -> std::size_t { return targets_.size(); }

    // Predicted energy of every box, summed over its distances in list order.
    void predict(CompiledProgram const& prog, Workspace& ws, std::vector<double>& energies) const
    {
        auto const n = distances_.size();
        if (ws.columns.size() < prog.max_stack) {
            ws.columns.resize(prog.max_stack);
            ws.uniform.resize(prog.max_stack);
            ws.scalar.resize(prog.max_stack);
        }
        std::size_t top = 0;
        for (auto const& ins : prog.code) {
            switch (ins.kind) {
            case InstrKind::PushConst:
                ws.uniform[top] = 1;
                ws.scalar[top] = ins.value;
                ++top;
                break;
            case InstrKind::PushR:
                ws.uniform[top] = 0;
                ws.columns[top].assign(distances_.begin(), distances_.end());
                ++top;
                break;
            case InstrKind::Apply:
                if (arity(ins.op) == 1) {
                    apply_column_unary(ins.op, ws, top - 1, n);
                } else {
                    apply_column_binary(ins.op, ws, top - 2, n);
                    --top;
                }
                break;
            }
        }

        energies.assign(targets_.size(), 0.0);
        for (std::size_t b = 0; b < targets_.size(); ++b) {
            double e = 0.0;
            if (ws.uniform[0] != 0) {
                for (auto k = offsets_[b]; k < offsets_[b + 1]; ++k) {
                    e += ws.scalar[0];
                }
            } else {
                auto const& col = ws.columns[0];
                for (auto k = offsets_[b]; k < offsets_[b + 1]; ++k) {
                    e += col[k];
                }
            }
            energies[b] = e;
        }
    }

    // Negative mean squared box-energy error; -inf if any prediction is not finite.
    [[nodiscard]] auto fitness(CompiledProgram const& prog, Workspace& ws) const -> double
    {
        std::vector<double> energies;
        predict(prog, ws, energies);
        double sum = 0.0;
        for (std::size_t b = 0; b < energies.size(); ++b) {
            if (!std::isfinite(energies[b])) {
                return worst_fitness;
            }
            auto const d = targets_[b] - energies[b];
            sum += d * d;
        }
        auto const f = -sum / static_cast<double>(energies.size());
        return std::isfinite(f) ? f : worst_fitness;
    }

    [[nodiscard]] auto fitness(ExprTree const& tree, Workspace& ws) const -> double
    {
        return fitness(compile(tree), ws);
    }

private:
    static void apply_column_unary(OpKind op, Workspace& ws, std::size_t slot, std::size_t n)
    {
        if (ws.uniform[slot] != 0) {
            ws.scalar[slot] = apply_unary(op, ws.scalar[slot]);
            return;
        }
        auto& col = ws.columns[slot];
        for (std::size_t k = 0; k < n; ++k) {
            col[k] = apply_unary(op, col[k]);
        }
    }

    static void apply_column_binary(OpKind op, Workspace& ws, std::size_t slot, std::size_t n)
    {
        auto const lhs_uniform = ws.uniform[slot] != 0;
        auto const rhs_uniform = ws.uniform[slot + 1] != 0;
        if (lhs_uniform && rhs_uniform) {
            ws.scalar[slot] = apply_binary(op, ws.scalar[slot], ws.scalar[slot + 1]);
            return;
        }
        auto& out = ws.columns[slot];
        if (lhs_uniform) {
            auto const a = ws.scalar[slot];
            auto const& rhs = ws.columns[slot + 1];
            out.resize(n);
            switch (op) {
            case OpKind::Add: for (std::size_t k = 0; k < n; ++k) out[k] = a + rhs[k]; break;
            case OpKind::Sub: for (std::size_t k = 0; k < n; ++k) out[k] = a - rhs[k]; break;
            case OpKind::Mul: for (std::size_t k = 0; k < n; ++k) out[k] = a * rhs[k]; break;
            case OpKind::Div: for (std::size_t k = 0; k < n; ++k) out[k] = a / rhs[k]; break;
            default: for (std::size_t k = 0; k < n; ++k) out[k] = apply_binary(op, a, rhs[k]); break;
            }
            ws.uniform[slot] = 0;
        } else if (rhs_uniform) {
            auto const b = ws.scalar[slot + 1];
            switch (op) {
            case OpKind::Add: for (std::size_t k = 0; k < n; ++k) out[k] += b; break;
            case OpKind::Sub: for (std::size_t k = 0; k < n; ++k) out[k] -= b; break;
            case OpKind::Mul: for (std::size_t k = 0; k < n; ++k) out[k] *= b; break;
            case OpKind::Div: for (std::size_t k = 0; k < n; ++k) out[k] /= b; break;
            default: for (std::size_t k = 0; k < n; ++k) out[k] = apply_binary(op, out[k], b); break;
            }
        } else {
            auto const& rhs = ws.columns[slot + 1];
            switch (op) {
            case OpKind::Add: for (std::size_t k = 0; k < n; ++k) out[k] += rhs[k]; break;
            case OpKind::Sub: for (std::size_t k = 0; k < n; ++k) out[k] -= rhs[k]; break;
            case OpKind::Mul: for (std::size_t k = 0; k < n; ++k) out[k] *= rhs[k]; break;
            case OpKind::Div: for (std::size_t k = 0; k < n; ++k) out[k] /= rhs[k]; break;
            default: for (std::size_t k = 0; k < n; ++k) out[k] = apply_binary(op, out[k], rhs[k]); break;
            }
        }
    }

    std::vector<double> distances_;
    std::vector<std::size_t> offsets_;
    std::vector<double> targets_;
};

inline auto tree_fitness(ExprTree const& tree, Dataset const& dataset) -> double
{
    FitnessEvaluator const evaluator(dataset);
    FitnessEvaluator::Workspace ws;
    return evaluator.fitness(tree, ws);
}

// Elementwise tree_fitness; the result does not depend on the worker count.
inline auto population_fitness(std::span<ExprTree const> trees, Dataset const& dataset, Executor const& executor = Executor {})
    -> std::vector<double>
{
    std::vector<double> out(trees.size(), worst_fitness);
    if (trees.empty()) {
        return out;
    }
    FitnessEvaluator const evaluator(dataset);
    std::vector<FitnessEvaluator::Workspace> ws(executor.workers());
    executor.parallel_for(trees.size(), [&](std::size_t i, std::size_t w) { out[i] = evaluator.fitness(trees[i], ws[w]); });
    return out;
}

} // namespace ffgp

#endif
