// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#include <bit>
#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include <ffgp/fitness.hpp>
#include <ffgp/tempering.hpp>

#include "oracles.hpp"

using namespace ffgp;

namespace {

auto same_bits(double a, double b) -> bool
{
    // all NaNs compare equal; everything else must match bit for bit
    if (std::isnan(a) || std::isnan(b)) {
        return std::isnan(a) && std::isnan(b);
    }
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

} // namespace

TEST(Power, TotalSemantics)
{
    EXPECT_EQ(power(2.0, 3.0), 8.0);
    EXPECT_EQ(power(0.0, 2.0), 0.0);
    EXPECT_EQ(power(0.0, 0.0), 1.0);
    EXPECT_TRUE(std::isinf(power(0.0, -1.0)));
    EXPECT_EQ(power(-2.0, 3.0), -8.0);
    EXPECT_EQ(power(-2.0, 2.0 + 1e-12), 4.0);
    EXPECT_TRUE(std::isnan(power(-2.0, 0.5)));
    EXPECT_TRUE(std::isnan(power(std::nan(""), 1.0)));
}

TEST(Compile, PostfixOrder)
{
    auto const leaf = compile(ExprTree::variable());
    ASSERT_EQ(leaf.code.size(), 1U);
    EXPECT_EQ(leaf.code[0].kind, InstrKind::PushR);

    auto const add = compile(parse_infix("R + 4"));
    ASSERT_EQ(add.code.size(), 3U);
    EXPECT_EQ(add.code[0].kind, InstrKind::PushR);
    EXPECT_EQ(add.code[1].kind, InstrKind::PushConst);
    EXPECT_EQ(add.code[1].value, 4.0);
    EXPECT_EQ(add.code[2].kind, InstrKind::Apply);
    EXPECT_EQ(add.code[2].op, OpKind::Add);
    EXPECT_EQ(add.max_stack, 2U);
}

TEST(EvalProgram, Examples)
{
    EXPECT_EQ(eval_program(compile(parse_infix("R")), 1.5), 1.5);
    EXPECT_EQ(eval_program(compile(parse_infix("abs((-4)/(R^12)) - abs((-4)/(R^6))")), 1.0), 0.0);
    EXPECT_FALSE(std::isfinite(eval_program(compile(parse_infix("1/(R-R)")), 1.3)));
}

TEST(EvalProgram, InstructionCountMatchesNodeCount)
{
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        auto const t = random_tree({ 1, 6 }, 20, rng);
        EXPECT_EQ(compile(t).code.size(), t.node_count());
    }
}

TEST(EvalProgram, CompiledMatchesRecursiveBitForBit)
{
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        auto const t = random_tree({ 3, 4 }, 20, rng);
        auto const prog = compile(t);
        for (int k = 0; k < 100; ++k) {
            auto const r = 0.5 + 2.0 * rng.uniform01();
            ASSERT_TRUE(same_bits(eval_program(prog, r), oracle::eval_recursive(t, r))) << to_infix(t) << " at " << r;
        }
    }
}

// The batch evaluator must give the same box energies as summing the
// recursive oracle over each distance list.
TEST(FitnessEvaluator, BatchMatchesScalarSums)
{
    auto const data = build_dataset(BoxSpec {}, 10, 3);
    FitnessEvaluator const eval(data);
    FitnessEvaluator::Workspace ws;
    Rng rng(3);
    std::vector<double> energies;
    for (int i = 0; i < 2000; ++i) {
        auto const t = random_tree({ 1, 5 }, 20, rng);
        eval.predict(compile(t), ws, energies);
        for (std::size_t b = 0; b < data.cases.size(); ++b) {
            double e = 0;
            for (auto r : data.cases[b].distances) {
                e += oracle::eval_recursive(t, r);
            }
            ASSERT_TRUE(same_bits(energies[b], e)) << to_infix(t);
        }
    }
}

TEST(TreeFitness, ExactFormIsAtRoundOff)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto const data = build_dataset(BoxSpec {}, 10, seed);
        EXPECT_GE(tree_fitness(parse_infix("4*(1/R^12) - 4*(1/R^6)"), data), -1e-18);
        EXPECT_GE(tree_fitness(exact_lj_tree(), data), -1e-18);
    }
}

TEST(TreeFitness, ZeroTreeOnEmptyBox)
{
    Dataset d;
    d.cases.push_back({ {}, 0.0 });
    d.boxes.push_back({});
    EXPECT_EQ(tree_fitness(ExprTree::constant(0), d), 0.0);
}

TEST(TreeFitness, NonFiniteIsWorst)
{
    auto const data = build_dataset(BoxSpec {}, 3, 1);
    EXPECT_EQ(tree_fitness(parse_infix("1/(R-R)"), data), worst_fitness);
    EXPECT_EQ(tree_fitness(parse_infix("R^(10^10)"), data), worst_fitness);
}

TEST(TreeFitness, NonPositiveAndZeroOnlyWhenExact)
{
    auto const data = build_dataset(BoxSpec {}, 10, 4);
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        auto const f = tree_fitness(random_tree({ 3, 4 }, 20, rng), data);
        ASSERT_FALSE(std::isnan(f));
        ASSERT_LE(f, 0.0);
    }
}

// Adding c to every pair energy shifts box b by c * n_b.
TEST(TreeFitness, ConstantShiftScalesWithDistanceCount)
{
    auto const data = build_dataset(BoxSpec {}, 10, 6);
    FitnessEvaluator const eval(data);
    FitnessEvaluator::Workspace ws;
    Rng rng(7);
    std::vector<double> base;
    std::vector<double> shifted;
    for (int i = 0; i < 200; ++i) {
        auto const t = random_tree({ 3, 4 }, 20, rng);
        auto const c = static_cast<int>(rng.uniform_index(11)) - 5;
        eval.predict(compile(t), ws, base);
        eval.predict(compile(ExprTree::binary(OpKind::Add, t, ExprTree::constant(c))), ws, shifted);
        for (std::size_t b = 0; b < base.size(); ++b) {
            if (!std::isfinite(base[b])) {
                continue;
            }
            auto const expected = base[b] + c * static_cast<double>(data.cases[b].distances.size());
            ASSERT_NEAR(shifted[b], expected, 1e-9 * std::max(1.0, std::abs(base[b])));
        }
    }
}

TEST(PopulationFitness, EmptyAndSingle)
{
    auto const data = build_dataset(BoxSpec {}, 10, 8);
    EXPECT_TRUE(population_fitness({}, data).empty());
    std::vector const one { exact_lj_tree() };
    auto const f = population_fitness(one, data);
    ASSERT_EQ(f.size(), 1U);
    EXPECT_EQ(f[0], tree_fitness(one[0], data));
}

TEST(PopulationFitness, IndependentOfWorkerCount)
{
    auto const data = build_dataset(BoxSpec {}, 10, 9);
    Rng rng(10);
    std::vector<ExprTree> trees;
    for (int i = 0; i < 1000; ++i) {
        trees.push_back(random_tree({ 3, 4 }, 20, rng));
    }
    auto const serial = population_fitness(trees, data, Executor { 1 });
    auto const parallel = population_fitness(trees, data, Executor { 4 });
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        ASSERT_TRUE(same_bits(serial[i], parallel[i]));
        ASSERT_TRUE(same_bits(serial[i], tree_fitness(trees[i], data)));
    }
}
