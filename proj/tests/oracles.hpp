// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

// Independent reference implementations used only by the tests.

#ifndef FFGP_TESTS_ORACLES_HPP
#define FFGP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include <ffgp/dataset.hpp>
#include <ffgp/expr.hpp>

namespace oracle {

// Tree-walking interpreter with its own copy of the operator semantics.
inline auto eval_recursive(ffgp::ExprTree const& t, std::size_t i, double r) -> double
{
    using ffgp::NodeType;
    using ffgp::OpKind;
    auto const& n = t[i];
    if (n.type == NodeType::Variable) {
        return r;
    }
    if (n.type == NodeType::Constant) {
        return n.value;
    }
    auto const a = eval_recursive(t, i + 1, r);
    if (n.op == OpKind::Abs) {
        return std::fabs(a);
    }
    auto const b = eval_recursive(t, i + 1 + t[i + 1].size, r);
    switch (n.op) {
    case OpKind::Add: return a + b;
    case OpKind::Sub: return a - b;
    case OpKind::Mul: return a * b;
    case OpKind::Div: return a / b;
    case OpKind::Pow: {
        auto const nan = std::numeric_limits<double>::quiet_NaN();
        if (std::isnan(a) || std::isnan(b)) {
            return nan;
        }
        if (a > 0) {
            return std::pow(a, b);
        }
        if (a == 0) {
            return b > 0 ? 0.0 : (b == 0 ? 1.0 : std::numeric_limits<double>::infinity());
        }
        auto const k = std::nearbyint(b);
        return std::fabs(b - k) <= 1e-9 ? std::pow(a, k) : nan;
    }
    default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline auto eval_recursive(ffgp::ExprTree const& t, double r) -> double { return eval_recursive(t, 0, r); }

// Pair distances over a (2s+1)^3 image shell, i < j.
inline auto pair_distances_shell(ffgp::AtomBox const& box, ffgp::BoxSpec const& spec, int shell) -> std::vector<double>
{
    std::vector<double> out;
    auto const& x = box.coordinates;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            for (int a = -shell; a <= shell; ++a) {
                for (int b = -shell; b <= shell; ++b) {
                    for (int c = -shell; c <= shell; ++c) {
                        double d2 = 0;
                        int const n[3] = { a, b, c };
                        for (int k = 0; k < 3; ++k) {
                            auto const d = x[j][k] - x[i][k] + n[k] * spec.box_length;
                            d2 += d * d;
                        }
                        auto const r = std::sqrt(d2);
                        if (r > spec.r_lo && r < spec.r_hi) {
                            out.push_back(r);
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Upper critical value of the chi-square statistic at significance alpha.
inline auto chi_square_critical(std::size_t bins, double alpha = 1e-3) -> double
{
    boost::math::chi_squared dist(static_cast<double>(bins - 1));
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

inline auto chi_square_uniform(std::span<std::uint64_t const> counts) -> double
{
    double total = 0;
    for (auto c : counts) {
        total += static_cast<double>(c);
    }
    auto const expected = total / static_cast<double>(counts.size());
    double chi2 = 0;
    for (auto c : counts) {
        auto const d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

// |hits - n p| <= 3 sqrt(n p (1 - p))
inline auto within_3_sigma(std::uint64_t hits, std::uint64_t trials, double p) -> bool
{
    auto const n = static_cast<double>(trials);
    auto const sigma = std::sqrt(n * p * (1 - p));
    return std::fabs(static_cast<double>(hits) - n * p) <= 3 * sigma;
}

} // namespace oracle

#endif
