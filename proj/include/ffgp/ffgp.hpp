// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_FFGP_HPP
#define FFGP_FFGP_HPP

#include "config.hpp"
#include "dataset.hpp"
#include "engine.hpp"
#include "expr.hpp"
#include "fitness.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "report.hpp"
#include "tempering.hpp"

#endif
