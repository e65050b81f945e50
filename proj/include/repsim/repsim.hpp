// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "repsim/analysis.hpp"
#include "repsim/clustering.hpp"
#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"
#include "repsim/fusion.hpp"
#include "repsim/metrics.hpp"
#include "repsim/separability.hpp"
#include "repsim/serialize.hpp"
#include "repsim/transport.hpp"
