// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: hybrid coherent/non-coherent cell-free massive MIMO downlink toolkit
// Copyright (C) 2026 The cfmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "cfmimo/core/config.hpp"
#include "cfmimo/core/csv.hpp"
#include "cfmimo/core/errors.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/netgen/covariance.hpp"
#include "cfmimo/netgen/pilots.hpp"
#include "cfmimo/netgen/scenario.hpp"
#include "cfmimo/netgen/topology.hpp"
#include "cfmimo/chanstat/estimation.hpp"
#include "cfmimo/chanstat/statistics.hpp"
#include "cfmimo/rates/rates.hpp"
#include "cfmimo/sca/ipm.hpp"
#include "cfmimo/sca/program.hpp"
#include "cfmimo/sca/sca.hpp"
#include "cfmimo/sca/subproblem.hpp"
#include "cfmimo/sca/surrogate.hpp"
#include "cfmimo/runner/cli.hpp"
#include "cfmimo/runner/modes.hpp"
#include "cfmimo/runner/pipeline.hpp"
#include "cfmimo/runner/sweep.hpp"
