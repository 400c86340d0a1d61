// Copyright 2026 The layersplit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include "layersplit/brute_force.hpp"
#include "layersplit/common.hpp"
#include "layersplit/cost_model.hpp"
#include "layersplit/document.hpp"
#include "layersplit/evaluate.hpp"
#include "layersplit/graph.hpp"
#include "layersplit/ilp.hpp"
#include "layersplit/instance.hpp"
#include "layersplit/problem_costs.hpp"
#include "layersplit/scenario_spec.hpp"
#include "layersplit/scenarios.hpp"
#include "layersplit/schedule.hpp"
#include "layersplit/solver.hpp"
#include "layersplit/synth.hpp"
