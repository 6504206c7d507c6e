//
// Copyright 2026 The dpht Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include "dpht/core.hpp"
#include "dpht/filter.hpp"
#include "dpht/gaussian.hpp"
#include "dpht/harness.hpp"
#include "dpht/lipschitz.hpp"
#include "dpht/mechanisms.hpp"
#include "dpht/reductions.hpp"
#include "dpht/rng.hpp"
#include "dpht/statistic.hpp"
#include "dpht/types.hpp"
