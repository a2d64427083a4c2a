// Copyright 2026 The edgewatch Authors
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

// Umbrella header. edgewatch/config.hpp is separate since it needs yaml-cpp.

#pragma once

#include "edgewatch/constellation.hpp"
#include "edgewatch/dbscan.hpp"
#include "edgewatch/evaluation.hpp"
#include "edgewatch/features.hpp"
#include "edgewatch/flow.hpp"
#include "edgewatch/pipeline.hpp"
#include "edgewatch/synth.hpp"
