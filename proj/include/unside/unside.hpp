// Copyright 2026 The unside authors
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

/// Umbrella include for the unside library.

#pragma once

#include <unside/checkpoint.hpp>
#include <unside/dense_denoiser.hpp>
#include <unside/errors.hpp>
#include <unside/graph.hpp>
#include <unside/guidance.hpp>
#include <unside/io.hpp>
#include <unside/mmd.hpp>
#include <unside/mpnn.hpp>
#include <unside/params.hpp>
#include <unside/posterior.hpp>
#include <unside/property_model.hpp>
#include <unside/rng.hpp>
#include <unside/sampler.hpp>
#include <unside/schedule.hpp>
#include <unside/simplex.hpp>
#include <unside/special.hpp>
#include <unside/training.hpp>
#include <unside/voronoi.hpp>
