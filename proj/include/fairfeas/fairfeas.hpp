// Copyright 2026 The fairfeas Authors.
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

#include "fairfeas/csv.hpp"
#include "fairfeas/dataset.hpp"
#include "fairfeas/error.hpp"
#include "fairfeas/impossibility.hpp"
#include "fairfeas/io.hpp"
#include "fairfeas/json_io.hpp"
#include "fairfeas/metrics.hpp"
#include "fairfeas/parallel.hpp"
#include "fairfeas/planimeter.hpp"
#include "fairfeas/prefix_sum3d.hpp"
#include "fairfeas/region.hpp"
#include "fairfeas/selection.hpp"
