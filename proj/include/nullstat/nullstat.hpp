/*
 * Copyright 2026 The nullstat Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "nullstat/aggregation.hpp"
#include "nullstat/artifact.hpp"
#include "nullstat/cliques.hpp"
#include "nullstat/ecdf.hpp"
#include "nullstat/error.hpp"
#include "nullstat/evaluation.hpp"
#include "nullstat/independence.hpp"
#include "nullstat/ks.hpp"
#include "nullstat/normal.hpp"
#include "nullstat/pipeline.hpp"
#include "nullstat/selection.hpp"
#include "nullstat/stat_matrix.hpp"
#include "nullstat/synthetic.hpp"
#include "nullstat/version.hpp"
