// stylerank/stylerank.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef STYLERANK_STYLERANK_HPP_
#define STYLERANK_STYLERANK_HPP_

#include "stylerank/error.hpp"
#include "stylerank/rng.hpp"
#include "stylerank/lineformat.hpp"
#include "stylerank/corpus.hpp"
#include "stylerank/embedding.hpp"
#include "stylerank/sampling.hpp"
#include "stylerank/pairing.hpp"
#include "stylerank/wav.hpp"
#include "stylerank/dsp.hpp"
#include "stylerank/acoustics.hpp"
#include "stylerank/metrics.hpp"
#include "stylerank/judgment.hpp"
#include "stylerank/analysis.hpp"
#include "stylerank/ranker.hpp"
#include "stylerank/collect.hpp"
#include "stylerank/collect_http.hpp"
#include "stylerank/simulate.hpp"

#endif  // STYLERANK_STYLERANK_HPP_
