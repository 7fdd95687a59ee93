// Copyright 2026 The xms Authors.
//
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

#pragma once

#include "xms/bench.hpp"
#include "xms/dataset_io.hpp"
#include "xms/error.hpp"
#include "xms/methods.hpp"
#include "xms/model.hpp"
#include "xms/model_io.hpp"
#include "xms/numerics.hpp"
#include "xms/preprocess.hpp"
#include "xms/retrieval_eval.hpp"
#include "xms/stats.hpp"
#include "xms/synthetic.hpp"
