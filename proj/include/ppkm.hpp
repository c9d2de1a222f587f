/*
 * Copyright 2026 The ppkmeans Authors.
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

#include "ppkm/baseline.hpp"
#include "ppkm/dealer.hpp"
#include "ppkm/demo.hpp"
#include "ppkm/io.hpp"
#include "ppkm/kmeans.hpp"
#include "ppkm/params.hpp"
#include "ppkm/primitives.hpp"
#include "ppkm/random.hpp"
#include "ppkm/ring.hpp"
#include "ppkm/session.hpp"
#include "ppkm/sharing.hpp"
#include "ppkm/simnet.hpp"
#include "ppkm/tensor.hpp"
