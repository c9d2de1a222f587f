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

#include <memory>
#include <stdexcept>
#include <string>

#include "ppkm/ring.hpp"

namespace ppkm {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Round cost of each secure primitive.
//
// Only drelu_rounds is a free parameter of the reference comparison backend;
// the others follow from protocol structure and are checked by validate():
// a Beaver product is one dealer round plus one opening round, an ArgMin
// step is one comparison plus one opening (its triple rides in the
// comparison's first round), and secure division runs division_rounds /
// (drelu_rounds + matmul_rounds) comparison-plus-product iterations.
struct CostModel {
  int drelu_rounds = 8;
  int matmul_rounds = 2;
  int division_rounds = 130;
  int argmin_rounds_per_step = 9;

  int division_iterations() const {
    return division_rounds / (drelu_rounds + matmul_rounds);
  }

  void validate() const {
    if (drelu_rounds < 2) {
      throw ConfigError("cost model: drelu_rounds must be >= 2 (masked opening "
                        "plus response), got " + std::to_string(drelu_rounds));
    }
    if (matmul_rounds != 2) {
      throw ConfigError("cost model: matmul_rounds is fixed at 2 by the Beaver "
                        "protocol, got " + std::to_string(matmul_rounds));
    }
    if (argmin_rounds_per_step != drelu_rounds + 1) {
      throw ConfigError("cost model: argmin_rounds_per_step must equal "
                        "drelu_rounds + 1 = " + std::to_string(drelu_rounds + 1));
    }
    const int per_iter = drelu_rounds + matmul_rounds;
    if (division_rounds <= 0 || division_rounds % per_iter != 0 ||
        division_iterations() < 2) {
      throw ConfigError("cost model: division_rounds must be a multiple (>= 2x) "
                        "of drelu_rounds + matmul_rounds = " +
                        std::to_string(per_iter));
    }
  }

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

class CompareBackend;

// Public protocol parameters shared by every party of a session.
struct ProtocolParams {
  FixedCodec codec{};
  CostModel cost{};
  // Quotient width (bits, including the sign offset) of secure division.
  int division_quotient_bits = 36;
  // Multiplicative mask width of the reference comparison backend.
  int compare_mask_bits = 9;
  // Null selects the reference masked-comparison backend.
  std::shared_ptr<const CompareBackend> compare;

  int division_digit_bits() const {
    const int digits = cost.division_iterations() - 1;
    return (division_quotient_bits + digits - 1) / digits;
  }

  void validate() const {
    cost.validate();
    if (division_quotient_bits < 8 || division_quotient_bits > 48) {
      throw ConfigError("division_quotient_bits must be in [8, 48]");
    }
    if (division_digit_bits() > 6) {
      throw ConfigError("division needs " + std::to_string(division_digit_bits()) +
                        "-bit digits; raise division_rounds");
    }
    if (compare_mask_bits < 2 || compare_mask_bits > 30) {
      throw ConfigError("compare_mask_bits must be in [2, 30]");
    }
  }
};

}  // namespace ppkm
