/*
 * Copyright 2026 The FedSGT Simulator Authors.
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

#include "fedsgt/core_types.hpp"

namespace fedsgt {

const char* to_string(ServiceTag tag) {
  return tag == ServiceTag::Available ? "Available" : "Failed";
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::AllSeq: return "AllSeq";
    case Strategy::MinSeq: return "MinSeq";
    case Strategy::LongSeq: return "LongSeq";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "AllSeq") return Strategy::AllSeq;
  if (name == "MinSeq") return Strategy::MinSeq;
  if (name == "LongSeq") return Strategy::LongSeq;
  throw config_error("unknown strategy '" + name + "' (expected AllSeq, MinSeq or LongSeq)");
}

}  // namespace fedsgt
