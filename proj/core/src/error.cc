// Copyright 2026 The AHSC Authors
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

#include "ahsc/error.h"

namespace ahsc {

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape:
      return "shape";
    case ErrorKind::kLabel:
      return "label";
    case ErrorKind::kNumeric:
      return "numeric";
    case ErrorKind::kData:
      return "data";
    case ErrorKind::kSize:
      return "size";
    case ErrorKind::kArchitecture:
      return "architecture";
    case ErrorKind::kDegenerate:
      return "degenerate";
    case ErrorKind::kAllDiscarded:
      return "all-discarded";
    case ErrorKind::kNotStronglyConvex:
      return "not-strongly-convex";
  }
  return "unknown";
}

}  // namespace ahsc
