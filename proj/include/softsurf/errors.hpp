// Copyright 2026 The softsurf Authors
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

#ifndef SOFTSURF_ERRORS_HPP_
#define SOFTSURF_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace softsurf {

class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite state is an error, never silently clamped: an unstable config
// must not corrupt downstream statistics.
class DivergenceError : public SimError {
 public:
  explicit DivergenceError(const std::string& what) : SimError(what) {}
};

}  // namespace softsurf

#endif  // SOFTSURF_ERRORS_HPP_
