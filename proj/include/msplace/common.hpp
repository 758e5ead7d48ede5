//
// Copyright 2026 msplace authors.
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
//

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace msplace {

// Floating-point comparison policy used across the library and its tests:
// relative tolerance 1e-9 with an absolute floor of 1e-12.
inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

inline bool nearly_equal(double a, double b, double rel = kRelTol,
                         double abs = kAbsTol) {
  const double diff = std::fabs(a - b);
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return diff <= std::max(abs, rel * scale);
}

// Same-server transfers cost nothing; the bandwidth matrix carries this
// sentinel on its diagonal (serialized as null).
inline constexpr double kIntraBandwidth =
    std::numeric_limits<double>::infinity();

// Reserved node id for the request origin in the dependency graph.
inline constexpr const char* kUserNode = "USER";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A demanded chain crosses a service that has no instance anywhere, so the
// round-robin distribution is undefined.
class UndefinedRoutingError : public Error {
 public:
  explicit UndefinedRoutingError(std::string service)
      : Error("undefined routing: service '" + service +
              "' has no instances"),
        service_id(std::move(service)) {}
  const std::string service_id;
};

// Exact path enumeration or exhaustive search would exceed its state guard.
class EnumerationGuardError : public Error {
 public:
  using Error::Error;
};

// No server can host a required instance.
class InsufficientCapacityError : public Error {
 public:
  explicit InsufficientCapacityError(std::string service)
      : Error("insufficient capacity while deploying service '" + service +
              "'"),
        service_id(std::move(service)) {}
  const std::string service_id;
};

// Smallest instance count whose aggregate capacity covers `demand`.
inline long long min_instances(double demand, double mu) {
  if (demand <= 0.0) return 0;
  return static_cast<long long>(std::ceil(demand / mu));
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

}  // namespace msplace
