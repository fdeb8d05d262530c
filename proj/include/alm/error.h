// Copyright 2026 The Automaton-LM Authors.
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

#ifndef ALM_ERROR_H_
#define ALM_ERROR_H_

#include <stdexcept>
#include <string>

namespace alm {

// Usage errors are caller mistakes (bad arguments, invalid config); data
// errors come from corpora and artifacts. The CLI maps them to exit codes 1
// and 2 respectively.
enum class ErrorKind { kUsage, kData };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowUsage(const std::string& what) {
  throw Error(ErrorKind::kUsage, what);
}

[[noreturn]] inline void ThrowData(const std::string& what) {
  throw Error(ErrorKind::kData, what);
}

}  // namespace alm

#endif  // ALM_ERROR_H_
