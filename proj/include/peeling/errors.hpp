// Copyright 2026 The Peeling Authors
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

#ifndef PEELING_ERRORS_HPP_
#define PEELING_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace peeling {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PEELING_DEFINE_ERROR(Name)     \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// Input validation.
PEELING_DEFINE_ERROR(InvalidExpression);
PEELING_DEFINE_ERROR(ConfigError);

// Prompt templates.
PEELING_DEFINE_ERROR(MissingPlaceholder);
PEELING_DEFINE_ERROR(EmptyIcl);
PEELING_DEFINE_ERROR(EmptyCorpus);

// Extraction.
PEELING_DEFINE_ERROR(ParseError);
PEELING_DEFINE_ERROR(SpanNotFound);

// Lexicons and data files.
PEELING_DEFINE_ERROR(LexiconLoadError);

// Metrics.
PEELING_DEFINE_ERROR(ZeroOriginalAccuracy);
PEELING_DEFINE_ERROR(EmptySample);

// Simulator.
PEELING_DEFINE_ERROR(UnparseableSemantics);
PEELING_DEFINE_ERROR(GenerationExhausted);
PEELING_DEFINE_ERROR(UnknownScene);
PEELING_DEFINE_ERROR(InvalidScene);

// Corpus I/O.
PEELING_DEFINE_ERROR(IoError);
PEELING_DEFINE_ERROR(NoValidLines);
PEELING_DEFINE_ERROR(SampleTooLarge);

#undef PEELING_DEFINE_ERROR

// Raised by every backend, in-process or remote.
class BackendError : public Error {
 public:
  enum class Kind { kTransport, kTimeout, kAuthMissing, kHttpStatus,
                    kMalformedResponse };

  BackendError(Kind kind, const std::string& what, int status = 0)
      : Error(what), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  int status() const { return status_; }

 private:
  Kind kind_;
  int status_;
};

}  // namespace peeling

#endif  // PEELING_ERRORS_HPP_
