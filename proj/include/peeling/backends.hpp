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

// Pluggable model backends. HTTP clients live in clients.hpp, in-process
// simulator backends in scenesim.hpp. All implementations must be safe to
// call from several threads at once and report faults as BackendError.

#ifndef PEELING_BACKENDS_HPP_
#define PEELING_BACKENDS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "peeling/core.hpp"

namespace peeling {

struct ChatMessage {
  std::string role;
  std::string content;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the assistant's reply text.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

class VqaBackend {
 public:
  virtual ~VqaBackend() = default;
  virtual std::string answer(const ImageRef& image,
                             std::string_view question) = 0;
};

class VgBackend {
 public:
  virtual ~VgBackend() = default;
  virtual BoundingBox locate(const ImageRef& image,
                             std::string_view expression) = 0;
};

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual std::string translate(std::string_view text,
                                std::string_view source_lang,
                                std::string_view target_lang) = 0;
};

}  // namespace peeling

#endif  // PEELING_BACKENDS_HPP_
