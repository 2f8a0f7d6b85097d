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

// HTTP backends. Wire formats (JSON over POST):
//   chat:      {model, messages: [{role, content}]} -> reply at reply_pointer
//   vqa:       {image, question}                  -> {answer}
//   vg:        {image, expression}                -> {box: [x, y, w, h]}
//   translate: {text, source_lang, target_lang}   -> {text}
// A bearer token is read from the environment when a variable is named.

#ifndef PEELING_CLIENTS_HPP_
#define PEELING_CLIENTS_HPP_

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peeling/backends.hpp"

namespace peeling {

inline constexpr std::string_view kLlmTokenEnv = "PEELING_LLM_TOKEN";
inline constexpr std::string_view kVqaTokenEnv = "PEELING_VQA_TOKEN";
inline constexpr std::string_view kVgTokenEnv = "PEELING_VG_TOKEN";
inline constexpr std::string_view kMtTokenEnv = "PEELING_MT_TOKEN";

enum class ImageTransport { kBase64, kUrl, kPath };
std::string_view to_string(ImageTransport transport);
std::optional<ImageTransport> parse_image_transport(std::string_view name);

// Append-only, thread-safe request log. Authorization values never reach it.
class RequestLog {
 public:
  RequestLog() = default;
  // Also appends every line to the file at path.
  explicit RequestLog(std::string path) : path_(std::move(path)) {}

  void append(std::string line);
  std::vector<std::string> lines() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
  std::string path_;
};

struct HttpConfig {
  std::string url;  // http[s]://host[:port]/path
  // Environment variable with the bearer token. Unset means the client's
  // default variable, used only if present; empty disables auth.
  std::optional<std::string> auth_env;
  double timeout_s = 30;
  int max_retries = 2;
  int backoff_base_ms = 500;
  double backoff_factor = 2;
  std::size_t max_in_flight = 8;
  // chat only
  std::string model;
  std::string reply_pointer = "/choices/0/message/content";
  // vqa and vg only
  ImageTransport image_transport = ImageTransport::kBase64;
  std::shared_ptr<RequestLog> log;
};

// Each throws ConfigError for a malformed URL and BackendError(kAuthMissing)
// when a named token variable is unset.
std::unique_ptr<ChatBackend> http_chat(const HttpConfig& config);
std::unique_ptr<VqaBackend> http_vqa(const HttpConfig& config);
std::unique_ptr<VgBackend> http_vg(const HttpConfig& config);
std::unique_ptr<TranslationBackend> http_translate(const HttpConfig& config);

// Payload for the "image" field under the given transport. Throws IoError
// when a base64 file cannot be read.
std::string encode_image(const ImageRef& image, ImageTransport transport);

std::string base64_encode(std::string_view bytes);

}  // namespace peeling

#endif  // PEELING_CLIENTS_HPP_
