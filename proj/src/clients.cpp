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

#include "peeling/clients.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "peeling/errors.hpp"
#include "peeling/lexicon.hpp"

namespace peeling {

namespace {

using Json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/\s?#]+)(/[^\s#]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw ConfigError("malformed backend URL '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

// Bearer token, or empty when auth is off.
std::string resolve_token(const HttpConfig& config,
                          std::string_view default_env,
                          std::string& env_name) {
  if (config.auth_env && config.auth_env->empty()) return {};
  env_name = config.auth_env ? *config.auth_env : std::string(default_env);
  const char* value = std::getenv(env_name.c_str());
  if (value != nullptr && *value != '\0') return value;
  if (config.auth_env) {
    throw BackendError(BackendError::Kind::kAuthMissing,
                       "auth token missing: set " + env_name);
  }
  return {};
}

class HttpJsonClient {
 public:
  HttpJsonClient(const HttpConfig& config, std::string_view default_env)
      : config_(config),
        endpoint_(parse_url(config.url)),
        gate_(static_cast<std::ptrdiff_t>(
            std::max<std::size_t>(1, std::min<std::size_t>(
                                         config.max_in_flight, 1024)))) {
    token_ = resolve_token(config, default_env, env_name_);
    if (env_name_.empty()) env_name_ = std::string(default_env);
  }

  Json post(const Json& body) {
    gate_.acquire();
    struct Release {
      std::counting_semaphore<1024>& gate;
      ~Release() { gate.release(); }
    } release{gate_};

    const auto payload = body.dump();
    httplib::Headers headers;
    if (!token_.empty()) {
      headers.emplace("Authorization", "Bearer " + token_);
    }
    const int attempts = std::max(0, config_.max_retries) + 1;
    for (int attempt = 1;; ++attempt) {
      httplib::Client client(endpoint_.origin);
      const auto seconds = static_cast<time_t>(config_.timeout_s);
      const auto usec = static_cast<time_t>(
          (config_.timeout_s - static_cast<double>(seconds)) * 1e6);
      client.set_connection_timeout(seconds, usec);
      client.set_read_timeout(seconds, usec);
      client.set_write_timeout(seconds, usec);

      auto result = client.Post(endpoint_.path, headers, payload,
                                "application/json");
      std::string line = "POST " + config_.url + " attempt=" +
                         std::to_string(attempt) + " auth=" +
                         (token_.empty() ? "none" : "Bearer [redacted]");
      bool retryable = false;
      std::optional<BackendError> failure;
      if (!result) {
        const auto err = result.error();
        const bool timeout = err == httplib::Error::Read ||
                             err == httplib::Error::ConnectionTimeout;
        line += " error=" + httplib::to_string(err);
        failure.emplace(
            timeout ? BackendError::Kind::kTimeout
                    : BackendError::Kind::kTransport,
            config_.url + ": " + httplib::to_string(err));
        retryable = true;
      } else {
        const int status = result->status;
        line += " status=" + std::to_string(status);
        if (status == 401 || status == 403) {
          log(line);
          throw BackendError(BackendError::Kind::kAuthMissing,
                             config_.url + " rejected the credentials (HTTP " +
                                 std::to_string(status) + "); set " +
                                 env_name_,
                             status);
        }
        if (status >= 200 && status < 300) {
          log(line);
          try {
            return Json::parse(result->body);
          } catch (const Json::exception&) {
            throw BackendError(BackendError::Kind::kMalformedResponse,
                               config_.url + " returned a non-JSON body",
                               status);
          }
        }
        retryable = status == 429 || status >= 500;
        failure.emplace(BackendError::Kind::kHttpStatus,
                        config_.url + " returned HTTP " +
                            std::to_string(status),
                        status);
      }
      if (!retryable || attempt >= attempts) {
        log(line);
        throw *failure;
      }
      const auto backoff_ms = static_cast<long long>(
          std::llround(config_.backoff_base_ms *
                       std::pow(config_.backoff_factor, attempt - 1)));
      log(line + " retry_in_ms=" + std::to_string(backoff_ms));
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
    }
  }

  const HttpConfig& config() const { return config_; }

 private:
  void log(std::string line) const {
    if (config_.log) config_.log->append(std::move(line));
  }

  HttpConfig config_;
  Endpoint endpoint_;
  std::string token_;
  std::string env_name_;
  std::counting_semaphore<1024> gate_;
};

const Json& field(const Json& j, const char* key, const std::string& url) {
  if (!j.is_object() || !j.contains(key)) {
    throw BackendError(BackendError::Kind::kMalformedResponse,
                       url + ": response has no '" + key + "'");
  }
  return j.at(key);
}

std::string string_field(const Json& j, const char* key,
                         const std::string& url) {
  const auto& v = field(j, key, url);
  if (!v.is_string()) {
    throw BackendError(BackendError::Kind::kMalformedResponse,
                       url + ": '" + key + "' is not a string");
  }
  return v.get<std::string>();
}

class HttpChat : public ChatBackend {
 public:
  explicit HttpChat(const HttpConfig& config) : client_(config, kLlmTokenEnv) {
    try {
      pointer_ = Json::json_pointer(config.reply_pointer);
    } catch (const Json::exception&) {
      throw ConfigError("bad reply pointer '" + config.reply_pointer + "'");
    }
  }

  std::string complete(const std::vector<ChatMessage>& messages) override {
    Json body{{"model", client_.config().model}, {"messages", Json::array()}};
    for (const auto& m : messages) {
      body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    const auto reply = client_.post(body);
    if (!reply.contains(pointer_) || !reply.at(pointer_).is_string()) {
      throw BackendError(BackendError::Kind::kMalformedResponse,
                         client_.config().url + ": no reply text at " +
                             client_.config().reply_pointer);
    }
    return reply.at(pointer_).get<std::string>();
  }

 private:
  HttpJsonClient client_;
  Json::json_pointer pointer_;
};

class HttpVqa : public VqaBackend {
 public:
  explicit HttpVqa(const HttpConfig& config) : client_(config, kVqaTokenEnv) {}

  std::string answer(const ImageRef& image,
                     std::string_view question) override {
    const Json body{
        {"image", encode_image(image, client_.config().image_transport)},
        {"question", question}};
    return string_field(client_.post(body), "answer", client_.config().url);
  }

 private:
  HttpJsonClient client_;
};

class HttpVg : public VgBackend {
 public:
  explicit HttpVg(const HttpConfig& config) : client_(config, kVgTokenEnv) {}

  BoundingBox locate(const ImageRef& image,
                     std::string_view expression) override {
    const Json body{
        {"image", encode_image(image, client_.config().image_transport)},
        {"expression", expression}};
    const auto response = client_.post(body);
    const auto& box = field(response, "box", client_.config().url);
    if (!box.is_array() || box.size() != 4 ||
        !std::all_of(box.begin(), box.end(),
                     [](const Json& v) { return v.is_number(); })) {
      throw BackendError(BackendError::Kind::kMalformedResponse,
                         client_.config().url + ": box must be [x, y, w, h]");
    }
    return {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
            box[3].get<double>()};
  }

 private:
  HttpJsonClient client_;
};

class HttpTranslate : public TranslationBackend {
 public:
  explicit HttpTranslate(const HttpConfig& config)
      : client_(config, kMtTokenEnv) {}

  std::string translate(std::string_view text, std::string_view source_lang,
                        std::string_view target_lang) override {
    const Json body{{"text", text},
                    {"source_lang", source_lang},
                    {"target_lang", target_lang}};
    return string_field(client_.post(body), "text", client_.config().url);
  }

 private:
  HttpJsonClient client_;
};

}  // namespace

std::string_view to_string(ImageTransport transport) {
  switch (transport) {
    case ImageTransport::kBase64: return "base64";
    case ImageTransport::kUrl: return "url";
    case ImageTransport::kPath: return "path";
  }
  return "base64";
}

std::optional<ImageTransport> parse_image_transport(std::string_view name) {
  if (name == "base64") return ImageTransport::kBase64;
  if (name == "url") return ImageTransport::kUrl;
  if (name == "path") return ImageTransport::kPath;
  return std::nullopt;
}

void RequestLog::append(std::string line) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << line << '\n';
  }
  lines_.push_back(std::move(line));
}

std::vector<std::string> RequestLog::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(
      reinterpret_cast<unsigned char*>(out.data()),
      reinterpret_cast<const unsigned char*>(bytes.data()),
      static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string encode_image(const ImageRef& image, ImageTransport transport) {
  if (image.kind == ImageRef::Kind::kScene ||
      transport != ImageTransport::kBase64) {
    return image.value;
  }
  return base64_encode(read_text_file(image.value));
}

std::unique_ptr<ChatBackend> http_chat(const HttpConfig& config) {
  return std::make_unique<HttpChat>(config);
}

std::unique_ptr<VqaBackend> http_vqa(const HttpConfig& config) {
  return std::make_unique<HttpVqa>(config);
}

std::unique_ptr<VgBackend> http_vg(const HttpConfig& config) {
  return std::make_unique<HttpVg>(config);
}

std::unique_ptr<TranslationBackend> http_translate(const HttpConfig& config) {
  return std::make_unique<HttpTranslate>(config);
}

}  // namespace peeling
