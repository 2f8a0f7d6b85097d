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

#include <stdlib.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "peeling/clients.hpp"
#include "peeling/errors.hpp"
#include "testing.hpp"

namespace peeling {
namespace {

using Json = nlohmann::json;

// A local server on an ephemeral port, stopped on destruction.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

HttpConfig fast_config(const std::string& url) {
  HttpConfig c;
  c.url = url;
  c.auth_env = "";
  c.timeout_s = 2;
  c.backoff_base_ms = 5;
  c.log = std::make_shared<RequestLog>();
  return c;
}

TEST(HttpVqa, HappyPath) {
  LocalServer s;
  Json seen;
  s.server().Post("/vqa", [&](const httplib::Request& req, httplib::Response& res) {
    seen = Json::parse(req.body);
    res.set_content(R"({"answer":"one"})", "application/json");
  });
  auto c = fast_config(s.url("/vqa"));
  c.image_transport = ImageTransport::kPath;
  auto vqa = http_vqa(c);
  EXPECT_EQ(vqa->answer(ImageRef::path("img/1.jpg"), "How many dogs?"), "one");
  EXPECT_EQ(seen["image"], "img/1.jpg");
  EXPECT_EQ(seen["question"], "How many dogs?");
}

TEST(HttpVqa, RetriesAfterTooManyRequests) {
  LocalServer s;
  std::atomic<int> calls{0};
  s.server().Post("/vqa", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 429;
      return;
    }
    res.set_content(R"({"answer":"no"})", "application/json");
  });
  auto c = fast_config(s.url("/vqa"));
  auto vqa = http_vqa(c);
  EXPECT_EQ(vqa->answer(ImageRef::scene("s"), "q"), "no");
  EXPECT_EQ(calls.load(), 3);
  const auto lines = c.log->lines();
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_NE(lines[0].find("attempt=1"), std::string::npos);
  EXPECT_NE(lines[0].find("status=429"), std::string::npos);
  EXPECT_NE(lines[0].find("retry_in_ms=5"), std::string::npos);
  EXPECT_NE(lines[1].find("retry_in_ms=10"), std::string::npos);
  EXPECT_NE(lines[2].find("status=200"), std::string::npos);
}

TEST(HttpVqa, GivesUpAfterRetries) {
  LocalServer s;
  std::atomic<int> calls{0};
  s.server().Post("/vqa", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  auto c = fast_config(s.url("/vqa"));
  c.max_retries = 2;
  auto vqa = http_vqa(c);
  try {
    vqa->answer(ImageRef::scene("s"), "q");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kHttpStatus);
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpVqa, UnauthorizedNamesTheVariable) {
  LocalServer s;
  std::string auth;
  s.server().Post("/vqa", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    res.status = 401;
  });
  ::setenv("PEELING_TEST_SECRET", "s3cr3t-token", 1);
  auto c = fast_config(s.url("/vqa"));
  c.auth_env = "PEELING_TEST_SECRET";
  auto vqa = http_vqa(c);
  try {
    vqa->answer(ImageRef::scene("s"), "q");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kAuthMissing);
    EXPECT_NE(std::string(e.what()).find("PEELING_TEST_SECRET"),
              std::string::npos);
  }
  EXPECT_EQ(auth, "Bearer s3cr3t-token");
  for (const auto& line : c.log->lines()) {
    EXPECT_EQ(line.find("s3cr3t"), std::string::npos) << line;
    EXPECT_NE(line.find("[redacted]"), std::string::npos) << line;
  }
  ::unsetenv("PEELING_TEST_SECRET");
}

TEST(HttpVqa, NamedVariableMustExist) {
  ::unsetenv("PEELING_TEST_ABSENT");
  auto c = fast_config("http://127.0.0.1:9/vqa");
  c.auth_env = "PEELING_TEST_ABSENT";
  try {
    http_vqa(c);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kAuthMissing);
    EXPECT_NE(std::string(e.what()).find("PEELING_TEST_ABSENT"),
              std::string::npos);
  }
}

TEST(HttpVqa, UnreachableIsTransport) {
  auto c = fast_config("http://127.0.0.1:1/vqa");
  c.max_retries = 1;
  auto vqa = http_vqa(c);
  try {
    vqa->answer(ImageRef::scene("s"), "q");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kTransport);
  }
  EXPECT_EQ(c.log->lines().size(), 2u);
}

TEST(HttpVg, ParsesBoxAndRejectsGarbage) {
  LocalServer s;
  s.server().Post("/vg", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = Json::parse(req.body);
    if (body["expression"] == "bad") {
      res.set_content(R"({"box":[1,2]})", "application/json");
    } else if (body["expression"] == "text") {
      res.set_content("not json", "text/plain");
    } else {
      res.set_content(R"({"box":[1,2,30,40]})", "application/json");
    }
  });
  auto vg = http_vg(fast_config(s.url("/vg")));
  EXPECT_EQ(vg->locate(ImageRef::scene("s"), "a dog"),
            (BoundingBox{1, 2, 30, 40}));
  EXPECT_THROW(vg->locate(ImageRef::scene("s"), "bad"), BackendError);
  EXPECT_THROW(vg->locate(ImageRef::scene("s"), "text"), BackendError);
}

TEST(HttpChat, ReadsReplyPointer) {
  LocalServer s;
  Json seen;
  s.server().Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
    seen = Json::parse(req.body);
    res.set_content(
        R"({"choices":[{"message":{"content":"object: dog\nproperties: "}}]})",
        "application/json");
  });
  auto c = fast_config(s.url("/chat"));
  c.model = "m1";
  auto chat = http_chat(c);
  EXPECT_EQ(chat->complete({{"user", "hi"}}), "object: dog\nproperties: ");
  EXPECT_EQ(seen["model"], "m1");
  EXPECT_EQ(seen["messages"][0]["content"], "hi");

  c.reply_pointer = "/output";
  EXPECT_THROW(http_chat(c)->complete({{"user", "hi"}}), BackendError);
}

TEST(HttpTranslate, SendsLanguages) {
  LocalServer s;
  s.server().Post("/mt", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = Json::parse(req.body);
    res.set_content(Json{{"text", body["text"].get<std::string>() + "|" +
                                      body["source_lang"].get<std::string>() +
                                      body["target_lang"].get<std::string>()}}
                        .dump(),
                    "application/json");
  });
  auto mt = http_translate(fast_config(s.url("/mt")));
  EXPECT_EQ(mt->translate("a dog", "en", "de"), "a dog|ende");
}

TEST(HttpClients, MalformedUrl) {
  EXPECT_THROW(http_vqa(fast_config("localhost:80")), ConfigError);
  EXPECT_THROW(http_vg(fast_config("ftp://x/y")), ConfigError);
}

TEST(HttpClients, InFlightGateBoundsConcurrency) {
  LocalServer s;
  std::atomic<int> current{0};
  std::atomic<int> peak{0};
  s.server().Post("/vqa", [&](const httplib::Request&, httplib::Response& res) {
    const int now = ++current;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --current;
    res.set_content(R"({"answer":"1"})", "application/json");
  });
  auto c = fast_config(s.url("/vqa"));
  c.max_in_flight = 2;
  auto vqa = http_vqa(c);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { vqa->answer(ImageRef::scene("s"), "q"); });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(c.log->lines().size(), 6u);
}

TEST(EncodeImage, Transports) {
  testing::TempDir dir;
  const auto path = dir.write("img.bin", "Man");
  EXPECT_EQ(encode_image(ImageRef::path(path), ImageTransport::kBase64), "TWFu");
  EXPECT_EQ(encode_image(ImageRef::path(path), ImageTransport::kPath), path);
  EXPECT_EQ(encode_image(ImageRef::scene("s1"), ImageTransport::kBase64), "s1");
  EXPECT_THROW(encode_image(ImageRef::path(dir.file("none")),
                            ImageTransport::kBase64),
               IoError);
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(base64_encode("fooba"), "Zm9vYmE=");
}

}  // namespace
}  // namespace peeling
