#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <thread>

#include "doctest.h"
#include "giml/protocol.hpp"
#include "giml/server.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace giml;
using namespace giml::test;
using nlohmann::json;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

struct RunningServer {
  std::atomic<bool> cancel{false};
  std::promise<unsigned short> port_promise;
  std::future<int> result;
  unsigned short port = 0;

  RunningServer(const GimlDocument& doc, ServeOptions opts) {
    opts.bind = "127.0.0.1:0";
    opts.cancel = &cancel;
    opts.on_listening = [this](unsigned short p) { port_promise.set_value(p); };
    auto fut = port_promise.get_future();
    result = std::async(std::launch::async, [&doc, opts] { return serve(doc, opts); });
    port = fut.get();
  }
  ~RunningServer() {
    cancel = true;
    if (result.valid()) result.wait();
  }
};

std::optional<json> next_of(ProtocolClient& c, const std::string& type, std::chrono::milliseconds timeout = 3000ms) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    auto m = c.receive(200ms);
    if (!m) continue;
    auto j = json::parse(*m);
    if (j["type"] == type) return j;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("websocket accept key matches the published example") {
  CHECK(ws::accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST_CASE("client messages are parsed or rejected with a reason") {
  auto in = protocol::parse_client(protocol::input(1, 55, 10, 20, true));
  CHECK(in.type == protocol::ClientMessage::Type::input);
  CHECK(in.client_t_ms == std::optional<long long>(55));
  CHECK(protocol::parse_client(protocol::key(2, "Escape")).key == "Escape");
  CHECK(protocol::parse_client(protocol::control(3, "pause")).action == "pause");
  for (const char* bad : {"not json", "{}", R"({"type":"dance","seq":1})", R"({"type":"control","body":{"action":"fly"}})",
                          R"({"type":"input","body":{"x":1}})"}) {
    auto m = protocol::parse_client(bad);
    CHECK(m.type == protocol::ClientMessage::Type::invalid);
    CHECK_FALSE(m.error.empty());
  }
}

TEST_CASE("live session: hello, dwell reaction, error reply, stop and flush") {
  auto doc = load_fixture("fig16_states_text.xml");
  const auto out_dir = fs::temp_directory_path() / "giml_serve_test";
  fs::remove_all(out_dir);
  ServeOptions opts;
  opts.run.config.dwell_ms = 700;
  opts.run.config.seed = 4;
  opts.out_dir = out_dir;
  RunningServer server(doc, opts);

  ProtocolClient client;
  REQUIRE(client.connect("127.0.0.1", server.port, 2000ms));
  auto hello = client.receive(2000ms);
  REQUIRE(hello);
  auto h = json::parse(*hello);
  CHECK(h["type"] == "hello");
  CHECK(h["body"]["dwell_ms"] == 700);
  CHECK(h["body"]["protocol_version"] == protocol::kVersion);
  CHECK(h["body"]["screen"] == json::array({1024, 768}));
  auto summary = next_of(client, "document_summary");
  REQUIRE(summary);
  CHECK((*summary)["body"]["default_scene"] == "first");
  auto frame = next_of(client, "frame");
  REQUIRE(frame);
  CHECK((*frame)["body"]["regions"][0]["text"]["value"] == "Navy");

  client.send(R"({"type":"teleport","seq":5,"body":{}})");
  auto err = next_of(client, "error");
  REQUIRE(err);
  CHECK((*err)["body"]["in_reply_to"] == 5);

  std::uint64_t seq = 10;
  bool reacted = false;
  long long last_frame_seq = -1;
  bool monotone = true;
  const auto start = std::chrono::steady_clock::now();
  while (std::chrono::steady_clock::now() - start < 1200ms) {
    client.send(protocol::input(++seq, 0, 150, 100, true));
    while (auto m = client.receive(5ms)) {
      auto j = json::parse(*m);
      if (j["type"] == "event" && j["body"]["kind"] == "ReactionStarted") reacted = true;
      if (j["type"] == "frame") {
        const long long fs_ = j["body"]["frame_seq"];
        monotone &= fs_ > last_frame_seq;
        last_frame_seq = fs_;
      }
    }
  }
  CHECK(reacted);
  CHECK(monotone);

  client.send(protocol::control(++seq, "stop"));
  auto bye = next_of(client, "bye");
  REQUIRE(bye);
  CHECK((*bye)["body"]["reason"] == "stop");
  CHECK(server.result.get() == 0);
  const auto events = read_text(out_dir / "events.csv");
  CHECK(events.find("ReactionStarted") != std::string::npos);
  CHECK(events.find("EngineStopped,first,,stop") != std::string::npos);
  CHECK(fs::exists(out_dir / "samples.csv"));
  CHECK(fs::exists(out_dir / "aoi.csv"));
  fs::remove_all(out_dir);
}

TEST_CASE("a reconnecting client receives the latest frame") {
  auto doc = load_fixture("fig16_states_text.xml");
  RunningServer server(doc, ServeOptions{});
  long long first_seq = -1;
  {
    ProtocolClient c;
    REQUIRE(c.connect("127.0.0.1", server.port, 2000ms));
    auto f = next_of(c, "frame");
    REQUIRE(f);
    first_seq = (*f)["body"]["frame_seq"];
    for (int i = 0; i < 20; ++i) {
      c.send(protocol::input(i, 0, 150, 100, true));
      std::this_thread::sleep_for(10ms);
    }
    std::this_thread::sleep_for(100ms);
  }
  std::this_thread::sleep_for(100ms);
  ProtocolClient c;
  REQUIRE(c.connect("127.0.0.1", server.port, 2000ms));
  auto h = c.receive(2000ms);
  REQUIRE(h);
  CHECK(json::parse(*h)["type"] == "hello");
  auto f = next_of(c, "frame");
  REQUIRE(f);
  CHECK((*f)["body"]["frame_seq"] > first_seq);
  CHECK((*f)["body"]["regions"][0]["state"] == "activated");
}

TEST_CASE("websocket clients get an upgrade and text frames") {
  auto doc = load_fixture("fig16_states_text.xml");
  RunningServer server(doc, ServeOptions{});
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(server.port);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  const std::string req =
      "GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
      "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n";
  ::send(fd, req.data(), req.size(), 0);
  std::string got;
  char buf[4096];
  timeval tv{2, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  while (got.find("\"hello\"") == std::string::npos) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    got.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  CHECK(got.rfind("HTTP/1.1 101", 0) == 0);
  CHECK(got.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo=") != std::string::npos);
  const auto body = got.find("\r\n\r\n") + 4;
  REQUIRE(body < got.size());
  CHECK(static_cast<unsigned char>(got[body]) == 0x81);
}

TEST_CASE("binding an unavailable address fails with exit code 2") {
  auto doc = load_fixture("fig16_states_text.xml");
  ServeOptions opts;
  opts.bind = "203.0.113.1:1";
  CHECK(serve(doc, opts) == 2);
}
