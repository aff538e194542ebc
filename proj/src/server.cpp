#include "giml/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <deque>
#include <iostream>
#include <mutex>
#include <thread>

#include "giml/protocol.hpp"

namespace giml {

namespace ws {
std::string accept_key(std::string_view client_key) {
  std::string src(client_key);
  src += "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(src.data()), src.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}
}  // namespace ws

namespace {

bool write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_exact(int fd, char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

std::string length_prefixed(std::string_view payload) {
  std::string out(4, '\0');
  const auto n = static_cast<std::uint32_t>(payload.size());
  out[0] = static_cast<char>(n >> 24);
  out[1] = static_cast<char>(n >> 16);
  out[2] = static_cast<char>(n >> 8);
  out[3] = static_cast<char>(n);
  out.append(payload);
  return out;
}

constexpr std::uint32_t kMaxMessage = 1u << 20;

/// One connected player. The reader thread owns the receive side; sends are
/// serialized by a mutex because the reader answers pings.
class Connection {
 public:
  explicit Connection(int fd) : fd_(fd) {}
  ~Connection() {
    shutdown();
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  bool handshake() {
    // Framed clients may wait for hello before sending anything, so the
    // upgrade check gives up after a short while.
    char peek[4];
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(250);
    ssize_t got = 0;
    while (got < 4) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return true;
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) return true;
      got = ::recv(fd_, peek, 4, MSG_PEEK);
      if (got <= 0) return false;
      if (got < 4) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (std::memcmp(peek, "GET ", 4) != 0) return true;
    websocket_ = true;
    std::string request;
    char c;
    while (request.size() < 16384 && request.find("\r\n\r\n") == std::string::npos) {
      if (!read_exact(fd_, &c, 1)) return false;
      request += c;
    }
    std::string key;
    std::string lower = fold_case(request);
    auto pos = lower.find("sec-websocket-key:");
    if (pos != std::string::npos) {
      auto end = request.find("\r\n", pos);
      key = request.substr(pos + 18, end - pos - 18);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      while (!key.empty() && key.back() == ' ') key.pop_back();
    }
    if (key.empty()) {
      const std::string bad = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n";
      write_all(fd_, bad.data(), bad.size());
      return false;
    }
    const std::string resp = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                             "Sec-WebSocket-Accept: " + ws::accept_key(key) + "\r\n\r\n";
    return write_all(fd_, resp.data(), resp.size());
  }

  void start(std::function<void(std::string)> on_message) {
    reader_ = std::thread([this, on_message = std::move(on_message)] {
      while (!closed_) {
        auto msg = websocket_ ? read_ws() : read_framed();
        if (!msg) break;
        on_message(std::move(*msg));
      }
      closed_ = true;
    });
  }

  bool send(std::string_view payload) {
    std::lock_guard lock(send_mutex_);
    if (closed_) return false;
    bool ok;
    if (websocket_) {
      std::string frame;
      frame += static_cast<char>(0x81);
      if (payload.size() < 126) {
        frame += static_cast<char>(payload.size());
      } else if (payload.size() < 65536) {
        frame += static_cast<char>(126);
        frame += static_cast<char>(payload.size() >> 8);
        frame += static_cast<char>(payload.size() & 0xFF);
      } else {
        frame += static_cast<char>(127);
        for (int i = 7; i >= 0; --i) frame += static_cast<char>((static_cast<std::uint64_t>(payload.size()) >> (8 * i)) & 0xFF);
      }
      frame.append(payload);
      ok = write_all(fd_, frame.data(), frame.size());
    } else {
      const auto framed = length_prefixed(payload);
      ok = write_all(fd_, framed.data(), framed.size());
    }
    if (!ok) closed_ = true;
    return ok;
  }

  bool closed() const { return closed_; }

  void shutdown() {
    closed_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  std::optional<std::string> read_framed() {
    unsigned char len[4];
    if (!read_exact(fd_, reinterpret_cast<char*>(len), 4)) return std::nullopt;
    const std::uint32_t n = static_cast<std::uint32_t>(len[0]) << 24 | static_cast<std::uint32_t>(len[1]) << 16 |
                            static_cast<std::uint32_t>(len[2]) << 8 | len[3];
    if (n > kMaxMessage) return std::nullopt;
    std::string payload(n, '\0');
    if (!read_exact(fd_, payload.data(), n)) return std::nullopt;
    return payload;
  }

  std::optional<std::string> read_ws() {
    std::string message;
    while (true) {
      unsigned char h[2];
      if (!read_exact(fd_, reinterpret_cast<char*>(h), 2)) return std::nullopt;
      const bool fin = h[0] & 0x80;
      const int opcode = h[0] & 0x0F;
      const bool masked = h[1] & 0x80;
      std::uint64_t n = h[1] & 0x7F;
      if (n == 126) {
        unsigned char e[2];
        if (!read_exact(fd_, reinterpret_cast<char*>(e), 2)) return std::nullopt;
        n = static_cast<std::uint64_t>(e[0]) << 8 | e[1];
      } else if (n == 127) {
        unsigned char e[8];
        if (!read_exact(fd_, reinterpret_cast<char*>(e), 8)) return std::nullopt;
        n = 0;
        for (int i = 0; i < 8; ++i) n = n << 8 | e[i];
      }
      if (n > kMaxMessage) return std::nullopt;
      unsigned char mask[4] = {0, 0, 0, 0};
      if (masked && !read_exact(fd_, reinterpret_cast<char*>(mask), 4)) return std::nullopt;
      std::string payload(static_cast<std::size_t>(n), '\0');
      if (n && !read_exact(fd_, payload.data(), payload.size())) return std::nullopt;
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
      if (opcode == 0x8) return std::nullopt;
      if (opcode == 0x9) {
        std::lock_guard lock(send_mutex_);
        std::string pong;
        pong += static_cast<char>(0x8A);
        pong += static_cast<char>(std::min<std::size_t>(payload.size(), 125));
        pong.append(payload.substr(0, 125));
        write_all(fd_, pong.data(), pong.size());
        continue;
      }
      if (opcode == 0xA) continue;
      message += payload;
      if (fin) return message;
    }
  }

  int fd_;
  bool websocket_ = false;
  std::atomic<bool> closed_{false};
  std::mutex send_mutex_;
  std::thread reader_;
};

struct Inbox {
  std::mutex mutex;
  std::deque<std::string> messages;

  void push(std::string m) {
    std::lock_guard lock(mutex);
    messages.push_back(std::move(m));
  }
  std::deque<std::string> drain() {
    std::lock_guard lock(mutex);
    std::deque<std::string> out;
    out.swap(messages);
    return out;
  }
};

int open_listener(const std::string& bind, unsigned short& port_out) {
  std::string host = "127.0.0.1";
  std::string port = bind;
  if (auto colon = bind.rfind(':'); colon != std::string::npos) {
    host = bind.substr(0, colon);
    port = bind.substr(colon + 1);
  }
  if (host.empty() || host == "*") host = "0.0.0.0";
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) return -1;
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    return -1;
  }
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 1) != 0) {
    ::freeaddrinfo(res);
    ::close(fd);
    return -1;
  }
  ::freeaddrinfo(res);
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  port_out = ntohs(addr.sin_port);
  return fd;
}

}  // namespace

int serve(const GimlDocument& doc, const ServeOptions& options) {
  unsigned short port = 0;
  const int listener = open_listener(options.bind, port);
  if (listener < 0) {
    std::cerr << "giml: cannot listen on " << options.bind << "\n";
    return 2;
  }
  if (options.on_listening) options.on_listening(port);

  Engine engine(doc, options.run.config, options.callbacks);
  SessionRecorder rec(engine);
  const long long tick = engine.config().tick_ms;
  long long engine_t = -tick;
  std::uint64_t seq = 0;
  bool finished = false;
  auto cancelled = [&] { return options.cancel && options.cancel->load(); };

  auto finish = [&](Connection* conn, std::string_view reason) {
    const auto closing = rec.stop(std::max<long long>(engine_t, 0), reason);
    if (conn) {
      for (const auto& e : closing) conn->send(protocol::event(++seq, e));
      conn->send(protocol::bye(++seq, reason));
    }
    finished = true;
  };

  while (!finished) {
    pollfd p{listener, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (cancelled()) {
      finish(nullptr, "cancel");
      break;
    }
    if (ready <= 0) continue;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_unique<Connection>(fd);
    if (!conn->handshake()) continue;
    Inbox inbox;
    conn->start([&inbox](std::string m) { inbox.push(std::move(m)); });

    conn->send(protocol::hello(++seq, engine));
    conn->send(protocol::document_summary(++seq, engine, doc));
    conn->send(protocol::frame(++seq, engine.current_frame()));
    if (engine_t < 0)
      for (const auto& e : engine.initial_events()) conn->send(protocol::event(++seq, e));
    std::uint64_t sent_frame = engine.current_frame().frame_seq;

    auto next = std::chrono::steady_clock::now();
    while (!conn->closed() && !finished) {
      next += std::chrono::milliseconds(tick);
      std::this_thread::sleep_until(next);
      if (cancelled()) {
        finish(conn.get(), "cancel");
        break;
      }
      engine_t += tick;
      std::vector<GazeSample> samples;
      bool pause = false;
      std::optional<std::string> stop;
      for (auto& raw : inbox.drain()) {
        const auto m = protocol::parse_client(raw);
        switch (m.type) {
          case protocol::ClientMessage::Type::input: {
            GazeSample s;
            s.t_ms = engine_t;
            s.x = m.gaze.x;
            s.y = m.gaze.y;
            s.valid = m.gaze.valid;
            s.pupil = m.pupil;
            samples.push_back(s);
            break;
          }
          case protocol::ClientMessage::Type::key: {
            if (fold_case(m.key) == "escape") {
              stop = "escape";
              break;
            }
            if (fold_case(m.key) == "pause") {
              pause = true;
              break;
            }
            GazeSample s = samples.empty() ? GazeSample{engine_t, 0, 0, false, std::nullopt, {}} : samples.back();
            s.t_ms = engine_t;
            s.keys = {m.key};
            samples.push_back(s);
            break;
          }
          case protocol::ClientMessage::Type::control:
            if (m.action == "stop") stop = "stop";
            else pause = true;
            break;
          case protocol::ClientMessage::Type::invalid:
            conn->send(protocol::error(++seq, m.error, m.seq ? std::optional<std::uint64_t>(m.seq) : std::nullopt));
            break;
        }
      }
      std::vector<EngineEvent> events;
      if (pause) {
        auto e = rec.pause();
        events.insert(events.end(), e.begin(), e.end());
      }
      if (stop) {
        for (const auto& e : events) conn->send(protocol::event(++seq, e));
        finish(conn.get(), *stop);
        break;
      }
      // Input samples without a fresh message keep the last gaze, as in a trace.
      auto e = rec.tick(engine_t, samples);
      events.insert(events.end(), e.begin(), e.end());
      for (const auto& ev : events) conn->send(protocol::event(++seq, ev));
      if (engine.current_frame().frame_seq != sent_frame) {
        sent_frame = engine.current_frame().frame_seq;
        conn->send(protocol::frame(++seq, engine.current_frame()));
      }
      if (engine.stopped()) {
        conn->send(protocol::bye(++seq, "escape"));
        finished = true;
      }
    }
  }
  ::close(listener);

  if (options.out_dir) {
    RunOutput out;
    out.header.document = options.run.document_label;
    out.header.seed = engine.config().seed;
    out.header.dwell_ms = engine.config().dwell_ms;
    out.header.tick_ms = engine.config().tick_ms;
    out.started = true;
    out.events = rec.events();
    out.samples = rec.samples();
    out.aoi = rec.aoi();
    out.oculomotor = detect_fixations(rec.raw_samples(), options.run.dispersion_px, options.run.min_fixation_ms);
    write_run(out, *options.out_dir);
  }
  return 0;
}

// ----------------------------------------------------------------------------

ProtocolClient::~ProtocolClient() { close(); }

bool ProtocolClient::connect(const std::string& host, unsigned short port, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, host.c_str(), &addr.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
      int one = 1;
      ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return true;
    }
    ::close(fd_);
    fd_ = -1;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return false;
}

bool ProtocolClient::send(std::string_view message) {
  if (fd_ < 0) return false;
  const auto framed = length_prefixed(message);
  return write_all(fd_, framed.data(), framed.size());
}

std::optional<std::string> ProtocolClient::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (buffer_.size() >= 4) {
      const auto* b = reinterpret_cast<const unsigned char*>(buffer_.data());
      const std::uint32_t n = static_cast<std::uint32_t>(b[0]) << 24 | static_cast<std::uint32_t>(b[1]) << 16 |
                              static_cast<std::uint32_t>(b[2]) << 8 | b[3];
      if (buffer_.size() >= 4 + static_cast<std::size_t>(n)) {
        std::string msg = buffer_.substr(4, n);
        buffer_.erase(0, 4 + n);
        return msg;
      }
    }
    if (fd_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) return std::nullopt;
    char buf[65536];
    const ssize_t r = ::recv(fd_, buf, sizeof buf, 0);
    if (r <= 0) {
      close();
      continue;
    }
    buffer_.append(buf, static_cast<std::size_t>(r));
  }
}

void ProtocolClient::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

}  // namespace giml
