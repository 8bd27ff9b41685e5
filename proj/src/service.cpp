#include "mintops/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <thread>

#include "mintops/errors.hpp"

namespace mintops::service {

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
  throw IoError(what + ": " + std::strerror(errno));
}

bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

void run_connection(int fd, Session& session) {
  Socket sock(fd);
  FrameDecoder decoder;
  char buf[4096];
  while (!session.closed()) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      session.on_disconnect();
      return;
    }
    decoder.feed(buf, static_cast<std::size_t>(n));
    try {
      while (auto frame = decoder.next()) {
        for (const auto& out : session.on_message(*frame)) {
          if (!send_all(fd, encode_frame(out))) {
            session.on_disconnect();
            return;
          }
        }
        if (session.closed()) break;
      }
    } catch (const ParseError&) {
      // Oversized frame: the stream can no longer be trusted.
      session.on_disconnect();
      return;
    }
  }
  ::shutdown(fd, SHUT_WR);
}

}  // namespace

std::string encode_frame(std::string_view payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
  out.append(payload);
  return out;
}

void FrameDecoder::feed(const char* data, std::size_t size) { buffer_.append(data, size); }

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  std::size_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(buffer_[static_cast<std::size_t>(i)]);
  if (n > kMaxFrameBytes) throw ParseError("frame of " + std::to_string(n) + " bytes exceeds limit");
  if (buffer_.size() < 4 + n) return std::nullopt;
  std::string frame = buffer_.substr(4, n);
  buffer_.erase(0, 4 + n);
  return frame;
}

std::vector<runner::EpisodeResult> serve(const world::Scenario& scenario,
                                         const mint::Config& config, int port,
                                         const ServeOptions& options) {
  config.validate();
  if (port < 0 || port > 65535) throw ValidationError("port: out of range");
  if (options.max_sessions < 1) throw ValidationError("max_sessions: must be >= 1");

  Socket listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (listener.get() < 0) sys_fail("socket");
  const int yes = 1;
  ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, options.bind_address.c_str(), &addr.sin_addr) != 1) {
    throw ValidationError("bind_address: not an IPv4 address");
  }
  if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) sys_fail("bind");
  if (::listen(listener.get(), options.max_sessions) < 0) sys_fail("listen");
  socklen_t len = sizeof addr;
  if (::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
    sys_fail("getsockname");
  }
  if (options.on_listening) options.on_listening(ntohs(addr.sin_port));

  std::vector<std::unique_ptr<Session>> sessions;
  std::vector<std::thread> threads;
  for (int i = 0; i < options.max_sessions; ++i) {
    int fd = -1;
    do {
      fd = ::accept(listener.get(), nullptr, nullptr);
    } while (fd < 0 && errno == EINTR);
    if (fd < 0) sys_fail("accept");
    sessions.push_back(std::make_unique<Session>(scenario, config, "session-" + std::to_string(i + 1),
                                                 options.hook));
    threads.emplace_back(run_connection, fd, std::ref(*sessions.back()));
  }
  for (auto& t : threads) t.join();

  std::vector<runner::EpisodeResult> results;
  for (const auto& s : sessions) results.push_back(s->result().value_or(runner::EpisodeResult{}));
  return results;
}

// ---------------------------------------------------------------------------

Client::Client(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw IoError("cannot resolve '" + host + "'");
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    sys_fail("socket");
  }
  const int rc = ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0) {
    const int err = errno;
    close();
    errno = err;
    sys_fail("connect");
  }
}

Client::~Client() { close(); }

void Client::send(std::string_view json) {
  if (fd_ < 0 || !send_all(fd_, encode_frame(json))) throw IoError("send failed");
}

std::optional<std::string> Client::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto frame = decoder_.next()) return frame;
    if (fd_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char buf[4096];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return decoder_.next();
    decoder_.feed(buf, static_cast<std::size_t>(n));
  }
}

void Client::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace mintops::service
