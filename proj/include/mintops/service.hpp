#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mintops/elicitation.hpp"
#include "mintops/mint.hpp"
#include "mintops/runner.hpp"
#include "mintops/world.hpp"

namespace mintops::service {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 20;

// ---------------------------------------------------------------------------
// Framing: 4-byte big-endian length, then that many bytes of UTF-8 JSON.

std::string encode_frame(std::string_view payload);

class FrameDecoder {
 public:
  void feed(const char* data, std::size_t size);
  /// Next complete frame, if any. Throws ParseError on an oversized frame.
  std::optional<std::string> next();

 private:
  std::string buffer_;
};

// ---------------------------------------------------------------------------
// Session: the per-connection protocol state machine. Transport agnostic;
// every call returns the outbound messages it produced, in order.

class Session {
 public:
  Session(const world::Scenario& scenario, const mint::Config& config, std::string session_id,
          const elicitation::PhrasingHook* hook = nullptr);

  std::vector<std::string> on_message(std::string_view text);
  /// The operator went away. Aborts the episode unless it already finished.
  void on_disconnect();

  bool closed() const { return closed_; }
  const std::string& id() const { return id_; }
  std::optional<std::string> pending_query_id() const;
  /// Set once the session has finished or aborted.
  const std::optional<runner::EpisodeResult>& result() const { return result_; }

 private:
  std::string envelope(std::string_view type, std::string payload_json);
  std::string error(std::string_view code, const std::string& detail);
  std::string state_message();
  void advance(std::vector<std::string>& out);

  const world::Scenario& scenario_;
  mint::Config config_;
  std::string id_;
  const elicitation::PhrasingHook* hook_;
  runner::MintLoop loop_;
  std::optional<mint::ScoredQuery> pending_;
  bool greeted_ = false;
  bool closed_ = false;
  std::int64_t sequence_ = 0;
  std::optional<runner::EpisodeResult> result_;
};

// ---------------------------------------------------------------------------
// TCP transport

struct ServeOptions {
  std::string bind_address = "127.0.0.1";
  int max_sessions = 1;  // connections accepted before serve returns
  std::function<void(int port)> on_listening;
  const elicitation::PhrasingHook* hook = nullptr;
};

/// Serves Mint sessions over TCP, one per connection, each on its own thread.
/// Port 0 picks a free port (reported through on_listening). Returns the
/// episode results in connection order. Throws IoError on socket failures.
std::vector<runner::EpisodeResult> serve(const world::Scenario& scenario,
                                         const mint::Config& config, int port,
                                         const ServeOptions& options = {});

/// Blocking frame client, used by tests and scripted operators.
class Client {
 public:
  Client(const std::string& host, int port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send(std::string_view json);
  /// nullopt on timeout or when the server closed the connection.
  std::optional<std::string> receive(std::chrono::milliseconds timeout = std::chrono::seconds(5));
  void close();

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace mintops::service
