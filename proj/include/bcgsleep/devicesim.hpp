#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bcgsleep/record.hpp"

namespace bcgsleep {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws InvalidArgument.
  static Endpoint parse(std::string_view text);
  std::string str() const;
};

/// A stretch of scripted seconds the server never sends. With `disconnect`
/// the server also drops the client connection when the window begins.
struct DropoutWindow {
  Seconds start_t = 0;
  Seconds length = 0;
  bool disconnect = false;
};

struct StreamScript {
  NightRecord source;
  std::vector<DropoutWindow> dropouts;
  double tick_interval = 1.0;  // wall seconds per scripted second; 0 = as fast as possible
  /// When no client is connected as a sample falls due, wait for one
  /// (true) or discard the sample as a real device would (false).
  bool hold_for_client = true;

  /// Throws InvalidArgument.
  void validate() const;
  bool in_dropout(Seconds t) const;
};

/// Emulates a 1 Hz vitals sensor: newline-delimited JSON samples over TCP,
/// one client at a time (extra connections are closed immediately).
/// Binds in the constructor; start() launches the clock and network threads.
class StreamServer {
 public:
  StreamServer(StreamScript script, const Endpoint& endpoint);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void start();
  /// Blocks until the script has been fully served (or stop()).
  void wait();
  void stop();

  /// Scripted timestamps successfully written to a client, in order.
  std::vector<Seconds> sent_times() const;
  std::size_t refused_connections() const noexcept { return refused_.load(); }
  std::size_t discarded_samples() const noexcept { return discarded_.load(); }
  std::size_t connections_served() const noexcept { return served_.load(); }

 private:
  struct Impl;
  void clock_loop();
  void network_loop();

  StreamScript script_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::unique_ptr<Impl> impl_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> refused_{0};
  std::atomic<std::size_t> discarded_{0};
  std::atomic<std::size_t> served_{0};
  mutable std::mutex sent_mutex_;
  std::vector<Seconds> sent_;
  std::jthread clock_thread_;
  std::jthread network_thread_;
};

/// Binds and starts a server for `script`.
std::unique_ptr<StreamServer> serve_stream(StreamScript script, const Endpoint& endpoint);

struct ReconnectPolicy {
  double retry_interval = 1.0;  // seconds between connection attempts
  double deadline = 60.0;       // give up after this long without a connection
};

enum class RecorderState { Connecting, Streaming, Backoff, Closed };

struct RecordResult {
  std::size_t lines_written = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t malformed_dropped = 0;
  std::size_t connections = 0;
  std::vector<RecorderState> transitions;
  NightRecord record;  // the output file re-read
};

/// Connects to a sensor stream and appends every complete, valid, new
/// sample line to `output` (one write per line, fsync at the end). On
/// disconnect it retries per `policy`; when the deadline passes after at
/// least one successful connection the recording ends normally. Gaps are
/// written to `<output>.gaps.csv`. Throws InitialConnectFailure if no
/// connection was ever made. `stop` (optional) ends the recording early.
RecordResult record_stream(const Endpoint& endpoint, const ReconnectPolicy& policy,
                           const std::filesystem::path& output, const std::atomic<bool>* stop = nullptr);

std::filesystem::path gap_log_path(const std::filesystem::path& output);

}  // namespace bcgsleep
