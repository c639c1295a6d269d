#include "bcgsleep/devicesim.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <sstream>

#include "bcgsleep/bounded_queue.hpp"
#include "bcgsleep/error.hpp"
#include "bcgsleep/ingest.hpp"

namespace bcgsleep {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kPollMs = 20;

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
    fd = -1;
  }
}

int connect_to(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const auto port = std::to_string(endpoint.port);
  if (::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found) != 0) return -1;
  int fd = -1;
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  return fd;
}

bool sleep_unless_stopped(double seconds, const std::atomic<bool>* stop) {
  const auto until = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
  while (Clock::now() < until) {
    if (stop != nullptr && stop->load()) return false;
    std::this_thread::sleep_for(std::min<Clock::duration>(std::chrono::milliseconds(kPollMs), until - Clock::now()));
  }
  return stop == nullptr || !stop->load();
}

}  // namespace

// ---------------------------------------------------------------------------
// Endpoint / script

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorKind::InvalidArgument, "endpoint must be host:port, got '" + std::string(text) + "'");
  }
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535) {
    throw Error(ErrorKind::InvalidArgument, "bad port in '" + std::string(text) + "'");
  }
  e.port = static_cast<std::uint16_t>(value);
  return e;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

void StreamScript::validate() const {
  if (!(tick_interval >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tick interval must be >= 0");
  const Seconds last = source.empty() ? -1 : source.samples().back().t;
  for (const auto& w : dropouts) {
    if (w.length <= 0 || w.start_t < 0 || w.start_t > last) {
      throw Error(ErrorKind::InvalidArgument, "dropout window outside the scripted night");
    }
  }
}

bool StreamScript::in_dropout(Seconds t) const {
  return std::any_of(dropouts.begin(), dropouts.end(),
                     [&](const DropoutWindow& w) { return t >= w.start_t && t < w.start_t + w.length; });
}

// ---------------------------------------------------------------------------
// Server

struct StreamServer::Impl {
  struct Event {
    enum class Kind { Line, Disconnect, End } kind;
    Seconds t = 0;
    std::string text;
  };

  BoundedQueue<Event> events{256};
  std::mutex done_mutex;
  std::condition_variable done_cv;
  bool done = false;
};

StreamServer::StreamServer(StreamScript script, const Endpoint& endpoint)
    : script_(std::move(script)), impl_(std::make_unique<Impl>()) {
  script_.validate();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const auto port = std::to_string(endpoint.port);
  if (::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found) != 0 || found == nullptr) {
    throw Error(ErrorKind::BindFailure, "cannot resolve " + endpoint.str());
  }
  listen_fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
  const int one = 1;
  if (listen_fd_ >= 0) ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const bool ok = listen_fd_ >= 0 && ::bind(listen_fd_, found->ai_addr, found->ai_addrlen) == 0 &&
                  ::listen(listen_fd_, 8) == 0;
  ::freeaddrinfo(found);
  if (!ok) {
    const std::string why = std::strerror(errno);
    if (listen_fd_ >= 0) ::close(listen_fd_);
    throw Error(ErrorKind::BindFailure, endpoint.str() + ": " + why);
  }
  ::fcntl(listen_fd_, F_SETFL, ::fcntl(listen_fd_, F_GETFL) | O_NONBLOCK);
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                     : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

StreamServer::~StreamServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void StreamServer::start() {
  if (clock_thread_.joinable()) return;
  network_thread_ = std::jthread([this] { network_loop(); });
  clock_thread_ = std::jthread([this] { clock_loop(); });
}

void StreamServer::wait() {
  std::unique_lock lock(impl_->done_mutex);
  impl_->done_cv.wait(lock, [&] { return impl_->done; });
}

void StreamServer::stop() {
  stopping_ = true;
  impl_->events.close();
  if (clock_thread_.joinable()) clock_thread_.join();
  if (network_thread_.joinable()) network_thread_.join();
  std::lock_guard lock(impl_->done_mutex);
  impl_->done = true;
  impl_->done_cv.notify_all();
}

std::vector<Seconds> StreamServer::sent_times() const {
  std::lock_guard lock(sent_mutex_);
  return sent_;
}

void StreamServer::clock_loop() {
  using Event = Impl::Event;
  const auto samples = script_.source.samples();
  const auto start = Clock::now();
  std::size_t next = 0;
  const Seconds last = samples.empty() ? -1 : samples.back().t;
  for (Seconds t = 0; t <= last && !stopping_; ++t) {
    if (script_.tick_interval > 0.0) {
      std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(
                                                std::chrono::duration<double>(script_.tick_interval * static_cast<double>(t))));
    }
    for (const auto& w : script_.dropouts) {
      if (w.disconnect && w.start_t == t) impl_->events.push({Event::Kind::Disconnect, t, {}});
    }
    while (next < samples.size() && samples[next].t < t) ++next;
    if (next < samples.size() && samples[next].t == t && !script_.in_dropout(t)) {
      if (!impl_->events.push({Event::Kind::Line, t, format_sample_line(samples[next]) + "\n"})) return;
    }
  }
  impl_->events.push({Event::Kind::End, 0, {}});
}

void StreamServer::network_loop() {
  using Kind = Impl::Event::Kind;
  int client = -1;

  const auto accept_pending = [&]() -> int {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd >= 0) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) & ~O_NONBLOCK);
    return fd;
  };
  const auto wait_for_client = [&]() -> int {
    while (!stopping_) {
      pollfd p{listen_fd_, POLLIN, 0};
      if (::poll(&p, 1, kPollMs) > 0) {
        const int fd = accept_pending();
        if (fd >= 0) return fd;
      }
    }
    return -1;
  };
  const auto refuse_extra = [&] {
    for (int fd = accept_pending(); fd >= 0; fd = accept_pending()) {
      ::close(fd);
      ++refused_;
    }
  };

  while (auto event = impl_->events.pop()) {
    if (client >= 0) refuse_extra();
    if (event->kind == Kind::End) break;
    if (event->kind == Kind::Disconnect) {
      close_fd(client);
      continue;
    }
    while (true) {
      if (client < 0) {
        client = script_.hold_for_client ? wait_for_client() : accept_pending();
        if (client < 0) {
          if (!script_.hold_for_client) ++discarded_;
          break;
        }
        ++served_;
      }
      if (send_all(client, event->text)) {
        std::lock_guard lock(sent_mutex_);
        sent_.push_back(event->t);
        break;
      }
      close_fd(client);
      if (!script_.hold_for_client) {
        ++discarded_;
        break;
      }
    }
  }
  close_fd(client);
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::lock_guard lock(impl_->done_mutex);
  impl_->done = true;
  impl_->done_cv.notify_all();
}

std::unique_ptr<StreamServer> serve_stream(StreamScript script, const Endpoint& endpoint) {
  auto server = std::make_unique<StreamServer>(std::move(script), endpoint);
  server->start();
  return server;
}

// ---------------------------------------------------------------------------
// Recorder

std::filesystem::path gap_log_path(const std::filesystem::path& output) {
  return output.string() + ".gaps.csv";
}

RecordResult record_stream(const Endpoint& endpoint, const ReconnectPolicy& policy,
                           const std::filesystem::path& output, const std::atomic<bool>* stop) {
  if (!(policy.retry_interval >= 0.0) || !(policy.deadline >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "retry interval and deadline must be >= 0");
  }
  const int out_fd = ::open(output.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_APPEND, 0644);
  if (out_fd < 0) throw Error(ErrorKind::Io, "cannot open " + output.string() + ": " + std::strerror(errno));

  RecordResult result;
  BoundedQueue<std::string> lines(1024);
  std::exception_ptr network_error;
  const auto stopped = [&] { return stop != nullptr && stop->load(); };

  std::jthread network([&] {
    try {
      auto& states = result.transitions;
      states.push_back(RecorderState::Connecting);
      auto give_up_at = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(policy.deadline));
      bool ever_connected = false;
      std::vector<char> buf(64 * 1024);
      while (!stopped()) {
        int fd = connect_to(endpoint);
        if (fd < 0) {
          if (Clock::now() >= give_up_at) {
            if (!ever_connected) {
              throw Error(ErrorKind::InitialConnectFailure, "no connection to " + endpoint.str() + " within " +
                                                                format_real(policy.deadline) + " s");
            }
            break;
          }
          sleep_unless_stopped(policy.retry_interval, stop);
          continue;
        }
        ever_connected = true;
        ++result.connections;
        states.push_back(RecorderState::Streaming);
        std::string pending;
        bool queue_open = true;
        while (queue_open && !stopped()) {
          pollfd p{fd, POLLIN, 0};
          const int ready = ::poll(&p, 1, kPollMs);
          if (ready == 0) continue;
          if (ready < 0 && errno == EINTR) continue;
          const ssize_t n = ready > 0 ? ::recv(fd, buf.data(), buf.size(), 0) : -1;
          if (n < 0 && errno == EINTR) continue;
          if (n <= 0) break;
          pending.append(buf.data(), static_cast<std::size_t>(n));
          std::size_t from = 0;
          for (auto nl = pending.find('\n', from); nl != std::string::npos; nl = pending.find('\n', from)) {
            if (nl > from && !lines.push(pending.substr(from, nl - from))) queue_open = false;
            from = nl + 1;
          }
          pending.erase(0, from);
        }
        // A trailing partial line is never emitted.
        close_fd(fd);
        if (stopped() || !queue_open) break;
        states.push_back(RecorderState::Backoff);
        give_up_at = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(policy.deadline));
      }
      states.push_back(RecorderState::Closed);
    } catch (...) {
      network_error = std::current_exception();
    }
    lines.close();
  });

  Seconds last_t = -1;
  std::size_t line_no = 0;
  std::string io_error;
  while (auto line = lines.pop()) {
    ++line_no;
    VitalsSample sample;
    try {
      sample = parse_sample_line(*line, line_no);
    } catch (const Error&) {
      ++result.malformed_dropped;
      continue;
    }
    if (sample.t <= last_t) {
      ++result.duplicates_dropped;
      continue;
    }
    const std::string text = format_sample_line(sample) + "\n";
    // One write per line so a killed recorder leaves only whole lines.
    if (::write(out_fd, text.data(), text.size()) != static_cast<ssize_t>(text.size())) {
      io_error = std::strerror(errno);
      lines.close();
      break;
    }
    last_t = sample.t;
    ++result.lines_written;
  }
  network.join();
  ::fsync(out_fd);
  ::close(out_fd);
  if (!io_error.empty()) throw Error(ErrorKind::Io, "write to " + output.string() + " failed: " + io_error);
  if (network_error) std::rethrow_exception(network_error);

  std::string text = read_text_file(output);
  std::istringstream in(text);
  NightMeta meta;
  meta.night_id = output.stem().string();
  result.record = parse_night(in, NightFormat::Ndjson, meta);

  std::string gaps = "start_t,length\n";
  for (const auto& g : result.record.gaps()) gaps += std::to_string(g.start_t) + "," + std::to_string(g.length) + "\n";
  write_text_file(gap_log_path(output), gaps);
  return result;
}

}  // namespace bcgsleep
