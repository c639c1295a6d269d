#include <signal.h>
#include <sys/wait.h>

#include <set>

#include "bcgsleep/devicesim.hpp"
#include "bcgsleep/ingest.hpp"
#include "helpers.hpp"
#include "net_helpers.hpp"

using namespace bcgsleep;

namespace {

NightRecord contiguous(Seconds n) {
  Rng rng(static_cast<std::uint64_t>(n));
  std::vector<VitalsSample> s;
  for (Seconds t = 0; t < n; ++t) s.push_back(testutil::random_sample(rng, t));
  return NightRecord::make({"src", "", 0}, s);
}

std::vector<Seconds> times_of(const std::vector<std::string>& lines) {
  std::vector<Seconds> out;
  for (const auto& l : lines) out.push_back(parse_sample_line(l).t);
  return out;
}

StreamScript script_of(Seconds n, std::vector<DropoutWindow> dropouts = {}, double tick = 0.0) {
  StreamScript s;
  s.source = contiguous(n);
  s.dropouts = std::move(dropouts);
  s.tick_interval = tick;
  return s;
}

const Endpoint kLocal{"127.0.0.1", 0};

}  // namespace

TEST_CASE("endpoint parsing") {
  const auto e = Endpoint::parse("localhost:9000");
  CHECK(e.host == "localhost");
  CHECK(e.port == 9000);
  CHECK(e.str() == "localhost:9000");
  CHECK_THROWS_KIND(Endpoint::parse("nohost"), InvalidArgument);
  CHECK_THROWS_KIND(Endpoint::parse("h:99999"), InvalidArgument);
  CHECK_THROWS_KIND(Endpoint::parse("h:12x"), InvalidArgument);
}

TEST_CASE("script validation") {
  CHECK_THROWS_KIND(StreamServer(script_of(10, {{20, 2, false}}), kLocal), InvalidArgument);
  auto s = script_of(10);
  s.tick_interval = -1.0;
  CHECK_THROWS_KIND(StreamServer(s, kLocal), InvalidArgument);
}

TEST_CASE("bind failure") {
  auto first = serve_stream(script_of(10, {}, 0.05), kLocal);
  CHECK_THROWS_KIND(StreamServer(script_of(10), Endpoint{"127.0.0.1", first->port()}), BindFailure);
  first->stop();
}

TEST_CASE("server sends every sample in order") {
  auto server = serve_stream(script_of(10), kLocal);
  const int fd = nettest::connect_local(server->port());
  REQUIRE(fd >= 0);
  const auto lines = nettest::read_lines(fd);
  ::close(fd);
  server->wait();
  CHECK(lines.size() == 10);
  CHECK(times_of(lines) == std::vector<Seconds>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(lines[3] == format_sample_line(contiguous(10).samples()[3]));
}

TEST_CASE("server skips a dropout window") {
  auto server = serve_stream(script_of(10, {{3, 2, false}}), kLocal);
  const int fd = nettest::connect_local(server->port());
  const auto lines = nettest::read_lines(fd);
  ::close(fd);
  CHECK(times_of(lines) == std::vector<Seconds>{0, 1, 2, 5, 6, 7, 8, 9});
}

TEST_CASE("server drops the client on a disconnect window and resumes") {
  auto server = serve_stream(script_of(10, {{5, 1, true}}), kLocal);
  const int a = nettest::connect_local(server->port());
  const auto first = nettest::read_lines(a);
  ::close(a);
  const int b = nettest::connect_local(server->port());
  const auto second = nettest::read_lines(b);
  ::close(b);
  CHECK(times_of(first) == std::vector<Seconds>{0, 1, 2, 3, 4});
  CHECK(times_of(second) == std::vector<Seconds>{6, 7, 8, 9});
  CHECK(server->connections_served() == 2);
}

TEST_CASE("a second concurrent client is refused") {
  auto server = serve_stream(script_of(200, {}, 0.005), kLocal);
  const int a = nettest::connect_local(server->port());
  REQUIRE(a >= 0);
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  const int b = nettest::connect_local(server->port());
  REQUIRE(b >= 0);
  const auto from_b = nettest::read_lines(b, 3000);
  ::close(b);
  const auto from_a = nettest::read_lines(a);
  ::close(a);
  CHECK(from_b.empty());
  CHECK(from_a.size() == 200);
  CHECK(server->refused_connections() >= 1);
}

TEST_CASE("without holding, samples due while disconnected are discarded") {
  auto s = script_of(100, {}, 0.005);
  s.hold_for_client = false;
  auto server = serve_stream(s, kLocal);
  std::this_thread::sleep_for(std::chrono::milliseconds(150));
  const int fd = nettest::connect_local(server->port());
  const auto lines = nettest::read_lines(fd);
  ::close(fd);
  server->wait();
  CHECK(server->discarded_samples() > 0);
  CHECK(lines.size() + server->discarded_samples() == 100);
  CHECK(times_of(lines) == server->sent_times());
}

TEST_CASE("recorder captures a contiguous stream") {
  testutil::TempDir dir("rec");
  auto server = serve_stream(script_of(100), kLocal);
  const auto out = dir.path / "night.ndjson";
  const auto r = record_stream({"127.0.0.1", server->port()}, {0.05, 0.5}, out);
  CHECK(r.lines_written == 100);
  CHECK(r.record.samples().size() == 100);
  CHECK(r.record.gaps().empty());
  CHECK(r.record.samples()[42] == contiguous(100).samples()[42]);
  CHECK(read_text_file(gap_log_path(out)) == "start_t,length\n");
  CHECK(r.transitions.front() == RecorderState::Connecting);
  CHECK(r.transitions.back() == RecorderState::Closed);
}

TEST_CASE("recorded gaps equal the scripted dropouts") {
  for (bool disconnect : {false, true}) {
    CAPTURE(disconnect);
    testutil::TempDir dir("gap");
    auto server = serve_stream(script_of(100, {{40, 10, disconnect}}, 0.002), kLocal);
    const auto r = record_stream({"127.0.0.1", server->port()}, {0.02, 0.5}, dir.path / "n.ndjson");
    REQUIRE(r.record.gaps().size() == 1);
    CHECK(r.record.gaps()[0] == Gap{40, 10});
    CHECK(server->connections_served() == (disconnect ? 2u : 1u));
    CHECK(r.connections >= server->connections_served());
    std::vector<Seconds> got;
    for (const auto& s : r.record.samples()) got.push_back(s.t);
    CHECK(got == server->sent_times());
    CHECK(read_text_file(gap_log_path(dir.path / "n.ndjson")) == "start_t,length\n40,10\n");
  }
}

TEST_CASE("recorder with no server") {
  testutil::TempDir dir("none");
  const auto port = nettest::unused_port();
  CHECK_THROWS_KIND(record_stream({"127.0.0.1", port}, {0.05, 0.3}, dir.path / "x.ndjson"), InitialConnectFailure);
}

TEST_CASE("recorder drops duplicates, malformed and partial lines") {
  const auto a = format_sample_line(testutil::sample(0, 60));
  const auto b = format_sample_line(testutil::sample(1, 61));
  const auto c = format_sample_line(testutil::sample(2, 62));
  const auto d = format_sample_line(testutil::sample(3, 63));
  nettest::FakeSensor sensor({a + "\n" + b + "\n{garbage\n" + c.substr(0, 10),
                              b + "\n" + c + "\n" + d + "\n"});
  testutil::TempDir dir("dup");
  const auto r = record_stream({"127.0.0.1", sensor.port()}, {0.02, 0.5}, dir.path / "n.ndjson");
  CHECK(r.lines_written == 4);
  CHECK(r.duplicates_dropped == 1);
  CHECK(r.malformed_dropped == 1);
  CHECK(r.record.samples().size() == 4);
  CHECK(r.record.gaps().empty());
}

TEST_CASE("stop flag ends a recording early") {
  testutil::TempDir dir("stop");
  auto server = serve_stream(script_of(2000, {}, 0.01), kLocal);
  std::atomic<bool> stop{false};
  std::thread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    stop = true;
  });
  const auto r = record_stream({"127.0.0.1", server->port()}, {0.05, 5.0}, dir.path / "n.ndjson", &stop);
  stopper.join();
  CHECK(r.lines_written > 0);
  CHECK(r.lines_written < 2000);
  CHECK(r.record.samples().size() == r.lines_written);
  server->stop();
}

TEST_CASE("killing the recorder leaves a parseable file") {
  testutil::TempDir dir("kill");
  const auto out = dir.path / "n.ndjson";
  const auto port = nettest::unused_port();
  const pid_t child = ::fork();
  REQUIRE(child >= 0);
  if (child == 0) {
    const std::string endpoint = "127.0.0.1:" + std::to_string(port);
    ::execl(BCGSLEEP_CLI, BCGSLEEP_CLI, "record", "--endpoint", endpoint.c_str(), "--out", out.c_str(),
            "--retry-interval", "0.05", "--deadline", "10", static_cast<char*>(nullptr));
    ::_exit(127);
  }
  auto server = serve_stream(script_of(5000, {}, 0.001), Endpoint{"127.0.0.1", port});
  std::this_thread::sleep_for(std::chrono::milliseconds(700));
  ::kill(child, SIGKILL);
  int status = 0;
  ::waitpid(child, &status, 0);
  CHECK(WIFSIGNALED(status));
  server->stop();

  const auto text = read_text_file(out);
  CHECK((text.empty() || text.back() == '\n'));
  const auto r = read_night_file(out);
  CHECK(r.samples().size() > 0);
  const auto sent = server->sent_times();
  REQUIRE(r.samples().size() <= sent.size());
  for (std::size_t i = 0; i < r.samples().size(); ++i) CHECK(r.samples()[i].t == sent[i]);
}
