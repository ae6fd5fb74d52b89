#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "stancekit/nli_gateway.hpp"

extern char** environ;

namespace stancekit::nli {

namespace {

void ignore_sigpipe() {
  // Writes to a dead child must surface as EPIPE, not kill the process.
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
  return static_cast<int>(std::max<std::int64_t>(0, left.count()));
}

std::string errno_message(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Moves complete lines out of `buffer` into `lines`.
void take_lines(std::string& buffer, std::vector<std::string>& lines) {
  std::size_t start = 0;
  for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n', start)) {
    std::string line = buffer.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = nl + 1;
  }
  buffer.erase(0, start);
}

}  // namespace

ProcessScorer::ProcessScorer(std::string command, ProcessOptions options)
    : command_(std::move(command)), options_(options) {
  ignore_sigpipe();
  start();
}

ProcessScorer::~ProcessScorer() { stop(); }

void ProcessScorer::start() {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw TransportError(errno_message("pipe"));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError(errno_message("pipe"));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  // Own process group, so a forced stop also reaches anything the shell started.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  char* argv[] = {shell.data(), flag.data(), command_.data(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw TransportError("cannot start backend '" + command_ + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
  buffer_.clear();

  try {
    handshake_ = decode_handshake(read_line(std::chrono::steady_clock::now() + options_.timeout));
  } catch (...) {
    stop();
    throw;
  }
}

void ProcessScorer::stop() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    bool exited = false;
    for (int i = 0; i < 100 && !exited; ++i) {
      exited = ::waitpid(pid_, &status, WNOHANG) == pid_;
      if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!exited) {
      ::kill(-pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
  if (from_child_ >= 0) ::close(from_child_);
  from_child_ = -1;
  buffer_.clear();
}

void ProcessScorer::reset() {
  stop();
  start();
}

std::string ProcessScorer::read_line(std::chrono::steady_clock::time_point deadline) {
  std::vector<std::string> lines;
  while (true) {
    take_lines(buffer_, lines);
    if (!lines.empty()) {
      // Keep anything after the first line for later reads.
      for (std::size_t i = lines.size(); i-- > 1;) buffer_.insert(0, lines[i] + "\n");
      return lines.front();
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) throw TransportError(errno_message("poll"));
    if (ready == 0) throw TransportError("backend '" + command_ + "' timed out");
    char chunk[4096];
    const auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n == 0) throw TransportError("backend '" + command_ + "' closed its output");
    if (n < 0 && (errno == EAGAIN || errno == EINTR)) continue;
    if (n < 0) throw TransportError(errno_message("read"));
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<RawScore> ProcessScorer::score(std::span<const ScoreRequest> batch) {
  if (pid_ < 0) start();
  std::string outgoing;
  for (const auto& request : batch) {
    outgoing += encode_request(request);
    outgoing += '\n';
  }
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  std::vector<RawScore> scores;
  std::vector<std::string> lines;
  std::size_t written = 0;
  try {
    while (scores.size() < batch.size()) {
      pollfd fds[2] = {{from_child_, POLLIN, 0}, {to_child_, POLLOUT, 0}};
      const nfds_t count = written < outgoing.size() ? 2 : 1;
      const int ready = ::poll(fds, count, remaining_ms(deadline));
      if (ready < 0 && errno == EINTR) continue;
      if (ready < 0) throw TransportError(errno_message("poll"));
      if (ready == 0) throw TransportError("backend '" + command_ + "' timed out");

      if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const auto n = ::write(to_child_, outgoing.data() + written, outgoing.size() - written);
        if (n < 0 && errno != EAGAIN && errno != EINTR) throw TransportError(errno_message("write to backend"));
        if (n > 0) written += static_cast<std::size_t>(n);
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char chunk[4096];
        const auto n = ::read(from_child_, chunk, sizeof chunk);
        if (n == 0) throw TransportError("backend '" + command_ + "' closed its output");
        if (n < 0 && errno != EAGAIN && errno != EINTR) throw TransportError(errno_message("read"));
        if (n > 0) buffer_.append(chunk, static_cast<std::size_t>(n));
        take_lines(buffer_, lines);
        for (auto& line : lines) scores.push_back(decode_response(line));
        lines.clear();
      }
    }
  } catch (...) {
    // The stream may be out of step with the batch; restart on next use.
    stop();
    throw;
  }
  return scores;
}

HttpScorer::HttpScorer(std::string url, HttpOptions options) : options_(options) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw InvalidArgument("HTTP backend URL must start with http://");
  const auto path_start = url.find('/', scheme.size());
  scheme_host_port_ = url.substr(0, path_start);
  if (path_start != std::string::npos) base_path_ = url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (scheme_host_port_.size() == scheme.size()) throw InvalidArgument("HTTP backend URL has no host");
}

std::vector<RawScore> HttpScorer::score(std::span<const ScoreRequest> batch) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  std::string body = "[";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (i > 0) body += ", ";
    body += encode_request(batch[i]);
  }
  body += "]";

  auto result = client.Post(base_path_ + "/score", body, "application/json");
  if (!result) throw TransportError("HTTP backend " + scheme_host_port_ + ": " + httplib::to_string(result.error()));
  if (result->status >= 500) {
    throw TransportError("HTTP backend returned status " + std::to_string(result->status));
  }
  if (result->status != 200) throw ProtocolError("HTTP backend returned status " + std::to_string(result->status));

  auto reply = nlohmann::json::parse(result->body, nullptr, false);
  if (reply.is_discarded()) throw ProtocolError("HTTP backend returned malformed JSON");
  if (reply.is_object()) reply = nlohmann::json::array({reply});
  if (!reply.is_array()) throw ProtocolError("HTTP backend reply is neither an object nor an array");
  std::vector<RawScore> scores;
  scores.reserve(reply.size());
  for (const auto& item : reply) scores.push_back(decode_response(item.dump()));
  return scores;
}

}  // namespace stancekit::nli
