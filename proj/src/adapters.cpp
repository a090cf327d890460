#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <httplib.h>
#include <json.hpp>

#include "gpattr/model.hpp"

namespace gpattr {

namespace {

using nlohmann::json;

double parse_scalar_reply(const std::string& body, const char* key) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw transport_error(std::string("malformed model response: ") + e.what());
  }
  if (!j.is_object() || !j.contains(key) || !j[key].is_number())
    throw transport_error(std::string("malformed model response: missing numeric '") + key + "'");
  const double y = j[key].get<double>();
  if (!std::isfinite(y)) throw transport_error("model response is not finite");
  return y;
}

std::string request_line(const vec& x) { return json{{"x", x}}.dump(); }

}  // namespace

subprocess_model::subprocess_model(std::size_t dimension, std::string command, double timeout_s)
    : model(dimension), command_(std::move(command)), timeout_s_(timeout_s) {
  if (command_.empty()) throw config_error("subprocess model needs a command");
  static const bool ignore_sigpipe = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)ignore_sigpipe;
}

subprocess_model::~subprocess_model() { stop(); }

void subprocess_model::start() const {
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw transport_error(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw transport_error(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw transport_error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void subprocess_model::stop() const {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
  buffer_.clear();
}

// Empty optional means the child went away (EOF or broken pipe).
std::optional<std::string> subprocess_model::round_trip(const std::string& line) const {
  const std::string msg = line + "\n";
  std::size_t sent = 0;
  while (sent < msg.size()) {
    const ssize_t n = ::write(to_child_, msg.data() + sent, msg.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE) return std::nullopt;
      throw transport_error(std::string("write to model process: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s_);
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return reply;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw transport_error("model process timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw transport_error(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw transport_error(std::string("read from model process: ") + std::strerror(errno));
    }
    if (n == 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double subprocess_model::do_evaluate(const vec& x) const {
  if (auto it = cache_.find(x); it != cache_.end()) return it->second;
  const std::string line = request_line(x);
  if (pid_ < 0) start();
  auto reply = round_trip(line);
  if (!reply) {
    // restart once on EOF
    stop();
    start();
    reply = round_trip(line);
    if (!reply) {
      stop();
      throw transport_error("model process exited without answering");
    }
  }
  const double y = parse_scalar_reply(*reply, "y");
  cache_.emplace(x, y);
  return y;
}

struct http_model::impl {
  impl(const std::string& base, double timeout_s) : client(origin_of(base)), prefix(path_of(base)) {
    const auto sec = static_cast<time_t>(timeout_s);
    const auto usec = static_cast<time_t>((timeout_s - double(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
  }

  static std::string origin_of(const std::string& url) {
    const auto scheme = url.find("://");
    const auto start = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = url.find('/', start);
    return slash == std::string::npos ? url : url.substr(0, slash);
  }
  static std::string path_of(const std::string& url) {
    const auto scheme = url.find("://");
    const auto start = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = url.find('/', start);
    if (slash == std::string::npos) return "";
    std::string p = url.substr(slash);
    while (!p.empty() && p.back() == '/') p.pop_back();
    return p;
  }

  std::string post(const std::string& body) {
    auto res = client.Post(prefix + "/predict", body, "application/json");
    if (!res) throw transport_error("HTTP request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw transport_error("HTTP status " + std::to_string(res->status) + " from /predict");
    return res->body;
  }

  httplib::Client client;
  std::string prefix;
  std::optional<bool> batch;
  std::map<vec, double> cache;
};

http_model::http_model(std::size_t dimension, std::string base_url, double timeout_s)
    : model(dimension), p_(std::make_unique<impl>(base_url, timeout_s)) {}

http_model::~http_model() = default;

bool http_model::supports_batch() const {
  if (!p_->batch) {
    auto res = p_->client.Get(p_->prefix + "/capabilities");
    bool batch = false;
    if (res && res->status == 200) {
      try {
        const auto j = json::parse(res->body);
        batch = j.is_object() && j.value("batch", false);
      } catch (const json::exception&) {
        batch = false;
      }
    }
    p_->batch = batch;
  }
  return *p_->batch;
}

double http_model::do_evaluate(const vec& x) const {
  if (auto it = p_->cache.find(x); it != p_->cache.end()) return it->second;
  const double y = parse_scalar_reply(p_->post(request_line(x)), "y");
  p_->cache.emplace(x, y);
  return y;
}

vec http_model::do_evaluate_batch(const std::vector<vec>& xs) const {
  if (xs.size() < 2 || !supports_batch()) return model::do_evaluate_batch(xs);
  const std::string body = p_->post(json{{"xs", xs}}.dump());
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw transport_error(std::string("malformed batch response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("ys") || !j["ys"].is_array() || j["ys"].size() != xs.size())
    throw transport_error("malformed batch response: 'ys' missing or wrong length");
  vec out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!j["ys"][i].is_number()) throw transport_error("malformed batch response: non-numeric entry");
    out.push_back(j["ys"][i].get<double>());
    p_->cache.emplace(xs[i], out.back());
  }
  return out;
}

}  // namespace gpattr
