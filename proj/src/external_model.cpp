#include "specrob/external_model.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <json.hpp>
#include <poll.h>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

#include "specrob/base64.hpp"

namespace specrob {

using nlohmann::json;

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw std::runtime_error("external model protocol error: " + what);
}

std::vector<std::size_t> shape_of(const json& j, const char* what) {
  if (!j.is_array()) protocol_error(std::string(what) + " is not an array");
  std::vector<std::size_t> s;
  for (const auto& d : j) {
    if (!d.is_number_unsigned()) protocol_error(std::string(what) + " has a non-integer entry");
    s.push_back(d.get<std::size_t>());
  }
  return s;
}

}  // namespace

ExternalModel::ExternalModel(const std::string& command, std::chrono::milliseconds timeout)
    : command_(command), timeout_(timeout) {
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) throw std::runtime_error("pipe failed: " + std::string(std::strerror(errno)));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw std::runtime_error("pipe failed: " + std::string(std::strerror(errno)));
  }
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("fork failed: " + std::string(std::strerror(errno)));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  json hello;
  try {
    hello = json::parse(read_line());
  } catch (const json::exception& e) {
    protocol_error(std::string("handshake is not JSON: ") + e.what());
  }
  if (hello.value("type", "") != "hello") protocol_error("expected hello");
  if (!hello.contains("classes") || !hello["classes"].is_number_unsigned() || hello["classes"].get<std::size_t>() < 1)
    protocol_error("hello lacks a positive class count");
  info_.classes = hello["classes"].get<std::size_t>();
  const auto in = shape_of(hello.value("input_shape", json()), "input_shape");
  if (in.size() != 3) protocol_error("input_shape must have 3 entries");
  info_.input = Shape{in[0], in[1], in[2]};
  if (hello.contains("layers"))
    for (const auto& l : hello["layers"]) {
      if (!l.is_string()) protocol_error("layer names must be strings");
      info_.layers.push_back(l.get<std::string>());
    }
  info_.logits = false;
  for (const auto& c : hello.value("capabilities", json::array())) {
    const std::string cap = c.is_string() ? c.get<std::string>() : "";
    if (cap == "logits") info_.logits = true;
    if (cap == "layer_taps") info_.layer_taps = true;
  }
  if (!info_.logits) protocol_error("child does not offer logits");
  if (info_.layer_taps && info_.layers.empty()) protocol_error("layer_taps declared without layer names");
  info_.gradients = false;
}

ExternalModel::~ExternalModel() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      usleep(10000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }
}

std::string ExternalModel::read_line() const {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw std::runtime_error("external model timed out");
    pollfd p{from_child_, POLLIN, 0};
    const int r = poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("poll failed: " + std::string(std::strerror(errno)));
    }
    if (r == 0) throw std::runtime_error("external model timed out");
    char chunk[65536];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("read from external model failed: " + std::string(std::strerror(errno)));
    }
    if (n == 0) throw std::runtime_error("external model exited");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalModel::write_line(const std::string& line) const {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(errno == EPIPE ? "external model exited"
                                              : "write to external model failed: " + std::string(std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
}

TapOutputs ExternalModel::request(std::span<const Image> batch, const std::vector<std::string>& layers) const {
  std::vector<double> flat;
  flat.reserve(batch.size() * info_.input.size());
  for (const auto& im : batch) {
    if (im.shape() != info_.input) throw std::invalid_argument("input shape does not match the model");
    flat.insert(flat.end(), im.data().begin(), im.data().end());
  }
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  json req = {{"type", "infer"},
              {"id", id},
              {"shape", {batch.size(), info_.input.channels, info_.input.height, info_.input.width}},
              {"dtype", "f32le"},
              {"data", encode_f32le(flat)}};
  if (!layers.empty()) req["taps"] = layers;
  write_line(req.dump());

  json res;
  try {
    res = json::parse(read_line());
  } catch (const json::exception& e) {
    protocol_error(std::string("reply is not JSON: ") + e.what());
  }
  const std::string type = res.value("type", "");
  if (type == "error") throw std::runtime_error("external model error: " + res.value("message", std::string("unknown")));
  if (type != "result") protocol_error("unexpected message type '" + type + "'");
  if (!res.contains("id") || res["id"] != id) protocol_error("reply id does not match request");

  TapOutputs out;
  out.logits = Logits{batch.size(), info_.classes, {}};
  const json& logits = res.value("logits", json());
  if (!logits.is_array() || logits.size() != batch.size()) protocol_error("logits must have one row per input");
  for (const auto& row : logits) {
    if (!row.is_array() || row.size() != info_.classes) protocol_error("logit row has the wrong length");
    for (const auto& v : row) {
      if (!v.is_number()) protocol_error("logit is not a number");
      out.logits.values.push_back(v.get<double>());
    }
  }
  check_finite(out.logits);
  for (const auto& name : layers) {
    if (!res.contains("taps") || !res["taps"].contains(name)) protocol_error("missing tap '" + name + "'");
    const json& t = res["taps"][name];
    const auto shape = shape_of(t.value("shape", json()), "tap shape");
    if (shape.empty() || shape[0] != batch.size()) protocol_error("tap '" + name + "' has the wrong batch size");
    std::vector<double> data;
    try {
      data = decode_f32le(t.value("data", std::string()));
    } catch (const std::invalid_argument& e) {
      protocol_error(e.what());
    }
    Shape s{1, 1, 1};
    if (shape.size() == 2) s = Shape{shape[1], 1, 1};
    else if (shape.size() == 3) s = Shape{1, shape[1], shape[2]};
    else if (shape.size() == 4) s = Shape{shape[1], shape[2], shape[3]};
    else if (shape.size() != 1) protocol_error("tap rank must be 1..4");
    if (data.size() != batch.size() * s.size()) protocol_error("tap '" + name + "' payload size mismatch");
    auto& dst = out.layers[name];
    for (std::size_t i = 0; i < batch.size(); ++i)
      dst.emplace_back(s, std::vector<double>(data.begin() + static_cast<long>(i * s.size()),
                                              data.begin() + static_cast<long>((i + 1) * s.size())));
  }
  return out;
}

Logits ExternalModel::forward(std::span<const Image> batch) const { return request(batch, {}).logits; }

TapOutputs ExternalModel::forward_with_taps(std::span<const Image> batch, const std::vector<std::string>& layers) const {
  if (!layers.empty() && !info_.layer_taps) throw std::logic_error("external model does not offer layer taps");
  for (const auto& name : layers)
    if (std::find(info_.layers.begin(), info_.layers.end(), name) == info_.layers.end())
      throw std::invalid_argument("unknown layer '" + name + "'");
  return request(batch, layers);
}

}  // namespace specrob
