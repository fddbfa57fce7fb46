#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <sys/types.h>

#include "specrob/model.hpp"

namespace specrob {

// Adapter for a classifier running as a child process that speaks
// newline-delimited JSON on stdin/stdout:
//   child:  {"type":"hello","classes":K,"input_shape":[C,H,W],"layers":[...],"capabilities":[...]}
//   parent: {"type":"infer","id":n,"shape":[N,C,H,W],"dtype":"f32le","data":"<base64>","taps":[...]}
//   child:  {"type":"result","id":n,"logits":[[...]...],"taps":{name:{"shape":[...],"data":"<base64>"}}}
//           or {"type":"error","id":n,"message":"..."}
// Requests are serialized; run several adapters for parallelism.
class ExternalModel final : public Model {
 public:
  explicit ExternalModel(const std::string& command,
                         std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~ExternalModel() override;
  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  const ModelInfo& info() const override { return info_; }
  Logits forward(std::span<const Image> batch) const override;
  TapOutputs forward_with_taps(std::span<const Image> batch,
                               const std::vector<std::string>& layers) const override;

 private:
  std::string read_line() const;
  void write_line(const std::string& line) const;
  TapOutputs request(std::span<const Image> batch, const std::vector<std::string>& layers) const;

  std::string command_;
  std::chrono::milliseconds timeout_;
  ModelInfo info_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::mutex mutex_;
  mutable std::string buffer_;
  mutable std::uint64_t next_id_ = 1;
};

}  // namespace specrob
