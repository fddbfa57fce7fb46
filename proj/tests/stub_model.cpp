// Child-process classifier used by the adapter tests. The first argument
// selects a behaviour:
//   constant  every image gets logits [1, 0, 0]
//   loopback  logits are the three channel means; tap "feat" is the same vector
//   malformed replies with text that is not JSON
//   badid     replies with the wrong request id
//   error     replies with an error message
//   crash     exits on the first request
//   silent    never replies
//   nohello   starts without a handshake
#include <chrono>
#include <iostream>
#include <json.hpp>
#include <string>
#include <thread>

#include "specrob/base64.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "constant";
  if (mode == "nohello") {
    std::cout << "hi there" << std::endl;
    return 0;
  }
  std::cout << json{{"type", "hello"},
                    {"classes", 3},
                    {"input_shape", {3, 4, 4}},
                    {"layers", {"feat", "logits"}},
                    {"capabilities", {"logits", "layer_taps"}}}
                   .dump()
            << std::endl;
  std::string line;
  while (std::getline(std::cin, line)) {
    const json req = json::parse(line);
    const auto id = req["id"].get<std::uint64_t>();
    if (mode == "crash") return 3;
    if (mode == "silent") {
      std::this_thread::sleep_for(std::chrono::seconds(30));
      return 0;
    }
    if (mode == "malformed") {
      std::cout << "{oops" << std::endl;
      continue;
    }
    if (mode == "error") {
      std::cout << json{{"type", "error"}, {"id", id}, {"message", "stub refused"}}.dump() << std::endl;
      continue;
    }
    const auto shape = req["shape"].get<std::vector<std::size_t>>();
    const auto data = specrob::decode_f32le(req["data"].get<std::string>());
    const std::size_t n = shape[0], plane = shape[2] * shape[3];
    json logits = json::array();
    std::vector<double> feats;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(3, 0.0);
      if (mode == "constant") {
        row = {1.0, 0.0, 0.0};
      } else {
        for (std::size_t c = 0; c < 3; ++c) {
          for (std::size_t k = 0; k < plane; ++k) row[c] += data[(i * 3 + c) * plane + k];
          row[c] /= static_cast<double>(plane);
        }
      }
      feats.insert(feats.end(), row.begin(), row.end());
      logits.push_back(row);
    }
    json res = {{"type", "result"}, {"id", mode == "badid" ? id + 100 : id}, {"logits", logits}};
    if (req.contains("taps"))
      for (const auto& t : req["taps"])
        res["taps"][t.get<std::string>()] = {{"shape", {n, 3}}, {"data", specrob::encode_f32le(feats)}};
    std::cout << res.dump() << std::endl;
  }
  return 0;
}
