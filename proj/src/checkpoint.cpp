#include "specrob/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "specrob/external_model.hpp"

namespace specrob {

using nlohmann::json;

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  const ArchSpec& a = net.arch();
  json j;
  j["format"] = "specrob-checkpoint";
  j["version"] = 1;
  j["arch"] = {{"kind", to_string(a.kind)},
               {"input", {a.input.channels, a.input.height, a.input.width}},
               {"classes", a.classes},
               {"conv1_channels", a.conv1_channels},
               {"conv2_channels", a.conv2_channels},
               {"hidden", a.hidden},
               {"input_offset", a.input_offset}};
  if (net.front_end())
    j["front_end"] = {{"mode", to_string(net.front_end()->mode)}, {"bandwidth", net.front_end()->bandwidth}};
  else
    j["front_end"] = nullptr;
  j["params"] = net.parameters();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::shared_ptr<Network> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.value("format", "") != "specrob-checkpoint") throw std::runtime_error(path.string() + " is not a checkpoint");
  try {
    const json& ja = j.at("arch");
    ArchSpec a;
    a.kind = parse_arch(ja.at("kind").get<std::string>());
    const auto in_shape = ja.at("input").get<std::vector<std::size_t>>();
    if (in_shape.size() != 3) throw std::runtime_error("checkpoint input shape must have 3 entries");
    a.input = Shape{in_shape[0], in_shape[1], in_shape[2]};
    a.classes = ja.at("classes").get<std::size_t>();
    a.conv1_channels = ja.at("conv1_channels").get<std::size_t>();
    a.conv2_channels = ja.at("conv2_channels").get<std::size_t>();
    a.hidden = ja.at("hidden").get<std::size_t>();
    a.input_offset = ja.at("input_offset").get<double>();
    std::optional<FilterSpec> fe;
    if (!j.at("front_end").is_null())
      fe = FilterSpec{parse_filter_mode(j["front_end"].at("mode").get<std::string>()),
                      j["front_end"].at("bandwidth").get<std::size_t>()};
    auto net = std::make_shared<Network>(a, 0, fe);
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net->parameters().size())
      throw std::runtime_error("checkpoint has " + std::to_string(params.size()) + " parameters, architecture needs " +
                               std::to_string(net->parameters().size()));
    net->parameters() = std::move(params);
    return net;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

ModelHandle load_model(const std::string& spec) {
  if (spec.rfind("exec:", 0) == 0) return std::make_shared<ExternalModel>(spec.substr(5));
  return load_checkpoint(spec);
}

}  // namespace specrob
