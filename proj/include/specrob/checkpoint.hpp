#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "specrob/network.hpp"

namespace specrob {

// JSON checkpoint holding architecture, front end and every parameter
// (round-trip exact).
void save_checkpoint(const Network& net, const std::filesystem::path& path);
std::shared_ptr<Network> load_checkpoint(const std::filesystem::path& path);

// "exec:<command>" starts an external model; anything else is a checkpoint path.
ModelHandle load_model(const std::string& spec);

}  // namespace specrob
