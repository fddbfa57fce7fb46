#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>

#include "../support/oracles.hpp"
#include "specrob/base64.hpp"
#include "specrob/checkpoint.hpp"
#include "specrob/config.hpp"
#include "specrob/dataset.hpp"
#include "specrob/external_model.hpp"
#include "specrob/heatmap.hpp"
#include "specrob/npy.hpp"
#include "specrob/png_render.hpp"
#include "specrob/report.hpp"
#include "specrob/synthetic.hpp"

using namespace specrob;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("specrob_test_" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

std::string stub(const std::string& mode) { return std::string("exec:") + STUB_MODEL_PATH + " " + mode; }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("npy round trip for every dtype") {
    const std::vector<double> v{0, 1, 2, 250, 7, 3};
    for (const char* dtype : {"<f4", "<f8", "<i4", "<i8", "|u1"}) {
      const fs::path p = scratch(std::string("a") + (dtype + 1) + ".npy");
      write_npy(p, {dtype, {2, 3}, v});
      const NpyArray a = read_npy(p);
      CHECK(a.dtype == dtype);
      CHECK(a.shape == std::vector<std::size_t>{2, 3});
      CHECK(a.values == v);
    }
  }

  TEST_CASE("npy reader handles a hand-written v1 header and rejects garbage") {
    std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }";
    header.append(127 - 10 - header.size(), ' ');
    header += '\n';
    std::string bytes("\x93NUMPY\x01\x00", 8);
    bytes += static_cast<char>(header.size() & 0xff);
    bytes += static_cast<char>(header.size() >> 8);
    bytes += header;
    const double vals[2] = {1.5, -2.0};
    bytes.append(reinterpret_cast<const char*>(vals), sizeof vals);
    const fs::path p = scratch("hand.npy");
    write_bytes(p, bytes);
    const NpyArray a = read_npy(p);
    CHECK(a.values == std::vector<double>{1.5, -2.0});

    write_bytes(p, "not an npy file");
    CHECK_THROWS(read_npy(p));
    write_bytes(p, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS(read_npy(p));
    std::string fortran = bytes;
    fortran.replace(fortran.find("False"), 5, "True ");
    write_bytes(p, fortran);
    CHECK_THROWS(read_npy(p));
  }

  TEST_CASE("dataset round trips through npy and CIFAR binary") {
    SyntheticConfig sc;
    sc.count = 20;
    const Dataset d = make_synthetic(sc);
    const fs::path dir = scratch("npyset");
    save_npy_dir(d, dir);
    const Dataset back = load_dataset(dir);
    CHECK(back.labels == d.labels);
    CHECK(back.images == d.images);
    CHECK(load_dataset(dir, 5).size() == 5);

    const fs::path bin = scratch("set.bin");
    save_cifar_binary(d, bin);
    CHECK(fs::file_size(bin) == 20 * 3073);
    const Dataset c = load_dataset(bin);
    CHECK(c.labels == d.labels);
    CHECK(c.classes == 10);
    CHECK(oracle::max_abs_diff(c.images[3].values(), d.images[3].values()) <= 0.5 / 255 + 1e-12);

    write_bytes(bin, std::string(3000, '\0'));
    CHECK_THROWS(load_cifar_binary(bin));
    std::string rec(3073, '\0');
    rec[0] = 12;
    write_bytes(bin, rec);
    CHECK_THROWS(load_cifar_binary(bin));
  }

  TEST_CASE("synthetic generator is deterministic, balanced enough and in range") {
    SyntheticConfig sc;
    sc.count = 500;
    const Dataset a = make_synthetic(sc), b = make_synthetic(sc);
    CHECK(a.images == b.images);
    std::vector<int> counts(10, 0);
    for (int y : a.labels) ++counts[static_cast<std::size_t>(y)];
    for (int c : counts) CHECK(c > 20);
    for (const auto& x : a.images)
      for (double v : x.values()) CHECK((v >= 0.0 && v <= 1.0));
    sc.seed = 2;
    CHECK(make_synthetic(sc).images != a.images);
  }

  TEST_CASE("checkpoint round trip is exact") {
    ArchSpec arch;
    arch.conv1_channels = 5;
    const Network net(arch, 77, FilterSpec{FilterMode::low, 15});
    const fs::path p = scratch("ckpt.json");
    save_checkpoint(net, p);
    const auto back = load_checkpoint(p);
    CHECK(back->parameters() == net.parameters());
    CHECK(back->front_end() == net.front_end());
    CHECK(back->arch().conv1_channels == 5);
    write_bytes(p, "{\"format\": \"other\"}");
    CHECK_THROWS(load_checkpoint(p));
  }

  TEST_CASE("base64 and f32 packing") {
    const std::vector<std::uint8_t> bytes{0, 1, 2, 250, 255};
    CHECK(base64_encode(bytes) == "AAEC+v8=");
    CHECK(base64_decode("AAEC+v8=") == bytes);
    CHECK(base64_encode({}) == "");
    CHECK_THROWS(base64_decode("AAE*"));
    CHECK_THROWS(base64_decode("AAE"));
    const std::vector<double> v{0.5, -1.25, 3.0};
    CHECK(decode_f32le(encode_f32le(v)) == v);
  }

  TEST_CASE("CSV writers read back exactly") {
    SpectralTemplate t{2, 3, {0.1, 1.0 / 3.0, 2.0, 1e-300, 5.0, 6.0}, "x"};
    const fs::path p = scratch("t.csv");
    write_template_csv(t, p);
    CHECK(read_template_csv(p).values == t.values);
    CHECK(format_number(0.1) == "0.1");

    MetricsReport r;
    r.rows = {{"fog", 1, 0.25}, {"fog", 2, 0.5}};
    MetricsReport base = r;
    base.rows[0].error = 0.125;
    base.rows[1].error = 0.25;
    const fs::path m = scratch("m.csv");
    write_metrics_csv(r, &base, m);
    const auto rows = read_metrics_csv(m);
    REQUIRE(rows.size() == 2);
    CHECK(*rows[1].baseline_error == 0.25);
    CHECK(accuracy_deltas(rows).at("fog") == doctest::Approx(-100.0 * (0.125 + 0.25) / 2));
    write_metrics_csv(r, nullptr, m);
    CHECK_THROWS(accuracy_deltas(read_metrics_csv(m)));

    const fs::path e = scratch("e.csv");
    write_energy_csv({{"fog", 0.125}, {"contrast", 0.5}}, e);
    CHECK(read_energy_csv(e).at("contrast") == 0.5);
  }

  TEST_CASE("heat map CSV and PNG") {
    HeatMap h;
    h.height = h.width = 4;
    h.rows = h.cols = 4;
    h.grid.assign(16, 0.0);
    h.grid[5] = 1.0;
    const fs::path csv = scratch("h.csv"), png = scratch("h.png");
    write_heatmap_csv(h, csv);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "row,col,u,v,value");
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == 16);
    render_heatmap_png(h.grid, 4, 4, png);
    std::ifstream pf(png, std::ios::binary);
    char sig[8];
    pf.read(sig, 8);
    CHECK(std::string(sig + 1, 3) == "PNG");
    CHECK(ramp_index(-1.0, 0.0, 1.0) == 0);
    CHECK(ramp_index(2.0, 0.0, 1.0) == 255);
    CHECK(color_ramp()[0] != color_ramp()[255]);
  }

  TEST_CASE("shipped example configs parse") {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(CONFIG_DIR)) {
      if (e.path().extension() != ".json") continue;
      ++n;
      CHECK_NOTHROW(load_experiment_config(e.path()));
    }
    CHECK(n >= 4);
    const auto adv = load_experiment_config(fs::path(CONFIG_DIR) / "adversarial.json");
    CHECK(std::holds_alternative<AdversarialStage>(adv.train.pipeline.back()));
    CHECK(load_experiment_config(fs::path(CONFIG_DIR) / "matched_fog.json").pending_templates.size() == 1);
  }

  TEST_CASE("config parsing is strict") {
    const json good = json::parse(R"({
      "seed": 4, "dataset": {"train": "t"},
      "model": {"arch": "mlp", "front_end": {"mode": "low", "bandwidth": 15}},
      "train": {"epochs": 2, "pipeline": [{"type": "flip_crop"}, {"type": "gaussian", "sigma": 0.1},
                {"type": "matched", "corruption": "fog", "severity": 3}]},
      "analyses": [{"type": "heatmap", "norm": 4}]})");
    const auto cfg = parse_experiment_config(good);
    CHECK(cfg.seed == 4);
    CHECK(cfg.train.arch.kind == Arch::mlp);
    CHECK(cfg.train.front_end == FilterSpec{FilterMode::low, 15});
    CHECK(cfg.train.pipeline.size() == 3);
    CHECK(cfg.pending_templates.size() == 1);
    CHECK(config_hash(good) == config_hash(json::parse(good.dump())));

    auto bad = [&](const char* pointer, json value) {
      json j = good;
      j[json::json_pointer(pointer)] = value;
      CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
    };
    bad("/extra", 1);
    bad("/seed", -1);
    bad("/model/arch", "resnet");
    bad("/model/front_end/bandwidth", 0);
    bad("/train/epochs", "two");
    bad("/train/momentum", 2.0);
    bad("/train/pipeline/1/type", "mixup");
    bad("/train/pipeline/1/sigmaa", 0.1);
    bad("/train/pipeline/2/corruption", "snow");
    bad("/analyses/0/type", "tsne");
    bad("/analyses/0/colour", "red");
    json missing = good;
    missing.erase("dataset");
    CHECK_THROWS_AS(parse_experiment_config(missing), ConfigError);
  }

  TEST_CASE("external model: handshake, logits and taps") {
    const ModelHandle m = load_model(stub("loopback"));
    CHECK(m->info().classes == 3);
    CHECK(m->info().input == Shape{3, 4, 4});
    CHECK(m->info().layer_taps);
    CHECK_FALSE(m->info().gradients);
    Image x({3, 4, 4}, 0.0);
    for (std::size_t k = 0; k < 16; ++k) x.channel(1)[k] = 0.5;
    const std::vector<Image> batch{x, Image({3, 4, 4}, 0.25)};
    const Logits l = m->forward(batch);
    CHECK(l.rows == 2);
    CHECK(l.row(0)[1] == 0.5);
    CHECK(m->predict(batch)[0] == 1);
    const auto taps = m->forward_with_taps(batch, {"feat"});
    CHECK(taps.layers.at("feat")[1].values()[2] == 0.25);
    CHECK_THROWS_AS(m->forward_with_taps(batch, {"conv9"}), std::invalid_argument);
    CHECK_THROWS_AS(m->forward(std::vector<Image>{Image({3, 5, 5})}), std::invalid_argument);

    HeatMapOptions opt;
    opt.params.norm = 0.5;
    const std::vector<int> labels{1, 0};
    const auto h = error_heatmap(*load_model(stub("constant")), batch, labels, opt);
    for (double v : h.grid) CHECK(v == 0.5);
  }

  TEST_CASE("external model failures are reported") {
    const std::vector<Image> batch{Image({3, 4, 4}, 0.5)};
    CHECK_THROWS_WITH_AS(load_model(stub("malformed"))->forward(batch),
                         doctest::Contains("protocol error"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_model(stub("badid"))->forward(batch), doctest::Contains("id"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_model(stub("error"))->forward(batch), doctest::Contains("stub refused"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(load_model(stub("crash"))->forward(batch), doctest::Contains("exited"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_model(stub("nohello")), doctest::Contains("protocol error"), std::runtime_error);
    ExternalModel slow(std::string(STUB_MODEL_PATH) + " silent", std::chrono::milliseconds(300));
    CHECK_THROWS_WITH_AS(slow.forward(batch), doctest::Contains("timed out"), std::runtime_error);
    CHECK_THROWS(load_model("exec:/nonexistent/binary"));
  }
}
