#include "cli_commands.hpp"

#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "specrob/analysis.hpp"
#include "specrob/checkpoint.hpp"
#include "specrob/config.hpp"
#include "specrob/corruptions.hpp"
#include "specrob/dataset.hpp"
#include "specrob/heatmap.hpp"
#include "specrob/metrics.hpp"
#include "specrob/npy.hpp"
#include "specrob/png_render.hpp"
#include "specrob/report.hpp"
#include "specrob/rng.hpp"
#include "specrob/simd.hpp"
#include "specrob/synthetic.hpp"

namespace specrob::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out.string() + ": " + ec.message());
}

// Manifest: everything needed to rerun the command and compare outputs.
void write_manifest(const RunContext& ctx, const json& params, const std::vector<std::string>& outputs) {
  const json hashed = {{"command", ctx.command}, {"seed", ctx.seed}, {"params", params}};
  json m = {{"toolkit", "specrob"},
            {"version", SPECROB_VERSION},
            {"command", ctx.command},
            {"argv", ctx.argv},
            {"seed", ctx.seed},
            {"params", params},
            {"config_hash", fmt::format("{:016x}", config_hash(hashed))},
            {"kernels", std::string(simd::kernels().name)},
            {"outputs", outputs}};
  write_json(ctx.out / "manifest.json", m);
}

SignPolicy parse_sign(const std::string& s) {
  if (s == "random") return SignPolicy::random_per_channel;
  if (s == "positive") return SignPolicy::fixed_positive;
  if (s == "negative") return SignPolicy::fixed_negative;
  throw ConfigError("unknown sign policy '" + s + "' (expected random|positive|negative)");
}

std::shared_ptr<const Network> require_network(const ModelHandle& m) {
  auto net = std::dynamic_pointer_cast<const Network>(m);
  if (!net) throw ConfigError("this command needs gradients, which only built-in models provide");
  return net;
}

Dataset load_eval_data(const std::string& path, std::size_t limit, const Model& m) {
  Dataset d = load_dataset(path, limit);
  if (d.size() == 0) throw std::runtime_error("dataset " + path + " is empty");
  if (d.shape() != m.info().input)
    throw ConfigError("dataset image shape does not match the model input shape");
  for (int l : d.labels)
    if (static_cast<std::size_t>(l) >= m.info().classes) throw ConfigError("dataset label exceeds the model's class count");
  return d;
}

std::vector<std::string> suite_names(const std::string& suite) {
  std::vector<std::string> names;
  if (suite == "default") {
    for (const auto& c : corruption_suite()) names.emplace_back(c.name);
    return names;
  }
  std::size_t start = 0;
  while (start <= suite.size()) {
    const auto comma = suite.find(',', start);
    const std::string name = suite.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!name.empty()) names.push_back(std::string(corruption_info(name).name));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (names.empty()) throw ConfigError("empty corruption suite");
  return names;
}

json heatmap_summary(const HeatMap& h) {
  json s = {{"kind", h.kind == HeatKind::error_rate ? "error_rate" : "layer_delta"},
            {"norm", h.norm},
            {"samples", h.samples},
            {"window", h.window},
            {"model", h.model_id}};
  if (!h.layer.empty()) s["layer"] = h.layer;
  double sum = 0.0;
  for (double v : h.grid) sum += v;
  s["mean"] = sum / static_cast<double>(h.grid.size());
  try {
    s["mean_outside_9x9"] = heatmap_mean_outside(h, 9);
  } catch (const std::invalid_argument&) {
  }
  try {
    s["mean_center_3x3"] = heatmap_mean_inside(h, 3);
  } catch (const std::invalid_argument&) {
  }
  return s;
}

// Shared by the heatmap subcommand and config-driven analyses.
std::vector<std::string> do_heatmap(const Model& model, const Dataset& d, const HeatmapArgs& a, std::uint64_t seed,
                                    const fs::path& out, json& summary) {
  HeatMapOptions opt;
  opt.params = PerturbationParams{a.norm, parse_sign(a.sign), derive_seed(seed, "heatmap"), a.clip};
  opt.window = a.window;
  opt.mirror = !a.full_grid;
  opt.repeats = a.repeats;
  opt.model_id = a.model;
  const HeatMap h = a.layer ? layer_heatmap(model, d.images, *a.layer, opt) : error_heatmap(model, d.images, d.labels, opt);
  write_heatmap_csv(h, out / "heatmap.csv");
  render_heatmap_png(h.grid, h.rows, h.cols, out / "heatmap.png",
                     a.layer ? ColorScale{} : ColorScale{std::make_pair(0.0, 1.0)});
  summary = heatmap_summary(h);
  write_json(out / "summary.json", summary);
  return {"heatmap.csv", "heatmap.png", "summary.json"};
}

std::vector<std::string> do_spectrum(const Dataset& d, const SpectrumArgs& a, std::uint64_t seed, const fs::path& out,
                                     json& summary) {
  SpectralTemplate t;
  if (a.corruption) {
    t = corruption_delta_spectrum(d.images, CorruptionSpec{*a.corruption, a.severity, derive_seed(seed, "spectrum")});
  } else {
    t = dataset_spectrum(d.images);
  }
  write_template_csv(t, out / "spectrum.csv");
  render_heatmap_png(t.values, t.height, t.width, out / "spectrum.png");
  summary = {{"source", t.source}, {"images", d.size()}};
  try {
    summary["energy_fraction"] = energy_fraction(t);
  } catch (const std::exception&) {
    summary["energy_fraction"] = nullptr;
  }
  write_json(out / "summary.json", summary);
  return {"spectrum.csv", "spectrum.png", "summary.json"};
}

std::vector<std::string> do_evaluate(const Model& model, const Dataset& d, const EvaluateArgs& a, std::uint64_t seed,
                                     const fs::path& out, json& summary) {
  const auto names = suite_names(a.suite);
  for (int s : a.severities)
    if (s < 1 || s > 5) throw ConfigError("severities must be 1..5");
  const std::uint64_t eval_seed = derive_seed(seed, "evaluate");
  const MetricsReport rep = accuracy_table(model, d, names, a.severities, eval_seed);
  std::optional<MetricsReport> base;
  if (a.baseline) {
    const ModelHandle b = load_model(*a.baseline);
    if (b->info().input != model.info().input) throw ConfigError("baseline input shape differs from the model");
    base = accuracy_table(*b, d, names, a.severities, eval_seed);
  }
  write_metrics_csv(rep, base ? &*base : nullptr, out / "report.csv");

  std::vector<std::pair<std::string, double>> energy;
  const Dataset sub = d.head(a.energy_limit ? a.energy_limit : d.size());
  for (const auto& n : names)
    energy.emplace_back(n, mean_energy_fraction(sub.images, n, a.severities, derive_seed(seed, "energy")));
  write_energy_csv(energy, out / "energy.csv");

  summary = {{"average_accuracy", rep.average_accuracy}, {"clean_accuracy", rep.clean_accuracy}, {"images", d.size()}};
  json per;
  for (const auto& n : names) per[n] = {{"accuracy", rep.severity_averaged_accuracy.at(n)}};
  if (base) {
    summary["mce"] = mce(rep.error_grid(names), base->error_grid(names));
    summary["baseline_average_accuracy"] = base->average_accuracy;
    for (const auto& n : names) per[n]["baseline_accuracy"] = base->severity_averaged_accuracy.at(n);
  } else {
    summary["mce"] = nullptr;
  }
  summary["per_corruption"] = per;
  write_json(out / "summary.json", summary);
  return {"report.csv", "energy.csv", "summary.json"};
}

std::vector<std::string> do_attack_pgd(const Network& net, const Dataset& d, const PgdAttackArgs& a, std::uint64_t seed,
                                       const fs::path& out, json& summary) {
  const PgdConfig pgd{a.epsilon, a.step_size, a.steps, !a.no_random_init, derive_seed(seed, "attack-pgd")};
  if (!(pgd.epsilon >= 0.0 && pgd.epsilon <= 1.0) || !(pgd.step_size >= 0.0))
    throw ConfigError("pgd needs 0 <= eps <= 1 and a non-negative step size");
  AdvSpectrumOptions opt;
  opt.exclude_misclassified = !a.include_misclassified;
  const AdvSpectrumResult r = adv_perturbation_spectrum(net, d.images, d.labels, pgd, opt);
  Dataset adv;
  adv.classes = d.classes;
  for (std::size_t k = 0; k < r.attacks.size(); ++k) {
    adv.images.push_back(r.attacks[k].adversarial);
    adv.labels.push_back(d.labels[r.indices[k]]);
  }
  save_npy_dir(adv, out / "adversarial");
  write_template_csv(r.spectrum, out / "delta_spectrum.csv");
  render_heatmap_png(r.spectrum.values, r.spectrum.height, r.spectrum.width, out / "delta_spectrum.png");
  {
    std::ofstream f(out / "attacks.csv");
    f << "index,label,success\n";
    for (std::size_t k = 0; k < r.attacks.size(); ++k)
      f << r.indices[k] << ',' << d.labels[r.indices[k]] << ',' << (r.attacks[k].success ? 1 : 0) << '\n';
  }
  summary = {{"attacked", r.attacked},
             {"successes", r.successes},
             {"zero_delta", r.zero_delta},
             {"skipped_misclassified", r.skipped_misclassified},
             {"success_rate", r.success_rate},
             {"energy_fraction", energy_fraction(r.spectrum)},
             {"epsilon", pgd.epsilon},
             {"steps", pgd.steps}};
  write_json(out / "summary.json", summary);
  return {"adversarial/images.npy", "adversarial/labels.npy", "delta_spectrum.csv", "delta_spectrum.png",
          "attacks.csv", "summary.json"};
}

json to_json(const HeatmapArgs& a) {
  return {{"model", a.model}, {"dataset", a.dataset}, {"norm", a.norm}, {"layer", a.layer ? json(*a.layer) : json()},
          {"window", a.window}, {"clip", a.clip}, {"full_grid", a.full_grid}, {"repeats", a.repeats},
          {"limit", a.limit}, {"sign", a.sign}};
}

}  // namespace

int run_synth(const RunContext& ctx, const SynthArgs& a) {
  SyntheticConfig cfg;
  cfg.count = a.count;
  cfg.seed = ctx.seed;
  if (a.texture_amplitude >= 0.0) cfg.texture_amplitude = a.texture_amplitude;
  if (a.format != "npy" && a.format != "cifar") throw ConfigError("format must be npy or cifar");
  const Dataset d = make_synthetic(cfg);
  prepare_out(ctx.out);
  std::vector<std::string> outputs;
  if (a.format == "npy") {
    save_npy_dir(d, ctx.out);
    outputs = {"images.npy", "labels.npy"};
  } else {
    save_cifar_binary(d, ctx.out / "data.bin");
    outputs = {"data.bin"};
  }
  write_manifest(ctx, {{"count", a.count}, {"format", a.format}, {"texture_amplitude", cfg.texture_amplitude}}, outputs);
  std::cout << json({{"images", d.size()}, {"out", ctx.out.string()}}).dump() << '\n';
  return 0;
}

int run_spectrum(const RunContext& ctx, const SpectrumArgs& a) {
  if (a.corruption) corruption_info(*a.corruption);
  if (a.severity < 1 || a.severity > 5) throw ConfigError("severity must be 1..5");
  const Dataset d = load_dataset(a.dataset, a.limit);
  prepare_out(ctx.out);
  json summary;
  const auto outputs = do_spectrum(d, a, ctx.seed, ctx.out, summary);
  write_manifest(ctx,
                 {{"dataset", a.dataset}, {"corruption", a.corruption ? json(*a.corruption) : json()},
                  {"severity", a.severity}, {"limit", a.limit}},
                 outputs);
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_heatmap(const RunContext& ctx, const HeatmapArgs& a) {
  parse_sign(a.sign);
  const ModelHandle m = load_model(a.model);
  const Dataset d = load_eval_data(a.dataset, a.limit, *m);
  prepare_out(ctx.out);
  json summary;
  const auto outputs = do_heatmap(*m, d, a, ctx.seed, ctx.out, summary);
  write_manifest(ctx, to_json(a), outputs);
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_bandcurve(const RunContext& ctx, const BandcurveArgs& a) {
  const FilterMode mode = parse_filter_mode(a.mode);
  const ModelHandle m = load_model(a.model);
  const Dataset d = load_eval_data(a.dataset, a.limit, *m);
  std::vector<std::size_t> bandwidths = a.bandwidths;
  if (bandwidths.empty()) {
    // Every bandwidth whose square is conjugate-symmetric at this size.
    const Shape s = d.shape();
    for (std::size_t b = 1; b <= std::min(s.height, s.width); ++b)
      if (filter_mask(s.height, s.width, FilterSpec{mode, b}).conjugate_symmetric()) bandwidths.push_back(b);
  }
  prepare_out(ctx.out);
  const auto points = bandlimited_error_curve(*m, d.images, d.labels, mode, a.norms, bandwidths,
                                              derive_seed(ctx.seed, "bandcurve"), a.clip);
  {
    std::ofstream f(ctx.out / "bandcurve.csv");
    f << "mode,bandwidth,norm,error\n";
    for (const auto& p : points)
      f << to_string(p.mode) << ',' << p.bandwidth << ',' << format_number(p.norm) << ',' << format_number(p.error) << '\n';
    if (!f) throw std::runtime_error("write failed for bandcurve.csv");
  }
  write_manifest(ctx,
                 {{"model", a.model}, {"dataset", a.dataset}, {"mode", a.mode}, {"norms", a.norms},
                  {"bandwidths", bandwidths}, {"limit", a.limit}, {"clip", a.clip}},
                 {"bandcurve.csv"});
  std::cout << json({{"points", points.size()}, {"out", (ctx.out / "bandcurve.csv").string()}}).dump() << '\n';
  return 0;
}

int run_evaluate(const RunContext& ctx, const EvaluateArgs& a) {
  suite_names(a.suite);
  const ModelHandle m = load_model(a.model);
  const Dataset d = load_eval_data(a.dataset, a.limit, *m);
  prepare_out(ctx.out);
  json summary;
  const auto outputs = do_evaluate(*m, d, a, ctx.seed, ctx.out, summary);
  write_manifest(ctx,
                 {{"model", a.model}, {"dataset", a.dataset}, {"suite", a.suite},
                  {"baseline", a.baseline ? json(*a.baseline) : json()}, {"severities", a.severities},
                  {"limit", a.limit}, {"energy_limit", a.energy_limit}},
                 outputs);
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_scatter(const RunContext& ctx, const ScatterArgs& a) {
  const auto rows = read_metrics_csv(a.report);
  std::map<std::string, double> deltas;
  try {
    deltas = accuracy_deltas(rows);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto energy = read_energy_csv(a.energy);
  std::vector<double> x, y;
  json points = json::array();
  for (const auto& [name, dy] : deltas) {
    const auto it = energy.find(name);
    if (it == energy.end()) throw ConfigError("energy file has no entry for " + name);
    x.push_back(it->second);
    y.push_back(dy);
    points.push_back({{"corruption", name}, {"energy_fraction", it->second}, {"accuracy_delta", dy}});
  }
  const ScatterFit fit = scatter_fit(x, y);
  prepare_out(ctx.out);
  {
    std::ofstream f(ctx.out / "scatter.csv");
    f << "corruption,energy_fraction,accuracy_delta\n";
    for (const auto& p : points)
      f << p["corruption"].get<std::string>() << ',' << format_number(p["energy_fraction"].get<double>()) << ','
        << format_number(p["accuracy_delta"].get<double>()) << '\n';
  }
  const json summary = {{"k", fit.slope}, {"intercept", fit.intercept}, {"r", fit.residual}, {"points", points}};
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx, {{"report", a.report}, {"energy", a.energy}}, {"scatter.csv", "summary.json"});
  std::cout << json({{"k", fit.slope}, {"r", fit.residual}}).dump() << '\n';
  return 0;
}

int run_attack_fourier(const RunContext& ctx, const FourierAttackArgs& a) {
  const ModelHandle m = load_model(a.model);
  const NpyArray arr = read_npy(a.image);
  const Shape s = m->info().input;
  if (arr.count() != s.size()) throw ConfigError("image does not match the model input shape");
  std::vector<double> px = arr.values;
  if (arr.dtype == "|u1")
    for (double& v : px) v /= 255.0;
  const Image x(s, std::move(px));

  const auto comma = a.index.find(',');
  if (comma == std::string::npos) throw ConfigError("--index expects i,j");
  long i = 0, j = 0;
  try {
    i = std::stol(a.index.substr(0, comma));
    j = std::stol(a.index.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("--index expects two integers i,j");
  }
  // Negative indices count from the end, as signed frequencies.
  const long h = static_cast<long>(s.height), w = static_cast<long>(s.width);
  if (i <= -h || i >= h || j <= -w || j >= w) throw ConfigError("--index is outside the frequency grid");
  const FrequencyIndex f{static_cast<std::size_t>((i + h) % h), static_cast<std::size_t>((j + w) % w)};

  const PerturbationParams p{a.norm, parse_sign(a.sign), derive_seed(ctx.seed, "attack-fourier"), a.clip};
  const Image xp = basis_perturb(x, f, p);
  const std::vector<Image> both{x, xp};
  const Logits l = m->forward(both);
  check_finite(l);
  const int before = l.argmax(0), after = l.argmax(1);

  prepare_out(ctx.out);
  write_npy(ctx.out / "perturbed.npy", NpyArray{"<f8", {s.channels, s.height, s.width}, xp.data()});
  json summary = {{"index", {f.i, f.j}},
                  {"norm", a.norm},
                  {"original_prediction", before},
                  {"perturbed_prediction", after},
                  {"flipped", before != after},
                  {"queries", 1}};
  if (a.label) {
    summary["label"] = *a.label;
    summary["originally_correct"] = before == *a.label;
    summary["perturbed_correct"] = after == *a.label;
  }
  write_json(ctx.out / "summary.json", summary);
  write_manifest(ctx,
                 {{"model", a.model}, {"image", a.image}, {"index", a.index}, {"norm", a.norm},
                  {"label", a.label ? json(*a.label) : json()}, {"sign", a.sign}, {"clip", a.clip}},
                 {"perturbed.npy", "summary.json"});
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_attack_pgd(const RunContext& ctx, const PgdAttackArgs& a) {
  const ModelHandle m = load_model(a.model);
  const auto net = require_network(m);
  const Dataset d = load_eval_data(a.dataset, a.limit, *m);
  prepare_out(ctx.out);
  json summary;
  const auto outputs = do_attack_pgd(*net, d, a, ctx.seed, ctx.out, summary);
  write_manifest(ctx,
                 {{"model", a.model}, {"dataset", a.dataset}, {"epsilon", a.epsilon}, {"step_size", a.step_size},
                  {"steps", a.steps}, {"random_init", !a.no_random_init},
                  {"include_misclassified", a.include_misclassified}, {"limit", a.limit}},
                 outputs);
  std::cout << summary.dump() << '\n';
  return 0;
}

int run_train(RunContext ctx, const std::string& config_path, const std::optional<std::string>& out_override) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  ctx.seed = cfg.seed;
  ctx.out = out_override ? fs::path(*out_override) : cfg.output_dir;
  const Dataset train_set = load_dataset(cfg.train_data, cfg.train_limit);
  std::optional<Dataset> test_set;
  if (cfg.test_data) test_set = load_dataset(*cfg.test_data, cfg.test_limit);

  for (const auto& p : cfg.pending_templates) {
    const Dataset sub = train_set.head(1000);
    std::get<MatchedStage>(cfg.train.pipeline[p.stage]).spectral_template =
        corruption_delta_spectrum(sub.images, CorruptionSpec{p.corruption, p.severity, derive_seed(cfg.seed, "template")});
  }

  prepare_out(ctx.out);
  std::ofstream log(ctx.out / "train_log.csv");
  log << "epoch,learning_rate,loss,train_accuracy,test_accuracy\n";
  const auto on_epoch = [&](const EpochLog& e) {
    log << e.epoch << ',' << format_number(e.learning_rate) << ',' << format_number(e.loss) << ','
        << format_number(e.train_accuracy) << ',' << (e.test_accuracy ? format_number(*e.test_accuracy) : "") << '\n';
    log.flush();
    std::cerr << fmt::format("epoch {} lr {:.4g} loss {:.4f} train_acc {:.4f}{}\n", e.epoch, e.learning_rate, e.loss,
                             e.train_accuracy,
                             e.test_accuracy ? fmt::format(" test_acc {:.4f}", *e.test_accuracy) : std::string());
  };
  const TrainResult r = train(train_set, cfg.train, test_set ? &*test_set : nullptr, on_epoch);
  save_checkpoint(*r.model, ctx.out / "model.json");
  std::vector<std::string> outputs{"model.json", "train_log.csv"};

  const Dataset& eval = test_set ? *test_set : train_set;
  for (std::size_t i = 0; i < cfg.analyses.size(); ++i) {
    const auto& spec = cfg.analyses[i];
    const json& p = spec.params;
    const fs::path dir = ctx.out / fmt::format("{:02}_{}", i, spec.type);
    prepare_out(dir);
    json summary;
    std::vector<std::string> produced;
    if (spec.type == "heatmap") {
      HeatmapArgs a;
      a.model = (ctx.out / "model.json").string();
      a.norm = p.value("norm", a.norm);
      if (p.contains("layer") && !p["layer"].is_null()) a.layer = p["layer"].get<std::string>();
      a.window = p.value("window", a.window);
      a.clip = p.value("clip", a.clip);
      a.full_grid = !p.value("mirror", true);
      a.repeats = p.value("repeats", a.repeats);
      a.sign = p.value("sign", a.sign);
      produced = do_heatmap(*r.model, eval.head(p.value("images", std::size_t{500})), a, cfg.seed, dir, summary);
    } else if (spec.type == "spectrum") {
      SpectrumArgs a;
      if (p.contains("corruption")) a.corruption = p["corruption"].get<std::string>();
      a.severity = p.value("severity", a.severity);
      produced = do_spectrum(eval.head(p.value("images", std::size_t{1000})), a, cfg.seed, dir, summary);
    } else if (spec.type == "evaluate") {
      EvaluateArgs a;
      if (p.contains("corruptions")) {
        std::string joined;
        for (const auto& c : p["corruptions"]) joined += (joined.empty() ? "" : ",") + c.get<std::string>();
        a.suite = joined;
      }
      a.severities = p.value("severities", a.severities);
      if (p.contains("baseline")) a.baseline = p["baseline"].get<std::string>();
      produced = do_evaluate(*r.model, eval.head(p.value("images", eval.size())), a, cfg.seed, dir, summary);
    } else if (spec.type == "attack_pgd") {
      PgdAttackArgs a;
      a.epsilon = p.value("epsilon", a.epsilon);
      a.step_size = p.value("step_size", a.step_size);
      a.steps = p.value("steps", a.steps);
      a.no_random_init = !p.value("random_init", true);
      a.include_misclassified = p.value("include_misclassified", false);
      produced = do_attack_pgd(*r.model, eval.head(p.value("images", std::size_t{1000})), a, cfg.seed, dir, summary);
    }
    for (const auto& f : produced) outputs.push_back((fs::path(dir.filename()) / f).string());
    std::cerr << spec.type << ": " << summary.dump() << '\n';
  }

  write_manifest(ctx, cfg.source, outputs);
  json done = {{"model", (ctx.out / "model.json").string()}, {"epochs", r.log.size()}};
  if (!r.log.empty()) {
    done["final_train_accuracy"] = r.log.back().train_accuracy;
    if (r.log.back().test_accuracy) done["final_test_accuracy"] = *r.log.back().test_accuracy;
  }
  std::cout << done.dump() << '\n';
  return 0;
}

}  // namespace specrob::cli
