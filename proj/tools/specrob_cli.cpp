#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "cli_commands.hpp"
#include "specrob/config.hpp"

namespace {

using specrob::cli::RunContext;

int report_error(int code, const std::string& kind, const std::string& message) {
  nlohmann::json j = {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  RunContext ctx;
  for (int i = 0; i < argc; ++i) ctx.argv.emplace_back(argv[i]);
  std::string out = "out";

  CLI::App app{"Fourier-domain robustness toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPECROB_VERSION);

  // Options every analysis command takes.
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", out, "output directory")->capture_default_str();
    sub->add_option("--seed", ctx.seed, "base seed")->capture_default_str();
  };

  specrob::cli::SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate the synthetic 32x32 10-class dataset");
  common(c_synth);
  c_synth->add_option("--count", synth.count)->capture_default_str();
  c_synth->add_option("--format", synth.format, "npy or cifar")->capture_default_str();
  c_synth->add_option("--texture-amplitude", synth.texture_amplitude);

  specrob::cli::SpectrumArgs spec;
  auto* c_spec = app.add_subcommand("spectrum", "mean magnitude spectrum of a dataset or corruption delta");
  common(c_spec);
  c_spec->add_option("--dataset", spec.dataset)->required();
  c_spec->add_option("--corruption", spec.corruption);
  c_spec->add_option("--severity", spec.severity)->capture_default_str();
  c_spec->add_option("--limit", spec.limit, "0 means all images");

  std::string config_path;
  std::optional<std::string> train_out;
  auto* c_train = app.add_subcommand("train", "train a model from a JSON experiment config");
  c_train->add_option("--config", config_path)->required();
  c_train->add_option("--out,-o", train_out, "overrides output_dir from the config");

  specrob::cli::HeatmapArgs heat;
  auto* c_heat = app.add_subcommand("heatmap", "Fourier sensitivity heat map");
  common(c_heat);
  c_heat->add_option("--model", heat.model, "checkpoint path or exec:<command>")->required();
  c_heat->add_option("--dataset", heat.dataset)->required();
  c_heat->add_option("--norm", heat.norm)->capture_default_str();
  c_heat->add_option("--layer", heat.layer);
  c_heat->add_option("--window", heat.window, "centered k x k window, 0 for full grid");
  c_heat->add_flag("--clip", heat.clip, "clip perturbed images to [0,1]");
  c_heat->add_flag("--full-grid", heat.full_grid, "evaluate every cell instead of one per conjugate pair");
  c_heat->add_option("--repeats", heat.repeats)->capture_default_str();
  c_heat->add_option("--limit", heat.limit)->capture_default_str();
  c_heat->add_option("--sign", heat.sign, "random, positive or negative")->capture_default_str();

  specrob::cli::BandcurveArgs band;
  auto* c_band = app.add_subcommand("bandcurve", "error under band-limited noise versus bandwidth");
  common(c_band);
  c_band->add_option("--model", band.model)->required();
  c_band->add_option("--dataset", band.dataset)->required();
  c_band->add_option("--mode", band.mode, "low or high")->capture_default_str();
  c_band->add_option("--norms", band.norms)->delimiter(',');
  c_band->add_option("--bandwidths", band.bandwidths)->delimiter(',');
  c_band->add_option("--limit", band.limit)->capture_default_str();
  c_band->add_flag("--clip", band.clip);

  specrob::cli::EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "accuracy over the corruption suite");
  common(c_eval);
  c_eval->add_option("--model", eval.model)->required();
  c_eval->add_option("--dataset", eval.dataset)->required();
  c_eval->add_option("--suite", eval.suite, "default or a comma-separated list")->capture_default_str();
  c_eval->add_option("--baseline", eval.baseline, "baseline model for mCE");
  c_eval->add_option("--severities", eval.severities)->delimiter(',');
  c_eval->add_option("--limit", eval.limit, "0 means all images");
  c_eval->add_option("--energy-limit", eval.energy_limit)->capture_default_str();

  specrob::cli::ScatterArgs scat;
  auto* c_scat = app.add_subcommand("scatter", "fit accuracy change against high-frequency energy");
  common(c_scat);
  c_scat->add_option("--report", scat.report, "report.csv with baseline_error")->required();
  c_scat->add_option("--energy", scat.energy, "energy.csv")->required();

  auto* c_attack = app.add_subcommand("attack", "adversarial attacks");
  c_attack->require_subcommand(1);

  specrob::cli::FourierAttackArgs fa;
  auto* c_fa = c_attack->add_subcommand("fourier", "single Fourier basis perturbation");
  common(c_fa);
  c_fa->add_option("--model", fa.model)->required();
  c_fa->add_option("--image", fa.image, ".npy image of shape C,H,W")->required();
  c_fa->add_option("--index", fa.index, "frequency i,j (negative allowed)")->required();
  c_fa->add_option("--norm", fa.norm)->capture_default_str();
  c_fa->add_option("--label", fa.label);
  c_fa->add_option("--sign", fa.sign)->capture_default_str();
  bool no_clip = false;
  c_fa->add_flag("--no-clip", no_clip);

  specrob::cli::PgdAttackArgs pa;
  auto* c_pa = c_attack->add_subcommand("pgd", "L-infinity PGD and the spectrum of its perturbations");
  common(c_pa);
  c_pa->add_option("--model", pa.model)->required();
  c_pa->add_option("--dataset", pa.dataset)->required();
  c_pa->add_option("--eps", pa.epsilon)->capture_default_str();
  c_pa->add_option("--step", pa.step_size)->capture_default_str();
  c_pa->add_option("--steps", pa.steps)->capture_default_str();
  c_pa->add_flag("--no-random-init", pa.no_random_init);
  c_pa->add_flag("--include-misclassified", pa.include_misclassified);
  c_pa->add_option("--limit", pa.limit)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(1, "usage", e.what());
  }

  ctx.out = out;
  try {
    if (*c_synth) return ctx.command = "synth", specrob::cli::run_synth(ctx, synth);
    if (*c_spec) return ctx.command = "spectrum", specrob::cli::run_spectrum(ctx, spec);
    if (*c_train) return ctx.command = "train", specrob::cli::run_train(ctx, config_path, train_out);
    if (*c_heat) return ctx.command = "heatmap", specrob::cli::run_heatmap(ctx, heat);
    if (*c_band) return ctx.command = "bandcurve", specrob::cli::run_bandcurve(ctx, band);
    if (*c_eval) return ctx.command = "evaluate", specrob::cli::run_evaluate(ctx, eval);
    if (*c_scat) return ctx.command = "scatter", specrob::cli::run_scatter(ctx, scat);
    if (*c_fa) {
      fa.clip = !no_clip;
      ctx.command = "attack fourier";
      return specrob::cli::run_attack_fourier(ctx, fa);
    }
    if (*c_pa) return ctx.command = "attack pgd", specrob::cli::run_attack_pgd(ctx, pa);
  } catch (const specrob::ConfigError& e) {
    return report_error(1, "config", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(1, "usage", e.what());
  } catch (const std::exception& e) {
    return report_error(2, "runtime", e.what());
  }
  return report_error(1, "usage", "no command given");
}
