#include "sanm/cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "sanm/cli/manifest.hpp"
#include "sanm/data/generator.hpp"
#include "sanm/metrics/image_metrics.hpp"
#include "sanm/sampler/edm.hpp"
#include "sanm/training/checkpoint.hpp"
#include "sanm/verification/suite.hpp"

namespace sanm::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDecoderStream = 11;
constexpr std::uint64_t kEmbedderStream = 12;

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw fs::filesystem_error("cannot open for writing", path, std::make_error_code(std::errc::io_error));
  return os;
}

void check_written(std::ostream& os, const fs::path& path) {
  if (!os) throw fs::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

std::vector<training::PreparedClip> prepare(const std::vector<const data::SyntheticClip*>& clips, const Pretrained& p,
                                            const models::ModelConfig& cfg) {
  std::vector<training::PreparedClip> out;
  out.reserve(clips.size());
  for (const auto* c : clips) out.push_back(training::prepare_clip(*c, p.autoencoder.encoder, p.embedder, cfg));
  return out;
}

models::DenoiserModel model_from_checkpoint(const training::Checkpoint& ckpt) {
  if (!ckpt.metadata.contains("model")) {
    throw training::CheckpointError(training::CheckpointErrorCode::CorruptManifest, "checkpoint: no model config");
  }
  const auto cfg = training::model_config_from_json(ckpt.metadata.at("model"));
  SeededRng rng(0);
  auto model = models::DenoiserModel::random(cfg, rng);
  training::restore_params(model, ckpt);
  return model;
}

}  // namespace

Pretrained load_pretrained(const fs::path& path) {
  const auto ckpt = training::load_checkpoint(path);
  if (!ckpt.metadata.contains("model")) {
    throw training::CheckpointError(training::CheckpointErrorCode::CorruptManifest, "pretrained: no model config");
  }
  Pretrained p;
  p.config = training::model_config_from_json(ckpt.metadata.at("model"));
  SeededRng rng(0);
  p.autoencoder = {models::LatentEncoder::random(p.config, rng), models::ToyDecoder::random(p.config, rng)};
  p.embedder = models::IdentityEmbedder::random(p.config, rng);
  training::restore_params(p.autoencoder.encoder, ckpt);
  training::restore_params(p.autoencoder.decoder, ckpt);
  training::restore_params(p.embedder, ckpt);
  return p;
}

models::DenoiserModel load_model(const fs::path& path) { return model_from_checkpoint(training::load_checkpoint(path)); }

void cmd_generate(const RunConfig& config, const GenerateOptions& o) {
  const std::uint64_t seed = o.seed.value_or(config.data_seed);
  const auto ds = data::generate_dataset(config.data, seed);
  fs::create_directories(o.out);
  auto artifacts = data::write_dataset(o.out, ds);
  write_run_manifest(o.out, "generate", config, {{"seed", seed}}, std::move(artifacts));
}

void cmd_pretrain(const RunConfig& config, const PretrainOptions& o) {
  const auto ds = o.data ? data::load_dataset(*o.data) : data::generate_dataset(config.data, config.data_seed);
  const auto model_cfg = config.model_config();
  const auto train = ds.split("train");
  const auto eval = ds.split("eval");

  const SeededRng master(config.train.seed);
  SeededRng dec_rng = master.derive(kDecoderStream);
  SeededRng emb_rng = master.derive(kEmbedderStream);
  const auto ae = training::pretrain_decoder(train, model_cfg, config.decoder, dec_rng);
  const auto embedder = training::pretrain_identity_embedder(train, model_cfg, config.embedder, emb_rng);

  const auto& held_out = eval.empty() ? train : eval;
  const double psnr = training::reconstruction_psnr(ae, held_out);
  const auto sep = training::embedder_separation(embedder, held_out);

  training::Checkpoint ckpt;
  training::append_params(ckpt.tensors, ae.encoder);
  training::append_params(ckpt.tensors, ae.decoder);
  training::append_params(ckpt.tensors, embedder);
  ckpt.metadata = {{"model", training::model_config_to_json(model_cfg)},
                   {"seed", config.train.seed},
                   {"heldout_psnr", psnr},
                   {"heldout_same_cos", sep.same_mean},
                   {"heldout_diff_cos", sep.diff_mean}};
  fs::create_directories(o.out);
  training::save_checkpoint(o.out / "pretrained.sanm", ckpt);

  auto os = open_out(o.out / "pretrain_report.txt");
  os.precision(17);
  os << "heldout_psnr=" << psnr << "\nheldout_same_cos=" << sep.same_mean << "\nheldout_diff_cos=" << sep.diff_mean
     << "\nheldout_clips=" << held_out.size() << '\n';
  check_written(os, o.out / "pretrain_report.txt");
  os.close();

  nlohmann::json inputs = {{"train_seed", config.train.seed}};
  inputs["data"] = o.data ? nlohmann::json(o.data->generic_string()) : nlohmann::json(config.data_seed);
  write_run_manifest(o.out, "pretrain", config, inputs, {"pretrained.sanm", "pretrain_report.txt"});
}

void cmd_train(const RunConfig& config, const TrainOptions& o) {
  const auto pre = load_pretrained(o.pretrained);
  auto model_cfg = pre.config;
  model_cfg.align = o.align.value_or(config.model.align);
  model_cfg.temporal = config.model.temporal;
  const auto ds = data::load_dataset(o.data);
  const auto clips = prepare(ds.split("train"), pre, model_cfg);

  training::TrainConfig tc = config.train;
  if (o.epochs) tc.epochs = *o.epochs;
  auto state = training::TrainState::init(model_cfg, tc);
  fs::create_directories(o.out);
  auto log = open_out(o.out / "train_log.txt");
  log.precision(17);
  double last = 0.0;
  for (std::size_t e = 0; e < tc.epochs; ++e) {
    const auto stats = training::train_epoch(state, clips, tc);
    log << "epoch=" << stats.epoch << " loss=" << stats.mean_loss << '\n';
    last = stats.mean_loss;
  }
  check_written(log, o.out / "train_log.txt");
  log.close();

  training::Checkpoint ckpt;
  training::append_params(ckpt.tensors, state.model);
  ckpt.metadata = {{"model", training::model_config_to_json(model_cfg)},
                   {"epochs", tc.epochs},
                   {"lr", tc.lr},
                   {"seed", tc.seed},
                   {"final_loss", last}};
  training::save_checkpoint(o.out / "model.sanm", ckpt);
  write_run_manifest(o.out, "train", config,
                     {{"data", o.data.generic_string()},
                      {"pretrained", o.pretrained.generic_string()},
                      {"seed", tc.seed},
                      {"epochs", tc.epochs},
                      {"align", std::string(models::to_string(model_cfg.align))}},
                     {"model.sanm", "train_log.txt"});
}

void cmd_sample(const RunConfig& config, const SampleOptions& o) {
  const auto pre = load_pretrained(o.pretrained);
  const auto model = load_model(o.checkpoint);
  const auto ref = data::load_clip(o.reference);
  const auto clip = training::prepare_clip(ref, pre.autoencoder.encoder, pre.embedder, model.config);

  sampler::FaceGuidance guidance{config.guidance_config(), &pre.autoencoder.decoder, &pre.embedder};
  guidance.config.enabled = o.guidance;
  guidance.config.reference_embedding = clip.reference_embedding;
  const sampler::ModelDenoiser denoiser(model, clip.cond);
  const auto result = sampler::edm_sample(denoiser, config.build(), clip.latent.shape(), &guidance, o.seed);

  data::SyntheticClip out = ref;
  out.frames = pre.autoencoder.decoder.decode(result.x);
  for (auto& v : out.frames.data()) v = static_cast<double>(static_cast<float>(v));
  out.split = "generated";

  fs::create_directories(o.out);
  data::save_clip(o.out / "sample.sclp", out);
  {
    auto os = open_out(o.out / "trajectory.txt");
    result.record.write_table(os);
    check_written(os, o.out / "trajectory.txt");
  }
  {
    auto os = open_out(o.out / "sample_report.txt");
    os.precision(17);
    os << "csim=" << metrics::csim_against(out.frames, clip.reference_embedding, pre.embedder) << '\n'
       << "l1=" << metrics::l1_metric(out.frames, ref.frames) << '\n'
       << "psnr=" << metrics::psnr_metric(out.frames, ref.frames) << '\n';
    check_written(os, o.out / "sample_report.txt");
  }
  write_run_manifest(o.out, "sample", config,
                     {{"checkpoint", o.checkpoint.generic_string()},
                      {"pretrained", o.pretrained.generic_string()},
                      {"reference", o.reference.generic_string()},
                      {"seed", o.seed},
                      {"guidance", o.guidance}},
                     {"sample.sclp", "trajectory.txt", "sample_report.txt"});
}

std::vector<metrics::EvalReport> cmd_eval(const RunConfig& config, const EvalOptions& o) {
  if (o.variants.empty()) throw ConfigError("eval: empty variant list");
  const auto pre = load_pretrained(o.pretrained);
  std::map<models::AlignMode, models::DenoiserModel> by_mode;
  for (const auto& path : o.checkpoints) {
    auto m = load_model(path);
    by_mode.insert_or_assign(m.config.align, std::move(m));
  }
  auto model_for = [&](models::AlignMode mode) -> const models::DenoiserModel* {
    auto it = by_mode.find(mode);
    return it == by_mode.end() ? nullptr : &it->second;
  };

  std::vector<metrics::VariantSpec> specs;
  for (const auto& v : o.variants) {
    if (v == "full")
      specs.push_back({v, model_for(models::AlignMode::Full), true});
    else if (v == "no-opt")
      specs.push_back({v, model_for(models::AlignMode::Full), false});
    else if (v == "addition")
      specs.push_back({v, model_for(models::AlignMode::Addition), true});
    else if (v == "norm")
      specs.push_back({v, model_for(models::AlignMode::Norm), true});
    else
      throw ConfigError("eval: unknown variant '" + v + "' (expected full, no-opt, addition, norm)");
  }
  for (const auto& s : specs)
    if (s.model == nullptr) throw std::invalid_argument("eval: missing checkpoint for variant " + s.label);

  const auto ds = data::load_dataset(o.data);
  const auto clips = prepare(ds.split("eval"), pre, specs.front().model->config);
  metrics::EvalSetup setup;
  setup.decoder = &pre.autoencoder.decoder;
  setup.embedder = &pre.embedder;
  setup.schedule = config.build();
  setup.guidance = config.guidance_config();
  setup.seed = config.eval_seed;
  const auto reports = metrics::run_ablation(specs, clips, setup);

  fs::create_directories(o.out);
  std::vector<fs::path> artifacts;
  for (const auto& r : reports) {
    const fs::path name = "report_" + r.variant + ".txt";
    auto os = open_out(o.out / name);
    metrics::write_key_values(os, r);
    check_written(os, o.out / name);
    artifacts.push_back(name);
  }
  {
    auto os = open_out(o.out / "report_table.txt");
    metrics::write_table(os, reports);
    const metrics::EvalReport* full = nullptr;
    const metrics::EvalReport* plain = nullptr;
    for (const auto& r : reports) {
      if (r.variant == "full") full = &r;
      if (r.variant == "no-opt") plain = &r;
    }
    if (full && plain) {
      const auto s = metrics::paired_sign_test(full->csim_values(), plain->csim_values());
      os << "\nsign_test csim full>no-opt: positive=" << s.positive << " negative=" << s.negative
         << " ties=" << s.ties << " p=" << s.p_value << '\n';
    }
    check_written(os, o.out / "report_table.txt");
    artifacts.emplace_back("report_table.txt");
  }
  nlohmann::json ckpts = nlohmann::json::array();
  for (const auto& c : o.checkpoints) ckpts.push_back(c.generic_string());
  write_run_manifest(o.out, "eval", config,
                     {{"checkpoints", ckpts},
                      {"pretrained", o.pretrained.generic_string()},
                      {"data", o.data.generic_string()},
                      {"variants", o.variants},
                      {"seed", config.eval_seed}},
                     artifacts);
  return reports;
}

int cmd_verify(const std::optional<fs::path>& report) {
  const auto results = verification::run_verification_suite();
  verification::write_report(std::cout, results);
  if (report) {
    if (report->has_parent_path()) fs::create_directories(report->parent_path());
    auto os = open_out(*report);
    verification::write_report(os, results);
    check_written(os, *report);
  }
  return verification::all_passed(results) ? kOk : kVerifyFailed;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Identity-preserving diffusion toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "INI configuration file (defaults when omitted)");

  GenerateOptions gen;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Render the synthetic dataset");
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "Dataset seed (overrides [data] seed)");
  generate->add_option("--out", gen.out, "Output directory")->required();

  PretrainOptions pre;
  std::string pre_data;
  auto* pretrain = app.add_subcommand("pretrain", "Train the frozen decoder and identity embedder");
  auto* pre_data_opt = pretrain->add_option("--data", pre_data, "Dataset directory (generated from [data] when omitted)");
  pretrain->add_option("--out", pre.out, "Output directory")->required();

  TrainOptions tr;
  std::size_t tr_epochs = 0;
  std::string tr_align;
  auto* train = app.add_subcommand("train", "Train the denoiser with the face-masked loss");
  train->add_option("--data", tr.data, "Dataset directory")->required();
  train->add_option("--pretrained", tr.pretrained, "pretrained.sanm from the pretrain command")->required();
  train->add_option("--out", tr.out, "Output directory")->required();
  auto* tr_epochs_opt = train->add_option("--epochs", tr_epochs, "Epoch count (overrides [train] epochs)");
  auto* tr_align_opt = train->add_option("--align", tr_align, "Alignment mode: full, addition or norm");

  SampleOptions sm;
  std::string sm_guidance = "on";
  auto* sample = app.add_subcommand("sample", "Generate one clip with the EDM sampler");
  sample->add_option("--checkpoint", sm.checkpoint, "model.sanm")->required();
  sample->add_option("--pretrained", sm.pretrained, "pretrained.sanm")->required();
  sample->add_option("--reference", sm.reference, "Reference clip (.sclp)")->required();
  sample->add_option("--seed", sm.seed, "Sampling seed");
  sample->add_option("--guidance", sm_guidance, "Face optimization: on or off")
      ->check(CLI::IsMember({"on", "off"}));
  sample->add_option("--out", sm.out, "Output directory")->required();

  EvalOptions ev;
  std::string ev_variants = "full,no-opt";
  auto* eval = app.add_subcommand("eval", "Evaluate variants on the held-out clips");
  eval->add_option("--checkpoint", ev.checkpoints, "model.sanm files, one per alignment mode")->required();
  eval->add_option("--pretrained", ev.pretrained, "pretrained.sanm")->required();
  eval->add_option("--data", ev.data, "Dataset directory")->required();
  eval->add_option("--variants", ev_variants, "Comma-separated: full, no-opt, addition, norm");
  eval->add_option("--out", ev.out, "Output directory")->required();

  std::string report;
  auto* verify = app.add_subcommand("verify", "Run the optimal-control verification suite");
  auto* report_opt = verify->add_option("--report", report, "Also write the key=value report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (verify->parsed()) return cmd_verify(*report_opt ? std::optional<fs::path>(report) : std::nullopt);
    const RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (generate->parsed()) {
      if (*gen_seed_opt) gen.seed = gen_seed;
      cmd_generate(config, gen);
    } else if (pretrain->parsed()) {
      if (*pre_data_opt) pre.data = pre_data;
      cmd_pretrain(config, pre);
    } else if (train->parsed()) {
      if (*tr_epochs_opt) tr.epochs = tr_epochs;
      if (*tr_align_opt) tr.align = models::parse_align_mode(tr_align);
      cmd_train(config, tr);
    } else if (sample->parsed()) {
      sm.guidance = sm_guidance == "on";
      cmd_sample(config, sm);
    } else if (eval->parsed()) {
      ev.variants.clear();
      std::stringstream ss(ev_variants);
      for (std::string v; std::getline(ss, v, ',');)
        if (!v.empty()) ev.variants.push_back(v);
      const auto reports = cmd_eval(config, ev);
      metrics::write_table(std::cout, reports);
    }
    return kOk;
  } catch (const data::ClipError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const training::CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace sanm::cli
