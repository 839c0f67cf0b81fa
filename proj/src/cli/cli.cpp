// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.


#include "fhvc/cli/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fhvc/cli/config.hpp"
#include "fhvc/convert/convert.hpp"
#include "fhvc/corpus/manifest.hpp"
#include "fhvc/corpus/synthetic.hpp"
#include "fhvc/eval/latents.hpp"
#include "fhvc/eval/metrics.hpp"
#include "fhvc/eval/plot.hpp"
#include "fhvc/eval/sweep.hpp"
#include "fhvc/model/checkpoint.hpp"

#ifndef FHVC_VERSION
#define FHVC_VERSION "0.0.0"
#endif

namespace fhvc::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
}

// Output files must land in an existing directory.
void require_writable_parent(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is empty");
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw ConfigError(std::string(what) + " directory does not exist: " + parent.string());
  }
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path.string());
}

std::vector<corpus::FeatureSequence> load_utterances(const std::string& list, const char* what) {
  std::vector<corpus::FeatureSequence> out;
  std::int64_t id = 0;
  for (const auto& p : split_list(list)) {
    require_file(p, what);
    out.push_back(corpus::read_features(p, id++));
  }
  if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
  return out;
}

/// Options shared by subcommands that read the config.
struct ConfigOptions {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* sub) {
    sub->add_option("--config", file, "config file of 'key = value' lines");
    sub->add_option("--set", overrides, "override one config key (key=value); repeatable");
  }

  CliConfig load() const {
    CliConfig cfg;
    if (!file.empty()) cfg.merge_file(file);
    for (const auto& o : overrides) cfg.apply_override(o);
    return cfg;
  }
};

void override_if(CliConfig& cfg, const CLI::Option* opt, const std::string& key, const std::string& value) {
  if (opt->count() > 0) cfg.set(key, value);
}

std::vector<corpus::FeatureSequence> training_corpus(const CliConfig& cfg) {
  const std::string& manifest = cfg.get("manifest");
  if (!manifest.empty()) {
    require_file(manifest, "manifest");
    return corpus::load_corpus(manifest);
  }
  return corpus::gen_synthetic_corpus(cfg.synthetic_spec()).sequences;
}

std::vector<std::size_t> speaker_indices(const std::vector<corpus::FeatureSequence>& seqs,
                                         std::vector<std::string>& names) {
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> out;
  for (const auto& s : seqs) {
    auto [it, added] = index.emplace(s.speaker_label, names.size());
    if (added) names.push_back(s.speaker_label);
    out.push_back(it->second);
  }
  return out;
}

Tensor utterance_points(const std::vector<corpus::FeatureSequence>& seqs, const model::FhvaeModel& m,
                        const std::string& latent) {
  if (latent != "z1" && latent != "z2") throw ConfigError("--latent must be z1 or z2");
  std::vector<std::vector<double>> rows;
  for (const auto& s : seqs) {
    auto u = eval::utterance_latents(s, m);
    rows.push_back(latent == "z2" ? u.z2_mean : u.z1_mean);
  }
  return eval::stack_rows(rows);
}

int cmd_gen_data(const CliConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.get("out_dir");
  if (!fs::is_directory(dir)) fs::create_directory(dir);
  const auto spec = cfg.synthetic_spec();
  const auto data = corpus::gen_synthetic_corpus(spec);
  std::vector<corpus::ManifestEntry> entries;
  std::string content = "# sequence_id\tspeaker_index\tcontent_index\n";
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    const auto& s = data.sequences[i];
    char name[64];
    std::snprintf(name, sizeof name, "%s_u%03zu.fhvc", s.speaker_label.c_str(), data.content[i]);
    corpus::write_features(s, dir / name);
    entries.push_back({s.sequence_id, s.speaker_label, name});
    content += std::to_string(s.sequence_id) + "\t" + std::to_string(data.speaker[i]) + "\t" +
               std::to_string(data.content[i]) + "\n";
  }
  corpus::write_manifest(entries, dir / "manifest.tsv");
  write_text(dir / "content.tsv", content);
  out << "sequences=" << entries.size() << "\nmanifest=" << (dir / "manifest.tsv").string() << "\n";
  return kExitOk;
}

int cmd_train(const CliConfig& cfg, std::size_t progress, std::ostream& out, std::ostream& err) {
  const fs::path model_path = cfg.get("model");
  const fs::path history_path = cfg.get("history");
  require_writable_parent(model_path, "model");
  require_writable_parent(history_path, "history");
  const auto seqs = training_corpus(cfg);
  if (seqs.empty()) throw ConfigError("training corpus is empty");
  const auto tc = cfg.train_config(seqs.front().dim());
  auto result = model::train(seqs, tc, [&](const model::EpochRecord& e) {
    if (progress > 0 && (e.epoch % progress == 0 || e.epoch == 1 || e.epoch == tc.epochs)) {
      err << "epoch " << e.epoch << " loss " << e.loss << " dev_elbo " << e.dev_elbo << "\n";
    }
  });
  model::save_model(result.model, model_path);
  write_history_csv(result.history, history_path);
  out << "sequences=" << result.model.num_sequences() << "\ndev_sequences=" << result.dev_ids.size()
      << "\nbest_epoch=" << result.history.best_epoch << "\nbest_dev_elbo=" << num(result.history.best_dev_elbo)
      << "\nmodel=" << model_path.string() << "\n";
  return kExitOk;
}

int cmd_convert(const std::string& model_path, const std::string& input, const std::string& output,
                const std::string& mode, const std::string& src_list, const std::string& trg_list,
                std::ostream& out) {
  require_file(model_path, "model");
  require_file(input, "input");
  require_writable_parent(output, "output");
  if (mode != "difference" && mode != "replace" && mode != "reconstruct") {
    throw ConfigError("--mode must be difference, replace or reconstruct");
  }
  if (mode == "difference" && (src_list.empty() || trg_list.empty())) {
    throw ConfigError("difference mode needs --src-utts and --trg-utts");
  }
  if (mode == "replace" && trg_list.empty()) throw ConfigError("replace mode needs --trg-utts");
  const auto source = mode == "difference" ? load_utterances(src_list, "source utterance")
                                           : std::vector<corpus::FeatureSequence>{};
  const auto target = mode != "reconstruct" ? load_utterances(trg_list, "target utterance")
                                            : std::vector<corpus::FeatureSequence>{};
  const auto m = model::load_model(model_path);
  const auto x = corpus::read_features(input);
  corpus::FeatureSequence y;
  if (mode == "reconstruct") {
    y = convert::reconstruct(x, m);
  } else if (mode == "replace") {
    y = convert::convert_replace(x, convert::speaker_embedding(target, m), m);
  } else {
    y = convert::convert_difference(x, convert::speaker_embedding(source, m), convert::speaker_embedding(target, m), m);
  }
  corpus::write_features(y, output);
  out << "mode=" << mode << "\nframes=" << y.num_frames() << "\noutput=" << output << "\n";
  return kExitOk;
}

int cmd_embed(const std::string& model_path, const std::string& utts, const std::string& output, std::ostream& out) {
  require_file(model_path, "model");
  if (!output.empty()) require_writable_parent(output, "output");
  const auto list = load_utterances(utts, "utterance");
  const auto m = model::load_model(model_path);
  const auto e = convert::speaker_embedding(list, m);
  std::string csv = "component,value\n";
  for (std::size_t k = 0; k < e.z2_mean.size(); ++k) csv += std::to_string(k) + "," + num(e.z2_mean[k]) + "\n";
  if (output.empty()) {
    out << csv;
  } else {
    write_text(output, csv);
    out << "segments=" << e.segment_count << "\noutput=" << output << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& ref, const std::string& hyp, const std::string& align, const std::string& model_path,
             const std::string& manifest, const std::string& latent, std::ostream& out) {
  if (!ref.empty() || !hyp.empty()) {
    if (ref.empty() || hyp.empty()) throw ConfigError("mel-CD needs both --ref and --hyp");
    if (align != "none" && align != "dtw") throw ConfigError("--align must be none or dtw");
    require_file(ref, "reference");
    require_file(hyp, "hypothesis");
    const auto a = corpus::read_features(ref);
    const auto b = corpus::read_features(hyp);
    double cd = 0.0;
    if (align == "dtw") {
      cd = eval::mel_cd(a, b, eval::dtw_align(a.frames, b.frames).path);
    } else {
      cd = eval::mel_cd(a, b);
    }
    out << "mel_cd_db=" << num(cd) << "\nframes=" << a.num_frames() << "," << b.num_frames() << "\n";
    return kExitOk;
  }
  if (model_path.empty() || manifest.empty()) {
    throw ConfigError("eval needs --ref/--hyp for mel-CD or --model/--manifest for cluster metrics");
  }
  require_file(model_path, "model");
  require_file(manifest, "manifest");
  const auto m = model::load_model(model_path);
  const auto seqs = corpus::load_corpus(manifest);
  std::vector<std::string> names;
  const auto labels = speaker_indices(seqs, names);
  const Tensor pts = utterance_points(seqs, m, latent);
  const auto sep = eval::cluster_separation(pts, labels);
  out << "latent=" << latent << "\nutterances=" << seqs.size() << "\nspeakers=" << names.size()
      << "\none_nn_accuracy=" << num(sep.one_nn_accuracy) << "\nfisher_ratio=" << num(sep.fisher_ratio)
      << "\ncentroid_accuracy=" << num(eval::loo_centroid_accuracy(pts, labels)) << "\n";
  return kExitOk;
}

int cmd_visualize(const std::string& model_path, const std::string& manifest, const std::string& output,
                  const std::string& format, const std::string& latent, std::ostream& out) {
  require_file(model_path, "model");
  require_file(manifest, "manifest");
  require_writable_parent(output, "output");
  std::string fmt = format;
  if (fmt.empty()) fmt = fs::path(output).extension() == ".csv" ? "csv" : "svg";
  const auto pf = eval::parse_plot_format(fmt);
  const auto m = model::load_model(model_path);
  const auto seqs = corpus::load_corpus(manifest);
  const Tensor pts = utterance_points(seqs, m, latent);
  const auto pca = eval::pca_fit(pts, 2);
  const Tensor xy = eval::pca_transform(pts, pca);
  std::vector<eval::PlotPoint> points;
  for (std::size_t i = 0; i < seqs.size(); ++i) points.push_back({seqs[i].speaker_label, xy(i, 0), xy(i, 1)});
  eval::emit_plot(points, output, pf, latent + " utterance embeddings (PCA)");
  out << "points=" << points.size() << "\nexplained_ratio=" << num(pca.explained_ratio[0]) << ","
      << num(pca.explained_ratio[1]) << "\noutput=" << output << "\n";
  return kExitOk;
}

int cmd_sweep(const CliConfig& cfg, const std::string& output, const std::string& svg, std::ostream& out) {
  const fs::path model_path = cfg.get("model");
  require_file(model_path, "model");
  require_writable_parent(output, "output");
  if (!svg.empty()) require_writable_parent(svg, "svg");
  auto spec = cfg.synthetic_spec();
  const std::size_t held = cfg.get_size("sweep.held_out");
  if (held == 0) throw ConfigError("sweep.held_out must be positive");
  const std::size_t pool = spec.utterances_per_speaker;
  spec.utterances_per_speaker += held;
  const auto ns = cfg.get_size_list("sweep.ns");
  for (std::size_t n : ns) {
    if (n == 0 || n > pool) throw ConfigError("sweep.ns entries must lie in [1, synth.utterances]");
  }
  eval::SweepOptions opt;
  opt.repeats = cfg.get_size("sweep.repeats");
  opt.workers = cfg.get_size("sweep.workers");
  opt.align = cfg.get_bool("sweep.align");
  const auto m = model::load_model(model_path);
  if (m.config.feature_dim != spec.dim) throw ConfigError("model feature dimension does not match synth.dim");
  const auto data = corpus::gen_synthetic_corpus(spec);
  eval::SweepInput in{data.sequences, data.speaker, data.content, {}};
  for (std::size_t c = 0; c < held; ++c) in.test_contents.push_back(spec.first_utterance + pool + c);
  const auto rows = eval::sweep_training_size(in, m, ns, cfg.get_u64("seed"), opt);
  eval::emit_plot(rows, output, eval::PlotFormat::csv);
  if (!svg.empty()) eval::emit_plot(rows, svg, eval::PlotFormat::svg);
  for (const auto& r : rows) out << "n=" << r.n_sentences << " mel_cd_db=" << num(r.mel_cd_db) << " std=" << num(r.std) << "\n";
  return kExitOk;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_history_csv(const model::TrainHistory& history, const fs::path& path) {
  std::string csv = "epoch,loss,dev_elbo,recon,kl_z1,kl_z2,mu_prior,disc\n";
  for (const auto& e : history.epochs) {
    csv += std::to_string(e.epoch) + "," + num(e.loss) + "," + num(e.dev_elbo) + "," + num(e.recon) + "," +
           num(e.kl_z1) + "," + num(e.kl_z2) + "," + num(e.mu_prior) + "," + num(e.disc) + "\n";
  }
  write_text(path, csv);
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factorized hierarchical VAE voice conversion toolkit", "fhvc"};
  app.set_version_flag("--version", std::string("fhvc ") + FHVC_VERSION);
  app.require_subcommand(1);

  ConfigOptions gen_cfg, train_cfg, sweep_cfg;
  std::string out_dir, manifest, model_path, history, input, output, mode = "difference", src_utts, trg_utts;
  std::string utts, ref, hyp, align = "dtw", latent = "z2", format, svg, ns;
  std::size_t progress = 10, workers = 1, repeats = 5;

  auto* gen = app.add_subcommand("gen-data", "write the synthetic corpus as FHVC files plus a manifest");
  gen_cfg.attach(gen);
  auto* gen_dir = gen->add_option("--out-dir", out_dir, "output directory");

  auto* tr = app.add_subcommand("train", "train a model; writes a checkpoint and history CSV");
  train_cfg.attach(tr);
  auto* tr_manifest = tr->add_option("--manifest", manifest, "corpus manifest (default: synthetic corpus)");
  auto* tr_model = tr->add_option("--model", model_path, "checkpoint output path");
  auto* tr_history = tr->add_option("--history", history, "history CSV output path");
  tr->add_option("--progress", progress, "report every N epochs on stderr (0: quiet)");

  auto* cv = app.add_subcommand("convert", "convert one utterance");
  cv->add_option("--model", model_path, "checkpoint")->required();
  cv->add_option("--input", input, "input FHVC file")->required();
  cv->add_option("--out", output, "output FHVC file")->required();
  cv->add_option("--mode", mode, "difference, replace or reconstruct");
  cv->add_option("--src-utts", src_utts, "comma-separated source speaker utterances");
  cv->add_option("--trg-utts", trg_utts, "comma-separated target speaker utterances");

  auto* em = app.add_subcommand("embed", "average Z2 embedding of utterances as CSV");
  em->add_option("--model", model_path, "checkpoint")->required();
  em->add_option("--utts", utts, "comma-separated FHVC files")->required();
  em->add_option("--out", output, "CSV output (default: stdout)");

  auto* ev = app.add_subcommand("eval", "mel-CD between two files, or cluster metrics of a corpus");
  ev->add_option("--ref", ref, "reference FHVC file");
  ev->add_option("--hyp", hyp, "hypothesis FHVC file");
  ev->add_option("--align", align, "dtw (default) or none");
  ev->add_option("--model", model_path, "checkpoint (cluster metrics)");
  ev->add_option("--manifest", manifest, "corpus manifest (cluster metrics)");
  ev->add_option("--latent", latent, "z2 or z1");

  auto* vz = app.add_subcommand("visualize", "PCA scatter of utterance embeddings");
  vz->add_option("--model", model_path, "checkpoint")->required();
  vz->add_option("--manifest", manifest, "corpus manifest")->required();
  vz->add_option("--out", output, "SVG or CSV output")->required();
  vz->add_option("--format", format, "svg or csv (default: from extension)");
  vz->add_option("--latent", latent, "z2 or z1");

  auto* sw = app.add_subcommand("sweep", "mel-CD against the number of embedding utterances");
  sweep_cfg.attach(sw);
  auto* sw_model = sw->add_option("--model", model_path, "checkpoint");
  sw->add_option("--out", output, "CSV output")->required();
  sw->add_option("--svg", svg, "optional SVG plot");
  auto* sw_ns = sw->add_option("--ns", ns, "comma-separated utterance counts");
  auto* sw_workers = sw->add_option("--workers", workers, "worker threads");
  auto* sw_repeats = sw->add_option("--repeats", repeats, "draws per n");

  std::vector<std::string> argv_store{"fhvc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      CliConfig cfg = gen_cfg.load();
      override_if(cfg, gen_dir, "out_dir", out_dir);
      return cmd_gen_data(cfg, out);
    }
    if (tr->parsed()) {
      CliConfig cfg = train_cfg.load();
      override_if(cfg, tr_manifest, "manifest", manifest);
      override_if(cfg, tr_model, "model", model_path);
      override_if(cfg, tr_history, "history", history);
      return cmd_train(cfg, progress, out, err);
    }
    if (cv->parsed()) return cmd_convert(model_path, input, output, mode, src_utts, trg_utts, out);
    if (em->parsed()) return cmd_embed(model_path, utts, output, out);
    if (ev->parsed()) return cmd_eval(ref, hyp, align, model_path, manifest, latent, out);
    if (vz->parsed()) return cmd_visualize(model_path, manifest, output, format, latent, out);
    if (sw->parsed()) {
      CliConfig cfg = sweep_cfg.load();
      override_if(cfg, sw_model, "model", model_path);
      override_if(cfg, sw_ns, "sweep.ns", ns);
      override_if(cfg, sw_workers, "sweep.workers", std::to_string(workers));
      override_if(cfg, sw_repeats, "sweep.repeats", std::to_string(repeats));
      return cmd_sweep(cfg, output, svg, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

int run(std::initializer_list<std::string> args, std::ostream& out, std::ostream& err) {
  return run(std::span<const std::string>(args.begin(), args.size()), out, err);
}

}  // namespace fhvc::cli
