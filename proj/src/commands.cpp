#include "ntrocr/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ntrocr/checkpoint.hpp"
#include "ntrocr/config.hpp"
#include "ntrocr/errors.hpp"
#include "ntrocr/image.hpp"
#include "ntrocr/io.hpp"
#include "ntrocr/manifest.hpp"
#include "ntrocr/metrics.hpp"
#include "ntrocr/model.hpp"
#include "ntrocr/script.hpp"
#include "ntrocr/segment.hpp"
#include "ntrocr/synth.hpp"
#include "ntrocr/train.hpp"

namespace ntrocr {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory '" + dir + "': " + ec.message());
  }
}

std::string decode_image(const GrayImage& img, const CheckpointData& ckpt) {
  ModelConfig mc = model_config(ckpt.config, ckpt.vocab.size());
  GrayImage resized =
      resize_bilinear(img, ckpt.config.image_size, ckpt.config.image_size);
  std::vector<int> ids = greedy_decode(resized, mc, ckpt.params);
  return decode_tokens(ids, ckpt.vocab);
}

nlohmann::json box_json(const BoundingBox& b) {
  return nlohmann::json::array({b.x0, b.y0, b.x1, b.y1});
}

void write_report(const EvalReport& report, const std::string& out_dir,
                  std::ostream& out) {
  ensure_dir(out_dir);
  write_file(out_dir + "/report.csv", report_csv(report));
  std::string json = report_json(report);
  write_file(out_dir + "/report.json", json);
  out << json;
}

struct SynthArgs {
  std::string out_dir;
  SynthOptions opt;
};

struct TrainArgs {
  std::string config_path;
  std::string manifest_path;
  std::string out_dir;
  uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

struct EvalArgs {
  std::string checkpoint_path;
  std::string manifest_path;
  std::string out_dir;
  std::string split = "test";
};

struct InferArgs {
  std::string checkpoint_path;
  std::string image_path;
  bool as_json = false;
};

struct SegmentArgs {
  std::string image_path;
  int threshold = 128;
  int line_gap = 3;
  int word_gap = 4;
};

struct MetricsArgs {
  std::string pairs_path;
  std::string out_dir;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  std::vector<SynthSample> samples = synth_dataset(a.out_dir, a.opt);
  out << "wrote " << samples.size() << " samples to " << a.out_dir << "\n";
  return 0;
}

int do_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = parse_config_file(a.config_path);
  if (a.seed_opt != nullptr && a.seed_opt->count() > 0) cfg.seed = a.seed;
  std::vector<ManifestEntry> entries = load_manifest(a.manifest_path);
  TrainResult result = cmd_train(cfg, entries, a.out_dir, &out);
  if (result.diverged) {
    err << "error: loss diverged; kept the checkpoint of the last completed "
           "epoch\n";
    return 1;
  }
  out << "final checkpoint: " << result.final_path << "\n";
  out << "best checkpoint: " << result.best_path << " (epoch "
      << result.best_epoch << ", val_cer ";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", result.best_val_cer);
  out << buf << ")\n";
  return 0;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  if (a.split != "train" && a.split != "val" && a.split != "test") {
    throw ValidationError("unknown split '" + a.split + "'");
  }
  CheckpointData ckpt = load_checkpoint(a.checkpoint_path);
  std::vector<ManifestEntry> entries = load_manifest(a.manifest_path);
  std::vector<ManifestEntry> chosen = filter_split(entries, a.split);
  if (chosen.empty()) {
    throw ValidationError("split '" + a.split + "' has no entries");
  }
  for (const ManifestEntry& e : chosen) {
    if (e.language != ckpt.config.language) {
      throw ValidationError("manifest language '" + e.language +
                            "' does not match checkpoint language '" +
                            ckpt.config.language + "'");
    }
  }
  std::vector<EvalPair> pairs;
  for (const ManifestEntry& e : chosen) {
    GrayImage img = load_pgm_file(e.resolved_path);
    pairs.push_back(EvalPair{e.image_path, e.transcript,
                             decode_image(img, ckpt)});
  }
  write_report(accuracy_report(pairs), a.out_dir, out);
  return 0;
}

int do_infer(const InferArgs& a, std::ostream& out) {
  CheckpointData ckpt = load_checkpoint(a.checkpoint_path);
  GrayImage img = load_pgm_file(a.image_path);
  std::string text = decode_image(img, ckpt);
  if (a.as_json) {
    out << nlohmann::json{{"text", text}}.dump() << "\n";
  } else {
    out << text << "\n";
  }
  return 0;
}

int do_segment(const SegmentArgs& a, std::ostream& out) {
  GrayImage img = load_pgm_file(a.image_path);
  BinaryImage bin = binarize(img, a.threshold);
  for (const BoundingBox& line : segment_lines(bin, a.line_gap)) {
    nlohmann::json words = nlohmann::json::array();
    for (const BoundingBox& word : segment_words(bin, line, a.word_gap)) {
      MatraInfo matra = detect_matra(bin, word);
      words.push_back({{"box", box_json(word)},
                       {"matra_row", matra.row},
                       {"matra_density", matra.density}});
    }
    out << nlohmann::json{{"box", box_json(line)}, {"words", words}}.dump()
        << "\n";
  }
  return 0;
}

int do_metrics(const MetricsArgs& a, std::ostream& out) {
  std::string text = read_file(a.pairs_path);
  std::vector<EvalPair> pairs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("pairs line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
    }
    for (const char* field : {"id", "ref", "hyp"}) {
      if (!obj.contains(field) || !obj[field].is_string()) {
        throw ValidationError("pairs line " + std::to_string(line_no) +
                              ": missing string field '" + field + "'");
      }
    }
    pairs.push_back(EvalPair{obj["id"].get<std::string>(),
                             obj["ref"].get<std::string>(),
                             obj["hyp"].get<std::string>()});
  }
  write_report(accuracy_report(pairs), a.out_dir, out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"transformer OCR for Bengali and Nepali text lines"};
  app.name("ntrocr");
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic glyph dataset with a manifest");
  synth->add_option("--out", synth_args.out_dir, "output directory")
      ->required();
  synth->add_option("--n", synth_args.opt.n_samples, "number of samples");
  synth->add_option("--seed", synth_args.opt.seed, "generator seed");
  synth->add_option("--image-size", synth_args.opt.image_size,
                    "canvas size in pixels");
  synth->add_option("--language", synth_args.opt.language, "bn or ne");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", train_args.config_path, "key=value config")
      ->required();
  train->add_option("--manifest", train_args.manifest_path, "JSONL manifest")
      ->required();
  train->add_option("--out", train_args.out_dir, "output directory")
      ->required();
  train_args.seed_opt =
      train->add_option("--seed", train_args.seed, "override the config seed");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on a split");
  eval->add_option("--checkpoint", eval_args.checkpoint_path, "model file")
      ->required();
  eval->add_option("--manifest", eval_args.manifest_path, "JSONL manifest")
      ->required();
  eval->add_option("--out", eval_args.out_dir, "report directory")
      ->required();
  eval->add_option("--split", eval_args.split, "train, val, or test");

  InferArgs infer_args;
  CLI::App* infer = app.add_subcommand("infer", "read one image");
  infer->add_option("--checkpoint", infer_args.checkpoint_path, "model file")
      ->required();
  infer->add_option("--image", infer_args.image_path, "PGM image")
      ->required();
  infer->add_flag("--json", infer_args.as_json, "wrap the text in JSON");

  SegmentArgs segment_args;
  CLI::App* segment = app.add_subcommand(
      "segment", "projection-profile line/word boxes as JSON lines");
  segment->add_option("--image", segment_args.image_path, "PGM image")
      ->required();
  segment->add_option("--threshold", segment_args.threshold,
                      "ink threshold (pixel < threshold)");
  segment->add_option("--line-gap", segment_args.line_gap,
                      "blank rows that still merge line bands");
  segment->add_option("--word-gap", segment_args.word_gap,
                      "blank columns that still merge words");

  MetricsArgs metrics_args;
  CLI::App* metrics = app.add_subcommand(
      "metrics", "score id/ref/hyp JSONL pairs without a model");
  metrics->add_option("--pairs", metrics_args.pairs_path, "JSONL pairs file")
      ->required();
  metrics->add_option("--out", metrics_args.out_dir, "report directory")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) return do_synth(synth_args, out);
    if (train->parsed()) return do_train(train_args, out, err);
    if (eval->parsed()) return do_eval(eval_args, out);
    if (infer->parsed()) return do_infer(infer_args, out);
    if (segment->parsed()) return do_segment(segment_args, out);
    if (metrics->parsed()) return do_metrics(metrics_args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand given\n";
  return 1;
}

}  // namespace ntrocr
