// gestime command-line entry point.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gestime/gestime.hpp"

namespace fs = std::filesystem;
using namespace gestime;

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kUsage = 2, kInputFormat = 3, kNumeric = 4, kConfig = 5 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> threshold;
  std::optional<std::string> feature_set;
  std::optional<std::string> eyebrow_mode;
  std::optional<std::string> out;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.feature_set) c.set_feature_set(*o.feature_set);
  if (o.eyebrow_mode) c.set_eyebrow_mode(*o.eyebrow_mode);
  if (o.out) c.out = *o.out;
  c.validate();
  return c;
}

void write_provenance(const RunConfig& c, const fs::path& dir) {
  write_text_file(dir / "config.txt", c.to_keyvalue().format());
}

void write_files(const experiments::ReportFiles& files, const fs::path& dir) {
  files.write(dir);
  std::cout << "wrote " << files.files.size() << " files to " << dir.string() << '\n';
}

void print_stats(const DistributionStats& st) {
  std::cout << "n = " << st.n << ", l = " << st.l << '\n';
  for (GestureClass c : kAllClasses) {
    std::cout << "  " << class_name(c) << ": " << st.counts[index_of(c)] << " frames ("
              << format_fixed(st.proportions[index_of(c)], 4) << ")\n";
  }
}

struct Loaded {
  Dataset dataset;
  Split split;
};

Loaded load_inputs(const RunConfig& c) {
  if (c.dataset.empty()) throw UsageError("no dataset given (positional argument or 'dataset' config key)");
  Loaded in;
  in.dataset = load_dataset(c.dataset).dataset;
  const fs::path split_path = fs::path(c.dataset) / "split.txt";
  if (fs::exists(split_path)) {
    std::ifstream f(split_path);
    in.split = parse_split(f, split_path.string());
  } else {
    in.split = split_random(in.dataset, c.split_seed);
  }
  for (const auto* part : {&in.split.train, &in.split.val, &in.split.test}) {
    for (std::size_t i : *part) {
      if (i >= in.dataset.samples.size()) throw InputFormatError(split_path.string() + ": sample index out of range");
    }
  }
  return in;
}

void save_bundle(const Dataset& ds, const RunConfig& c, const fs::path& out) {
  save_dataset(ds, out, c.split_seed);
  write_text_file(out / "split.txt", format_split(split_random(ds, c.split_seed), c.split_seed));
  write_provenance(c, out);
  print_stats(class_distribution(pad_dataset(ds, padded_length(ds))));
}

int cmd_ingest(RunConfig c, const std::string& corpus_dir) {
  if (!corpus_dir.empty()) c.corpus_dir = corpus_dir;
  CorpusPaths paths = CorpusPaths::in_directory(c.corpus_dir);
  if (!c.words.empty()) paths.words = c.words;
  if (!c.gestures.empty()) paths.gestures = c.gestures;
  if (!c.aus.empty()) paths.aus = c.aus;
  if (!c.features.empty()) paths.features = c.features;
  if (c.corpus_dir.empty() && (c.words.empty() || c.gestures.empty() || c.aus.empty() || c.features.empty())) {
    throw UsageError("ingest needs a corpus directory or all four input file paths");
  }
  IngestOptions opt;
  opt.frame_ms = c.frame_ms;
  opt.ipu_gap_ms = c.ipu_gap_ms;
  const Dataset ds = ingest(read_corpus(paths), opt);
  if (ds.samples.empty()) throw InputFormatError("corpus produced no utterances");
  save_bundle(ds, c, c.out);
  return kOk;
}

int cmd_synth(const RunConfig& c) {
  const SyntheticCorpus corpus = generate_synthetic_corpus(c.synthetic());
  write_corpus(corpus.raw, CorpusPaths::in_directory(fs::path(c.out) / "corpus"));
  save_bundle(corpus.dataset, c, c.out);
  return kOk;
}

std::string format_sequences(std::span<const LabelSequence> seqs) {
  std::ostringstream os;
  for (const auto& s : seqs) {
    for (std::size_t t = 0; t < s.size(); ++t) os << (t ? " " : "") << class_name(s[t]);
    os << '\n';
  }
  return os.str();
}

std::vector<LabelSequence> read_sequences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputFormatError(path + ": cannot open file");
  std::vector<LabelSequence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    LabelSequence seq;
    std::istringstream words(line);
    std::string w;
    std::size_t col = 0;
    while (words >> w) {
      ++col;
      const auto c = parse_class(w);
      if (!c) {
        throw InputFormatError(path + ":" + std::to_string(line_no) + ": token " + std::to_string(col) +
                               ": unknown class '" + w + "'");
      }
      seq.push_back(*c);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

int cmd_train(RunConfig c, const std::string& dataset) {
  if (!dataset.empty()) c.dataset = dataset;
  const Loaded in = load_inputs(c);
  const auto data = experiments::prepare(in.dataset, in.split, c.feature_set, c.eyebrow, c.normalize);
  nnet::Hyper h;
  h.input_dim = dimension(c.feature_set);
  h.enc_dim = c.enc_dim;
  h.dec_dim = c.dec_dim;
  h.epochs = c.epochs;
  h.batch_size = c.batch_size;
  h.learning_rate = c.learning_rate;
  h.seed = c.seed;
  h.feature_set = c.feature_set;
  const auto result = nnet::train(data.train, data.val, h, data.normalizer, c.metric());
  const auto preds = nnet::predict_all(result.checkpoint.params, data.test.inputs);
  const EvalScores test = score(preds, data.test.labels, c.metric());
  const fs::path out = c.out;
  write_provenance(c, out);
  nnet::save_checkpoint(result.checkpoint, out / "model.ckpt");
  write_text_file(out / "predictions.txt", format_sequences(preds));
  write_text_file(out / "truth.txt", format_sequences(data.test.labels));
  write_text_file(out / "val_report.csv", eval_report_csv(result.val_scores));
  write_text_file(out / "eval_report.csv", eval_report_csv(test));
  const std::string md = markdown_scores("Single model, test split", test);
  write_text_file(out / "report.md", md);
  std::cout << "loss " << format_fixed(result.checkpoint.initial_loss, 6) << " -> "
            << format_fixed(result.checkpoint.epoch_loss.empty() ? result.checkpoint.initial_loss
                                                                 : result.checkpoint.epoch_loss.back(),
                            6)
            << "\n\n"
            << md;
  return kOk;
}

int cmd_eval(const RunConfig& c, const std::string& pred_path, const std::string& truth_path) {
  const auto preds = read_sequences(pred_path);
  const auto truths = read_sequences(truth_path);
  if (preds.size() != truths.size()) {
    throw InputFormatError(pred_path + ": " + std::to_string(preds.size()) + " sequences but " + truth_path +
                           " has " + std::to_string(truths.size()));
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != truths[i].size()) {
      throw InputFormatError(pred_path + ":" + std::to_string(i + 1) + ": length " +
                             std::to_string(preds[i].size()) + " differs from truth length " +
                             std::to_string(truths[i].size()));
    }
  }
  const EvalScores s = score(preds, truths, c.metric());
  const fs::path out = c.out;
  write_provenance(c, out);
  write_text_file(out / "eval_report.csv", eval_report_csv(s));
  std::cout << markdown_scores("Evaluation", s);
  return kOk;
}

int cmd_baseline(RunConfig c, const std::string& dataset) {
  if (!dataset.empty()) c.dataset = dataset;
  const Loaded in = load_inputs(c);
  const auto r = experiments::exp_random(in.dataset, in.split, c.experiment(1));
  write_files(r.files, c.out);
  write_provenance(c, c.out);
  std::cout << markdown_scores("Markov chain baseline", r.baseline.mean);
  return kOk;
}

int cmd_experiment(RunConfig c, const std::string& name, const std::string& dataset) {
  static const std::vector<std::string> kNames = {"exp1", "exp2", "exp3", "exp4", "exp5", "exp6", "exp7"};
  if (std::find(kNames.begin(), kNames.end(), name) == kNames.end()) {
    throw UsageError("unknown experiment '" + name + "' (expected exp1..exp7)");
  }
  if (!dataset.empty()) c.dataset = dataset;
  const Loaded in = load_inputs(c);
  const std::size_t workers = workers_from_env();
  const auto cfg = c.experiment(workers);
  const fs::path out = c.out;
  write_provenance(c, out);
  write_text_file(out / "split.txt", format_split(in.split, c.split_seed));
  experiments::ReportFiles files;
  std::string headline;
  if (name == "exp1") {
    auto r = experiments::exp_random(in.dataset, in.split, cfg);
    files = std::move(r.files);
  } else if (name == "exp2") {
    auto r = experiments::exp_full(in.dataset, in.split, cfg);
    files = std::move(r.files);
  } else if (name == "exp5") {
    auto r = experiments::exp_mfcc(in.dataset, in.split, cfg);
    files = std::move(r.files);
  } else if (name == "exp6") {
    auto r = experiments::exp_both(in.dataset, in.split, cfg);
    files = std::move(r.files);
  } else if (name == "exp3") {
    nnet::Checkpoint model;
    if (!c.checkpoint.empty()) {
      model = nnet::load_checkpoint(c.checkpoint);
    } else {
      auto full = experiments::exp_full(in.dataset, in.split, cfg);
      for (auto& [path, content] : full.files.files) files.add("exp2/" + path, std::move(content));
      model = full.chosen().checkpoint;
    }
    const FeatureSet set = model.hyper.feature_set;
    const auto data = experiments::prepare(in.dataset, in.split, set, c.eyebrow, c.normalize, 0, &model.normalizer);
    auto r = experiments::exp_ablation(model.params, data, cfg, experiments::ablation_conditions(dimension(set)));
    for (auto& f : r.files.files) files.files.push_back(std::move(f));
  } else if (name == "exp4") {
    auto r = experiments::exp_eyebrow(in.dataset, in.split, cfg);
    files = std::move(r.files);
  } else {
    auto r = experiments::exp_cross_speaker(in.dataset, cfg);
    files = std::move(r.files);
  }
  write_files(files, out);
  if (const std::string* md = files.find("report.md")) std::cout << '\n' << *md;
  return kOk;
}

// Collects every eval_report.csv under the given directories into one table.
int cmd_report(const RunConfig& c, const std::vector<std::string>& dirs, bool write_out) {
  std::vector<fs::path> reports;
  for (const auto& d : dirs) {
    if (!fs::is_directory(d)) throw InputFormatError(d + ": not a directory");
    for (const auto& e : fs::recursive_directory_iterator(d)) {
      if (e.is_regular_file() && e.path().filename() == "eval_report.csv") reports.push_back(e.path());
    }
  }
  std::sort(reports.begin(), reports.end());
  if (reports.empty()) throw InputFormatError("no eval_report.csv found");
  std::ostringstream md;
  md << "| Condition | Class | Alignment | Insertion | Deletion |\n|---|---|---|---|---|\n";
  for (const auto& p : reports) {
    std::ifstream f(p);
    const EvalScores s = parse_eval_report_csv(f, p.string());
    std::string label = p.parent_path().string();
    for (GestureClass cls : kReportOrder) {
      const auto& sc = s[cls];
      md << "| " << label << " | " << class_name(cls) << " | " << format_score(sc.alignment, 3) << " | "
         << format_score(sc.insertion, 3) << " | " << format_score(sc.deletion, 3) << " |\n";
    }
  }
  std::cout << md.str();
  if (write_out) write_text_file(fs::path(c.out) / "report.md", md.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gestime: gesture timing prediction from speech prosody"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--threshold", o.threshold, "alignment tolerance T in frames");
  app.add_option("--feature-set", o.feature_set, "prosody | mfcc | both");
  app.add_option("--eyebrow-mode", o.eyebrow_mode, "hand-only | with-upward | with-updown");
  app.add_option("--out", o.out, "output directory");

  std::string corpus_dir, dataset, name, pred, truth;
  std::vector<std::string> dirs;
  auto* ingest_cmd = app.add_subcommand("ingest", "build a dataset bundle from corpus files");
  ingest_cmd->add_option("corpus_dir", corpus_dir, "directory with words.tsv, gestures.tsv, aus.csv, features.csv");
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus and dataset bundle");
  auto* train_cmd = app.add_subcommand("train", "train one model on the dataset's split");
  train_cmd->add_option("dataset", dataset, "dataset bundle directory");
  auto* eval_cmd = app.add_subcommand("eval", "score prediction sequences against truth sequences");
  eval_cmd->add_option("pred", pred, "predictions, one sequence of class names per line")->required();
  eval_cmd->add_option("truth", truth, "ground truth, same layout")->required();
  auto* baseline_cmd = app.add_subcommand("baseline", "Markov chain random-output baseline");
  baseline_cmd->add_option("dataset", dataset, "dataset bundle directory");
  auto* exp_cmd = app.add_subcommand("experiment", "run one experiment (exp1..exp7)");
  exp_cmd->add_option("name", name, "exp1..exp7")->required();
  exp_cmd->add_option("dataset", dataset, "dataset bundle directory");
  auto* report_cmd = app.add_subcommand("report", "combine eval_report.csv files into one table");
  report_cmd->add_option("dirs", dirs, "result directories")->required();
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig c = resolve(o);
    if (*ingest_cmd) return cmd_ingest(c, corpus_dir);
    if (*synth_cmd) return cmd_synth(c);
    if (*train_cmd) return cmd_train(c, dataset);
    if (*eval_cmd) return cmd_eval(c, pred, truth);
    if (*baseline_cmd) return cmd_baseline(c, dataset);
    if (*exp_cmd) return cmd_experiment(c, name, dataset);
    if (*report_cmd) return cmd_report(c, dirs, o.out.has_value());
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputFormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputFormat;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
