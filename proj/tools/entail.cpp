#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entail/checkpoint.hpp"
#include "entail/data.hpp"
#include "entail/error.hpp"
#include "entail/heatmap.hpp"
#include "entail/model.hpp"
#include "entail/train.hpp"

namespace {

using namespace entail;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_abort = 3;

void report_parse(const std::string& path, const ParseStats& stats) {
  if (stats.dropped || stats.malformed) {
    std::fprintf(stderr,
                 "%s: %zu records retained, %zu without consensus dropped, "
                 "%zu malformed\n",
                 path.c_str(), stats.retained, stats.dropped, stats.malformed);
    for (std::size_t ln : stats.malformed_lines)
      std::fprintf(stderr, "  malformed record at line %zu\n", ln);
  }
}

std::vector<NliExample> load_data(const std::string& path, std::size_t limit) {
  ParseStats stats;
  auto data = parse_snli_file(path, stats);
  report_parse(path, stats);
  if (data.empty())
    throw DataError(path + " holds no usable examples");
  if (limit > 0 && data.size() > limit) data.resize(limit);
  return data;
}

struct TrainArgs {
  std::string train_path, dev_path, embeddings, out_dir;
  std::string strategy = "original";
  std::string attention = "on";
  std::size_t hidden = 300;
  std::size_t embed_dim = 300;
  std::size_t projection = 0;
  std::uint64_t seed = 42;
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  double lr = 0.001;
  double dropout = 0.25;
  double clip = 5.0;
  std::size_t limit_train = 0;
  std::size_t limit_dev = 0;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const InputStrategy strategy = parse_strategy(a.strategy);
  auto train_data = load_data(a.train_path, a.limit_train);
  auto dev_data = load_data(a.dev_path, a.limit_dev);

  std::vector<NliExample> all = train_data;
  all.insert(all.end(), dev_data.begin(), dev_data.end());
  const auto tokens = collect_tokens(all);

  Rng embed_rng(a.seed ^ 0xA5A5A5A55A5A5A5Aull);
  Vocab vocab = load_embeddings(a.embeddings, tokens, a.embed_dim, embed_rng);

  ModelConfig cfg;
  cfg.embed_dim = a.embed_dim;
  cfg.hidden_dim = a.hidden;
  cfg.proj_dim = a.projection;
  cfg.attention = a.attention == "on";
  cfg.dropout = real(a.dropout);
  cfg.seed = a.seed;
  SiameseModel model(cfg, std::move(vocab));

  std::filesystem::create_directories(a.out_dir);
  TrainOptions opts;
  opts.epochs = a.epochs;
  opts.batch_size = a.batch_size;
  opts.lr = real(a.lr);
  opts.clip_norm = real(a.clip);
  opts.strategy = strategy;
  opts.checkpoint_path = (std::filesystem::path(a.out_dir) / "model.ckpt").string();
  opts.metrics_path = (std::filesystem::path(a.out_dir) / "metrics.jsonl").string();
  opts.verbose = !a.quiet;

  if (!a.quiet) {
    const auto counts = count_parameters(model.params());
    std::printf("vocabulary: %zu tokens; trainable parameters: %zu "
                "(total with frozen embeddings: %zu)\n",
                model.vocab().size(), counts.trainable_total, counts.total);
  }

  const TrainResult res = train(model, train_data, dev_data, opts);
  std::printf("best dev accuracy %.4f (epoch %zu)\n",
              double(res.best_dev_acc), res.best_epoch);
  std::printf("checkpoint: %s\nmetrics: %s\n", opts.checkpoint_path.c_str(),
              opts.metrics_path.c_str());
  return exit_ok;
}

struct EvalArgs {
  std::string checkpoint, data_path;
  std::size_t batch_size = 128;
  std::string format = "text";
};

int cmd_eval(const EvalArgs& a) {
  const auto loaded = load_checkpoint(a.checkpoint);
  const auto data = load_data(a.data_path, 0);
  const EvalResult res =
      evaluate(*loaded.model, data, a.batch_size, loaded.meta.strategy);

  if (a.format == "json-lines") {
    nlohmann::json j;
    j["accuracy"] = res.accuracy;
    j["total"] = res.total;
    j["confusion"] = res.confusion;
    std::printf("%s\n", j.dump().c_str());
    return exit_ok;
  }

  std::printf("accuracy %.4f (%zu examples)\n", double(res.accuracy),
              res.total);
  std::printf("confusion (rows gold, columns predicted):\n");
  std::printf("%16s %13s %13s %13s\n", "", "entailment", "contradiction",
              "neutral");
  const char* names[3] = {"entailment", "contradiction", "neutral"};
  for (std::size_t g = 0; g < 3; ++g) {
    std::printf("%16s %13zu %13zu %13zu\n", names[g], res.confusion[g][0],
                res.confusion[g][1], res.confusion[g][2]);
  }
  return exit_ok;
}

struct PredictArgs {
  std::string checkpoint, data_path;
  std::size_t batch_size = 128;
};

int cmd_predict(const PredictArgs& a) {
  const auto loaded = load_checkpoint(a.checkpoint);
  const auto data = load_data(a.data_path, 0);
  const auto batches = make_batches(data, loaded.model->vocab(), a.batch_size,
                                    nullptr, loaded.meta.strategy);
  for (const auto& b : batches) {
    const Tensor2D probs = loaded.model->probabilities(b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < 3; ++c)
        if (probs(i, c) > probs(i, best)) best = c;
      nlohmann::json j;
      j["gold"] = label_name(Label(b.labels[i]));
      j["predicted"] = label_name(Label(std::int32_t(best)));
      j["probabilities"] = {
          {"entailment", probs(i, 0)},
          {"contradiction", probs(i, 1)},
          {"neutral", probs(i, 2)},
      };
      std::printf("%s\n", j.dump().c_str());
    }
  }
  return exit_ok;
}

struct AttendArgs {
  std::string checkpoint, premise, hypothesis;
  std::string format = "text";
};

SentenceHeatmap sentence_heatmap(const SiameseModel& model,
                                 const std::string& title,
                                 const Tokens& tokens) {
  const auto idx = model.vocab().lookup_all(tokens);
  const EncodedSentence enc = model.encode_tokens(idx);
  SentenceHeatmap hm;
  hm.title = title;
  const bool uniform = enc.alpha.empty();
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const real w = uniform ? real(1) / real(tokens.size()) : enc.alpha[t];
    hm.tokens.push_back({tokens[t], w});
  }
  return hm;
}

int cmd_attend(const AttendArgs& a) {
  const auto loaded = load_checkpoint(a.checkpoint);
  const SiameseModel& model = *loaded.model;

  NliExample ex;
  try {
    ex.premise = tokenize(a.premise);
    ex.hypothesis = tokenize(a.hypothesis);
  } catch (const DataError& e) {
    throw ArgumentError(std::string("empty sentence: ") + e.what());
  }
  ex = apply_input_strategy(ex, loaded.meta.strategy);

  const auto batches =
      make_batches({ex}, model.vocab(), 1, nullptr, InputStrategy::original);
  const Tensor2D probs = model.probabilities(batches[0]);
  std::size_t best = 0;
  for (std::size_t c = 1; c < 3; ++c)
    if (probs(0, c) > probs(0, best)) best = c;

  const bool uniform = !model.config().attention;
  const char* suffix = uniform ? " (no attention; uniform mean-pool weights)" : "";
  const SentenceHeatmap prem =
      sentence_heatmap(model, std::string("premise") + suffix, ex.premise);
  const SentenceHeatmap hyp = sentence_heatmap(
      model, std::string("hypothesis") + suffix, ex.hypothesis);

  char heading[160];
  std::snprintf(heading, sizeof(heading),
                "predicted: %s (entailment %.4f, contradiction %.4f, "
                "neutral %.4f)",
                label_name(Label(std::int32_t(best))), double(probs(0, 0)),
                double(probs(0, 1)), double(probs(0, 2)));

  if (a.format == "html") {
    std::printf("%s", render_html({prem, hyp}, heading).c_str());
  } else {
    std::printf("%s\n\n%s\n%s", heading, render_text(prem).c_str(),
                render_text(hyp).c_str());
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entail: biLSTM textual entailment trainer and tools"};
  app.require_subcommand(1);

  TrainArgs ta;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a model and keep the best-dev checkpoint");
  train_cmd->add_option("--train", ta.train_path, "Training data (SNLI records)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", ta.dev_path, "Dev data for per-epoch accuracy")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--embeddings", ta.embeddings,
                        "Pretrained vector file; omit to draw every vector "
                        "uniformly from (-0.05, 0.05)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", ta.out_dir, "Output directory")->required();
  train_cmd->add_option("--strategy", ta.strategy,
                        "original | invert-premises | double-premises | "
                        "double-hypothesis | differentiate")
      ->capture_default_str();
  train_cmd->add_option("--hidden", ta.hidden, "LSTM size per direction")
      ->capture_default_str();
  train_cmd->add_option("--embedding-dim", ta.embed_dim, "Word vector width")
      ->capture_default_str();
  train_cmd->add_option("--projection", ta.projection,
                        "Classifier projection width (0 = --hidden)")
      ->capture_default_str();
  train_cmd->add_option("--attention", ta.attention, "on | off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", ta.seed, "Seed for all randomness")
      ->capture_default_str();
  train_cmd->add_option("--epochs", ta.epochs, "Max epochs")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", ta.batch_size, "Examples per step")
      ->capture_default_str();
  train_cmd->add_option("--lr", ta.lr, "RMSprop learning rate")
      ->capture_default_str();
  train_cmd->add_option("--dropout", ta.dropout, "Dropout rate in [0,1)")
      ->capture_default_str();
  train_cmd->add_option("--clip", ta.clip, "Global gradient norm cap (0 = off)")
      ->capture_default_str();
  train_cmd->add_option("--limit-train", ta.limit_train,
                        "Use only the first N training examples (0 = all)")
      ->capture_default_str();
  train_cmd->add_option("--limit-dev", ta.limit_dev,
                        "Use only the first N dev examples (0 = all)")
      ->capture_default_str();
  train_cmd->add_flag("--quiet", ta.quiet, "Suppress per-epoch progress");

  EvalArgs ea;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Accuracy and confusion matrix on a dataset");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ea.data_path, "Dataset (SNLI records)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--batch-size", ea.batch_size, "Examples per step")
      ->capture_default_str();
  eval_cmd->add_option("--format", ea.format, "text | json-lines")
      ->check(CLI::IsMember({"text", "json-lines"}))
      ->capture_default_str();

  PredictArgs pa;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Per-example predictions as JSON lines");
  predict_cmd->add_option("--checkpoint", pa.checkpoint, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", pa.data_path, "Dataset (SNLI records)")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--batch-size", pa.batch_size, "Examples per step")
      ->capture_default_str();

  AttendArgs aa;
  CLI::App* attend_cmd = app.add_subcommand(
      "attend", "Render attention weights for one sentence pair");
  attend_cmd->add_option("--checkpoint", aa.checkpoint, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  attend_cmd->add_option("--premise", aa.premise, "Premise text")->required();
  attend_cmd->add_option("--hypothesis", aa.hypothesis, "Hypothesis text")
      ->required();
  attend_cmd->add_option("--format", aa.format, "text | html")
      ->check(CLI::IsMember({"text", "html"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(ta);
    if (eval_cmd->parsed()) return cmd_eval(ea);
    if (predict_cmd->parsed()) return cmd_predict(pa);
    if (attend_cmd->parsed()) return cmd_attend(aa);
    std::fprintf(stderr, "no subcommand given\n");
    return exit_usage;
  } catch (const TrainingAbort& e) {
    std::fprintf(stderr, "training aborted: %s\n", e.what());
    return exit_abort;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return exit_usage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_data;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_data;
  }
}
