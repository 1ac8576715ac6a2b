// commands.cc

// Copyright 2026  The nplda-backend Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <cstdio>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "nplda/baselines.h"
#include "nplda/dataio.h"
#include "nplda/gplda.h"
#include "nplda/metrics.h"
#include "nplda/model-io.h"
#include "nplda/nplda.h"
#include "nplda/preprocess.h"
#include "nplda/scoring.h"
#include "nplda/synth.h"
#include "nplda/trainer.h"

namespace nplda {

namespace {

struct GenSynthOptions {
  std::string spec, out;
  std::optional<std::uint64_t> seed;
  bool text = false;
};

struct SampleTrialsOptions {
  std::string archive, out;
  std::size_t targets = 1000;
  std::size_t ratio = 10;
  std::uint64_t seed = 42;
};

struct FitPreprocessOptions {
  std::string archive, out;
  std::optional<Eigen::Index> lda_dim;
};

struct TrainBackendOptions {
  std::string backend, archive, trials, out, history, pipeline;
  std::string valid_trials, valid_archive;
  std::optional<Eigen::Index> lda_dim;
  GpldaEmConfig em;
  TrainConfig train;
  std::string loss = "soft_dcf";
};

struct ScoreOptions {
  std::string model, archive, trials, out;
};

struct EvaluateOptions {
  std::string scores;
  std::optional<double> beta;
  double c_miss = 1.0, c_fa = 1.0, p_target = 0.01;
  bool ignore_unlabeled = false;
};

void WriteTextFile(const std::string &path,
                   const std::function<void(std::ostream &)> &body) {
  std::ofstream os(path);
  if (!os) throw DataError(DataError::Kind::kIo, "cannot open " + path);
  body(os);
  if (!os) throw DataError(DataError::Kind::kIo, "failed to write " + path);
}

void RunGenSynth(const GenSynthOptions &o, std::ostream &out) {
  SynthSpec spec = LoadSynthSpec(o.spec);
  if (o.seed) spec.seed = *o.seed;
  const EmbeddingArchive archive = Generate(spec);
  SaveArchive(archive, o.out,
              o.text ? ArchiveEncoding::kText : ArchiveEncoding::kBinary);
  out << "wrote " << archive.Size() << " embeddings of dimension "
      << archive.Dim() << " to " << o.out << "\n";
}

void RunSampleTrials(const SampleTrialsOptions &o, std::ostream &out) {
  const EmbeddingArchive archive = LoadArchive(o.archive);
  const std::vector<Trial> trials =
      SampleTrials(archive, o.targets, o.ratio, o.seed);
  SaveTrials(trials, o.out);
  out << "wrote " << trials.size() << " trials to " << o.out << "\n";
}

void RunFitPreprocess(const FitPreprocessOptions &o, std::ostream &out) {
  const EmbeddingArchive archive = LoadArchive(o.archive);
  const PreprocessPipeline pipeline = FitPipeline(archive, o.lda_dim);
  SaveModel(pipeline, o.out);
  out << "pipeline " << pipeline.InputDim() << " -> " << pipeline.OutputDim()
      << " written to " << o.out << "\n";
}

PreprocessPipeline PipelineFor(const TrainBackendOptions &o,
                               const EmbeddingArchive &archive) {
  if (o.pipeline.empty()) return FitPipeline(archive, o.lda_dim);
  PreprocessPipeline p = LoadModel<PreprocessPipeline>(o.pipeline);
  if (p.InputDim() != archive.Dim())
    throw DimensionError("pipeline input dimension " +
                         std::to_string(p.InputDim()) +
                         " does not match archive dimension " +
                         std::to_string(archive.Dim()));
  return p;
}

GpldaFitResult FitGplda(const TrainBackendOptions &o,
                        const PreprocessPipeline &pipeline,
                        const EmbeddingArchive &archive, std::ostream &out) {
  GpldaFitResult fit = FitGpldaEm(pipeline.ApplyColumns(archive.AsColumns()),
                                  GroupBySpeaker(archive), o.em);
  for (const std::string &w : fit.warnings) out << "warning: " << w << "\n";
  return fit;
}

std::vector<Trial> RequireTrials(const std::string &path,
                                 const EmbeddingArchive &archive,
                                 const std::string &backend) {
  if (path.empty())
    throw CLI::ValidationError("--trials", "backend " + backend +
                                               " needs a labelled trial list");
  return LoadTrials(path, archive);
}

void RunTrainBackend(TrainBackendOptions o, std::ostream &out) {
  const auto loss = ParseLossKind(o.loss);
  if (!loss) throw CLI::ValidationError("--loss", "unknown loss " + o.loss);
  o.train.loss = *loss;
  if (o.train.alpha <= 0)
    throw CLI::ValidationError("--alpha", "must be positive");

  const EmbeddingArchive archive = LoadArchive(o.archive);
  const PreprocessPipeline pipeline = PipelineFor(o, archive);

  if (o.backend == "gplda") {
    const GpldaFitResult fit = FitGplda(o, pipeline, archive, out);
    SaveScoringModel({pipeline, fit.model}, o.out);
    if (!o.history.empty())
      WriteTextFile(o.history, [&](std::ostream &os) {
        os << "iteration,log_likelihood\n";
        char buf[64];
        for (std::size_t i = 0; i < fit.log_likelihoods.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i,
                        fit.log_likelihoods[i]);
          os << buf;
        }
      });
  } else if (o.backend == "gb") {
    const std::vector<Trial> trials = RequireTrials(o.trials, archive, o.backend);
    const GaussianBackendModel model = FitGaussianBackend(
        TrialData::Resolve(trials, archive).Processed(pipeline));
    SaveScoringModel({pipeline, model}, o.out);
  } else if (o.backend == "dplda") {
    const std::vector<Trial> trials = RequireTrials(o.trials, archive, o.backend);
    const GpldaFitResult fit = FitGplda(o, pipeline, archive, out);
    const DpldaModel init = DpldaFromGplda(DeriveScoreMatrices(fit.model), fit.model.mu);
    const DpldaTrainResult result = TrainDplda(
        TrialData::Resolve(trials, archive).Processed(pipeline), init.w, o.train);
    SaveScoringModel({pipeline, result.model}, o.out);
    if (!o.history.empty())
      WriteTextFile(o.history, [&](std::ostream &os) {
        os << "epoch,train_loss\n";
        char buf[64];
        for (std::size_t i = 0; i < result.epoch_losses.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i,
                        result.epoch_losses[i]);
          os << buf;
        }
      });
  } else if (o.backend == "nplda") {
    const std::vector<Trial> trials = RequireTrials(o.trials, archive, o.backend);
    const GpldaFitResult fit = FitGplda(o, pipeline, archive, out);
    const NpldaParams init =
        InitFromGplda(pipeline, fit.model, DeriveScoreMatrices(fit.model),
                      o.train.betas, o.train.alpha);
    std::optional<EmbeddingArchive> valid_archive;
    if (!o.valid_archive.empty()) {
      valid_archive = LoadArchive(o.valid_archive);
      if (valid_archive->Dim() != archive.Dim())
        throw DimensionError("validation archive dimension " +
                             std::to_string(valid_archive->Dim()) +
                             " does not match archive dimension " +
                             std::to_string(archive.Dim()));
    }
    const EmbeddingArchive &va = valid_archive ? *valid_archive : archive;
    const std::vector<Trial> valid =
        o.valid_trials.empty() ? trials : LoadTrials(o.valid_trials, va);
    const TrainResult result =
        TrainNplda(init, TrialData::Resolve(trials, archive),
                   TrialData::Resolve(valid, va), o.train);
    SaveScoringModel({PreprocessPipeline{}, result.best}, o.out);
    if (!o.history.empty())
      WriteTextFile(o.history,
                    [&](std::ostream &os) { WriteHistory(result, os); });
    out << "selected epoch " << result.best_epoch << "\n";
  } else {
    throw CLI::ValidationError("--backend", "unknown backend " + o.backend);
  }
  out << o.backend << " model written to " << o.out << "\n";
}

void RunScore(const ScoreOptions &o, std::ostream &out) {
  const Scorer scorer(LoadScoringModel(o.model));
  const EmbeddingArchive archive = LoadArchive(o.archive);
  if (archive.Dim() != scorer.InputDim())
    throw DimensionError("model dimension " + std::to_string(scorer.InputDim()) +
                         " does not match archive dimension " +
                         std::to_string(archive.Dim()));
  const std::vector<Trial> trials = LoadTrials(o.trials, archive);
  const std::vector<ScoreRecord> scores = ScoreTrials(scorer, archive, trials);
  SaveScores(scores, o.out);
  out << "wrote " << scores.size() << " scores to " << o.out << "\n";
}

void RunEvaluate(const EvaluateOptions &o, std::ostream &out) {
  const CostParams cp =
      o.beta ? CostParams::FromBeta(*o.beta)
             : CostParams{o.c_miss, o.c_fa, o.p_target};
  cp.Validate();
  const ScoreSet ss =
      ScoreSet::FromRecords(LoadScores(o.scores), o.ignore_unlabeled);
  ss.ValidateBothClasses();
  const MinDcfResult min = MinDcf(ss, cp);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "beta=%.4f\neer=%.4f\nmin_dcf=%.4f\nact_dcf=%.4f\n"
                "threshold=%.4f\n",
                cp.Beta(), 100.0 * Eer(ss), min.min_dcf, ActDcf(ss, cp),
                min.threshold);
  out << buf;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"Speaker verification backends: GPLDA, Gaussian backend, "
               "DPLDA and NPLDA"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Key-value config file; put subcommand options under a "
                 "[subcommand] section. Flags on the command line win.");
  app.allow_config_extras(false);

  GenSynthOptions gen;
  auto *gen_cmd = app.add_subcommand("gen-synth", "Draw a synthetic archive");
  gen_cmd->add_option("--spec", gen.spec, "Synthetic data spec file")->required();
  gen_cmd->add_option("--out", gen.out, "Output archive")->required();
  gen_cmd->add_option("--seed", gen.seed, "Overrides the seed given in --spec");
  gen_cmd->add_flag("--text", gen.text, "Write the text archive format");

  SampleTrialsOptions st;
  auto *st_cmd = app.add_subcommand("sample-trials", "Sample a labelled trial list");
  st_cmd->add_option("--archive", st.archive, "Embedding archive")->required();
  st_cmd->add_option("--out", st.out, "Output trial list")->required();
  st_cmd->add_option("--targets", st.targets, "Number of target trials")
      ->capture_default_str();
  st_cmd->add_option("--ratio", st.ratio, "Non-targets per target")
      ->capture_default_str();
  st_cmd->add_option("--seed", st.seed, "Random seed")->capture_default_str();

  FitPreprocessOptions fp;
  auto *fp_cmd = app.add_subcommand("fit-preprocess",
                                    "Fit centering, LDA and length normalization");
  fp_cmd->add_option("--archive", fp.archive, "Training archive")->required();
  fp_cmd->add_option("--out", fp.out, "Output pipeline model")->required();
  fp_cmd->add_option("--lda-dim", fp.lda_dim,
                     "LDA output dimension (default min(170, d, speakers-1))");

  TrainBackendOptions tb;
  auto *tb_cmd = app.add_subcommand("train-backend", "Train a scoring backend");
  tb_cmd->add_option("--backend", tb.backend, "gplda, gb, dplda or nplda")
      ->required()
      ->check(CLI::IsMember({"gplda", "gb", "dplda", "nplda"}));
  tb_cmd->add_option("--archive", tb.archive, "Training archive")->required();
  tb_cmd->add_option("--out", tb.out, "Output model")->required();
  tb_cmd->add_option("--trials", tb.trials,
                     "Labelled training trials (gb, dplda, nplda)");
  tb_cmd->add_option("--valid-trials", tb.valid_trials,
                     "Validation trials for nplda (default: training trials)");
  tb_cmd->add_option("--valid-archive", tb.valid_archive,
                     "Archive holding the validation trial ids");
  tb_cmd->add_option("--pipeline", tb.pipeline,
                     "Pre-fitted pipeline (default: fit on the archive)");
  tb_cmd->add_option("--history", tb.history, "Per-iteration history CSV");
  tb_cmd->add_option("--lda-dim", tb.lda_dim, "LDA output dimension");
  tb_cmd->add_option("--plda-rank", tb.em.rank, "Speaker subspace rank, 0 = full")
      ->capture_default_str();
  tb_cmd->add_option("--em-iterations", tb.em.iterations, "EM iterations")
      ->capture_default_str();
  tb_cmd->add_flag("--average-per-speaker", tb.em.average_per_speaker,
                   "Weight speakers equally in the EM initialization");
  tb_cmd->add_option("--epochs", tb.train.max_epochs, "Maximum training epochs")
      ->capture_default_str();
  tb_cmd->add_option("--batch-size", tb.train.batch_size, "Trials per batch")
      ->capture_default_str();
  tb_cmd->add_option("--lr", tb.train.lr, "Adam learning rate")
      ->capture_default_str();
  tb_cmd->add_option("--patience", tb.train.lr_halving_patience,
                     "Epochs without validation improvement before halving lr")
      ->capture_default_str();
  tb_cmd->add_option("--loss", tb.loss, "soft_dcf, bce or bce_regularized")
      ->capture_default_str();
  tb_cmd->add_option("--lambda", tb.train.lambda, "Regularization weight")
      ->capture_default_str();
  tb_cmd->add_option("--alpha", tb.train.alpha, "Sigmoid warp of the soft DCF")
      ->capture_default_str();
  tb_cmd->add_option("--beta", tb.train.betas, "Operating point(s) of the cost")
      ->capture_default_str();
  tb_cmd->add_option("--seed", tb.train.seed, "Random seed")->capture_default_str();
  tb_cmd->add_flag("!--no-stratify", tb.train.stratified_batches,
                   "Plain shuffled batches instead of class-stratified ones");

  ScoreOptions sc;
  auto *sc_cmd = app.add_subcommand("score", "Score a trial list");
  sc_cmd->add_option("--model", sc.model, "Model from train-backend")->required();
  sc_cmd->add_option("--archive", sc.archive, "Embedding archive")->required();
  sc_cmd->add_option("--trials", sc.trials, "Trial list")->required();
  sc_cmd->add_option("--out", sc.out, "Output score file")->required();

  EvaluateOptions ev;
  auto *ev_cmd = app.add_subcommand("evaluate", "EER, minDCF and actDCF of a score file");
  ev_cmd->add_option("--scores", ev.scores, "Labelled score file")->required();
  auto *beta_opt = ev_cmd->add_option("--beta", ev.beta, "Cost ratio beta");
  ev_cmd->add_option("--c-miss", ev.c_miss, "Miss cost")
      ->capture_default_str()->excludes(beta_opt);
  ev_cmd->add_option("--c-fa", ev.c_fa, "False alarm cost")
      ->capture_default_str()->excludes(beta_opt);
  ev_cmd->add_option("--p-target", ev.p_target, "Target prior")
      ->capture_default_str()->excludes(beta_opt);
  ev_cmd->add_flag("--ignore-unlabeled", ev.ignore_unlabeled,
                   "Drop unlabeled trials instead of failing");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    out << app.help(app.get_subcommands().empty()
                        ? ""
                        : app.get_subcommands().front()->get_name());
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n"
        << "run with --help for usage\n";
    return 2;
  }

  try {
    if (gen_cmd->parsed()) RunGenSynth(gen, out);
    else if (st_cmd->parsed()) RunSampleTrials(st, out);
    else if (fp_cmd->parsed()) RunFitPreprocess(fp, out);
    else if (tb_cmd->parsed()) RunTrainBackend(tb, out);
    else if (sc_cmd->parsed()) RunScore(sc, out);
    else if (ev_cmd->parsed()) RunEvaluate(ev, out);
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nplda
