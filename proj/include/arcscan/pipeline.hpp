#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arcscan/arc_cache.hpp"
#include "arcscan/datagen.hpp"
#include "arcscan/features.hpp"
#include "arcscan/image.hpp"
#include "arcscan/lda.hpp"
#include "arcscan/parallel.hpp"
#include "arcscan/pso.hpp"
#include "arcscan/rng.hpp"
#include "arcscan/split.hpp"

namespace arcscan {

enum class SamplingMode { kFull, kLatitude, kIntraLatitude, kPoint2d };

inline std::string_view sampling_mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::kFull: return "full";
    case SamplingMode::kLatitude: return "latitude";
    case SamplingMode::kIntraLatitude: return "intra_latitude";
    case SamplingMode::kPoint2d: return "point2d";
  }
  return "unknown";
}

inline SamplingMode parse_sampling_mode(std::string_view s) {
  if (s == "full") return SamplingMode::kFull;
  if (s == "latitude") return SamplingMode::kLatitude;
  if (s == "intra_latitude") return SamplingMode::kIntraLatitude;
  if (s == "point2d") return SamplingMode::kPoint2d;
  throw std::invalid_argument("unknown sampling mode: " + std::string(s));
}

// One end-to-end experiment. Per repetition the dataset gets its noise
// condition, a stratified 60/20/20 train/val/eval split, and an
// independently seeded optimizer run; reported accuracy always comes from
// the eval split, which no fitness evaluation ever sees.
struct ExperimentConfig {
  SamplingMode mode = SamplingMode::kLatitude;
  int arc_budget = 4;
  double intra_rate = 1.0;
  int point_budget = 324;
  NoiseSpec noise;
  double split_fraction = 0.6;
  int repetitions = 10;
  pso::PsoConfig pso;
  std::uint64_t seed = 1;
  double ridge = 1e-6;
  int threads = 1;           // repetition-level workers
  int pso_eval_threads = 1;  // fitness workers inside one swarm iteration
  int arc_min = 0;           // arc search window; narrowed for toy problems
  int arc_max = kImageSize - 1;
  std::vector<int> fixed_arcs;  // intra mode: skip stage one, use these

  void validate() const {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
      throw std::invalid_argument("split_fraction must be in (0,1)");
    if (arc_min < 0 || arc_max >= kImageSize || arc_min > arc_max)
      throw std::invalid_argument("arc window must satisfy 0 <= min <= max <= 179");
    if (arc_budget < 1 || arc_budget > arc_max - arc_min + 1)
      throw std::invalid_argument("arc_budget outside the arc window");
    if (!(intra_rate > 0.0 && intra_rate <= 1.0))
      throw std::invalid_argument("intra_rate must be in (0,1]");
    if (point_budget < 1 || point_budget > kPixelCount)
      throw std::invalid_argument("point_budget must be in [1,32400]");
  }
};

struct RepetitionResult {
  double accuracy = 0.0;
  double fitness = 0.0;            // PSO validation-split fitness of the pick
  std::vector<int> selection;      // arc columns, or global pixel indices
  std::vector<int> arcs;           // latitude-stage arcs (latitude/intra)
  std::vector<double> fitness_history;
  long long point_count = 0;
  double seconds = 0.0;
};

struct RunReport {
  SamplingMode mode = SamplingMode::kFull;
  int arc_budget = 0;
  double intra_rate = 1.0;
  NoiseSpec noise;
  std::vector<RepetitionResult> repetitions;
  double mean_accuracy = 0.0;
  long long sampled_point_count = 0;
  double wall_seconds = 0.0;
};

struct Heatmap {
  SamplingMode mode = SamplingMode::kLatitude;
  std::vector<long long> counts;  // 180 arc counts, or 32400 pixel counts
};

namespace detail {

inline std::vector<DeficiencyClass> dataset_labels(std::span<const ArsImage> images) {
  std::vector<DeficiencyClass> labels;
  labels.reserve(images.size());
  for (const ArsImage& img : images) {
    if (!img.label())
      throw std::invalid_argument("pipeline: dataset image without label");
    labels.push_back(*img.label());
  }
  return labels;
}

// Per-repetition state: noise applied, splits drawn.
struct RepData {
  std::vector<ArsImage> noisy_storage;
  std::span<const ArsImage> images;
  std::vector<DeficiencyClass> labels;
  Splits splits;
  std::shared_ptr<const ArcFeatureCache> cache;
};

inline RepData make_rep(const ExperimentConfig& cfg, std::span<const ArsImage> base,
                        int rep, bool need_cache,
                        std::shared_ptr<const ArcFeatureCache> clean_cache) {
  RepData rd;
  if (cfg.noise.any()) {
    rd.noisy_storage = apply_noise(
        base, cfg.noise, rng::derive(cfg.seed, rng::kNoise, static_cast<std::uint64_t>(rep)), 1);
    rd.images = rd.noisy_storage;
  } else {
    rd.images = base;
  }
  rd.labels = dataset_labels(rd.images);
  auto gen = rng::engine(rng::derive(cfg.seed, rng::kSplit, static_cast<std::uint64_t>(rep)));
  rd.splits = stratified_split3(rd.labels, cfg.split_fraction, gen);
  if (rd.splits.train.empty() || rd.splits.val.empty() || rd.splits.eval.empty())
    throw std::invalid_argument("pipeline: split produced an empty partition");
  if (need_cache) {
    if (!cfg.noise.any() && clean_cache)
      rd.cache = std::move(clean_cache);
    else
      rd.cache = std::make_shared<ArcFeatureCache>(rd.images, 1);
  }
  return rd;
}

// Fitness over arc subsets: fit on the train split, score on val, both
// through the composition cache.
class ArcFitness {
 public:
  ArcFitness(const ArcFeatureCache& cache, const RepData& rd,
             std::span<const FeatureId> ids, double ridge)
      : cache_(&cache), ids_(ids.begin(), ids.end()), ridge_(ridge) {
    init(train_skel_, rd, rd.splits.train);
    init(val_skel_, rd, rd.splits.val);
    train_rows_ = rd.splits.train;
    val_rows_ = rd.splits.val;
  }

  double operator()(std::span<const int> arcs) const {
    FeatureMatrix train = train_skel_;
    FeatureMatrix val = val_skel_;
    std::vector<double> buf(ids_.size());
    fill(train, train_rows_, arcs, buf);
    const LdaModel model = fit(train, ridge_);
    fill(val, val_rows_, arcs, buf);
    return accuracy(model, val);
  }

 private:
  void init(FeatureMatrix& m, const RepData& rd, const std::vector<int>& rows) {
    m.ids = ids_;
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(ids_.size()));
    for (int r : rows) m.labels.push_back(rd.labels[r]);
  }

  void fill(FeatureMatrix& m, const std::vector<int>& rows,
            std::span<const int> arcs, std::vector<double>& buf) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      cache_->compose(rows[i], arcs, ids_, buf);
      for (std::size_t j = 0; j < buf.size(); ++j)
        m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
    }
  }

  const ArcFeatureCache* cache_;
  std::vector<FeatureId> ids_;
  double ridge_;
  FeatureMatrix train_skel_, val_skel_;
  std::vector<int> train_rows_, val_rows_;
};

// Fitness over point subsets of some per-image value array (concatenated
// arc pixels, or the raw image). Accessor: (image_row, point) -> float.
template <class Accessor>
class GatherFitness {
 public:
  GatherFitness(Accessor acc, const RepData& rd, std::span<const FeatureId> ids,
                double ridge)
      : acc_(std::move(acc)), ids_(ids.begin(), ids.end()), ridge_(ridge) {
    init(train_skel_, rd, rd.splits.train);
    init(val_skel_, rd, rd.splits.val);
    train_rows_ = rd.splits.train;
    val_rows_ = rd.splits.val;
  }

  double operator()(std::span<const int> pts) const {
    FeatureMatrix train = train_skel_;
    FeatureMatrix val = val_skel_;
    std::vector<float> gather(pts.size());
    std::vector<float> sort_buf;
    fill(train, train_rows_, pts, gather, sort_buf);
    const LdaModel model = fit(train, ridge_);
    fill(val, val_rows_, pts, gather, sort_buf);
    return accuracy(model, val);
  }

 private:
  void init(FeatureMatrix& m, const RepData& rd, const std::vector<int>& rows) {
    m.ids = ids_;
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(ids_.size()));
    for (int r : rows) m.labels.push_back(rd.labels[r]);
  }

  void fill(FeatureMatrix& m, const std::vector<int>& rows,
            std::span<const int> pts, std::vector<float>& gather,
            std::vector<float>& sort_buf) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j)
        gather[j] = acc_(rows[i], pts[j]);
      const FeatureVector fv = extract_shared(gather, ids_, sort_buf);
      for (std::size_t j = 0; j < fv.values.size(); ++j)
        m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            fv.values[j];
    }
  }

  Accessor acc_;
  std::vector<FeatureId> ids_;
  double ridge_;
  FeatureMatrix train_skel_, val_skel_;
  std::vector<int> train_rows_, val_rows_;
};

// Reported accuracy: refit on the train split and score the eval split,
// sampling the given global pixel set in row-major order. Every mode goes
// through this one path, so degenerate full-coverage configurations agree
// with the full baseline bit-exactly.
inline double final_eval_points(const RepData& rd, std::span<const int> pixels,
                                std::span<const FeatureId> ids, double ridge) {
  auto build = [&](const std::vector<int>& rows) {
    FeatureMatrix m;
    m.ids.assign(ids.begin(), ids.end());
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(ids.size()));
    std::vector<float> gather(pixels.size());
    std::vector<float> sort_buf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto px = rd.images[rows[i]].pixels();
      for (std::size_t j = 0; j < pixels.size(); ++j) gather[j] = px[pixels[j]];
      const FeatureVector fv = extract_shared(gather, ids, sort_buf);
      for (std::size_t j = 0; j < fv.values.size(); ++j)
        m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            fv.values[j];
      m.labels.push_back(rd.labels[rows[i]]);
    }
    return m;
  };
  const LdaModel model = fit(build(rd.splits.train), ridge);
  return accuracy(model, build(rd.splits.eval));
}

inline std::vector<int> all_pixels() {
  std::vector<int> p(kPixelCount);
  for (int i = 0; i < kPixelCount; ++i) p[i] = i;
  return p;
}

inline std::vector<int> arcs_to_pixels(std::span<const int> arcs) {
  return PointMask::from_arcs(ArcSet(std::vector<int>(arcs.begin(), arcs.end())))
      .point_indices();
}

struct StageResult {
  std::vector<int> indices;
  double fitness = 0.0;
  std::vector<double> history;
};

inline StageResult latitude_stage(const ExperimentConfig& cfg, const RepData& rd,
                                  int rep) {
  const int width = cfg.arc_max - cfg.arc_min + 1;
  ArcFitness fitness(*rd.cache, rd, paper_features(), cfg.ridge);
  if (cfg.arc_budget == width) {
    // only one feasible arc set; no search needed
    std::vector<int> arcs(width);
    for (int i = 0; i < width; ++i) arcs[i] = cfg.arc_min + i;
    const double f = fitness(arcs);
    return {std::move(arcs), f, {f}};
  }
  pso::PsoConfig pc = cfg.pso;
  pc.dims = cfg.arc_budget;
  pc.value_min = cfg.arc_min;
  pc.value_max = cfg.arc_max;
  pc.seed = rng::derive(cfg.seed, rng::kPso, static_cast<std::uint64_t>(rep), 0);
  const pso::SwarmResult sr = pso::optimize(pc, fitness, cfg.pso_eval_threads);
  return {sr.best_indices, sr.best_fitness, sr.history};
}

inline long long intra_points_per_arc(double rate) {
  return std::llround(rate * kImageSize);
}

// Second-stage optimization inside fixed arcs. Particles index into the
// concatenation of the arc columns; results are mapped back to global
// row-major pixel indices.
inline StageResult intra_stage(const ExperimentConfig& cfg, const RepData& rd,
                               std::span<const int> arcs, int rep, int stage_tag) {
  const int k = static_cast<int>(arcs.size());
  const int width = k * kImageSize;
  const long long dims64 = intra_points_per_arc(cfg.intra_rate) * k;
  if (dims64 < 1)
    throw std::invalid_argument("intra stage: sampling budget rounds to zero points");
  if (dims64 > width)
    throw std::invalid_argument("intra stage: budget exceeds available arc points");
  const int dims = static_cast<int>(dims64);

  // concatenated arc pixels per image, gather source for the fitness
  const int n = static_cast<int>(rd.images.size());
  std::vector<float> concat(static_cast<std::size_t>(n) * width);
  for (int i = 0; i < n; ++i) {
    float* dst = concat.data() + static_cast<std::size_t>(i) * width;
    for (int a = 0; a < k; ++a)
      for (int r = 0; r < kImageSize; ++r)
        dst[a * kImageSize + r] = rd.images[i](r, arcs[a]);
  }
  auto acc = [&concat, width](int row, int pt) {
    return concat[static_cast<std::size_t>(row) * width + pt];
  };

  auto to_pixels = [&](std::span<const int> concat_idx) {
    std::vector<int> px;
    px.reserve(concat_idx.size());
    for (int i : concat_idx)
      px.push_back((i % kImageSize) * kImageSize + arcs[i / kImageSize]);
    std::sort(px.begin(), px.end());
    return px;
  };

  GatherFitness<decltype(acc)> fitness(acc, rd, paper_features(), cfg.ridge);
  if (dims == width) {
    std::vector<int> everything(width);
    for (int i = 0; i < width; ++i) everything[i] = i;
    const double f = fitness(everything);
    return {to_pixels(everything), f, {f}};
  }
  pso::PsoConfig pc = cfg.pso;
  pc.dims = dims;
  pc.value_min = 0;
  pc.value_max = width - 1;
  pc.seed = rng::derive(cfg.seed, rng::kPso, static_cast<std::uint64_t>(rep),
                        static_cast<std::uint64_t>(stage_tag));
  const pso::SwarmResult sr = pso::optimize(pc, fitness, cfg.pso_eval_threads);
  return {to_pixels(sr.best_indices), sr.best_fitness, sr.history};
}

inline StageResult point2d_stage(const ExperimentConfig& cfg, const RepData& rd,
                                 int rep) {
  auto acc = [&rd](int row, int pt) { return rd.images[row].pixels()[pt]; };
  GatherFitness<decltype(acc)> fitness(acc, rd, paper_features(), cfg.ridge);
  if (cfg.point_budget == kPixelCount) {
    std::vector<int> everything = all_pixels();
    const double f = fitness(everything);
    return {std::move(everything), f, {f}};
  }
  pso::PsoConfig pc = cfg.pso;
  pc.dims = cfg.point_budget;
  pc.value_min = 0;
  pc.value_max = kPixelCount - 1;
  pc.seed = rng::derive(cfg.seed, rng::kPso, static_cast<std::uint64_t>(rep), 0);
  const pso::SwarmResult sr = pso::optimize(pc, fitness, cfg.pso_eval_threads);
  return {sr.best_indices, sr.best_fitness, sr.history};
}

inline void finalize(RunReport& report) {
  double sum = 0.0;
  for (const RepetitionResult& r : report.repetitions) sum += r.accuracy;
  report.mean_accuracy = sum / static_cast<double>(report.repetitions.size());
  report.sampled_point_count =
      report.repetitions.empty() ? 0 : report.repetitions.front().point_count;
}

template <class RepFn>
RunReport run_repetitions(const ExperimentConfig& cfg, RepFn&& rep_fn) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.noise = cfg.noise;
  report.intra_rate = cfg.intra_rate;
  report.repetitions.resize(cfg.repetitions);
  parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
    const auto r0 = std::chrono::steady_clock::now();
    report.repetitions[rep] = rep_fn(rep);
    const auto r1 = std::chrono::steady_clock::now();
    report.repetitions[rep].seconds = std::chrono::duration<double>(r1 - r0).count();
  });
  finalize(report);
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return report;
}

}  // namespace detail

// LDA on the canonical features of fully sampled images.
inline RunReport run_full_baseline(const ExperimentConfig& cfg,
                                   std::span<const ArsImage> images) {
  cfg.validate();
  const std::vector<int> pixels = detail::all_pixels();
  RunReport report = detail::run_repetitions(cfg, [&](int rep) {
    const detail::RepData rd = detail::make_rep(cfg, images, rep, false, nullptr);
    RepetitionResult rr;
    rr.accuracy = detail::final_eval_points(rd, pixels, paper_features(), cfg.ridge);
    rr.point_count = kPixelCount;
    return rr;
  });
  report.mode = SamplingMode::kFull;
  report.arc_budget = kImageSize;
  return report;
}

// Latitude-based sampling: PSO over arc subsets of size arc_budget.
inline RunReport optimize_arcs(const ExperimentConfig& cfg,
                               std::span<const ArsImage> images) {
  cfg.validate();
  std::shared_ptr<const ArcFeatureCache> clean_cache;
  if (!cfg.noise.any())
    clean_cache = std::make_shared<ArcFeatureCache>(images, cfg.threads);
  RunReport report = detail::run_repetitions(cfg, [&](int rep) {
    const detail::RepData rd = detail::make_rep(cfg, images, rep, true, clean_cache);
    const detail::StageResult stage = detail::latitude_stage(cfg, rd, rep);
    RepetitionResult rr;
    rr.arcs = stage.indices;
    rr.selection = stage.indices;
    rr.fitness = stage.fitness;
    rr.fitness_history = stage.history;
    rr.point_count = static_cast<long long>(stage.indices.size()) * kImageSize;
    rr.accuracy = detail::final_eval_points(rd, detail::arcs_to_pixels(stage.indices),
                                            paper_features(), cfg.ridge);
    return rr;
  });
  report.mode = SamplingMode::kLatitude;
  report.arc_budget = cfg.arc_budget;
  return report;
}

// Two-stage sampling: latitude arcs first (or cfg.fixed_arcs), then point
// selection inside those arcs at intra_rate.
inline RunReport optimize_intra(const ExperimentConfig& cfg,
                                std::span<const ArsImage> images) {
  cfg.validate();
  std::vector<int> fixed;
  if (!cfg.fixed_arcs.empty())
    fixed = ArcSet(cfg.fixed_arcs).indices();
  std::shared_ptr<const ArcFeatureCache> clean_cache;
  if (fixed.empty() && !cfg.noise.any())
    clean_cache = std::make_shared<ArcFeatureCache>(images, cfg.threads);
  RunReport report = detail::run_repetitions(cfg, [&](int rep) {
    const detail::RepData rd =
        detail::make_rep(cfg, images, rep, fixed.empty(), clean_cache);
    RepetitionResult rr;
    rr.arcs = fixed.empty() ? detail::latitude_stage(cfg, rd, rep).indices : fixed;
    const detail::StageResult stage = detail::intra_stage(cfg, rd, rr.arcs, rep, 1);
    rr.selection = stage.indices;
    rr.fitness = stage.fitness;
    rr.fitness_history = stage.history;
    rr.point_count =
        detail::intra_points_per_arc(cfg.intra_rate) * static_cast<long long>(rr.arcs.size());
    rr.accuracy =
        detail::final_eval_points(rd, stage.indices, paper_features(), cfg.ridge);
    return rr;
  });
  report.mode = SamplingMode::kIntraLatitude;
  report.arc_budget = cfg.arc_budget;
  return report;
}

// Unconstrained point sampling over the whole sphere image.
inline RunReport optimize_point2d(const ExperimentConfig& cfg,
                                  std::span<const ArsImage> images) {
  cfg.validate();
  RunReport report = detail::run_repetitions(cfg, [&](int rep) {
    const detail::RepData rd = detail::make_rep(cfg, images, rep, false, nullptr);
    const detail::StageResult stage = detail::point2d_stage(cfg, rd, rep);
    RepetitionResult rr;
    rr.selection = stage.indices;
    rr.fitness = stage.fitness;
    rr.fitness_history = stage.history;
    rr.point_count = cfg.point_budget;
    rr.accuracy =
        detail::final_eval_points(rd, stage.indices, paper_features(), cfg.ridge);
    return rr;
  });
  report.mode = SamplingMode::kPoint2d;
  report.arc_budget = 0;
  return report;
}

// Control arm for the optimized-arcs comparison: uniformly drawn arc sets
// of the same size, same splits and noise.
inline RunReport random_arcs_baseline(const ExperimentConfig& cfg,
                                      std::span<const ArsImage> images) {
  cfg.validate();
  RunReport report = detail::run_repetitions(cfg, [&](int rep) {
    const detail::RepData rd = detail::make_rep(cfg, images, rep, false, nullptr);
    auto gen = rng::engine(
        rng::derive(cfg.seed, rng::kRandomArcs, static_cast<std::uint64_t>(rep)));
    const int width = cfg.arc_max - cfg.arc_min + 1;
    std::vector<int> pool(width);
    for (int i = 0; i < width; ++i) pool[i] = cfg.arc_min + i;
    for (int i = 0; i < cfg.arc_budget; ++i) {
      std::uniform_int_distribution<int> pick(i, width - 1);
      std::swap(pool[i], pool[pick(gen)]);
    }
    std::vector<int> arcs(pool.begin(), pool.begin() + cfg.arc_budget);
    std::sort(arcs.begin(), arcs.end());
    RepetitionResult rr;
    rr.arcs = arcs;
    rr.selection = arcs;
    rr.point_count = static_cast<long long>(arcs.size()) * kImageSize;
    rr.accuracy = detail::final_eval_points(rd, detail::arcs_to_pixels(arcs),
                                            paper_features(), cfg.ridge);
    return rr;
  });
  report.mode = SamplingMode::kLatitude;
  report.arc_budget = cfg.arc_budget;
  return report;
}

struct ReportRow {
  std::string mode;
  int k = 0;
  double intra_rate = 1.0;
  std::string noise;
  int repetition = 0;
  double accuracy = 0.0;
  long long points = 0;
  double seconds = 0.0;
};

struct SweepTable {
  std::vector<ReportRow> rows;
};

inline std::vector<ReportRow> to_rows(const RunReport& report) {
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < report.repetitions.size(); ++i) {
    const RepetitionResult& r = report.repetitions[i];
    rows.push_back({std::string(sampling_mode_name(report.mode)), report.arc_budget,
                    report.intra_rate, report.noise.id(), static_cast<int>(i),
                    r.accuracy, r.point_count, r.seconds});
  }
  return rows;
}

// Accuracy against the number of sampled arcs; with intra_rates given,
// the full (arcs x rate) grid, reusing one latitude-stage result per
// repetition across all rates.
inline SweepTable accuracy_vs_arcs_sweep(const ExperimentConfig& cfg,
                                         std::span<const ArsImage> images,
                                         std::span<const int> k_values,
                                         std::span<const double> intra_rates = {}) {
  cfg.validate();
  SweepTable table;
  for (int k : k_values) {
    ExperimentConfig ck = cfg;
    ck.arc_budget = k;
    ck.validate();
    if (intra_rates.empty()) {
      const RunReport report = optimize_arcs(ck, images);
      const auto rows = to_rows(report);
      table.rows.insert(table.rows.end(), rows.begin(), rows.end());
      continue;
    }
    std::shared_ptr<const ArcFeatureCache> clean_cache;
    if (!ck.noise.any())
      clean_cache = std::make_shared<ArcFeatureCache>(images, ck.threads);
    std::vector<std::vector<ReportRow>> rep_rows(ck.repetitions);
    parallel_for(ck.repetitions, ck.threads, [&](int rep) {
      const detail::RepData rd = detail::make_rep(ck, images, rep, true, clean_cache);
      const detail::StageResult arcs_stage = detail::latitude_stage(ck, rd, rep);
      for (std::size_t ri = 0; ri < intra_rates.size(); ++ri) {
        ExperimentConfig cr = ck;
        cr.intra_rate = intra_rates[ri];
        const auto t0 = std::chrono::steady_clock::now();
        const detail::StageResult stage = detail::intra_stage(
            cr, rd, arcs_stage.indices, rep, 1 + static_cast<int>(ri));
        const double acc = detail::final_eval_points(rd, stage.indices,
                                                     paper_features(), cr.ridge);
        const auto t1 = std::chrono::steady_clock::now();
        rep_rows[rep].push_back(
            {std::string(sampling_mode_name(SamplingMode::kIntraLatitude)), k,
             intra_rates[ri], cr.noise.id(), rep, acc,
             detail::intra_points_per_arc(intra_rates[ri]) *
                 static_cast<long long>(arcs_stage.indices.size()),
             std::chrono::duration<double>(t1 - t0).count()});
      }
    });
    for (const auto& rows : rep_rows)
      table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

// Selection counts across runs: per arc column for latitude reports, per
// pixel for point-based ones.
inline Heatmap aggregate_heatmap(std::span<const RunReport> reports) {
  if (reports.empty())
    throw std::invalid_argument("aggregate_heatmap: no reports");
  const SamplingMode mode = reports.front().mode;
  if (mode == SamplingMode::kFull)
    throw std::invalid_argument("aggregate_heatmap: full-sampling reports carry no selections");
  for (const RunReport& r : reports)
    if (r.mode != mode)
      throw std::invalid_argument("aggregate_heatmap: mixed sampling modes");
  Heatmap hm;
  hm.mode = mode;
  hm.counts.assign(mode == SamplingMode::kLatitude ? kImageSize : kPixelCount, 0);
  for (const RunReport& r : reports)
    for (const RepetitionResult& rep : r.repetitions)
      for (int sel : rep.selection) ++hm.counts[sel];
  return hm;
}

}  // namespace arcscan
