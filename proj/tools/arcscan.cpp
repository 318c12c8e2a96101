// arcscan: compressed-learning experiments on angle-resolved scatterometry
// images. Subcommands generate the synthetic dataset, benchmark the
// full-data classifier, run recursive feature elimination, and optimize
// latitudinal / intra-latitudinal / free 2D sampling patterns.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arcscan/arsd.hpp"
#include "arcscan/config.hpp"
#include "arcscan/datagen.hpp"
#include "arcscan/io.hpp"
#include "arcscan/pipeline.hpp"
#include "arcscan/rfe.hpp"

namespace fs = std::filesystem;
using namespace arcscan;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = machine parallelism
  bool verbose = false;
};

// Resolved key=value pairs, written to the manifest so a run can be
// replayed from it byte-exactly.
struct Resolved {
  std::map<std::string, std::string> kv;

  void set(const std::string& k, const std::string& v) { kv[k] = v; }
  void set(const std::string& k, double v) { kv[k] = detail::fmt_double(v); }
  void set(const std::string& k, long long v) { kv[k] = std::to_string(v); }
  void set(const std::string& k, int v) { kv[k] = std::to_string(v); }
  void set(const std::string& k, std::uint64_t v) { kv[k] = std::to_string(v); }
  void set(const std::string& k, bool v) { kv[k] = v ? "true" : "false"; }
};

std::uint64_t resolve_seed(const Config& c, const CliOptions& opt) {
  const std::uint64_t file_seed = c.get_u64("seed", 1);
  if (opt.seed) return *opt.seed;
  if (c.has("seed")) return file_seed;
  if (const char* env = std::getenv("ARCSCAN_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw std::runtime_error("ARCSCAN_SEED is not an unsigned integer");
    }
  }
  return 1;
}

Config load_config(const CliOptions& opt) {
  if (opt.config_path.empty()) return Config::from_text("", "<defaults>");
  return Config::from_file(opt.config_path);
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const Resolved& res, const std::vector<std::string>& artifacts,
                    const std::vector<std::string>& nondeterministic = {}) {
  std::ofstream out(out_dir / "manifest.txt", std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest");
  out << "# arcscan manifest; replay with: arcscan " << command
      << " --config manifest.txt --out <dir>\n";
  out << "command=" << command << '\n';
  for (const auto& [k, v] : res.kv) out << k << '=' << v << '\n';
  for (const std::string& a : artifacts) out << "# artifact: " << a << '\n';
  for (const std::string& a : nondeterministic)
    out << "# artifact (not reproducible): " << a << '\n';
}

std::vector<ArsImage> load_dataset(const Config& c, Resolved& res) {
  const std::string path = c.require_string("dataset");
  res.set("dataset", path);
  return read_arsd(path);
}

// Keys shared by all experiment-style commands.
ExperimentConfig parse_experiment(const Config& c, const CliOptions& opt,
                                  Resolved& res, bool point2d_mode = false) {
  ExperimentConfig cfg;
  cfg.seed = resolve_seed(c, opt);
  cfg.repetitions = static_cast<int>(c.get_int("repetitions", 10));
  cfg.split_fraction = c.get_double("split_fraction", 0.6);
  cfg.ridge = c.get_double("ridge", 1e-6);
  cfg.threads = opt.threads != 0 ? opt.threads
                                 : static_cast<int>(c.get_int("threads", 0));
  if (c.has("noise_gaussian_snr_db")) {
    cfg.noise.gaussian_snr_db = c.get_double("noise_gaussian_snr_db", 0.0);
    res.set("noise_gaussian_snr_db", *cfg.noise.gaussian_snr_db);
  }
  if (c.has("noise_salt_pepper")) {
    cfg.noise.salt_pepper_fraction = c.get_double("noise_salt_pepper", 0.0);
    res.set("noise_salt_pepper", *cfg.noise.salt_pepper_fraction);
  }
  cfg.pso.swarm_size = static_cast<int>(c.get_int("pso_swarm_size", 30));
  cfg.pso.iterations =
      static_cast<int>(c.get_int("pso_iterations", point2d_mode ? 1000 : 80));
  cfg.pso.inertia = c.get_double("pso_inertia", 0.5);
  cfg.pso.cognitive = c.get_double("pso_cognitive", 1.0);
  cfg.pso.social = c.get_double("pso_social", 3.0);
  cfg.pso.velocity_clamp = c.get_double("pso_velocity_clamp", 0.25);
  cfg.arc_min = static_cast<int>(c.get_int("arc_min", 0));
  cfg.arc_max = static_cast<int>(c.get_int("arc_max", kImageSize - 1));

  res.set("seed", cfg.seed);
  res.set("repetitions", cfg.repetitions);
  res.set("split_fraction", cfg.split_fraction);
  res.set("ridge", cfg.ridge);
  res.set("pso_swarm_size", cfg.pso.swarm_size);
  res.set("pso_iterations", cfg.pso.iterations);
  res.set("pso_inertia", cfg.pso.inertia);
  res.set("pso_cognitive", cfg.pso.cognitive);
  res.set("pso_social", cfg.pso.social);
  res.set("pso_velocity_clamp", cfg.pso.velocity_clamp);
  res.set("arc_min", cfg.arc_min);
  res.set("arc_max", cfg.arc_max);
  return cfg;
}

bool parse_timings(const Config& c, Resolved& res) {
  const bool t = c.get_bool("timings", false);
  res.set("timings", t);
  return t;
}

int cmd_gen(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  GenConfig g;
  g.seed = resolve_seed(c, opt);
  g.images_per_class = static_cast<int>(c.get_int("images_per_class", 160));
  g.pole_peak = c.get_double("pole_peak", g.pole_peak);
  g.equator_texture_freq = c.get_double("equator_texture_freq", g.equator_texture_freq);
  g.class_effect = c.get_double("class_effect", g.class_effect);
  g.background_floor = c.get_double("background_floor", g.background_floor);
  g.pole_sigma_deg = c.get_double("pole_sigma_deg", g.pole_sigma_deg);
  g.equator_sigma_deg = c.get_double("equator_sigma_deg", g.equator_sigma_deg);
  g.equator_amp = c.get_double("equator_amp", g.equator_amp);
  g.mid_amp = c.get_double("mid_amp", g.mid_amp);
  g.speckle_base = c.get_double("speckle_base", g.speckle_base);
  g.speckle_class_gain = c.get_double("speckle_class_gain", g.speckle_class_gain);
  g.equator_speckle_base = c.get_double("equator_speckle_base", g.equator_speckle_base);
  g.equator_speckle_gain = c.get_double("equator_speckle_gain", g.equator_speckle_gain);
  g.speckle_jitter = c.get_double("speckle_jitter", g.speckle_jitter);
  g.gain_jitter = c.get_double("gain_jitter", g.gain_jitter);
  const int threads = opt.threads != 0 ? opt.threads
                                       : static_cast<int>(c.get_int("threads", 0));
  c.reject_unknown_keys();

  res.set("seed", g.seed);
  res.set("images_per_class", g.images_per_class);
  res.set("pole_peak", g.pole_peak);
  res.set("equator_texture_freq", g.equator_texture_freq);
  res.set("class_effect", g.class_effect);
  res.set("background_floor", g.background_floor);
  res.set("pole_sigma_deg", g.pole_sigma_deg);
  res.set("equator_sigma_deg", g.equator_sigma_deg);
  res.set("equator_amp", g.equator_amp);
  res.set("mid_amp", g.mid_amp);
  res.set("speckle_base", g.speckle_base);
  res.set("speckle_class_gain", g.speckle_class_gain);
  res.set("equator_speckle_base", g.equator_speckle_base);
  res.set("equator_speckle_gain", g.equator_speckle_gain);
  res.set("speckle_jitter", g.speckle_jitter);
  res.set("gain_jitter", g.gain_jitter);

  const std::vector<ArsImage> images = generate_dataset(g, threads);
  const fs::path out = opt.out_dir;
  write_arsd((out / "dataset.arsd").string(), images);
  if (opt.verbose)
    std::cerr << "gen: wrote " << images.size() << " images\n";
  write_manifest(out, "gen", res, {"dataset.arsd"});
  return 0;
}

int cmd_bench_full(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  ExperimentConfig base = parse_experiment(c, opt, res);
  base.mode = SamplingMode::kFull;
  const std::vector<std::string> conditions = c.get_string_list(
      "conditions", {"none", "gaussian:20", "gaussian:30", "saltpepper:0.1",
                     "gaussian:20+saltpepper:0.1"});
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  {
    std::string joined;
    for (std::size_t i = 0; i < conditions.size(); ++i)
      joined += (i ? "," : "") + conditions[i];
    res.set("conditions", joined);
  }

  std::vector<ReportRow> rows;
  for (const std::string& cond : conditions) {
    ExperimentConfig cfg = base;
    cfg.noise = NoiseSpec::parse(cond);
    const RunReport report = run_full_baseline(cfg, images);
    const auto r = to_rows(report);
    rows.insert(rows.end(), r.begin(), r.end());
    if (opt.verbose)
      std::cerr << "bench-full: " << cond << " mean accuracy "
                << report.mean_accuracy << " (" << report.wall_seconds << " s)\n";
  }
  const fs::path out = opt.out_dir;
  write_report_csv((out / "reports.csv").string(), rows, timings);
  write_manifest(out, "bench-full", res, {"reports.csv"});
  return 0;
}

int cmd_rfe(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  const std::uint64_t seed = resolve_seed(c, opt);
  const int min_features = static_cast<int>(c.get_int("min_features", 11));
  const double train_fraction = c.get_double("train_fraction", 0.7);
  const double ridge = c.get_double("ridge", 1e-6);
  const int timing_images = static_cast<int>(c.get_int("timing_images", 100));
  const int timing_repeats = static_cast<int>(c.get_int("timing_repeats", 3));
  const int threads = opt.threads != 0 ? opt.threads
                                       : static_cast<int>(c.get_int("threads", 0));
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  res.set("seed", seed);
  res.set("min_features", min_features);
  res.set("train_fraction", train_fraction);
  res.set("ridge", ridge);
  res.set("timing_images", timing_images);
  res.set("timing_repeats", timing_repeats);

  const FeatureMatrix matrix =
      extract_dataset(images, candidate_pool(), threads);
  RfeTimer timer;
  if (timings) {
    const std::size_t n = std::min<std::size_t>(timing_images, images.size());
    timer = extraction_timer(std::span<const ArsImage>(images.data(), n),
                             timing_repeats);
  }
  const RfeTrace trace = rfe(matrix, min_features, seed, train_fraction, ridge, timer);

  const fs::path out = opt.out_dir;
  std::ofstream csv(out / "rfe_trace.csv", std::ios::trunc | std::ios::binary);
  csv << "step,removed_feature,accuracy,extraction_seconds\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const RfeStep& s = trace.steps[i];
    csv << i << ',' << (s.removed ? feature_name(*s.removed) : "") << ','
        << detail::fmt_double(s.accuracy) << ','
        << (timings ? detail::fmt_double(s.extraction_seconds, "%.6f")
                    : std::string("0"))
        << '\n';
    if (opt.verbose)
      std::cerr << "rfe: step " << i << " features " << s.active.size()
                << " accuracy " << s.accuracy << '\n';
  }
  csv.close();
  write_manifest(out, "rfe", res, {"rfe_trace.csv"});
  return 0;
}

int cmd_optimize_arcs(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  ExperimentConfig cfg = parse_experiment(c, opt, res);
  cfg.mode = SamplingMode::kLatitude;
  cfg.arc_budget = static_cast<int>(c.get_int("arc_budget", 4));
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  res.set("arc_budget", cfg.arc_budget);

  const RunReport report = optimize_arcs(cfg, images);
  if (opt.verbose)
    std::cerr << "optimize-arcs: k=" << cfg.arc_budget << " mean accuracy "
              << report.mean_accuracy << " (" << report.wall_seconds << " s)\n";
  const fs::path out = opt.out_dir;
  write_report_csv((out / "reports.csv").string(), to_rows(report), timings);
  write_masks((out / "masks.txt").string(), report);
  write_manifest(out, "optimize-arcs", res, {"reports.csv", "masks.txt"});
  return 0;
}

int cmd_optimize_intra(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  ExperimentConfig cfg = parse_experiment(c, opt, res);
  cfg.mode = SamplingMode::kIntraLatitude;
  cfg.arc_budget = static_cast<int>(c.get_int("arc_budget", 4));
  cfg.intra_rate = c.get_double("intra_rate", 0.5);
  for (long long a : c.get_int_list("arcs"))
    cfg.fixed_arcs.push_back(static_cast<int>(a));
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  res.set("arc_budget", cfg.arc_budget);
  res.set("intra_rate", cfg.intra_rate);
  if (!cfg.fixed_arcs.empty()) {
    std::string a;
    for (std::size_t i = 0; i < cfg.fixed_arcs.size(); ++i)
      a += (i ? "," : "") + std::to_string(cfg.fixed_arcs[i]);
    res.set("arcs", a);
  }

  const RunReport report = optimize_intra(cfg, images);
  if (opt.verbose)
    std::cerr << "optimize-intra: k=" << cfg.arc_budget << " rate "
              << cfg.intra_rate << " mean accuracy " << report.mean_accuracy
              << '\n';
  const fs::path out = opt.out_dir;
  write_report_csv((out / "reports.csv").string(), to_rows(report), timings);
  write_masks((out / "masks.txt").string(), report);
  std::ofstream arcs(out / "arcs.txt", std::ios::trunc | std::ios::binary);
  for (std::size_t i = 0; i < report.repetitions.size(); ++i) {
    arcs << "rep=" << i << " arcs=";
    const auto& a = report.repetitions[i].arcs;
    for (std::size_t j = 0; j < a.size(); ++j) arcs << (j ? "," : "") << a[j];
    arcs << '\n';
  }
  arcs.close();
  write_manifest(out, "optimize-intra", res, {"reports.csv", "masks.txt", "arcs.txt"});
  return 0;
}

int cmd_optimize_2d(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  ExperimentConfig cfg = parse_experiment(c, opt, res, /*point2d_mode=*/true);
  cfg.mode = SamplingMode::kPoint2d;
  cfg.point_budget = static_cast<int>(c.get_int("point_budget", 324));
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  res.set("point_budget", cfg.point_budget);

  const RunReport report = optimize_point2d(cfg, images);
  if (opt.verbose)
    std::cerr << "optimize-2d: budget " << cfg.point_budget << " mean accuracy "
              << report.mean_accuracy << '\n';
  const fs::path out = opt.out_dir;
  write_report_csv((out / "reports.csv").string(), to_rows(report), timings);
  write_masks((out / "masks.txt").string(), report);
  const Heatmap hm = aggregate_heatmap(std::span<const RunReport>(&report, 1));
  write_heatmap_csv((out / "heatmap.csv").string(), hm);
  write_heatmap_pgm((out / "heatmap.pgm").string(), hm);
  write_manifest(out, "optimize-2d", res,
                 {"reports.csv", "masks.txt", "heatmap.csv", "heatmap.pgm"});
  return 0;
}

int cmd_sweep(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  ExperimentConfig cfg = parse_experiment(c, opt, res);
  std::vector<int> k_values;
  {
    std::vector<long long> def;
    for (int k = 1; k <= 14; ++k) def.push_back(k);
    for (long long k : c.get_int_list("k_values", def))
      k_values.push_back(static_cast<int>(k));
  }
  const std::vector<double> intra_rates = c.get_double_list("intra_rates");
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  {
    std::string ks;
    for (std::size_t i = 0; i < k_values.size(); ++i)
      ks += (i ? "," : "") + std::to_string(k_values[i]);
    res.set("k_values", ks);
    if (!intra_rates.empty()) {
      std::string rs;
      for (std::size_t i = 0; i < intra_rates.size(); ++i)
        rs += (i ? "," : "") + detail::fmt_double(intra_rates[i]);
      res.set("intra_rates", rs);
    }
  }

  const SweepTable table = accuracy_vs_arcs_sweep(cfg, images, k_values, intra_rates);
  const fs::path out = opt.out_dir;
  write_report_csv((out / "reports.csv").string(), table.rows, timings);
  write_manifest(out, "sweep", res, {"reports.csv"});
  return 0;
}

int cmd_heatmap(const CliOptions& opt) {
  const Config c = load_config(opt);
  c.get_string("command", "");
  Resolved res;
  const std::string mode = c.get_string("mode", "latitude");
  const int runs = static_cast<int>(c.get_int("runs", 20));
  const bool point_mode = mode == "point2d";
  ExperimentConfig cfg = parse_experiment(c, opt, res, point_mode);
  cfg.repetitions = runs;  // one optimization per run, independently seeded
  cfg.arc_budget = static_cast<int>(c.get_int("arc_budget", 4));
  cfg.point_budget = static_cast<int>(c.get_int("point_budget", 324));
  const bool timings = parse_timings(c, res);
  const std::vector<ArsImage> images = load_dataset(c, res);
  c.reject_unknown_keys();
  res.set("mode", mode);
  res.set("runs", runs);
  res.set(point_mode ? "point_budget" : "arc_budget",
          point_mode ? cfg.point_budget : cfg.arc_budget);

  RunReport report;
  if (point_mode) {
    cfg.mode = SamplingMode::kPoint2d;
    report = optimize_point2d(cfg, images);
  } else if (mode == "latitude") {
    cfg.mode = SamplingMode::kLatitude;
    report = optimize_arcs(cfg, images);
  } else {
    throw std::runtime_error("heatmap: mode must be latitude or point2d");
  }
  const Heatmap hm = aggregate_heatmap(std::span<const RunReport>(&report, 1));
  const fs::path out = opt.out_dir;
  write_report_csv((out / "reports.csv").string(), to_rows(report), timings);
  write_masks((out / "masks.txt").string(), report);
  write_heatmap_csv((out / "heatmap.csv").string(), hm);
  write_heatmap_pgm((out / "heatmap.pgm").string(), hm);
  write_manifest(out, "heatmap", res,
                 {"reports.csv", "masks.txt", "heatmap.csv", "heatmap.pgm"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arcscan: compressed-learning sampling optimization for ARS images"};
  app.require_subcommand(1);

  CliOptions opt;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* copt = sub->add_option("--config", opt.config_path, "key=value config file");
    if (config_required) copt->required();
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--seed", "seed override")->each([&](const std::string& s) {
      opt.seed = std::stoull(s);
    });
    sub->add_option("--threads", opt.threads, "worker cap (0 = machine parallelism)");
    sub->add_flag("-v,--verbose", opt.verbose, "progress on stderr");
  };

  auto* gen = app.add_subcommand("gen", "generate a synthetic ARSD dataset");
  add_common(gen, false);
  auto* bench = app.add_subcommand("bench-full", "full-data LDA benchmark across noise conditions");
  add_common(bench, true);
  auto* rfe_cmd = app.add_subcommand("rfe", "recursive feature elimination trace");
  add_common(rfe_cmd, true);
  auto* oarcs = app.add_subcommand("optimize-arcs", "PSO latitudinal arc selection");
  add_common(oarcs, true);
  auto* ointra = app.add_subcommand("optimize-intra", "two-stage intra-latitudinal sampling");
  add_common(ointra, true);
  auto* o2d = app.add_subcommand("optimize-2d", "PSO free 2D point sampling");
  add_common(o2d, true);
  auto* sweep = app.add_subcommand("sweep", "accuracy vs number of arcs (optionally x intra rates)");
  add_common(sweep, true);
  auto* heatmap = app.add_subcommand("heatmap", "frequently sampled regions over repeated runs");
  add_common(heatmap, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << '\n';
    return 2;
  }

  try {
    fs::create_directories(opt.out_dir);
    if (gen->parsed()) return cmd_gen(opt);
    if (bench->parsed()) return cmd_bench_full(opt);
    if (rfe_cmd->parsed()) return cmd_rfe(opt);
    if (oarcs->parsed()) return cmd_optimize_arcs(opt);
    if (ointra->parsed()) return cmd_optimize_intra(opt);
    if (o2d->parsed()) return cmd_optimize_2d(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (heatmap->parsed()) return cmd_heatmap(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
