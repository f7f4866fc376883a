// Copyright 2026 The evsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evsr/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "evsr/count_map.hpp"
#include "evsr/dvs_sim.hpp"
#include "evsr/errors.hpp"
#include "evsr/event_stream.hpp"
#include "evsr/metrics.hpp"
#include "evsr/pipeline.hpp"
#include "evsr/sparse_sr.hpp"

namespace evsr
{
namespace
{
namespace fs = std::filesystem;

/// SR settings as bound to flags; strings are resolved after parsing.
struct SrFlags
{
  SrConfig config;
  std::string kernel = "default";
  std::string total_scale = "none";
};

void add_sr_flags(CLI::App * app, SrFlags & f, bool with_factor = true)
{
  auto & c = f.config;
  if (with_factor) app->add_option("--factor", c.factor, "magnification factor (>= 2)")->capture_default_str();
  app->add_option("--window", c.window_length, "window length, us")->capture_default_str();
  app->add_option("--rate-bin", c.rate_bin, "rate function bin, us")->capture_default_str();
  app->add_option("--metric-bin", c.metric_bin, "metric bin, us")->capture_default_str();
  app->add_option("--kernel", f.kernel, "default | nearest")->capture_default_str();
  app->add_option("--total-scale", f.total_scale, "none | linear | quadratic")->capture_default_str();
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
  app->add_option("--lambda", c.sparse.lambda, "L1 weight")->capture_default_str();
  app->add_option("--beta", c.sparse.beta, "overlap weight")->capture_default_str();
  app->add_option("--max-iter", c.sparse.max_iter, "coordinate descent sweeps")->capture_default_str();
  app->add_option("--tol", c.sparse.tol, "relative objective tolerance")->capture_default_str();
  app->add_option("--headroom", c.headroom, "thinning batch headroom")->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores")->capture_default_str();
}

SrConfig resolve(SrFlags & f)
{
  SrConfig c = f.config;
  if (f.kernel == "default") {
    c.kernel = default_kernel();
  } else if (f.kernel == "nearest") {
    c.kernel = nearest_kernel();
  } else {
    throw ArgumentError("unknown kernel '" + f.kernel + "'");
  }
  c.total_scale = parse_total_scale(f.total_scale);
  c.validate();
  return c;
}

void write_text(const fs::path & path, const std::string & text)
{
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::string read_text(const fs::path & path)
{
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void print_config(std::ostream & out, const CLI::App & app)
{
  std::istringstream lines(app.config_to_str(true, false));
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) out << "# " << line << '\n';
  }
}

/// Dictionary from --dict, or trained on the given ground truth's window maps.
DictionaryPair obtain_dictionary(
  const std::string & path, const EventStream & training, int factor, int atoms, std::uint64_t seed,
  TimeUs window_length)
{
  if (!path.empty()) return load_dictionary(path);
  const auto maps = training_maps(training, window_length, factor);
  return train_dictionaries(maps, factor, atoms, seed);
}

/// key=value files hold the options of the subcommand being run; section
/// headers are not needed. Keys may use '_' for '-'.
class SubcommandConfig : public CLI::ConfigBase
{
public:
  explicit SubcommandConfig(const CLI::App * root) : root_(root) {}

  std::vector<CLI::ConfigItem> from_config(std::istream & input) const override
  {
    std::vector<std::string> path;
    for (const CLI::App * app = root_;;) {
      const auto subs = app->get_subcommands();
      if (subs.empty()) break;
      app = subs.front();
      path.push_back(app->get_name());
    }
    auto items = CLI::ConfigBase::from_config(input);
    for (auto & item : items) {
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (item.parents.empty()) item.parents = path;
    }
    return items;
  }

private:
  const CLI::App * root_;
};

void write_run(const fs::path & dir, const ExperimentResult & result, const std::string & config_text)
{
  fs::create_directories(dir);
  write_text(dir / "report.txt", result.report.to_text());
  write_text(dir / "config.ini", config_text);
  for (const auto & a : result.artifacts) write_text(dir / a.name, a.content);
}

}  // namespace

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Event-stream super-resolution for dynamic vision sensors", "evsr"};
  app.require_subcommand(1);

  // simulate
  auto * sim = app.add_subcommand("simulate", "render an analytic scene into events");
  std::string scene_name = "moving_bar";
  int width = 64, height = 64;
  TimeUs duration = 200000;
  SceneParams scene;
  SimConfig sim_cfg;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim->add_option("--scene", scene_name, "uniform | exp_ramp | moving_bar | moving_disk")->capture_default_str();
  sim->add_option("--width", width)->capture_default_str();
  sim->add_option("--height", height)->capture_default_str();
  sim->add_option("--duration", duration, "us")->capture_default_str();
  sim->add_option("--k", scene.k, "exp_ramp growth, 1/s")->capture_default_str();
  sim->add_option("--speed", scene.speed, "px/s")->capture_default_str();
  sim->add_option("--bar-width", scene.bar_width)->capture_default_str();
  sim->add_option("--radius", scene.radius)->capture_default_str();
  sim->add_option("--contrast", scene.contrast)->capture_default_str();
  sim->add_option("--x0", scene.x0)->capture_default_str();
  sim->add_option("--y0", scene.y0)->capture_default_str();
  sim->add_option("--theta", sim_cfg.theta)->capture_default_str();
  sim->add_option("--time-step", sim_cfg.time_step, "us")->capture_default_str();
  sim->add_option("--jitter", sim_cfg.jitter_us, "us")->capture_default_str();
  sim->add_option("--threads", sim_cfg.threads)->capture_default_str();
  sim->add_option("--seed", sim_seed)->capture_default_str();
  sim->add_option("--out", sim_out, "output stream (.evsr or text)")->required();

  // train-dict
  auto * train = app.add_subcommand("train-dict", "train coupled dictionaries from HR count maps");
  std::vector<std::string> train_streams, train_maps;
  int train_factor = 2, train_atoms = 512, train_patch = 3;
  std::uint64_t train_seed = 0;
  TimeUs train_window = 200000;
  std::string train_out;
  train->add_option("--in", train_streams, "HR event streams; ON and OFF maps of every window");
  train->add_option("--map", train_maps, "HR count maps as CSV");
  train->add_option("--factor", train_factor)->capture_default_str();
  train->add_option("--atoms", train_atoms)->capture_default_str();
  train->add_option("--patch", train_patch, "LR patch size")->capture_default_str();
  train->add_option("--seed", train_seed)->capture_default_str();
  train->add_option("--window", train_window, "us")->capture_default_str();
  train->add_option("--out", train_out, "dictionary file")->required();

  // super-resolve
  auto * sr = app.add_subcommand("super-resolve", "super-resolve an event stream");
  SrFlags sr_flags;
  std::string sr_in, sr_dict, sr_out;
  bool sr_baseline = false;
  sr->add_option("--in", sr_in)->required();
  sr->add_option("--dict", sr_dict, "dictionary file");
  sr->add_option("--out", sr_out)->required();
  sr->add_flag("--baseline", sr_baseline, "nearest-neighbour counts and uniform times instead of SR");
  add_sr_flags(sr, sr_flags);

  // downsample
  auto * down = app.add_subcommand("downsample", "merge factor x factor pixel blocks");
  std::string down_in, down_out;
  int down_factor = 2;
  down->add_option("--in", down_in)->required();
  down->add_option("--factor", down_factor)->capture_default_str();
  down->add_option("--out", down_out)->required();

  // metrics
  auto * met = app.add_subcommand("metrics", "compare a candidate stream with a reference");
  std::string met_cand, met_ref;
  TimeUs met_bin = 100;
  met->add_option("--candidate", met_cand)->required();
  met->add_option("--reference", met_ref)->required();
  met->add_option("--metric-bin", met_bin, "us")->capture_default_str();

  // render
  auto * ren = app.add_subcommand("render", "frame and rate curves of a stream");
  std::string ren_in, ren_dir;
  TimeUs ren_t0 = 0, ren_t1 = -1, ren_bin = 1000;
  int ren_enlarge = 1;
  ren->add_option("--in", ren_in)->required();
  ren->add_option("--out-dir", ren_dir)->required();
  ren->add_option("--t0", ren_t0, "frame start, us")->capture_default_str();
  ren->add_option("--t1", ren_t1, "frame end, us (-1 = end of stream)")->capture_default_str();
  ren->add_option("--enlarge", ren_enlarge)->capture_default_str();
  ren->add_option("--bin", ren_bin, "rate curve bin, us")->capture_default_str();

  // experiment
  auto * exp = app.add_subcommand("experiment", "run an evaluation protocol into a run directory");
  exp->require_subcommand(1);
  SrFlags ex_flags;
  std::string ex_in, ex_dict, ex_dir;
  int ex_atoms = 512, ex_repeats = 10;
  std::uint64_t ex_train_seed = 0;
  std::vector<int> ex_factors{3, 4};
  std::vector<TimeUs> ex_bins{20, 1000, 10000, 80000};
  auto add_common = [&](CLI::App * s) {
    s->add_option("--in", ex_in, "input (ground truth for reconstruction protocols)")->required();
    s->add_option("--dict", ex_dict, "dictionary; trained on the input when absent");
    s->add_option("--out-dir", ex_dir)->required();
    s->add_option("--atoms", ex_atoms, "atoms when training")->capture_default_str();
    s->add_option("--train-seed", ex_train_seed)->capture_default_str();
  };
  auto * ex_rec = exp->add_subcommand("reconstruction", "downsample, super-resolve, compare with ground truth");
  add_common(ex_rec);
  add_sr_flags(ex_rec, ex_flags);
  auto * ex_mag = exp->add_subcommand("magnification", "super-resolve at larger factors, compare rates");
  add_common(ex_mag);
  add_sr_flags(ex_mag, ex_flags, false);
  ex_mag->add_option("--factors", ex_factors, "factors to run without --dict")->delimiter(',')->capture_default_str();
  auto * ex_sweep = exp->add_subcommand("bin-sweep", "reconstruction RMSE per rate bin");
  add_common(ex_sweep);
  add_sr_flags(ex_sweep, ex_flags);
  ex_sweep->add_option("--bins", ex_bins, "rate bins, us")->delimiter(',')->capture_default_str();
  auto * ex_rob = exp->add_subcommand("robustness", "reconstruction repeated over seeds");
  add_common(ex_rob);
  add_sr_flags(ex_rob, ex_flags);
  ex_rob->add_option("--repeats", ex_repeats)->capture_default_str();

  app.set_config("--config", "", "key=value file with options of the subcommand; flags take precedence");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  for (auto * s : {sim, train, sr, down, met, ren, exp, ex_rec, ex_mag, ex_sweep, ex_rob}) s->fallthrough();

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const CLI::App * active = nullptr;
  for (const auto * s : {sim, train, sr, down, met, ren, ex_rec, ex_mag, ex_sweep, ex_rob}) {
    if (s->parsed()) active = s;
  }

  try {
    if (active) print_config(out, *active);

    if (sim->parsed()) {
      const auto s = make_scene(parse_scene_kind(scene_name), width, height, duration, scene);
      const auto events = simulate(s, sim_cfg, sim_seed);
      save_stream(sim_out, events);
      out << "events=" << events.size() << '\n';
    } else if (train->parsed()) {
      std::vector<CountMap> maps;
      for (const auto & p : train_streams) {
        for (auto & m : window_count_maps(load_stream(p), train_window)) maps.push_back(std::move(m));
      }
      for (const auto & p : train_maps) maps.push_back(count_map_from_csv(read_text(p)));
      if (maps.empty()) throw ArgumentError("train-dict needs --in or --map");
      const auto dict = train_dictionaries(maps, train_factor, train_atoms, train_seed, train_patch);
      save_dictionary(train_out, dict);
      out << "atoms=" << dict.atoms() << '\n';
    } else if (sr->parsed()) {
      SrConfig cfg = resolve(sr_flags);
      cfg.dictionary = sr_dict;
      const auto input = load_stream(sr_in);
      SrStats stats;
      EventStream hr;
      if (sr_baseline) {
        hr = baseline_super_resolve(input, cfg, &stats);
      } else {
        if (sr_dict.empty()) throw ArgumentError("super-resolve needs --dict (or --baseline)");
        hr = super_resolve(input, load_dictionary(sr_dict), cfg, &stats);
      }
      save_stream(sr_out, hr);
      out << "events_in=" << input.size() << '\n' << "events_out=" << hr.size() << '\n';
      out << "windows=" << stats.windows << '\n';
      out << "capacity_warnings=" << stats.capacity_warnings << '\n';
      out << "uniform_fallbacks=" << stats.uniform_fallbacks << '\n';
    } else if (down->parsed()) {
      const auto lr = downsample_spatial(load_stream(down_in), down_factor);
      save_stream(down_out, lr);
      out << "width=" << lr.width() << '\n' << "height=" << lr.height() << '\n';
    } else if (met->parsed()) {
      const auto cand = load_stream(met_cand);
      const auto ref = load_stream(met_ref);
      MetricReport rep;
      if (cand.same_geometry(ref) && cand.duration() == ref.duration()) rep.rmse = rmse_psth(cand, ref, met_bin);
      rep.dfrf = dfrf(cand, ref, met_bin);
      rep.events_lr = ref.size();
      rep.events_hr = cand.size();
      rep.config = {{"metric_bin", std::to_string(met_bin)}};
      out << rep.to_text();
    } else if (ren->parsed()) {
      const auto s = load_stream(ren_in);
      const TimeWindow w{ren_t0, ren_t1 < 0 ? s.duration() : ren_t1};
      fs::create_directories(ren_dir);
      write_text(fs::path(ren_dir) / "frame.pgm", frame_to_pgm(enlarge_frame(reconstruct_frame(s, w), ren_enlarge)));
      const auto [on, off] = split_polarity(s);
      const auto f_on = total_rate_curve(on, ren_bin);
      const auto f_off = total_rate_curve(off, ren_bin);
      std::ostringstream csv;
      csv.precision(10);
      csv << "bin_start_us,on,off\n";
      for (Eigen::Index i = 0; i < f_on.size(); ++i) csv << i * ren_bin << ',' << f_on(i) << ',' << f_off(i) << '\n';
      write_text(fs::path(ren_dir) / "rates.csv", csv.str());
    } else if (ex_rec->parsed() || ex_sweep->parsed() || ex_rob->parsed()) {
      SrConfig cfg = resolve(ex_flags);
      cfg.dictionary = ex_dict;
      const auto gt = load_stream(ex_in);
      const auto dict =
        obtain_dictionary(ex_dict, gt, cfg.factor, ex_atoms, ex_train_seed, cfg.window_length);
      ExperimentResult result;
      if (ex_rec->parsed()) {
        result = experiment_reconstruction(gt, dict, cfg);
      } else if (ex_sweep->parsed()) {
        result = experiment_bin_sweep(gt, dict, cfg, ex_bins);
      } else {
        result = experiment_robustness(gt, dict, cfg, ex_repeats);
      }
      write_run(ex_dir, result, active->config_to_str(true, false));
      out << result.report.to_text();
    } else if (ex_mag->parsed()) {
      SrConfig cfg = resolve(ex_flags);
      cfg.dictionary = ex_dict;
      const auto input = load_stream(ex_in);
      std::vector<int> factors = ex_factors;
      std::optional<DictionaryPair> given;
      if (!ex_dict.empty()) {
        given = load_dictionary(ex_dict);
        factors = {given->factor()};
      }
      ExperimentResult summary;
      for (int a : factors) {
        if (a < 2) throw ArgumentError("factor must be >= 2");
        const auto dict = given ? *given : obtain_dictionary("", input, a, ex_atoms, ex_train_seed, cfg.window_length);
        const auto result = experiment_magnification(input, dict, cfg);
        write_run(fs::path(ex_dir) / ("x" + std::to_string(a)), result, active->config_to_str(true, false));
        std::ostringstream v;
        v.precision(10);
        v << *result.report.dfrf;
        summary.report.extra.emplace_back("dfrf_x" + std::to_string(a), v.str());
        summary.report.events_lr = result.report.events_lr;
      }
      summary.report.config = cfg.describe();
      std::erase_if(summary.report.config, [](const auto & kv) { return kv.first == "factor"; });
      write_run(ex_dir, summary, active->config_to_str(true, false));
      out << summary.report.to_text();
    }
  } catch (const ArgumentError & e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

int cli_main(int argc, char ** argv)
{
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace evsr
