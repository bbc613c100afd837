// gazegraph command-line tool.
//
//   gazegraph synth     generate a synthetic session
//   gazegraph ingest    gaze + viewport CSV -> session JSON
//   gazegraph cluster   session or raw graph -> clustered graph
//   gazegraph sparsify  clustered graph -> sparsified graph
//   gazegraph metrics   edge-ratio sweep, or one clustered/sparsified pair
//   gazegraph rois      clustered graph -> ranked ROIs with VOI boxes
//   gazegraph run       all of the above into one output directory
//   gazegraph compare   fixed-ratio MSE table over several run manifests
//
// Exit codes: 0 ok, 2 config/argument error, 3 data error, 4 numeric error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gazegraph/pipeline.hpp"

namespace gg = gazegraph;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw gg::ConfigError("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw gg::ConfigError("failed writing " + path);
}

struct ClusterOpts {
  gg::ClusterParams p;
  void add(CLI::App* app) {
    app->add_option("--threshold", p.threshold, "BIRCH radius threshold (voxels)")->capture_default_str();
    app->add_option("--branching", p.branching, "BIRCH branching factor")->capture_default_str();
    app->add_option("--slice-scale", p.slice_scale, "slice-axis scale in clustering space")->capture_default_str();
  }
};

struct SparsifyOpts {
  gg::SparsifyConfig c;
  std::string mode = "bernoulli";
  std::string weight_mode = "normalized";
  bool no_reweight = false;
  void add(CLI::App* app, bool with_seed) {
    app->add_option("--ratio", c.target_edge_ratio, "target kept-edge ratio in (0, 1]")->capture_default_str();
    app->add_option("--mode", mode, "bernoulli | with-replacement")->capture_default_str();
    app->add_option("--weight-mode", weight_mode, "normalized | raw-log-capped")->capture_default_str();
    app->add_option("--probes", c.alpha_report_probes, "random probes for the sigma report")->capture_default_str();
    app->add_option("--log-floor", c.log_floor, "relative log-weight floor for resistances")->capture_default_str();
    app->add_flag("--no-reweight", no_reweight, "keep original weights on sampled edges");
    if (with_seed) app->add_option("--seed", c.seed, "sampling seed")->capture_default_str();
  }
  gg::SparsifyConfig get() const {
    auto out = c;
    out.mode = gg::sample_mode_from_string(mode);
    out.weight_mode = gg::weight_mode_from_string(weight_mode);
    out.reweight = !no_reweight;
    return out;
  }
};

struct RoiOpts {
  std::optional<std::size_t> top_k;
  std::optional<double> min_percentile;
  std::vector<long> voi{40, 40, 6};
  void add(CLI::App* app) {
    auto* k = app->add_option("--top-k", top_k, "keep the k most attended clusters (default 10)");
    app->add_option("--min-percentile", min_percentile, "keep clusters at or above this score percentile")
        ->excludes(k);
    app->add_option("--voi-size", voi, "VOI width,height,depth")->expected(3)->delimiter(',')->capture_default_str();
  }
  gg::RoiSelection selection() const {
    if (min_percentile) return gg::MinPercentile{*min_percentile};
    return gg::TopK{top_k.value_or(10)};
  }
  gg::VoiSize size() const { return {voi.at(0), voi.at(1), voi.at(2)}; }
};

struct SynthOpts {
  gg::SynthParams p;
  void add(CLI::App* app) {
    app->add_option("-n,--points", p.n, "number of gaze points")->capture_default_str();
    app->add_option("--step", p.step_scale, "walk step scale (voxels)")->capture_default_str();
    app->add_option("--saccade-prob", p.saccade_probability, "probability of a saccade step")->capture_default_str();
    app->add_option("--saccade-scale", p.saccade_scale, "saccade step scale (voxels)")->capture_default_str();
    app->add_option("--screens", p.screens, "number of screens")->capture_default_str();
    app->add_option("--switch-prob", p.switch_probability, "per-sample screen switch probability")
        ->capture_default_str();
  }
};

struct FixationOpts {
  std::optional<double> dispersion;
  std::int64_t min_ms = 100;
  void add(CLI::App* app) {
    app->add_option("--fixation-dispersion", dispersion, "enable the I-DT pre-pass with this dispersion");
    app->add_option("--fixation-ms", min_ms, "minimum fixation duration (ms)")->capture_default_str();
  }
  std::optional<gg::FixationParams> get() const {
    if (!dispersion) return std::nullopt;
    return gg::FixationParams{*dispersion, min_ms};
  }
};

std::vector<gg::ScreenInfo> screens_from_file(const std::string& path) {
  const auto j = gg::read_json_file(path);
  if (!j.contains("screens")) throw gg::ConfigError(path + " has no 'screens' array");
  std::vector<gg::ScreenInfo> out;
  for (const auto& s : j.at("screens")) out.push_back(gg::screen_from_json(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-graph clustering, sparsification and ROI extraction"};
  app.set_version_flag("--version", gg::kVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic gaze session");
  SynthOpts synth_opts;
  synth_opts.add(synth);
  std::uint64_t synth_seed = 1;
  std::string synth_out, synth_csv_dir;
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth->add_option("-o,--output", synth_out, "session JSON to write")->required();
  synth->add_option("--csv-dir", synth_csv_dir, "also write gaze.csv, viewport.csv and screens.json here");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse gaze and viewport CSVs into a session");
  std::string ingest_gaze, ingest_vp, ingest_screens, ingest_out, ingest_graph;
  FixationOpts ingest_fix;
  ingest->add_option("--gaze", ingest_gaze, "gaze CSV")->required();
  ingest->add_option("--viewport", ingest_vp, "viewport CSV");
  ingest->add_option("--screens", ingest_screens, "session config JSON (screens, gap threshold)")->required();
  ingest->add_option("-o,--output", ingest_out, "session JSON to write")->required();
  ingest->add_option("--graph", ingest_graph, "also write the raw graph JSON");
  ingest_fix.add(ingest);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "cluster gaze points and contract the graph");
  std::string cluster_session, cluster_graph_in, cluster_out;
  ClusterOpts cluster_opts;
  auto* cs = cluster->add_option("--session", cluster_session, "session JSON");
  auto* cgopt = cluster->add_option("--graph", cluster_graph_in, "raw graph JSON");
  cs->excludes(cgopt);
  cluster->add_option("-o,--output", cluster_out, "clustered graph JSON to write")->required();
  cluster_opts.add(cluster);

  // sparsify
  auto* sparsify = app.add_subcommand("sparsify", "sparsify a clustered graph");
  std::string sparsify_in, sparsify_out;
  SparsifyOpts sparsify_opts;
  sparsify->add_option("-i,--input", sparsify_in, "clustered graph JSON")->required();
  sparsify->add_option("-o,--output", sparsify_out, "sparsified graph JSON to write")->required();
  sparsify_opts.add(sparsify, true);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "compare sparsified graphs with the clustered graph");
  std::string metrics_in, metrics_sparse, metrics_out, metrics_plot;
  gg::SweepGrid grid;
  std::uint64_t metrics_seed = 1;
  SparsifyOpts metrics_opts;
  metrics->add_option("-i,--input", metrics_in, "clustered graph JSON")->required();
  metrics->add_option("--sparsified", metrics_sparse, "compare against this sparsified graph instead of sweeping");
  metrics->add_option("--ratios", grid.ratios, "sweep edge ratios")->delimiter(',')->capture_default_str();
  metrics->add_option("--seeds", grid.seeds, "sweep seeds per ratio")->capture_default_str();
  metrics->add_option("--seed", metrics_seed, "base seed for the sweep")->capture_default_str();
  metrics->add_option("-o,--output", metrics_out, "metrics CSV to write")->required();
  metrics->add_option("--plot", metrics_plot, "plot-series JSON to write");
  metrics_opts.add(metrics, false);

  // rois
  auto* rois = app.add_subcommand("rois", "rank clusters by attention and place VOIs");
  std::string rois_in, rois_screens, rois_out;
  RoiOpts roi_opts;
  rois->add_option("-i,--input", rois_in, "clustered graph JSON")->required();
  rois->add_option("--screens", rois_screens, "JSON with a 'screens' array (session or session config)");
  rois->add_option("-o,--output", rois_out, "ROI JSON to write")->required();
  roi_opts.add(rois);

  // run
  auto* run = app.add_subcommand("run", "run the full pipeline");
  bool run_synth = false;
  SynthOpts run_synth_opts;
  gg::InputPaths run_inputs;
  FixationOpts run_fix;
  ClusterOpts run_cluster;
  SparsifyOpts run_sparsify;
  RoiOpts run_rois;
  gg::PipelineConfig run_cfg;
  std::string run_out;
  run->add_flag("--synth", run_synth, "use a synthetic session");
  run_synth_opts.add(run);
  run->add_option("--session", run_inputs.session_json, "session JSON input");
  run->add_option("--gaze", run_inputs.gaze_csv, "gaze CSV input");
  run->add_option("--viewport", run_inputs.viewport_csv, "viewport CSV input");
  run->add_option("--screens-config", run_inputs.screens_json, "session config JSON for CSV input");
  run->add_option("--out", run_out, "output directory (default: $GAZEGRAPH_OUT_DIR, else gazegraph_out)");
  run->add_option("--seed", run_cfg.seed, "global seed")->capture_default_str();
  run->add_option("--reader", run_cfg.reader_id, "reader id recorded in the manifest")->capture_default_str();
  run->add_option("--session-id", run_cfg.session_id, "session id recorded in the manifest")->capture_default_str();
  run->add_option("--sweep-ratios", run_cfg.sweep.ratios, "sweep edge ratios")->delimiter(',')->capture_default_str();
  run->add_option("--sweep-seeds", run_cfg.sweep.seeds, "sweep seeds per ratio")->capture_default_str();
  run_fix.add(run);
  run_cluster.add(run);
  run_sparsify.add(run, false);
  run_rois.add(run);

  // compare
  auto* compare = app.add_subcommand("compare", "fixed-ratio MSE comparison across sessions");
  std::vector<std::string> compare_in;
  double compare_ratio = 0.9;
  std::string compare_out, compare_json;
  compare->add_option("manifests", compare_in, "manifest.json files")->required();
  compare->add_option("--ratio", compare_ratio, "edge ratio to compare at")->capture_default_str();
  compare->add_option("-o,--output", compare_out, "CSV table to write (default: stdout)");
  compare->add_option("--json", compare_json, "JSON table with per-reader mean and variance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      auto p = synth_opts.p;
      p.seed = synth_seed;
      const auto s = p.screens > 1 ? gg::generate_multiscreen_gaze(p) : gg::generate_synthetic_gaze(p);
      write_file(synth_out, gg::dump_fixed(gg::session_to_json(s)));
      if (!synth_csv_dir.empty()) {
        std::filesystem::create_directories(synth_csv_dir);
        const auto [gaze, vp] = gg::session_to_csv(s);
        const std::filesystem::path dir(synth_csv_dir);
        write_file((dir / "gaze.csv").string(), gaze);
        write_file((dir / "viewport.csv").string(), vp);
        gg::SessionConfig cfg;
        cfg.screens = s.screens;
        write_file((dir / "screens.json").string(), gg::dump_fixed(gg::session_config_to_json(cfg)));
      }
    } else if (*ingest) {
      gg::PipelineConfig cfg;
      cfg.inputs = gg::InputPaths{"", ingest_gaze, ingest_vp, ingest_screens};
      cfg.fixation = ingest_fix.get();
      const auto s = gg::load_session(cfg);
      write_file(ingest_out, gg::dump_fixed(gg::session_to_json(s)));
      if (!ingest_graph.empty()) write_file(ingest_graph, gg::dump_fixed(gg::graph_to_json(gg::build_raw_graph(s))));
    } else if (*cluster) {
      if (cluster_session.empty() && cluster_graph_in.empty())
        throw gg::ConfigError("cluster needs --session or --graph");
      const auto raw = cluster_session.empty()
                           ? gg::graph_from_json(gg::read_json_file(cluster_graph_in))
                           : gg::build_raw_graph(gg::session_from_json(gg::read_json_file(cluster_session)));
      write_file(cluster_out, gg::dump_fixed(gg::clustered_to_json(gg::cluster_graph(raw, cluster_opts.p))));
    } else if (*sparsify) {
      const auto g = gg::graph_from_json(gg::read_json_file(sparsify_in));
      const auto s = gg::sparsify(g, sparsify_opts.get());
      write_file(sparsify_out, gg::dump_fixed(gg::sparsified_to_json(s)));
    } else if (*metrics) {
      const auto g = gg::graph_from_json(gg::read_json_file(metrics_in));
      if (!metrics_sparse.empty()) {
        const auto sj = gg::read_json_file(metrics_sparse);
        auto row = gg::compare_graphs(g, gg::graph_from_json(sj));
        if (sj.contains("report")) {
          row.edge_ratio = gg::read_real(sj.at("report").at("ratio_target"));
          row.seed = sj.at("report").at("seed").get<std::uint64_t>();
        }
        write_file(metrics_out, gg::metrics_csv({row}));
      } else {
        std::vector<std::uint64_t> seeds;
        for (std::size_t k = 0; k < grid.seeds; ++k) seeds.push_back(metrics_seed + k);
        const auto sw = gg::sweep(g, grid.ratios, seeds, metrics_opts.get());
        write_file(metrics_out, gg::metrics_csv(sw.rows));
        if (!metrics_plot.empty()) write_file(metrics_plot, gg::dump_fixed(gg::sweep_to_json(sw)));
      }
    } else if (*rois) {
      const auto cg = gg::clustered_from_json(gg::read_json_file(rois_in));
      gg::RoiResult r;
      if (rois_screens.empty())
        r = gg::extract_rois(cg, roi_opts.selection(), roi_opts.size(), [](int) { return gg::StimulusBounds{}; });
      else
        r = gg::extract_rois(cg, roi_opts.selection(), roi_opts.size(), screens_from_file(rois_screens));
      if (r.truncated) std::cerr << "gazegraph: warning: fewer clusters than requested ROIs\n";
      write_file(rois_out, gg::dump_fixed(gg::rois_to_json(r)));
    } else if (*run) {
      if (run_synth) run_cfg.synth = run_synth_opts.p;
      if (!run_inputs.session_json.empty() || !run_inputs.gaze_csv.empty()) run_cfg.inputs = run_inputs;
      run_cfg.fixation = run_fix.get();
      run_cfg.cluster = run_cluster.p;
      run_cfg.sparsify = run_sparsify.get();
      run_cfg.rois = run_rois.selection();
      run_cfg.voi = run_rois.size();
      if (!run_out.empty()) run_cfg.out_dir = run_out;
      else if (const char* env = std::getenv("GAZEGRAPH_OUT_DIR"); env && *env) run_cfg.out_dir = env;
      const auto m = gg::run_pipeline(run_cfg);
      std::cout << "clusters " << m.clusters << ", kept edges " << m.kept_edges << ", data reduction "
                << gg::format_real(m.data_reduction) << ", laplacian mse " << gg::format_real(m.quality.laplacian_mse)
                << "\n";
      std::cout << "wrote " << m.artifacts.size() << " files to " << run_cfg.out_dir.string() << "\n";
    } else if (*compare) {
      std::vector<gg::RunManifest> ms;
      for (const auto& path : compare_in) ms.push_back(gg::load_manifest(path));
      const auto table = gg::compare_sessions(ms, compare_ratio);
      const auto csv = gg::comparison_csv(table);
      if (compare_out.empty()) std::cout << csv;
      else write_file(compare_out, csv);
      if (!compare_json.empty()) write_file(compare_json, gg::dump_fixed(gg::comparison_to_json(table)));
    }
  } catch (const gg::Error& e) {
    std::cerr << "gazegraph: error: " << e.what() << "\n";
    return gg::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "gazegraph: error: " << e.what() << "\n";
    return gg::exit_code(gg::ErrorKind::config);
  } catch (const std::exception& e) {
    std::cerr << "gazegraph: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
