#ifndef GAZEGRAPH_PIPELINE_HPP
#define GAZEGRAPH_PIPELINE_HPP

// End-to-end orchestration: ingest -> raw graph -> clustering -> sparsification
// -> metrics -> ROIs, with every artifact written to one output directory.
//
// Seed splitting: all randomness derives from PipelineConfig::seed.
//   stage 0  synthetic data
//   stage 1  sparsification at the configured ratio
//   stage 2  sweep; sweep seed k is derive_seed(stage seed, k)
//   stage 3  per-screen sparsification; screen s uses derive_seed(stage seed, s)
//   stage 4  per-screen sweeps; screen s uses derive_seed(stage seed, s) as base
// where "stage seed" is derive_seed(seed, stage).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "clustering.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "json_format.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "roi.hpp"
#include "session.hpp"
#include "sparsify.hpp"

namespace gazegraph {

inline constexpr const char* kVersion = "0.1.0";

/// Error raised inside a pipeline stage. Keeps the kind of the cause, so exit
/// codes are unchanged.
class StageError : public Error {
 public:
  StageError(ErrorKind kind, std::string stage, const std::string& cause)
      : Error(kind, "stage '" + stage + "': " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Recorded inputs: either a session JSON, or a gaze CSV with a screens JSON
/// (session config) and optionally a viewport CSV.
struct InputPaths {
  std::string session_json;
  std::string gaze_csv;
  std::string viewport_csv;
  std::string screens_json;
};

struct FixationParams {
  double max_dispersion = 8.0;
  std::int64_t min_duration_ms = 100;
};

struct SweepGrid {
  std::vector<double> ratios{1.0, 0.9, 0.7, 0.5, 0.3, 0.2};
  std::size_t seeds = 10;
};

struct PipelineConfig {
  std::optional<SynthParams> synth;  // seed field is replaced by the stage-0 seed
  std::optional<InputPaths> inputs;
  std::optional<FixationParams> fixation;
  ClusterParams cluster;
  SparsifyConfig sparsify;  // seed field is replaced by the stage-1 seed
  SweepGrid sweep;
  RoiSelection rois = TopK{};
  VoiSize voi;
  std::filesystem::path out_dir = "gazegraph_out";
  std::uint64_t seed = 1;
  std::string reader_id = "reader";
  std::string session_id = "session";

  void validate() const {
    if (synth.has_value() == inputs.has_value())
      throw ConfigError("exactly one of synthetic parameters or input paths is required");
    if (inputs) {
      const bool json = !inputs->session_json.empty();
      const bool csv = !inputs->gaze_csv.empty();
      if (json == csv) throw ConfigError("give either a session JSON or a gaze CSV");
      if (csv && inputs->screens_json.empty()) throw ConfigError("a gaze CSV needs a screens JSON");
    }
    if (cluster.branching < 2) throw ConfigError("branching must be >= 2");
    if (!(cluster.threshold > 0.0) || !std::isfinite(cluster.threshold))
      throw ConfigError("threshold must be a finite value > 0");
    if (!(cluster.slice_scale > 0.0)) throw ConfigError("slice_scale must be > 0");
    try {
      sparsify.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    if (sweep.ratios.empty()) throw ConfigError("sweep needs at least one ratio");
    for (double r : sweep.ratios)
      if (!(r > 0.0 && r <= 1.0)) throw ConfigError("sweep ratios must lie in (0, 1]");
    if (sweep.seeds < 1) throw ConfigError("sweep needs at least one seed");
    if (out_dir.empty()) throw ConfigError("output directory is empty");
  }
};

inline Json synth_params_to_json(const SynthParams& p) {
  return Json{{"n", p.n},
              {"bounds", Json{{"lo", p.bounds.lo}, {"hi", p.bounds.hi}}},
              {"step_scale", p.step_scale},
              {"saccade_probability", p.saccade_probability},
              {"saccade_scale", p.saccade_scale},
              {"screens", p.screens},
              {"switch_probability", p.switch_probability}};
}

inline Json roi_selection_to_json(const RoiSelection& s) {
  if (const auto* t = std::get_if<TopK>(&s)) return Json{{"top_k", t->k}};
  return Json{{"min_percentile", std::get<MinPercentile>(s).p}};
}

/// Config echo for the manifest. The output directory is left out so that
/// runs into different directories produce identical manifests.
inline Json pipeline_config_to_json(const PipelineConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["reader_id"] = c.reader_id;
  j["session_id"] = c.session_id;
  if (c.synth) j["synth"] = synth_params_to_json(*c.synth);
  if (c.inputs) {
    Json in = Json::object();
    if (!c.inputs->session_json.empty()) in["session_json"] = c.inputs->session_json;
    if (!c.inputs->gaze_csv.empty()) in["gaze_csv"] = c.inputs->gaze_csv;
    if (!c.inputs->viewport_csv.empty()) in["viewport_csv"] = c.inputs->viewport_csv;
    if (!c.inputs->screens_json.empty()) in["screens_json"] = c.inputs->screens_json;
    j["inputs"] = in;
  }
  if (c.fixation)
    j["fixation"] = Json{{"max_dispersion", c.fixation->max_dispersion},
                         {"min_duration_ms", c.fixation->min_duration_ms}};
  j["cluster"] = cluster_params_to_json(c.cluster);
  j["sparsify"] = Json{{"target_edge_ratio", c.sparsify.target_edge_ratio},
                       {"mode", to_string(c.sparsify.mode)},
                       {"probes", c.sparsify.alpha_report_probes},
                       {"reweight", c.sparsify.reweight},
                       {"weight_mode", to_string(c.sparsify.weight_mode)},
                       {"log_floor", c.sparsify.log_floor}};
  j["sweep"] = Json{{"ratios", c.sweep.ratios}, {"seeds", c.sweep.seeds}};
  j["rois"] = roi_selection_to_json(c.rois);
  j["voi_size"] = Json::array({c.voi.w, c.voi.h, c.voi.d});
  return j;
}

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct ScreenSummary {
  int screen_id = 0;
  std::string modality;
  std::size_t raw_nodes = 0;
  std::size_t clusters = 0;
  std::size_t clustered_edges = 0;
  std::size_t kept_edges = 0;
  double sigma = 1.0;
};

struct CrossScreenCount {
  int from = 0;
  int to = 0;
  std::size_t count = 0;
};

struct RunManifest {
  Json config;
  std::uint64_t seed = 0;
  std::string reader_id;
  std::string session_id;
  std::size_t raw_nodes = 0;
  std::size_t raw_edges = 0;
  std::size_t clusters = 0;
  std::size_t clustered_edges = 0;
  std::size_t kept_edges = 0;
  std::size_t self_loops = 0;
  double node_reduction = 0.0;
  double edge_reduction = 0.0;
  double data_reduction = 0.0;
  MetricsRow quality;  // clustered vs. sparsified at the configured ratio
  double alpha = 0.0;
  std::vector<double> sweep_ratios;
  std::size_t sweep_seeds = 0;
  std::vector<SweepSummary> sweep_means;
  std::vector<ScreenSummary> screens;  // filled for multi-screen sessions
  std::vector<CrossScreenCount> cross_screen;
  std::vector<std::string> artifacts;
  std::vector<StageTiming> timings;  // written to timings.json, not the manifest
};

inline Json manifest_to_json(const RunManifest& m) {
  Json j;
  j["tool"] = "gazegraph";
  j["version"] = kVersion;
  j["libraries"] = Json{{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  j["seed"] = m.seed;
  j["reader_id"] = m.reader_id;
  j["session_id"] = m.session_id;
  j["config"] = m.config;
  j["counts"] = Json{{"raw_nodes", m.raw_nodes},
                     {"raw_edges", m.raw_edges},
                     {"clusters", m.clusters},
                     {"clustered_edges", m.clustered_edges},
                     {"kept_edges", m.kept_edges},
                     {"self_loops", m.self_loops}};
  j["reduction"] = Json{{"node_reduction", m.node_reduction},
                        {"edge_reduction", m.edge_reduction},
                        {"data_reduction", m.data_reduction}};
  j["quality"] = Json{{"edge_ratio", m.quality.edge_ratio},
                      {"ratio_achieved", m.quality.ratio_achieved},
                      {"diameter_ratio", m.quality.diameter_ratio},
                      {"betweenness_spearman", m.quality.betweenness_spearman
                                                   ? Json(*m.quality.betweenness_spearman)
                                                   : Json(nullptr)},
                      {"laplacian_mse", m.quality.laplacian_mse},
                      {"sigma", m.quality.sigma},
                      {"alpha", m.alpha}};
  Json means = Json::array();
  for (const auto& s : m.sweep_means)
    means.push_back(Json{{"edge_ratio", s.edge_ratio},
                         {"diameter_ratio", s.diameter_ratio},
                         {"betweenness_spearman",
                          s.betweenness_spearman ? Json(*s.betweenness_spearman) : Json(nullptr)},
                         {"laplacian_mse", s.laplacian_mse},
                         {"sigma", s.sigma}});
  j["sweep"] = Json{{"ratios", m.sweep_ratios}, {"seeds", m.sweep_seeds}, {"means", means}};
  if (!m.screens.empty()) {
    Json screens = Json::array();
    for (const auto& s : m.screens)
      screens.push_back(Json{{"screen_id", s.screen_id},
                             {"modality", s.modality},
                             {"raw_nodes", s.raw_nodes},
                             {"clusters", s.clusters},
                             {"clustered_edges", s.clustered_edges},
                             {"kept_edges", s.kept_edges},
                             {"sigma", s.sigma}});
    j["screens"] = screens;
    Json cross = Json::array();
    for (const auto& c : m.cross_screen) cross.push_back(Json{{"from", c.from}, {"to", c.to}, {"count", c.count}});
    j["cross_screen_transitions"] = cross;
  }
  j["artifacts"] = m.artifacts;
  return j;
}

inline RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.reader_id = j.at("reader_id").get<std::string>();
    m.session_id = j.at("session_id").get<std::string>();
    m.config = j.at("config");
    const auto& c = j.at("counts");
    m.raw_nodes = c.at("raw_nodes").get<std::size_t>();
    m.raw_edges = c.at("raw_edges").get<std::size_t>();
    m.clusters = c.at("clusters").get<std::size_t>();
    m.clustered_edges = c.at("clustered_edges").get<std::size_t>();
    m.kept_edges = c.at("kept_edges").get<std::size_t>();
    m.self_loops = c.at("self_loops").get<std::size_t>();
    const auto& r = j.at("reduction");
    m.node_reduction = read_real(r.at("node_reduction"));
    m.edge_reduction = read_real(r.at("edge_reduction"));
    m.data_reduction = read_real(r.at("data_reduction"));
    const auto& q = j.at("quality");
    m.quality.edge_ratio = read_real(q.at("edge_ratio"));
    m.quality.ratio_achieved = read_real(q.at("ratio_achieved"));
    m.quality.diameter_ratio = read_real(q.at("diameter_ratio"));
    if (!q.at("betweenness_spearman").is_null()) m.quality.betweenness_spearman = read_real(q.at("betweenness_spearman"));
    m.quality.laplacian_mse = read_real(q.at("laplacian_mse"));
    m.quality.sigma = read_real(q.at("sigma"));
    m.alpha = read_real(q.at("alpha"));
    const auto& s = j.at("sweep");
    for (const auto& v : s.at("ratios")) m.sweep_ratios.push_back(read_real(v));
    m.sweep_seeds = s.at("seeds").get<std::size_t>();
    for (const auto& row : s.at("means")) {
      SweepSummary sm;
      sm.edge_ratio = read_real(row.at("edge_ratio"));
      sm.diameter_ratio = read_real(row.at("diameter_ratio"));
      if (!row.at("betweenness_spearman").is_null()) sm.betweenness_spearman = read_real(row.at("betweenness_spearman"));
      sm.laplacian_mse = read_real(row.at("laplacian_mse"));
      sm.sigma = read_real(row.at("sigma"));
      m.sweep_means.push_back(sm);
    }
    if (j.contains("screens"))
      for (const auto& sc : j.at("screens"))
        m.screens.push_back({sc.at("screen_id").get<int>(), sc.at("modality").get<std::string>(),
                             sc.at("raw_nodes").get<std::size_t>(), sc.at("clusters").get<std::size_t>(),
                             sc.at("clustered_edges").get<std::size_t>(), sc.at("kept_edges").get<std::size_t>(),
                             read_real(sc.at("sigma"))});
    if (j.contains("cross_screen_transitions"))
      for (const auto& cs : j.at("cross_screen_transitions"))
        m.cross_screen.push_back({cs.at("from").get<int>(), cs.at("to").get<int>(), cs.at("count").get<std::size_t>()});
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad manifest JSON: ") + e.what());
  }
  return m;
}

namespace detail {

// Tracks files written by one run so a failed run can remove them.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void open() {
    std::error_code ec;
    if (!std::filesystem::exists(dir_, ec)) {
      std::filesystem::create_directories(dir_, ec);
      if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
      created_.push_back(dir_);
    } else if (!std::filesystem::is_directory(dir_, ec)) {
      throw ConfigError("output path " + dir_.string() + " is not a directory");
    }
  }

  // `name` is relative to the output directory; missing subdirectories are created.
  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::error_code ec;
    const auto parent = path.parent_path();
    if (!std::filesystem::exists(parent, ec)) {
      std::filesystem::create_directories(parent, ec);
      if (ec) throw ConfigError("cannot create " + parent.string() + ": " + ec.message());
      created_.push_back(parent);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    files_.push_back(path);
    names_.push_back(name);
    out << content;
    out.close();
    if (!out) throw ConfigError("failed writing " + path.string());
  }

  void rollback() noexcept {
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) std::filesystem::remove(*it, ec);
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) {
      if (std::filesystem::is_empty(*it, ec)) std::filesystem::remove(*it, ec);
    }
    files_.clear();
    names_.clear();
    created_.clear();
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  std::vector<std::string> names_;
  std::vector<std::filesystem::path> created_;
};

template <typename F>
auto timed_stage(const std::string& name, std::vector<StageTiming>& timings, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto record = [&] {
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    timings.push_back({name, dt.count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record();
    } else {
      auto r = f();
      record();
      return r;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e.kind(), name, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError(ErrorKind::config, name, e.what());
  } catch (const std::bad_alloc&) {
    throw StageError(ErrorKind::numeric, name, "out of memory");
  }
}

inline std::vector<std::uint64_t> sweep_seeds(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(derive_seed(base, k));
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Loads or generates the session described by cfg (the ingest stage alone).
inline GazeSession load_session(const PipelineConfig& cfg) {
  GazeSession s;
  if (cfg.synth) {
    auto p = *cfg.synth;
    p.seed = derive_seed(cfg.seed, 0);
    s = p.screens > 1 ? generate_multiscreen_gaze(p) : generate_synthetic_gaze(p);
  } else if (!cfg.inputs->session_json.empty()) {
    s = session_from_json(read_json_file(cfg.inputs->session_json));
  } else {
    const auto scfg = session_config_from_json(read_json_file(cfg.inputs->screens_json));
    ViewportLog vp;
    if (!cfg.inputs->viewport_csv.empty()) {
      std::ifstream vin(cfg.inputs->viewport_csv);
      if (!vin) throw ConfigError("cannot open " + cfg.inputs->viewport_csv);
      vp = parse_viewport_csv(vin);
    }
    std::ifstream gin(cfg.inputs->gaze_csv);
    if (!gin) throw ConfigError("cannot open " + cfg.inputs->gaze_csv);
    s = parse_gaze_csv(gin, scfg, vp);
  }
  if (cfg.fixation) s = fixation_filter(s, cfg.fixation->max_dispersion, cfg.fixation->min_duration_ms);
  return s;
}

/// Runs every stage and writes the artifacts into cfg.out_dir:
///   session.json, raw_graph.json, clustered.json, sparsified.json,
///   metrics.csv, metrics_plot.json, rois.json, manifest.json, timings.json
/// plus, for sessions with more than one screen, cross_screen_transitions.json
/// and screens/<id>/{clustered.json, sparsified.json, metrics.csv}.
/// On failure every file written by this call is removed again.
inline RunManifest run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  RunManifest m;
  m.config = pipeline_config_to_json(cfg);
  m.seed = cfg.seed;
  m.reader_id = cfg.reader_id;
  m.session_id = cfg.session_id;
  m.sweep_ratios = cfg.sweep.ratios;
  m.sweep_seeds = cfg.sweep.seeds;

  detail::ArtifactWriter out(cfg.out_dir);
  auto& t = m.timings;
  try {
    detail::timed_stage("output", t, [&] { out.open(); });

    const auto session = detail::timed_stage("ingest", t, [&] { return load_session(cfg); });
    out.write("session.json", dump_fixed(session_to_json(session)));

    const auto raw = detail::timed_stage("graph", t, [&] { return build_raw_graph(session); });
    out.write("raw_graph.json", dump_fixed(graph_to_json(raw)));
    m.raw_nodes = raw.node_count();
    m.raw_edges = raw.edge_count();

    const auto cg = detail::timed_stage("cluster", t, [&] { return cluster_graph(raw, cfg.cluster); });
    out.write("clustered.json", dump_fixed(clustered_to_json(cg)));
    m.clusters = cg.graph.node_count();
    m.clustered_edges = cg.graph.edge_count();
    m.self_loops = cg.graph.total_self_loops();

    auto scfg = cfg.sparsify;
    scfg.seed = derive_seed(cfg.seed, 1);
    const auto sp = detail::timed_stage("sparsify", t, [&] { return sparsify(cg.graph, scfg); });
    out.write("sparsified.json", dump_fixed(sparsified_to_json(sp)));
    m.kept_edges = sp.graph.edge_count();
    m.alpha = sp.report.alpha;

    detail::timed_stage("metrics", t, [&] {
      m.quality = compare_graphs(cg.graph, sp.graph);
      m.quality.edge_ratio = scfg.target_edge_ratio;
      m.quality.seed = scfg.seed;
      m.quality.ratio_achieved = sp.report.ratio_achieved;
      m.quality.sigma = sp.report.sigma;
      const auto sw = sweep(cg.graph, cfg.sweep.ratios,
                            detail::sweep_seeds(derive_seed(cfg.seed, 2), cfg.sweep.seeds), cfg.sparsify);
      m.sweep_means = sw.means;
      out.write("metrics.csv", metrics_csv(sw.rows));
      out.write("metrics_plot.json", dump_fixed(sweep_to_json(sw)));
    });

    detail::timed_stage("rois", t, [&] {
      out.write("rois.json", dump_fixed(rois_to_json(extract_rois(cg, cfg.rois, cfg.voi, session.screens))));
    });

    if (session.screens.size() > 1) {
      detail::timed_stage("screens", t, [&] {
        for (const auto& [key, count] : session.cross_screen_transitions())
          m.cross_screen.push_back({key.first, key.second, count});
        Json cross = Json::array();
        for (const auto& c : m.cross_screen) cross.push_back(Json{{"from", c.from}, {"to", c.to}, {"count", c.count}});
        out.write("cross_screen_transitions.json", dump_fixed(Json{{"transitions", cross}}));

        for (std::size_t si = 0; si < session.screens.size(); ++si) {
          const auto& screen = session.screens[si];
          ScreenSummary sum;
          sum.screen_id = screen.id;
          sum.modality = screen.modality;
          for (const auto& node : raw.nodes()) sum.raw_nodes += node.screen_id == screen.id ? 1 : 0;
          std::vector<std::size_t> keep;
          for (std::size_t k = 0; k < cg.graph.node_count(); ++k)
            if (cg.graph.node(k).screen_id == screen.id) keep.push_back(k);
          if (keep.empty()) {
            m.screens.push_back(sum);
            continue;
          }
          ClusteredGraph sub;
          sub.graph = induced_subgraph(cg.graph, keep);
          sub.params = cg.params;
          for (std::size_t local = 0; local < keep.size(); ++local) {
            auto c = cg.clusters[keep[local]];
            c.id = local;
            sub.clusters.push_back(std::move(c));
          }
          auto sc = cfg.sparsify;
          sc.seed = derive_seed(derive_seed(cfg.seed, 3), si);
          const auto ssp = sparsify(sub.graph, sc);
          const auto ssw = sweep(sub.graph, cfg.sweep.ratios,
                                 detail::sweep_seeds(derive_seed(derive_seed(cfg.seed, 4), si), cfg.sweep.seeds),
                                 cfg.sparsify);
          const std::string dir = "screens/" + std::to_string(screen.id) + "/";
          out.write(dir + "clustered.json", dump_fixed(clustered_to_json(sub)));
          out.write(dir + "sparsified.json", dump_fixed(sparsified_to_json(ssp)));
          out.write(dir + "metrics.csv", metrics_csv(ssw.rows));
          sum.clusters = sub.graph.node_count();
          sum.clustered_edges = sub.graph.edge_count();
          sum.kept_edges = ssp.graph.edge_count();
          sum.sigma = ssp.report.sigma;
          m.screens.push_back(sum);
        }
      });
    }

    const double raw_total = static_cast<double>(m.raw_nodes + m.raw_edges);
    m.node_reduction = 1.0 - static_cast<double>(m.clusters) / static_cast<double>(m.raw_nodes);
    m.edge_reduction = m.raw_edges ? 1.0 - static_cast<double>(m.kept_edges) / static_cast<double>(m.raw_edges) : 0.0;
    m.data_reduction = 1.0 - static_cast<double>(m.clusters + m.kept_edges) / raw_total;

    m.artifacts = out.names();
    m.artifacts.push_back("manifest.json");
    m.artifacts.push_back("timings.json");
    out.write("manifest.json", dump_fixed(manifest_to_json(m)));
    Json tj = Json::array();
    for (const auto& st : m.timings) tj.push_back(Json{{"stage", st.stage}, {"ms", st.ms}});
    out.write("timings.json", dump_fixed(Json{{"timings_ms", tj}}));
  } catch (...) {
    out.rollback();
    throw;
  }
  return m;
}

/// Reads a manifest written by run_pipeline.
inline RunManifest load_manifest(const std::string& path) { return manifest_from_json(read_json_file(path)); }

struct ComparisonRow {
  std::string reader_id;
  std::string session_id;
  double laplacian_mse = 0.0;
};

struct ReaderSummary {
  std::string reader_id;
  std::size_t sessions = 0;
  double mean = 0.0;
  double variance = 0.0;  // population variance over the reader's sessions
};

struct ComparisonTable {
  double fixed_ratio = 0.9;
  std::vector<ComparisonRow> rows;     // input order
  std::vector<ReaderSummary> readers;  // sorted by reader id
};

/// Mean sweep MSE of each session at `fixed_ratio`, grouped by reader.
/// All manifests must share one sweep grid that contains fixed_ratio.
inline ComparisonTable compare_sessions(const std::vector<RunManifest>& manifests, double fixed_ratio = 0.9) {
  if (manifests.size() < 2) throw ConfigError("comparison needs at least two manifests");
  const auto& grid = manifests.front();
  for (const auto& mf : manifests)
    if (mf.sweep_ratios != grid.sweep_ratios || mf.sweep_seeds != grid.sweep_seeds)
      throw ConfigError("session '" + mf.session_id + "' uses a different sweep grid");
  ComparisonTable table;
  table.fixed_ratio = fixed_ratio;
  std::map<std::string, std::vector<double>> by_reader;
  for (const auto& mf : manifests) {
    const SweepSummary* hit = nullptr;
    for (const auto& s : mf.sweep_means)
      if (std::abs(s.edge_ratio - fixed_ratio) <= 1e-12) hit = &s;
    if (!hit) throw ConfigError("ratio " + format_real(fixed_ratio) + " is not on the sweep grid");
    table.rows.push_back({mf.reader_id, mf.session_id, hit->laplacian_mse});
    by_reader[mf.reader_id].push_back(hit->laplacian_mse);
  }
  for (const auto& [reader, v] : by_reader) {
    ReaderSummary r;
    r.reader_id = reader;
    r.sessions = v.size();
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    for (double x : v) r.variance += (x - r.mean) * (x - r.mean);
    r.variance /= static_cast<double>(v.size());
    table.readers.push_back(r);
  }
  return table;
}

inline std::string comparison_csv(const ComparisonTable& t) {
  std::string out = "reader_id,session_id,edge_ratio,laplacian_mse\n";
  for (const auto& r : t.rows)
    out += r.reader_id + ',' + r.session_id + ',' + format_real(t.fixed_ratio) + ',' + format_real(r.laplacian_mse) +
           '\n';
  return out;
}

inline Json comparison_to_json(const ComparisonTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back(Json{{"reader_id", r.reader_id}, {"session_id", r.session_id}, {"laplacian_mse", r.laplacian_mse}});
  Json readers = Json::array();
  for (const auto& r : t.readers)
    readers.push_back(
        Json{{"reader_id", r.reader_id}, {"sessions", r.sessions}, {"mean", r.mean}, {"variance", r.variance}});
  return Json{{"edge_ratio", t.fixed_ratio}, {"sessions", rows}, {"readers", readers}};
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_PIPELINE_HPP
