#include "chaoscorr/correspondence.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chaoscorr/csv.hpp"
#include "chaoscorr/kicked_top_classical.hpp"
#include "chaoscorr/kicked_top_quantum.hpp"

namespace chaoscorr {

using nlohmann::json;

namespace {

constexpr const char* kSummarySchema = "chaoscorr.sweep/1";

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename T>
void read_key(const json& j, const char* key, T& value) {
  if (!j.contains(key)) return;
  try {
    value = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw InvalidArgument("config: unknown key '" + it.key() + "' in " + where);
  }
}

std::string number_tag(double x) {
  std::ostringstream s;
  if (x == std::floor(x) && std::abs(x) < 1e15)
    s << static_cast<long long>(x);
  else
    s << x;
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------- config

const char* model_name(Model m) { return m == Model::kicked_top ? "kicked_top" : "dicke"; }

Model parse_model(const std::string& name) {
  if (name == "kicked_top" || name == "kt") return Model::kicked_top;
  if (name == "dicke") return Model::dicke;
  throw InvalidArgument("config: unknown model '" + name + "' (expected kicked_top or dicke)");
}

void SweepConfig::validate() const {
  require(bins >= 1, "config: bins must be >= 1");
  require(amplitude > 0.0, "config: amplitude must be positive");
  if (model == Model::kicked_top) {
    require(!kt.gammas.empty(), "config: gamma grid is empty");
    require(!kt.js.empty() && kt.js.size() == kt.n_kicks.size(), "config: js and n_kicks must be non-empty and paired");
    require(kt.n_trajectories >= 1, "config: ensemble size must be >= 1");
    for (const int j : kt.js) KtParams{j, kt.beta, 0.0}.validate();
    for (const double g : kt.gammas) require(g >= 0.0 && std::isfinite(g), "config: gamma must be non-negative");
    for (const Index n : kt.n_kicks) require(n >= 1, "config: n_kicks must be >= 1");
  } else {
    require(!dicke.xis.empty(), "config: xi grid is empty");
    require(!dicke.n_atoms.empty() && dicke.n_atoms.size() == dicke.t_max.size(),
            "config: n_atoms and t_max must be non-empty and paired");
    require(dicke.n_trajectories >= 1, "config: ensemble size must be >= 1");
    require(dicke.tol > 0.0, "config: tol must be positive");
    require(dicke.traversal_time >= 0.0, "config: traversal_time must be non-negative");
    require(dicke.lo_offset >= 0.0 && dicke.hi_offset >= 0.0, "config: shell offsets must be non-negative");
    for (const double t : dicke.t_max) require(t > 0.0, "config: t_max must be positive");
    for (const int n : dicke.n_atoms) {
      DickeParams p;
      p.n_atoms = n;
      p.n_tr = dicke.n_tr;
      p.omega = dicke.omega;
      p.omega0 = dicke.omega0;
      p.validate();
    }
    for (const double x : dicke.xis) require(x >= 0.0 && std::isfinite(x), "config: xi must be non-negative");
  }
}

std::size_t SweepConfig::n_series() const {
  return model == Model::kicked_top ? kt.js.size() : dicke.n_atoms.size();
}

const std::vector<double>& SweepConfig::controls() const {
  return model == Model::kicked_top ? kt.gammas : dicke.xis;
}

json config_to_json(const SweepConfig& c) {
  json j;
  j["model"] = model_name(c.model);
  j["seed"] = c.seed;
  j["bins"] = c.bins;
  j["exact_cells"] = c.exact_cells;
  j["weighted_fit"] = c.weighted_fit;
  j["free_amplitude"] = c.free_amplitude;
  j["amplitude"] = c.amplitude;
  j["output_dir"] = c.output_dir;
  j["kicked_top"] = {{"beta", c.kt.beta},
                     {"gammas", c.kt.gammas},
                     {"js", c.kt.js},
                     {"n_kicks", c.kt.n_kicks},
                     {"n_trajectories", c.kt.n_trajectories}};
  j["dicke"] = {{"xis", c.dicke.xis},
                {"n_atoms", c.dicke.n_atoms},
                {"t_max", c.dicke.t_max},
                {"n_tr", c.dicke.n_tr},
                {"omega", c.dicke.omega},
                {"omega0", c.dicke.omega0},
                {"e_bar", c.dicke.e_bar},
                {"lo_offset", c.dicke.lo_offset},
                {"hi_offset", c.dicke.hi_offset},
                {"n_trajectories", c.dicke.n_trajectories},
                {"tol", c.dicke.tol},
                {"traversal_time", c.dicke.traversal_time}};
  return j;
}

SweepConfig config_from_json(const json& j, const SweepConfig& base) {
  require(j.is_object(), "config: top level must be an object");
  reject_unknown(j,
                 {"model", "seed", "bins", "exact_cells", "weighted_fit", "free_amplitude", "amplitude", "output_dir",
                  "kicked_top", "dicke"},
                 "top level");
  SweepConfig c = base;
  if (j.contains("model")) {
    std::string m;
    read_key(j, "model", m);
    c.model = parse_model(m);
  }
  read_key(j, "seed", c.seed);
  read_key(j, "bins", c.bins);
  read_key(j, "exact_cells", c.exact_cells);
  read_key(j, "weighted_fit", c.weighted_fit);
  read_key(j, "free_amplitude", c.free_amplitude);
  read_key(j, "amplitude", c.amplitude);
  read_key(j, "output_dir", c.output_dir);
  if (j.contains("kicked_top")) {
    const json& k = j.at("kicked_top");
    require(k.is_object(), "config: 'kicked_top' must be an object");
    reject_unknown(k, {"beta", "gammas", "js", "n_kicks", "n_trajectories"}, "kicked_top");
    read_key(k, "beta", c.kt.beta);
    read_key(k, "gammas", c.kt.gammas);
    read_key(k, "js", c.kt.js);
    read_key(k, "n_kicks", c.kt.n_kicks);
    read_key(k, "n_trajectories", c.kt.n_trajectories);
  }
  if (j.contains("dicke")) {
    const json& d = j.at("dicke");
    require(d.is_object(), "config: 'dicke' must be an object");
    reject_unknown(d,
                   {"xis", "n_atoms", "t_max", "n_tr", "omega", "omega0", "e_bar", "lo_offset", "hi_offset",
                    "n_trajectories", "tol", "traversal_time"},
                   "dicke");
    read_key(d, "xis", c.dicke.xis);
    read_key(d, "n_atoms", c.dicke.n_atoms);
    read_key(d, "t_max", c.dicke.t_max);
    read_key(d, "n_tr", c.dicke.n_tr);
    read_key(d, "omega", c.dicke.omega);
    read_key(d, "omega0", c.dicke.omega0);
    read_key(d, "e_bar", c.dicke.e_bar);
    read_key(d, "lo_offset", c.dicke.lo_offset);
    read_key(d, "hi_offset", c.dicke.hi_offset);
    read_key(d, "n_trajectories", c.dicke.n_trajectories);
    read_key(d, "tol", c.dicke.tol);
    read_key(d, "traversal_time", c.dicke.traversal_time);
  }
  return c;
}

SweepConfig load_config(const std::filesystem::path& path, const SweepConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, base);
}

std::string config_hash(const SweepConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- building blocks

RescaledRatio kt_rtilde(int j, double beta, double gamma, SpectrumSample* spectrum) {
  const KtParams params{j, beta, gamma};
  const QuasienergySpectrum q = quasienergies(build_floquet(params), params);
  RatioOptions opts;
  opts.circular = true;
  const RatioSample r = spacing_ratios(q.alphas, opts);
  if (spectrum) {
    spectrum->levels.assign(q.alphas.begin(), q.alphas.end());
    std::ostringstream note;
    note << "kicked top j=" << j << " beta=" << beta << " gamma=" << gamma;
    spectrum->provenance = note.str();
  }
  return rescaled_average(r);
}

RescaledRatio dicke_rtilde(const DickeParams& params, double e_bar, double lo_offset, double hi_offset,
                           SpectrumSample* spectrum, EnergyShell* shell) {
  const SpectrumSample full = scaled_spectrum(build_dicke_hamiltonian(params), params.j());
  EnergyShell s = select_shell(full, e_bar, lo_offset, hi_offset);
  if (s.count() < 3) {
    std::ostringstream msg;
    msg << "dicke_rtilde: shell [" << s.lo << ", " << s.hi << "] holds " << s.count()
        << " levels, need 3; increase N or widen the window";
    throw InvalidArgument(msg.str());
  }
  const RescaledRatio out = rescaled_average(spacing_ratios(s.levels));
  if (spectrum) {
    spectrum->levels = s.levels;
    spectrum->provenance = full.provenance + " shell";
  }
  if (shell) *shell = std::move(s);
  return out;
}

MeasureEnsemble kt_measure_ensemble(double beta, double gamma, Index n_kicks, Index n_trajectories,
                                    std::uint64_t seed, bool exact_cells) {
  require(n_kicks >= 1 && n_trajectories >= 1, "kt_measure_ensemble: need n_kicks >= 1 and n_trajectories >= 1");
  MeasureEnsemble e;
  e.n_points_target = n_kicks;
  e.grid = build_grid(Rect::kicked_top(), n_kicks, {}, exact_cells);
  e.samples = parallel_map(n_trajectories, [&](Index i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const SphereState s0 = random_sphere_state(rng);
    SectionPointCloud cloud;
    cloud.u.reserve(static_cast<std::size_t>(n_kicks));
    cloud.v.reserve(static_cast<std::size_t>(n_kicks));
    SphereState s = s0;
    for (Index k = 0; k < n_kicks; ++k) {
      s = kt_step(s, beta, gamma);
      cloud.push_back(s.phi(), std::clamp(s.cos_theta(), -1.0, 1.0));
    }
    return chaos_measure(cloud, e.grid);
  });
  return e;
}

MeasureEnsemble dicke_measure_ensemble(const DickeFlowParams& params, double e, double t_max, Index n_trajectories,
                                       std::uint64_t seed, double tol, double traversal_time, bool exact_cells) {
  require(t_max > 0.0 && n_trajectories >= 1, "dicke_measure_ensemble: need t_max > 0 and n_trajectories >= 1");
  const std::vector<DickeState> starts = sample_shell(e, params, n_trajectories, seed);
  const std::vector<std::vector<SectionCrossing>> crossings = parallel_map(
      n_trajectories, [&](Index i) { return section_crossings(starts[static_cast<std::size_t>(i)], params, t_max, tol); });

  MeasureEnsemble out;
  if (traversal_time > 0.0) {
    out.traversal_time = traversal_time;
  } else {
    std::vector<double> per;
    for (const auto& c : crossings)
      if (c.size() >= 2) per.push_back(mean_traversal_time(c));
    if (per.empty()) throw NumericalError("dicke_measure_ensemble: no trajectory crossed the section twice");
    out.traversal_time = mean_and_error(per).mean;
  }
  out.n_points_target = std::max<Index>(1, std::llround(t_max / out.traversal_time));
  out.grid = build_grid(Rect::dicke_section(), out.n_points_target,
                        [&](double Q, double P) { return shell_accessible(P, Q, e, params); }, exact_cells);
  out.samples.reserve(crossings.size());
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    if (crossings[i].empty()) {
      std::ostringstream msg;
      msg << "dicke_measure_ensemble: trajectory " << i << " never crossed the section";
      throw NumericalError(msg.str());
    }
    SectionPointCloud cloud;
    for (const auto& c : crossings[i]) cloud.push_back(c.Q, std::clamp(c.P, -1.0, 1.0));
    out.samples.push_back(chaos_measure(cloud, out.grid));
  }
  return out;
}

// ---------------------------------------------------------------- sweep

std::vector<CorrespondencePoint> SweepResult::points() const {
  std::vector<CorrespondencePoint> out;
  for (const auto& s : series)
    for (const auto& r : s.records) out.push_back(r.point);
  return out;
}

FitResult fit_points(std::span<const CorrespondencePoint> points, const SweepConfig& cfg) {
  std::vector<FitPoint> fp;
  fp.reserve(points.size());
  for (const auto& p : points) {
    const double sigma = std::max(p.x_stderr, 1e-6);
    fp.push_back({p.x, p.y, 1.0 / (sigma * sigma)});
  }
  FitOptions opts;
  opts.amplitude = cfg.amplitude;
  opts.free_amplitude = cfg.free_amplitude;
  opts.weighted = cfg.weighted_fit;
  return fit_correspondence(fp, opts);
}

namespace {

template <typename Fn>
void with_control(const char* name, double value, Fn&& fn) {
  const auto annotate = [&](const std::exception& e) {
    std::ostringstream msg;
    msg << e.what() << " [" << name << " = " << value << "]";
    return msg.str();
  };
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(annotate(e));
  } catch (const NumericalError& e) {
    throw NumericalError(annotate(e));
  } catch (const IoError& e) {
    throw IoError(annotate(e));
  }
}

}  // namespace

void run_sweep(const SweepConfig& cfg, SweepResult& out) {
  cfg.validate();
  out = SweepResult{};
  out.config = cfg;
  const bool kt = cfg.model == Model::kicked_top;
  const auto model_tag = static_cast<std::uint64_t>(cfg.model);
  try {
    for (std::size_t s = 0; s < cfg.n_series(); ++s) {
      SeriesResult series;
      series.size = kt ? cfg.kt.js[s] : cfg.dicke.n_atoms[s];
      series.time = kt ? static_cast<double>(cfg.kt.n_kicks[s]) : cfg.dicke.t_max[s];
      out.series.push_back(series);
      const std::vector<double>& controls = cfg.controls();
      for (std::size_t c = 0; c < controls.size(); ++c) {
        const double control = controls[c];
        const std::uint64_t stream = derive_seed(cfg.seed, {model_tag, s, c});
        ControlRecord rec;
        with_control(kt ? "gamma" : "xi", control, [&] {
          auto t0 = std::chrono::steady_clock::now();
          if (kt) {
            rec.ratio = kt_rtilde(series.size, cfg.kt.beta, control, &rec.spectrum);
            rec.n_ratios = static_cast<Index>(rec.spectrum.levels.size());
          } else {
            DickeParams p;
            p.n_atoms = series.size;
            p.n_tr = cfg.dicke.n_tr;
            p.omega = cfg.dicke.omega;
            p.omega0 = cfg.dicke.omega0;
            p.xi = control;
            EnergyShell shell;
            rec.ratio = dicke_rtilde(p, cfg.dicke.e_bar, cfg.dicke.lo_offset, cfg.dicke.hi_offset, &rec.spectrum,
                                     &shell);
            rec.shell_first_rank = shell.first_rank;
            rec.n_ratios = shell.count() - 2;
          }
          rec.seconds_quantum = seconds_since(t0);

          t0 = std::chrono::steady_clock::now();
          if (kt) {
            rec.ensemble = kt_measure_ensemble(cfg.kt.beta, control, cfg.kt.n_kicks[s], cfg.kt.n_trajectories, stream,
                                               cfg.exact_cells);
          } else {
            const DickeFlowParams fp{cfg.dicke.omega, cfg.dicke.omega0, control};
            rec.ensemble = dicke_measure_ensemble(fp, cfg.dicke.e_bar, series.time, cfg.dicke.n_trajectories, stream,
                                                  cfg.dicke.tol, cfg.dicke.traversal_time, cfg.exact_cells);
          }
          rec.seconds_classical = seconds_since(t0);
        });
        rec.rc = ensemble_statistics(rec.ensemble.samples);
        rec.point = {control, rec.rc.mean, rec.rc.std_error, rec.ratio.r_tilde, series.size, series.time};
        out.series.back().records.push_back(std::move(rec));
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
    throw;
  }
  const std::vector<CorrespondencePoint> pts = out.points();
  if (pts.size() >= 3) out.fit = fit_points(pts, cfg);
  out.complete = true;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  SweepResult out;
  run_sweep(cfg, out);
  return out;
}

// ---------------------------------------------------------------- output

namespace {

json fit_to_json(const FitResult& f) {
  return {{"amplitude", f.amplitude}, {"kappa", f.kappa},       {"q", f.q},
          {"rss", f.rss},             {"n_points", f.n_points}, {"converged", f.converged},
          {"weighted", f.weighted},   {"free_amplitude", f.free_amplitude}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  out.close();
  if (out.fail()) throw IoError("write failed on " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_outputs(const SweepResult& result) {
  const SweepConfig& cfg = result.config;
  const bool kt = cfg.model == Model::kicked_top;
  const std::string hash = config_hash(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  json series_json = json::array();
  json timing = {{"config_hash", hash}, {"series", json::array()}};
  for (std::size_t s = 0; s < result.series.size(); ++s) {
    const SeriesResult& sr = result.series[s];
    const std::string tag =
        std::string(kt ? "j" : "N") + std::to_string(sr.size) + (kt ? "_nk" : "_tm") + number_tag(sr.time);
    const std::filesystem::path points_path = dir / (hash + "_points_" + tag + ".csv");
    CsvWriter points(points_path, {"control", "x_rc_mean", "x_rc_stderr", "y_rtilde"});
    json controls = json::array();
    json timing_controls = json::array();
    for (std::size_t c = 0; c < sr.records.size(); ++c) {
      const ControlRecord& r = sr.records[c];
      points.row({r.point.control, r.point.x, r.point.x_stderr, r.point.y});
      const std::string ctag = tag + "_c" + std::to_string(c);

      const std::filesystem::path samples_path = dir / (hash + "_rc_" + ctag + ".csv");
      CsvWriter samples(samples_path, {"trajectory_id", "r_c", "m_occupied", "n_points", "m_cells", "p_occ"});
      Index masked_hits = 0;
      for (std::size_t i = 0; i < r.ensemble.samples.size(); ++i) {
        const ChaosMeasureSample& m = r.ensemble.samples[i];
        masked_hits += m.n_masked_hits;
        samples.row({static_cast<std::int64_t>(i), m.r_c, static_cast<std::int64_t>(m.m_occupied),
                     static_cast<std::int64_t>(m.n_points), static_cast<std::int64_t>(m.m_cells), m.p_occ});
      }
      samples.close();

      const DensityTable dist = measure_distribution(r.ensemble.samples, cfg.bins);
      const std::filesystem::path dist_path = dir / (hash + "_dist_" + ctag + ".csv");
      CsvWriter dw(dist_path, {"r_c_mid", "density"});
      for (std::size_t b = 0; b < dist.mids.size(); ++b) dw.row({dist.mids[b], dist.densities[b]});
      dw.close();

      const std::filesystem::path spec_path = dir / (hash + "_spectrum_" + ctag + ".csv");
      CsvWriter sw(spec_path, {"k", kt ? "alpha" : "E_scaled"});
      for (std::size_t k = 0; k < r.spectrum.levels.size(); ++k)
        sw.row({static_cast<std::int64_t>(k + static_cast<std::size_t>(r.shell_first_rank)), r.spectrum.levels[k]});
      sw.close();
      written.insert(written.end(), {samples_path, dist_path, spec_path});

      json cj = {{"control", r.point.control},
                 {"x_rc_mean", r.point.x},
                 {"x_rc_stderr", r.point.x_stderr},
                 {"x_rc_std", r.rc.std_dev},
                 {"y_rtilde", r.point.y},
                 {"mean_r", r.ratio.mean_r},
                 {"n_levels", static_cast<Index>(r.spectrum.levels.size())},
                 {"grid",
                  {{"n_u", r.ensemble.grid.n_u},
                   {"n_v", r.ensemble.grid.n_v},
                   {"m_cells", r.ensemble.grid.m_cells},
                   {"target", r.ensemble.grid.target},
                   {"masked", r.ensemble.grid.masked()},
                   {"axes", {r.ensemble.grid.domain.u_name, r.ensemble.grid.domain.v_name}}}},
                 {"n_points_target", r.ensemble.n_points_target},
                 {"masked_hits", masked_hits},
                 {"files", {samples_path.filename().string(), dist_path.filename().string(),
                            spec_path.filename().string()}}};
      if (!kt) {
        cj["traversal_time"] = r.ensemble.traversal_time;
        cj["shell_first_rank"] = r.shell_first_rank;
      }
      controls.push_back(cj);
      timing_controls.push_back(
          {{"control", r.point.control}, {"quantum_s", r.seconds_quantum}, {"classical_s", r.seconds_classical}});
    }
    points.close();
    written.push_back(points_path);
    series_json.push_back({{kt ? "j" : "n_atoms", sr.size},
                           {kt ? "n_kicks" : "t_max", sr.time},
                           {"points_file", points_path.filename().string()},
                           {"controls", controls}});
    timing["series"].push_back({{"tag", tag}, {"controls", timing_controls}});
  }

  const std::vector<CorrespondencePoint> pts = result.points();
  json summary;
  summary["schema"] = kSummarySchema;
  summary["version"] = CHAOSCORR_VERSION;
  summary["config_hash"] = hash;
  summary["config"] = config_to_json(cfg);
  summary["seeds"] = {{"root", cfg.seed},
                      {"derivation", "splitmix64 chain: control stream = derive(root, [model, series, control]); "
                                     "trajectory i = derive(stream, [i])"}};
  summary["complete"] = result.complete;
  if (!result.error.empty()) summary["error"] = result.error;
  summary["cells"] = {{"rule", cfg.exact_cells ? "M = round(N / ln 2)" : "M = N"},
                      {"masked_to_accessible_region", !kt}};
  summary["series"] = series_json;
  if (result.complete && result.fit.n_points > 0)
    summary["fit"] = fit_to_json(result.fit);
  else if (!result.complete && pts.size() >= 3)
    summary["fit"] = fit_to_json(fit_points(pts, cfg));
  const std::filesystem::path summary_path = dir / (hash + "_summary.json");
  write_json(summary_path, summary);
  const std::filesystem::path timing_path = dir / (hash + "_timing.json");
  write_json(timing_path, timing);
  written.push_back(summary_path);
  written.push_back(timing_path);
  return written;
}

}  // namespace chaoscorr
