// chaoscorr: command-line front end for the kicked-top and Dicke pipelines.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaoscorr/correspondence.hpp"
#include "chaoscorr/csv.hpp"
#include "chaoscorr/kicked_top_classical.hpp"
#include "chaoscorr/kicked_top_quantum.hpp"

using namespace chaoscorr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

// Flags mirroring SweepConfig; only those given on the command line override the config.
struct ConfigFlags {
  std::vector<double> gammas, xis, t_max;
  std::vector<int> js, n_atoms;
  std::vector<Index> n_kicks;
  double beta = 0, e_bar = 0, lo = 0, hi = 0, omega = 0, omega0 = 0, tol = 0, traversal_time = 0, amplitude = 0;
  int n_tr = 0, bins = 0;
  Index trajectories = 0;
  std::string model;
  bool exact_cells = false, weighted = false, free_amplitude = false;
};

void add_config_flags(CLI::App* sub, ConfigFlags& f) {
  sub->add_option("--gammas,--gamma", f.gammas, "kick strengths")->delimiter(',');
  sub->add_option("--beta", f.beta, "precession angle per period");
  sub->add_option("--js,--j", f.js, "spin sizes j (even)")->delimiter(',');
  sub->add_option("--n-kicks", f.n_kicks, "kicks per trajectory N_k, paired with --js")->delimiter(',');
  sub->add_option("--xis,--xi", f.xis, "Dicke couplings")->delimiter(',');
  sub->add_option("--n-atoms,--N", f.n_atoms, "atom numbers N (even)")->delimiter(',');
  sub->add_option("--t-max", f.t_max, "evolution times T_m, paired with --n-atoms")->delimiter(',');
  sub->add_option("--n-tr", f.n_tr, "boson truncation");
  sub->add_option("--omega", f.omega, "boson frequency");
  sub->add_option("--omega0", f.omega0, "atomic splitting");
  sub->add_option("--e-bar", f.e_bar, "shell center / classical energy");
  sub->add_option("--lo-offset", f.lo, "shell offset below e-bar");
  sub->add_option("--hi-offset", f.hi, "shell offset above e-bar");
  sub->add_option("--tol", f.tol, "integrator tolerance");
  sub->add_option("--traversal-time", f.traversal_time, "fixed T_r (0 measures it)");
  sub->add_option("--trajectories", f.trajectories, "ensemble size");
  sub->add_option("--bins", f.bins, "histogram bins");
  sub->add_option("--amplitude", f.amplitude, "fit plateau");
  sub->add_flag("--exact-cells", f.exact_cells, "use M = round(N / ln 2) cells");
  sub->add_flag("--weighted", f.weighted, "weight the fit by 1/stderr^2");
  sub->add_flag("--free-amplitude", f.free_amplitude, "fit the plateau too");
}

bool given(const CLI::App* sub, const char* name) { return sub->count(name) > 0; }

void apply_flags(const CLI::App* sub, const ConfigFlags& f, SweepConfig& c) {
  if (given(sub, "--gammas")) c.kt.gammas = f.gammas;
  if (given(sub, "--beta")) c.kt.beta = f.beta;
  if (given(sub, "--js")) c.kt.js = f.js;
  if (given(sub, "--n-kicks")) c.kt.n_kicks = f.n_kicks;
  if (given(sub, "--xis")) c.dicke.xis = f.xis;
  if (given(sub, "--n-atoms")) c.dicke.n_atoms = f.n_atoms;
  if (given(sub, "--t-max")) c.dicke.t_max = f.t_max;
  if (given(sub, "--n-tr")) c.dicke.n_tr = f.n_tr;
  if (given(sub, "--omega")) c.dicke.omega = f.omega;
  if (given(sub, "--omega0")) c.dicke.omega0 = f.omega0;
  if (given(sub, "--e-bar")) c.dicke.e_bar = f.e_bar;
  if (given(sub, "--lo-offset")) c.dicke.lo_offset = f.lo;
  if (given(sub, "--hi-offset")) c.dicke.hi_offset = f.hi;
  if (given(sub, "--tol")) c.dicke.tol = f.tol;
  if (given(sub, "--traversal-time")) c.dicke.traversal_time = f.traversal_time;
  if (given(sub, "--trajectories")) c.kt.n_trajectories = c.dicke.n_trajectories = f.trajectories;
  if (given(sub, "--bins")) c.bins = f.bins;
  if (given(sub, "--amplitude")) c.amplitude = f.amplitude;
  if (given(sub, "--exact-cells")) c.exact_cells = f.exact_cells;
  if (given(sub, "--weighted")) c.weighted_fit = f.weighted;
  if (given(sub, "--free-amplitude")) c.free_amplitude = f.free_amplitude;
}

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  bool seed_given = false;
  bool out_given = false;
};

SweepConfig resolve(const Globals& g, const CLI::App* sub, const ConfigFlags& f) {
  SweepConfig c;
  if (!g.config_path.empty()) c = load_config(g.config_path, c);
  apply_flags(sub, f, c);
  if (g.seed_given) c.seed = g.seed;
  if (g.out_given) c.output_dir = g.out;
  return c;
}

fs::path out_file(const SweepConfig& c, const std::string& name) { return fs::path(c.output_dir) / name; }

std::string tag(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

void write_density(const fs::path& path, const char* mid_name, const DensityTable& t) {
  CsvWriter w(path, {mid_name, "density"});
  for (std::size_t b = 0; b < t.mids.size(); ++b) w.row({t.mids[b], t.densities[b]});
  w.close();
}

void write_samples(const fs::path& path, const std::vector<ChaosMeasureSample>& samples) {
  CsvWriter w(path, {"trajectory_id", "r_c", "m_occupied", "n_points", "m_cells", "p_occ"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    w.row({static_cast<std::int64_t>(i), s.r_c, static_cast<std::int64_t>(s.m_occupied),
           static_cast<std::int64_t>(s.n_points), static_cast<std::int64_t>(s.m_cells), s.p_occ});
  }
  w.close();
}

// ---------------------------------------------------------------- subcommands

void cmd_kt_quantum(const SweepConfig& c) {
  json summary = json::array();
  for (const int j : c.kt.js) {
    for (const double g : c.kt.gammas) {
      const KtParams params{j, c.kt.beta, g};
      const QuasienergySpectrum spec = quasienergies(build_floquet(params), params);
      RatioOptions opts;
      opts.circular = true;
      const RatioSample ratios = spacing_ratios(spec.alphas, opts);
      const RescaledRatio rr = rescaled_average(ratios);
      const std::string base = "kt_quantum_j" + std::to_string(j) + "_g" + tag(g);
      CsvWriter w(out_file(c, base + "_spectrum.csv"), {"k", "alpha"});
      for (std::size_t k = 0; k < spec.alphas.size(); ++k) w.row({static_cast<std::int64_t>(k), spec.alphas[k]});
      w.close();
      write_density(out_file(c, base + "_ratios.csv"), "r_mid", histogram(ratios.ratios, c.bins, 0.0, 1.0));
      summary.push_back({{"j", j}, {"beta", c.kt.beta}, {"gamma", g}, {"mean_r", rr.mean_r}, {"r_tilde", rr.r_tilde},
                         {"n_levels", spec.alphas.size()}, {"n_dropped_zero", ratios.n_dropped_zero}});
      std::cout << "j=" << j << " gamma=" << g << " <r>=" << rr.mean_r << " r_tilde=" << rr.r_tilde << '\n';
    }
  }
  write_json(out_file(c, "kt_quantum_summary.json"), summary);
}

void cmd_kt_classical(const SweepConfig& c, Index samples, long steps, Index kicks) {
  CsvWriter lw(out_file(c, "kt_lyapunov.csv"), {"gamma", "lambda_mean", "lambda_stderr"});
  for (std::size_t i = 0; i < c.kt.gammas.size(); ++i) {
    const double g = c.kt.gammas[i];
    const EnsembleEstimate e = phase_avg_lyapunov(c.kt.beta, g, samples, steps, derive_seed(c.seed, {1, i}));
    lw.row({g, e.mean, e.std_error});
    std::cout << "gamma=" << g << " Lambda=" << e.mean << " +- " << e.std_error << '\n';

    Rng rng(derive_seed(c.seed, {2, i}));
    const KtTrajectory t = kt_trajectory(random_sphere_state(rng), kicks, c.kt.beta, g);
    CsvWriter tw(out_file(c, "kt_trajectory_g" + tag(g) + ".csv"), {"kick", "phi", "cos_theta"});
    for (Index k = 0; k < t.n_kicks(); ++k)
      tw.row({static_cast<std::int64_t>(k + 1), t.phi[static_cast<std::size_t>(k)],
              t.cos_theta[static_cast<std::size_t>(k)]});
    tw.close();
  }
  lw.close();
}

void cmd_kt_measure(const SweepConfig& c) {
  json summary = json::array();
  for (const Index nk : c.kt.n_kicks) {
    for (std::size_t i = 0; i < c.kt.gammas.size(); ++i) {
      const double g = c.kt.gammas[i];
      const MeasureEnsemble e = kt_measure_ensemble(c.kt.beta, g, nk, c.kt.n_trajectories,
                                                    derive_seed(c.seed, {3, static_cast<std::uint64_t>(nk), i}),
                                                    c.exact_cells);
      const std::string base = "kt_measure_nk" + std::to_string(nk) + "_g" + tag(g);
      write_samples(out_file(c, base + "_rc.csv"), e.samples);
      write_density(out_file(c, base + "_dist.csv"), "r_c_mid", measure_distribution(e.samples, c.bins));
      const EnsembleEstimate st = ensemble_statistics(e.samples);
      summary.push_back({{"gamma", g}, {"n_kicks", nk}, {"rc_mean", st.mean}, {"rc_stderr", st.std_error},
                         {"rc_std", st.std_dev}, {"n_u", e.grid.n_u}, {"n_v", e.grid.n_v}, {"m_cells", e.grid.m_cells}});
      std::cout << "N_k=" << nk << " gamma=" << g << " <R_c>=" << st.mean << " std=" << st.std_dev << '\n';
    }
  }
  write_json(out_file(c, "kt_measure_summary.json"), summary);
}

DickeParams dicke_params(const SweepConfig& c, int n_atoms, double xi) {
  DickeParams p;
  p.n_atoms = n_atoms;
  p.n_tr = c.dicke.n_tr;
  p.omega = c.dicke.omega;
  p.omega0 = c.dicke.omega0;
  p.xi = xi;
  return p;
}

void cmd_dicke_quantum(const SweepConfig& c, bool check_convergence, double factor) {
  json summary = json::array();
  for (const int n : c.dicke.n_atoms) {
    for (const double xi : c.dicke.xis) {
      const DickeParams p = dicke_params(c, n, xi);
      SpectrumSample full = scaled_spectrum(build_dicke_hamiltonian(p), p.j());
      const EnergyShell shell = select_shell(full, c.dicke.e_bar, c.dicke.lo_offset, c.dicke.hi_offset);
      const std::string base = "dicke_quantum_N" + std::to_string(n) + "_xi" + tag(xi);
      CsvWriter w(out_file(c, base + "_spectrum.csv"), {"k", "E_scaled"});
      for (std::size_t k = 0; k < full.levels.size(); ++k) w.row({static_cast<std::int64_t>(k), full.levels[k]});
      w.close();
      std::ostringstream window;
      window << "window [" << format_real(shell.lo) << ", " << format_real(shell.hi) << "] e_center "
             << format_real(shell.e_center) << " first_rank " << shell.first_rank;
      CsvWriter sw(out_file(c, base + "_shell.csv"), {"k", "E_scaled"}, {window.str(), full.provenance});
      for (Index k = 0; k < shell.count(); ++k)
        sw.row({static_cast<std::int64_t>(shell.first_rank + k), shell.levels[static_cast<std::size_t>(k)]});
      sw.close();
      json entry = {{"n_atoms", n}, {"xi", xi}, {"n_tr", p.n_tr}, {"shell_count", shell.count()},
                    {"first_rank", shell.first_rank}};
      if (shell.count() >= 3) {
        const RescaledRatio rr = rescaled_average(spacing_ratios(shell.levels));
        entry["mean_r"] = rr.mean_r;
        entry["r_tilde"] = rr.r_tilde;
        std::cout << "N=" << n << " xi=" << xi << " shell=" << shell.count() << " r_tilde=" << rr.r_tilde << '\n';
      }
      if (check_convergence) {
        const ConvergenceReport rep =
            truncation_convergence(p, c.dicke.e_bar, c.dicke.lo_offset, c.dicke.hi_offset, factor);
        entry["convergence"] = {{"n_tr_refined", rep.n_tr_refined}, {"max_shift", rep.max_shift},
                                {"matched", rep.matched}};
        std::cout << "  N_tr " << rep.n_tr << " -> " << rep.n_tr_refined << " max shift " << rep.max_shift
                  << (rep.matched ? "" : " (shell mismatch)") << '\n';
      }
      summary.push_back(entry);
    }
  }
  write_json(out_file(c, "dicke_quantum_summary.json"), summary);
}

void cmd_dicke_classical(const SweepConfig& c, Index samples, double lyap_time, double section_time) {
  CsvWriter lw(out_file(c, "dicke_lyapunov.csv"), {"xi", "upsilon_mean", "upsilon_stderr"});
  for (std::size_t i = 0; i < c.dicke.xis.size(); ++i) {
    const double xi = c.dicke.xis[i];
    const DickeFlowParams fp{c.dicke.omega, c.dicke.omega0, xi};
    DickeLyapunovOptions lo;
    lo.tol = c.dicke.tol;
    const EnsembleEstimate e =
        phase_avg_lyapunov_dicke(fp, c.dicke.e_bar, samples, lyap_time, derive_seed(c.seed, {4, i}), lo);
    lw.row({xi, e.mean, e.std_error});

    const DickeState s0 = sample_shell(c.dicke.e_bar, fp, 1, derive_seed(c.seed, {5, i})).front();
    const std::vector<SectionCrossing> cr = section_crossings(s0, fp, section_time, c.dicke.tol);
    CsvWriter sw(out_file(c, "dicke_section_xi" + tag(xi) + ".csv"), {"t", "P", "Q", "direction"});
    for (const auto& x : cr) sw.row({x.t, x.P, x.Q, static_cast<std::int64_t>(x.direction)});
    sw.close();
    std::cout << "xi=" << xi << " Upsilon=" << e.mean << " +- " << e.std_error << " T_r=" << mean_traversal_time(cr)
              << '\n';
  }
  lw.close();
}

void cmd_dicke_measure(const SweepConfig& c) {
  json summary = json::array();
  for (const double tm : c.dicke.t_max) {
    for (std::size_t i = 0; i < c.dicke.xis.size(); ++i) {
      const double xi = c.dicke.xis[i];
      const DickeFlowParams fp{c.dicke.omega, c.dicke.omega0, xi};
      const MeasureEnsemble e = dicke_measure_ensemble(
          fp, c.dicke.e_bar, tm, c.dicke.n_trajectories, derive_seed(c.seed, {6, static_cast<std::uint64_t>(tm), i}),
          c.dicke.tol, c.dicke.traversal_time, c.exact_cells);
      const std::string base = "dicke_measure_tm" + tag(tm) + "_xi" + tag(xi);
      write_samples(out_file(c, base + "_rc.csv"), e.samples);
      write_density(out_file(c, base + "_dist.csv"), "r_c_mid", measure_distribution(e.samples, c.bins));
      const EnsembleEstimate st = ensemble_statistics(e.samples);
      summary.push_back({{"xi", xi}, {"t_max", tm}, {"traversal_time", e.traversal_time},
                         {"n_points_target", e.n_points_target}, {"rc_mean", st.mean}, {"rc_stderr", st.std_error},
                         {"rc_std", st.std_dev}, {"m_cells", e.grid.m_cells}, {"masked", true}});
      std::cout << "T_m=" << tm << " xi=" << xi << " T_r=" << e.traversal_time << " <R_c>=" << st.mean << '\n';
    }
  }
  write_json(out_file(c, "dicke_measure_summary.json"), summary);
}

int cmd_sweep(const SweepConfig& c) {
  SweepResult result;
  try {
    run_sweep(c, result);
  } catch (...) {
    if (!result.series.empty()) emit_outputs(result);
    throw;
  }
  for (const auto& p : emit_outputs(result)) std::cout << p.string() << '\n';
  const FitResult& f = result.fit;
  std::cout << "fit: kappa=" << f.kappa << " q=" << f.q << " amplitude=" << f.amplitude << " rss=" << f.rss
            << (f.converged ? "" : " (not converged)") << '\n';
  return kOk;
}

void cmd_fit(const SweepConfig& c, const std::vector<std::string>& inputs) {
  std::vector<CorrespondencePoint> pts;
  for (const auto& in : inputs) {
    const CsvTable t = read_csv(in);
    const std::vector<std::string> want{"control", "x_rc_mean", "x_rc_stderr", "y_rtilde"};
    if (t.header != want) throw IoError(in + ": expected header control,x_rc_mean,x_rc_stderr,y_rtilde");
    for (const auto& r : t.rows) pts.push_back({r[0], r[1], r[2], r[3], 0, 0.0});
  }
  const FitResult f = fit_points(pts, c);
  const json j = {{"amplitude", f.amplitude}, {"kappa", f.kappa},       {"q", f.q},
                  {"rss", f.rss},             {"n_points", f.n_points}, {"converged", f.converged},
                  {"weighted", f.weighted},   {"free_amplitude", f.free_amplitude}, {"inputs", inputs}};
  write_json(out_file(c, "fit.json"), j);
  std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical chaos correspondence for the kicked top and the Dicke model"};
  app.set_version_flag("--version", std::string(CHAOSCORR_VERSION));
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "root seed")->group("Common");
  auto* out_opt = app.add_option("--out", g.out, "output directory")->group("Common");
  app.add_option("--config", g.config_path, "JSON config file (overrides defaults)")->group("Common");
  app.fallthrough();

  ConfigFlags f;
  auto* kt_q = app.add_subcommand("kt-quantum", "quasienergies and r-tilde over --gammas and --js");
  auto* kt_c = app.add_subcommand("kt-classical", "phase-averaged Lyapunov exponent and sample trajectories");
  auto* kt_m = app.add_subcommand("kt-measure", "R_c ensembles for each N_k in --n-kicks");
  auto* dq = app.add_subcommand("dicke-quantum", "even-sector spectrum, shell and r-tilde");
  auto* dc = app.add_subcommand("dicke-classical", "phase-averaged Lyapunov exponent and a Poincare section");
  auto* dm = app.add_subcommand("dicke-measure", "R_c ensembles for each T_m in --t-max");
  auto* sw = app.add_subcommand("sweep", "paired quantum/classical sweep and correspondence fit");
  auto* ft = app.add_subcommand("fit", "fit y = A - exp(-q x^kappa) to points CSVs");
  for (auto* s : {kt_q, kt_c, kt_m, dq, dc, dm, sw, ft}) add_config_flags(s, f);

  Index lyap_samples = 2000;
  long lyap_steps = 20000;
  Index traj_kicks = 1000;
  kt_c->add_option("--samples", lyap_samples, "Lyapunov ensemble size");
  kt_c->add_option("--steps", lyap_steps, "kicks per Lyapunov estimate");
  kt_c->add_option("--trajectory-kicks", traj_kicks, "kicks in the exported trajectory");

  bool check_convergence = false;
  double conv_factor = 1.25;
  dq->add_flag("--check-convergence", check_convergence, "rebuild at ceil(factor * n_tr) and compare shells");
  dq->add_option("--convergence-factor", conv_factor, "truncation refinement factor");

  Index dicke_samples = 500;
  double dicke_lyap_time = 1000.0;
  double section_time = 3000.0;
  dc->add_option("--samples", dicke_samples, "Lyapunov ensemble size");
  dc->add_option("--lyapunov-time", dicke_lyap_time, "t_max of each Lyapunov estimate");
  dc->add_option("--section-time", section_time, "evolution time of the exported section");

  std::string model = "kicked_top";
  sw->add_option("--model", model, "kicked_top or dicke");

  std::vector<std::string> inputs;
  ft->add_option("inputs", inputs, "points CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  g.seed_given = seed_opt->count() > 0;
  g.out_given = out_opt->count() > 0;

  try {
    CLI::App* sub = app.get_subcommands().front();
    SweepConfig c = resolve(g, sub, f);
    if (sub == sw && sw->count("--model") > 0) c.model = parse_model(model);
    if (sub == kt_q) cmd_kt_quantum(c);
    else if (sub == kt_c) cmd_kt_classical(c, lyap_samples, lyap_steps, traj_kicks);
    else if (sub == kt_m) cmd_kt_measure(c);
    else if (sub == dq) cmd_dicke_quantum(c, check_convergence, conv_factor);
    else if (sub == dc) cmd_dicke_classical(c, dicke_samples, dicke_lyap_time, section_time);
    else if (sub == dm) cmd_dicke_measure(c);
    else if (sub == sw) return cmd_sweep(c);
    else if (sub == ft) cmd_fit(c, inputs);
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O failure: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O failure: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
