#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaoscorr/chaos_measure.hpp"
#include "chaoscorr/dicke_classical.hpp"
#include "chaoscorr/fit.hpp"

namespace chaoscorr {

enum class Model { kicked_top, dicke };

struct KtSweepSettings {
  double beta = 1.0471975511965976;  // pi/3
  std::vector<double> gammas{0.2, 0.5, 0.8, 1.1, 1.4, 1.7, 2.0, 2.3, 2.9, 3.5, 5.0, 7.0};
  std::vector<int> js{200, 400};
  std::vector<Index> n_kicks{1000, 4000};  // paired element-wise with js
  Index n_trajectories = 1600;
};

struct DickeSweepSettings {
  std::vector<double> xis{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.8, 1.0};
  std::vector<int> n_atoms{20, 30};
  std::vector<double> t_max{1000.0, 1500.0};  // paired element-wise with n_atoms
  int n_tr = 200;  // 160 leaves ~1e-3 shell shifts at N = 30, xi = 1
  double omega = 1.0;
  double omega0 = 1.0;
  double e_bar = 1.2;
  double lo_offset = 0.15;
  double hi_offset = 0.02;
  Index n_trajectories = 400;
  double tol = 1e-10;
  double traversal_time = 0.0;  // 0: measure from the ensemble
};

struct SweepConfig {
  Model model = Model::kicked_top;
  KtSweepSettings kt;
  DickeSweepSettings dicke;
  std::uint64_t seed = 20240601;
  int bins = 50;
  bool exact_cells = false;
  bool weighted_fit = false;
  bool free_amplitude = false;
  double amplitude = 1.02;
  std::string output_dir = "out";

  void validate() const;
  /// Number of (size, time) series.
  std::size_t n_series() const;
  const std::vector<double>& controls() const;
};

nlohmann::json config_to_json(const SweepConfig& cfg);
/// Keys present in `j` override `base`; unknown keys are rejected.
SweepConfig config_from_json(const nlohmann::json& j, const SweepConfig& base = {});
SweepConfig load_config(const std::filesystem::path& path, const SweepConfig& base = {});
/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const SweepConfig& cfg);

const char* model_name(Model m);
Model parse_model(const std::string& name);

// Single-control building blocks, shared by the sweep and the CLI subcommands.

/// r-tilde over the full even-sector quasienergy set (circular ratios).
RescaledRatio kt_rtilde(int j, double beta, double gamma, SpectrumSample* spectrum = nullptr);

/// r-tilde over the energy shell of the even-sector Dicke spectrum.
RescaledRatio dicke_rtilde(const DickeParams& params, double e_bar, double lo_offset, double hi_offset,
                           SpectrumSample* spectrum = nullptr, EnergyShell* shell = nullptr);

struct MeasureEnsemble {
  CellGrid grid;
  std::vector<ChaosMeasureSample> samples;
  double traversal_time = 0.0;  // Dicke only
  Index n_points_target = 0;    // N_k, or N_m = round(T_m / T_r)
};

/// R_c for n_trajectories uniform sphere states, each kicked n_kicks times.
/// Trajectory i uses derive_seed(seed, {i}).
MeasureEnsemble kt_measure_ensemble(double beta, double gamma, Index n_kicks, Index n_trajectories,
                                    std::uint64_t seed, bool exact_cells = false);

/// R_c of p = 0 section clouds for shell states at energy e evolved for t_max,
/// on a grid masked to the accessible region.
MeasureEnsemble dicke_measure_ensemble(const DickeFlowParams& params, double e, double t_max, Index n_trajectories,
                                       std::uint64_t seed, double tol = 1e-10, double traversal_time = 0.0,
                                       bool exact_cells = false);

struct CorrespondencePoint {
  double control = 0.0;
  double x = 0.0;  // <R_c>
  double x_stderr = 0.0;
  double y = 0.0;  // r-tilde
  int size = 0;       // j or N
  double time = 0.0;  // N_k or T_m
};

struct ControlRecord {
  CorrespondencePoint point;
  RescaledRatio ratio;
  Index n_ratios = 0;
  SpectrumSample spectrum;  // full quasienergies (KT) or shell levels (Dicke)
  Index shell_first_rank = 0;
  MeasureEnsemble ensemble;
  EnsembleEstimate rc;
  double seconds_quantum = 0.0;
  double seconds_classical = 0.0;
};

struct SeriesResult {
  int size = 0;
  double time = 0.0;
  std::vector<ControlRecord> records;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SeriesResult> series;
  FitResult fit;
  bool complete = false;
  std::string error;  // first failure, empty on success

  std::vector<CorrespondencePoint> points() const;
};

/// Fills `out` control point by control point; on failure the error carries
/// the offending control value and `out` keeps everything finished so far.
void run_sweep(const SweepConfig& cfg, SweepResult& out);
SweepResult run_sweep(const SweepConfig& cfg);

FitResult fit_points(std::span<const CorrespondencePoint> points, const SweepConfig& cfg);

/// Writes points, distribution, sample and spectrum CSVs plus summary and
/// timing JSON under cfg.output_dir; returns the paths written.
std::vector<std::filesystem::path> emit_outputs(const SweepResult& result);

}  // namespace chaoscorr
