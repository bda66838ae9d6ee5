#pragma once

// Configuration, report persistence and the fwlab command line. This is the
// only part of the library that touches files.
//
// Config text is line oriented: "key = value", "[section]" headers, '#' or
// ';' comments. A dotted key ("grid.N") is absolute; a bare key is read in
// the current section.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fwlab/experiments.hpp"
#include "fwlab/fw_dynamics.hpp"
#include "fwlab/littlewood_paley.hpp"
#include "fwlab/spectral_core.hpp"

namespace fwlab {

inline constexpr int kReportSchema = 1;

struct GridSection {
  double L = 64.0;
  std::size_t N = 65536;
};

struct SolverSection {
  ModelKind model = ModelKind::fw;
  double dt = 0.0;  ///< 0 = automatic
  double T = 1.0;
  double cfl_safety = 0.25;
  double blowup_factor = 100.0;
  double blowup_threshold = 0.0;  ///< 0 = blowup_factor times the initial norm
};

/// Initial datum for solve, besov-norm, decompose and the single-field experiments.
struct FieldSection {
  std::string kind;  ///< empty = experiment default
  int n = -1;        ///< sequence index; < 0 = experiment default
  std::uint64_t seed = 1;
  double value = 1.0;  ///< amplitude for "constant"
  int smoothing = 3;   ///< low-pass index for "peakon-smoothed"
};

struct ExperimentSection {
  std::string name;
  std::vector<int> n_range;        ///< empty = default
  std::vector<double> t_list;      ///< empty = default
  std::vector<int> N_list;         ///< continuity truncation indices; empty = default
  std::vector<double> sigma_list;  ///< empty = default
  std::uint64_t seed = 20231;
  int pair_count = 20;
  std::vector<double> perturbation_scales;  ///< empty = default
  double t_eval = 0.1;
  int snapshots = 11;
  int corpus_size = 100;
  double bound = 50.0;
};

struct NormSection {
  double s = 1.0;
  double p = std::numeric_limits<double>::infinity();
  double r = 1.0;
};

struct RunConfig {
  GridSection grid;
  SolverSection solver;
  FieldSection field;
  ExperimentSection experiment;
  NormSection norm;
  std::string output_dir = ".";
  unsigned threads = 0;  ///< 0 = hardware concurrency

  GridSpec grid_spec() const { return GridSpec(grid.L, grid.N); }
  SolverConfig solver_config() const;

  /// Every key with its resolved value, in a fixed order. Feeding the echo
  /// back through parse_config reproduces the same configuration.
  std::vector<std::pair<std::string, std::string>> echo() const;
  std::string to_text() const;
};

/// Holds every problem found in a config, each prefixed with its line number
/// (or "--set" for overrides).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates. Overrides are "key=value" strings applied after the
/// text. experiment_name, when non-empty, fills experiment.name before the
/// defaults are resolved.
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {},
                       std::string_view experiment_name = {});

/// Builds the configured initial field on the configured grid.
Field build_field(const RunConfig& cfg);
std::string describe_field(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Reports

struct ReportRecord {
  int schema = kReportSchema;
  std::vector<std::pair<std::string, std::string>> config;
  ExperimentReport report;
};

std::string csv_text(const ReportRecord& record);
std::string json_text(const ReportRecord& record);
ReportRecord parse_json(std::string_view text);

/// Write to path, throwing std::runtime_error naming the path on failure.
void write_csv(const ReportRecord& record, const std::filesystem::path& path);
void write_json(const ReportRecord& record, const std::filesystem::path& path);
ReportRecord read_json(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Command line

enum ExitStatus : int { kExitPass = 0, kExitVerdictFail = 1, kExitUsage = 2, kExitBlowUp = 3 };

/// args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

}  // namespace fwlab
