// Batch experiment drivers: each one turns an ExperimentSpec into a CSV
// report with a deterministic metadata header.  Same spec + seed means
// byte-identical output except for the trailing wall_time column.
//
// Every inequality a driver asserts is recomputable from the columns of the
// row it was asserted on; cross-row checks (monotonicity) use adjacent rows
// of the same file.  Violations are counted, never silently dropped.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsilab/errors.hpp"
#include "lsilab/estimator.hpp"
#include "lsilab/grid_measure.hpp"

namespace lsilab {

struct InvalidSpec final : Error {
  using Error::Error;
};

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;
};

// families: gaussian (mean, variance), uniform (lo, hi), rademacher
// (lattice field of the spec), mixture (components), file (path to a
// measure CSV).  Fields outside the family are ignored.
struct BaseMeasureSpec {
  std::string family = "gaussian";
  double mean = 0.0;
  double variance = 1.0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<MixtureComponent> components;
  std::string path;
};

struct GridSpec {
  double lo = -8.0;
  double hi = 8.0;
  std::size_t m = 2049;
};

// One experiment = kind + parameters.  default_spec(kind) fills the values
// the acceptance runs use; a JSON config overrides field by field and CLI
// flags override the config.
struct ExperimentSpec {
  std::string kind;
  BaseMeasureSpec base;
  std::vector<int> n_range;
  GridSpec grid;
  EstimatorOptions estimator;
  std::uint64_t seed = 42;
  double delta = 1.0;
  std::size_t trials = 500;
  double herbst_c = 1.0;
  std::vector<double> t_values;
  int lattice = 64;
  std::string values_file;
  std::string output_dir = ".";
};

[[nodiscard]] ExperimentSpec default_spec(const std::string& kind);

// Parses a JSON object mirroring ExperimentSpec.  Unknown keys, malformed
// JSON and type mismatches all raise InvalidSpec.  `kind` comes from the
// caller (the CLI subcommand); a "kind" key in the JSON must agree.
[[nodiscard]] ExperimentSpec spec_from_json(const std::string& json_text, const std::string& kind);

// Raises InvalidSpec unless the spec satisfies every structural invariant
// of its kind (nonempty n_range, grid m >= 3, positive delta, ...).
void validate_spec(const ExperimentSpec& spec);

// Compact single-line JSON with a fixed key order; output_dir is excluded
// so moving a run does not change its identity.  The hash is 64-bit FNV-1a
// over exactly this string, printed as 16 hex digits.
[[nodiscard]] std::string canonical_spec_json(const ExperimentSpec& spec);
[[nodiscard]] std::string spec_hash(const ExperimentSpec& spec);

[[nodiscard]] GridMeasure build_base_measure(const ExperimentSpec& spec);

struct ExperimentReport {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;   // formatted cells
  std::vector<std::string> metadata;            // "# metadata: ..." lines
  std::size_t violations = 0;
  std::string csv_path;
  std::vector<std::string> extra_files;         // plot scripts, reproducers
};

[[nodiscard]] ExperimentReport run_clt_monotone(const ExperimentSpec& spec);
[[nodiscard]] ExperimentReport run_verify_subadd(const ExperimentSpec& spec);
[[nodiscard]] ExperimentReport run_regularize(const ExperimentSpec& spec);
[[nodiscard]] ExperimentReport run_herbst(const ExperimentSpec& spec);
[[nodiscard]] ExperimentReport run_shearer_fuzz(const ExperimentSpec& spec);
[[nodiscard]] ExperimentReport run_optimal_cover(const ExperimentSpec& spec);
[[nodiscard]] ExperimentReport run_estimate(const ExperimentSpec& spec);

// Dispatch on spec.kind.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentSpec& spec);

// %.17g, the round-trip-exact cell format used across all reports.
[[nodiscard]] std::string format_cell(double v);

}  // namespace lsilab
