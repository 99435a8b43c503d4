#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "bvs/errors.hpp"
#include "bvs/types.hpp"

namespace bvs {

enum class OutputFormat { Tsv, Json };

// Everything one invocation needs: where the data lives, which columns play
// which role, the sampler settings, and how results are emitted.
struct RunSpec {
  std::string inputPath;
  std::string responseColumn;
  std::optional<std::string> totalCountColumn;
  Likelihood likelihood = Likelihood::Linear;
  // negative-binomial log-mean offset; unset resolves to
  // max(log(mean(Y)), log(1e-3))
  std::optional<double> psi0;
  SamplerConfig config;    // h left unset resolves to min(5 / P, 0.5)
  bool standardize = false;
  int chains = 1;          // seeded seed, seed + 1, ...; accumulators merge
  bool trace = false;      // json output carries per-iteration diagnostics
  std::string outputPath;  // empty writes to the stream handed to run()
  OutputFormat format = OutputFormat::Tsv;
};

// Parses a delimited text file into a dataset. The delimiter is a tab when
// the header row contains one, a comma otherwise. The response column and the
// optional total-count column are pulled out by name; every remaining column
// becomes a covariate, in header order.
Dataset ingest_csv(const std::string& path, const std::string& responseColumn,
                   const std::optional<std::string>& totalCountColumn = {},
                   Likelihood kind = Likelihood::Linear, double psi0 = 0.0);

// Centers and scales every covariate column to zero mean and unit sample
// standard deviation. Throws DomainError on a constant column.
void standardize_columns(Dataset& data);

// Writes the dataset in the shape ingest_csv reads: covariate columns by
// name, the response as "y", counts as "c" when present. Values carry enough
// digits that ingest_csv(write_csv(data)) reproduces the dataset exactly.
void write_csv(const Dataset& data, std::ostream& os);

// Process exit code for a library error: configuration problems 2, data
// problems 3, numerical failures 4.
int exit_code_for(const Error& e);

// Runs the configured chains, merges them, and writes the per-covariate
// results table plus a summary block. Returns the exit code; failures print
// one diagnostic line to diag.
int run(const RunSpec& spec, std::ostream& out, std::ostream& diag);

// Writes the exact posterior inclusion probabilities instead of running a
// chain: full enumeration for the linear likelihood, per-model quadrature
// (with the negative-binomial dispersion held at 1) for counts.
int emit_oracle(const RunSpec& spec, std::ostream& out, std::ostream& diag);

}  // namespace bvs
