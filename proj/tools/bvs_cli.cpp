#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bvs/io.hpp"

namespace {

// Flag values that need a post-parse step before they fit RunSpec.
struct PendingFlags {
  std::optional<double> hAlpha;
  std::optional<double> hBeta;
};

void add_data_flags(CLI::App* cmd, bvs::RunSpec& spec) {
  cmd->add_option("input", spec.inputPath, "input csv/tsv file with a header row")
      ->required();
  cmd->add_option("--response", spec.responseColumn, "response column name")
      ->required();
  cmd->add_option("--total-count", spec.totalCountColumn,
                  "binomial total-count column (omitted: one trial per row)");
  const std::map<std::string, bvs::Likelihood> likelihoods{
      {"linear", bvs::Likelihood::Linear},
      {"binomial", bvs::Likelihood::Binomial},
      {"negbin", bvs::Likelihood::NegBinomial}};
  cmd->add_option("--likelihood", spec.likelihood, "observation model")
      ->transform(CLI::CheckedTransformer(likelihoods, CLI::ignore_case))
      ->default_str("linear");
  cmd->add_flag("--standardize", spec.standardize,
                "center and scale covariates to zero mean, unit sd");
  cmd->add_option("--psi0", spec.psi0,
                  "negbin log-mean offset (default: log of the mean response)");
  cmd->add_option("--output", spec.outputPath, "output path (default: stdout)");
  const std::map<std::string, bvs::OutputFormat> formats{
      {"tsv", bvs::OutputFormat::Tsv}, {"json", bvs::OutputFormat::Json}};
  cmd->add_option("--format", spec.format, "output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
      ->default_str("tsv");
}

void add_prior_flags(CLI::App* cmd, bvs::RunSpec& spec, PendingFlags& pending) {
  auto* h = cmd->add_option("--h", spec.config.h,
                            "prior inclusion probability (default: min(5/P, 0.5))");
  auto* ha = cmd->add_option("--h-alpha", pending.hAlpha,
                             "Beta prior shape alpha for inferring h");
  auto* hb = cmd->add_option("--h-beta", pending.hBeta,
                             "Beta prior shape beta for inferring h");
  ha->needs(hb);
  hb->needs(ha);
  ha->excludes(h);
  cmd->add_option("--tau", spec.config.tau, "coefficient prior precision")
      ->capture_default_str();
  cmd->add_option("--tau-bias", spec.config.tauBias,
                  "bias-column prior precision (default: tau)");
}

void add_sampler_flags(CLI::App* cmd, bvs::RunSpec& spec) {
  cmd->add_option("--epsilon", spec.config.epsilon, "exploration constant")
      ->capture_default_str();
  cmd->add_option("--xi", spec.config.xi,
                  "fixed untempered-move mass (default: adapted)");
  cmd->add_option("--f-omega", spec.config.fOmega,
                  "target fraction of untempered moves")
      ->capture_default_str();
  cmd->add_option("--subset-size", spec.config.subsetSize,
                  "sweep a random subset of this size instead of all covariates");
  cmd->add_option("--anchor-size", spec.config.anchorSize,
                  "anchored members of each subset")
      ->capture_default_str();
  cmd->add_option("--iterations", spec.config.iterations, "total iterations")
      ->capture_default_str();
  cmd->add_option("--burn-in", spec.config.burnIn, "discarded prefix")
      ->capture_default_str();
  cmd->add_option("--seed", spec.config.seed, "rng seed")->capture_default_str();
  const std::map<std::string, bvs::Variant> variants{{"wtgs", bvs::Variant::Wtgs},
                                                     {"tgs", bvs::Variant::Tgs},
                                                     {"wgs", bvs::Variant::Wgs}};
  cmd->add_option("--variant", spec.config.variant, "chain flavor")
      ->transform(CLI::CheckedTransformer(variants, CLI::ignore_case))
      ->default_str("wtgs");
  cmd->add_option("--nu-rw-scale", spec.config.nuRwScale,
                  "negbin log-dispersion random-walk step")
      ->capture_default_str();
  cmd->add_option("--chains", spec.chains, "independent chains to merge")
      ->capture_default_str();
  cmd->add_flag("--trace", spec.trace,
                "include per-iteration diagnostics (json output only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian variable selection by weighted tempered Gibbs sampling"};
  app.require_subcommand(1);
  // the prior-inclusion flag is --h, so help must not claim -h
  app.set_help_flag("--help", "print help");

  bvs::RunSpec spec;
  spec.config.iterations = 10000;
  spec.config.burnIn = 2000;
  PendingFlags pending;

  CLI::App* runCmd =
      app.add_subcommand("run", "run a sampler and write PIP estimates");
  runCmd->set_help_flag("--help", "print help");
  add_data_flags(runCmd, spec);
  add_prior_flags(runCmd, spec, pending);
  add_sampler_flags(runCmd, spec);

  CLI::App* oracleCmd = app.add_subcommand(
      "oracle", "write exact PIPs by enumeration (linear) or quadrature (counts)");
  oracleCmd->set_help_flag("--help", "print help");
  add_data_flags(oracleCmd, spec);
  add_prior_flags(oracleCmd, spec, pending);

  CLI11_PARSE(app, argc, argv);

  if (pending.hAlpha) spec.config.hBeta = bvs::BetaPrior{*pending.hAlpha, *pending.hBeta};

  if (runCmd->parsed()) return bvs::run(spec, std::cout, std::cerr);
  return bvs::emit_oracle(spec, std::cout, std::cerr);
}
