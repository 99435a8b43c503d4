#include "bvs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bvs/estimators.hpp"
#include "bvs/oracle.hpp"
#include "bvs/pg_chain.hpp"
#include "bvs/rng.hpp"
#include "bvs/subset.hpp"
#include "bvs/wtgs.hpp"

namespace bvs {

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_cells(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(trimmed(line.substr(start)));
      return out;
    }
    out.push_back(trimmed(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_cell(const std::string& cell, long lineNo, const std::string& column) {
  const std::string where =
      "line " + std::to_string(lineNo) + ", column '" + column + "'";
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(where + ": cannot parse '" + cell + "' as a number");
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite value '" + cell + "'");
  return v;
}

std::string covariate_name(const Dataset& data, int j) {
  if (!data.names.empty()) return data.names[static_cast<std::size_t>(j)];
  return "x" + std::to_string(j + 1);
}

const char* likelihood_name(Likelihood k) {
  switch (k) {
    case Likelihood::Linear: return "linear";
    case Likelihood::Binomial: return "binomial";
    case Likelihood::NegBinomial: return "negbin";
  }
  return "?";
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Wtgs: return "wtgs";
    case Variant::Tgs: return "tgs";
    case Variant::Wgs: return "wgs";
  }
  return "?";
}

double weighted_mean(const std::vector<double>& x, const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    num += w[t] * x[t];
    den += w[t];
  }
  return num / den;
}

double weighted_sd(const std::vector<double>& x, const std::vector<double>& w) {
  const double mu = weighted_mean(x, w);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    num += w[t] * (x[t] - mu) * (x[t] - mu);
    den += w[t];
  }
  return std::sqrt(num / den);
}

// Smallest value whose cumulative weight reaches q of the total.
double weighted_quantile(std::vector<std::pair<double, double>> vw, double q) {
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& p : vw) total += p.second;
  double cum = 0.0;
  for (const auto& p : vw) {
    cum += p.second;
    if (cum >= q * total) return p.first;
  }
  return vw.back().first;
}

// One chain's outputs, normalized across the linear and count runners.
struct ChainRun {
  explicit ChainRun(LinearChainOutput&& o)
      : acc(std::move(o.acc)),
        samples(std::move(o.samples)),
        hDraws(std::move(o.hDraws)),
        untempered(o.untemperedFraction),
        xiFinal(o.xiFinal),
        anchor(std::move(o.anchorFinal)) {}

  explicit ChainRun(CountChainOutput&& o)
      : acc(std::move(o.acc)),
        samples(std::move(o.samples)),
        hDraws(std::move(o.hDraws)),
        nuDraws(std::move(o.nuDraws)),
        untempered(o.untemperedFraction),
        xiFinal(o.xiFinal),
        omegaAccept(o.omegaAcceptRate),
        hasOmega(true),
        anchor(std::move(o.anchorFinal)) {}

  WeightedAccumulator acc;
  SampleTrace samples;
  std::vector<double> hDraws;
  std::vector<double> nuDraws;
  double untempered = 0.0;
  double xiFinal = 0.0;
  double omegaAccept = 0.0;
  bool hasOmega = false;
  std::vector<int> anchor;
};

ChainRun run_chain(const Dataset& data, const RunSpec& spec, int j) {
  SamplerConfig cfg = spec.config;
  cfg.seed = spec.config.seed + static_cast<std::uint64_t>(j);
  Rng rng(cfg.seed);
  if (spec.likelihood == Likelihood::Linear) {
    if (cfg.subsetSize) return ChainRun(subset_wtgs_run(data, cfg, rng));
    if (cfg.hBeta) return ChainRun(wtgs_run_infer_h(data, cfg, rng));
    return ChainRun(wtgs_run(data, cfg, rng));
  }
  if (cfg.subsetSize) return ChainRun(subset_pg_wtgs_run(data, cfg, rng));
  return ChainRun(pg_wtgs_run(data, cfg, rng));
}

// Outputs of all chains merged in chain order.
struct Merged {
  explicit Merged(ChainRun&& first) : acc(std::move(first.acc)) {
    absorb_trace(first);
    untempered = first.untempered;
    xiFinal = first.xiFinal;
    omegaAccept = first.omegaAccept;
    hasOmega = first.hasOmega;
    anchor = std::move(first.anchor);
    chains = 1;
  }

  void add(ChainRun&& next) {
    acc.merge(next.acc);
    absorb_trace(next);
    untempered += next.untempered;
    xiFinal += next.xiFinal;
    omegaAccept += next.omegaAccept;
    ++chains;
  }

  void finish() {
    untempered /= chains;
    xiFinal /= chains;
    omegaAccept /= chains;
  }

  WeightedAccumulator acc;
  std::vector<double> weights;  // aligned with hDraws / nuDraws when present
  std::vector<int> modelSizes;
  std::vector<double> hDraws;
  std::vector<double> nuDraws;
  double untempered = 0.0, xiFinal = 0.0, omegaAccept = 0.0;
  bool hasOmega = false;
  std::vector<int> anchor;  // first chain's frozen anchor
  int chains = 0;

 private:
  void absorb_trace(ChainRun& r) {
    for (const WeightedSample& s : r.samples) {
      weights.push_back(s.weight);
      modelSizes.push_back(static_cast<int>(s.active.size()));
    }
    hDraws.insert(hDraws.end(), r.hDraws.begin(), r.hDraws.end());
    nuDraws.insert(nuDraws.end(), r.nuDraws.begin(), r.nuDraws.end());
  }
};

Merged run_all_chains(const Dataset& data, const RunSpec& spec) {
  const int k = spec.chains;
  if (k < 1) throw ConfigError("chains must be at least 1");
  std::vector<std::optional<ChainRun>> slots(static_cast<std::size_t>(k));
  if (k == 1) {
    slots[0].emplace(run_chain(data, spec, 0));
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      pool.emplace_back([&, j] {
        try {
          slots[static_cast<std::size_t>(j)].emplace(run_chain(data, spec, j));
        } catch (...) {
          errors[static_cast<std::size_t>(j)] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }
  Merged merged(std::move(*slots[0]));
  for (int j = 1; j < k; ++j) merged.add(std::move(*slots[static_cast<std::size_t>(j)]));
  merged.finish();
  return merged;
}

// Fills in the defaults that depend on the data: h = min(5 / P, 0.5) when
// neither h nor an h prior was given, per-row Bernoulli totals for a binomial
// run without a total-count column, and the negbin offset at the log of the
// mean response.
void resolve_defaults(Dataset& data, RunSpec& spec) {
  if (spec.likelihood == Likelihood::Binomial && !spec.totalCountColumn &&
      data.C.size() == 0)
    data.C = Eigen::VectorXd::Ones(data.n());
  if (spec.likelihood == Likelihood::NegBinomial && !spec.psi0)
    spec.psi0 = std::max(std::log(data.Y.mean()), std::log(1e-3));
  data.psi0 = spec.psi0.value_or(0.0);
  if (!spec.config.h && !spec.config.hBeta)
    spec.config.h = std::min(5.0 / data.p(), 0.5);
}

bool has_refresh_slot(const RunSpec& spec) {
  return spec.likelihood != Likelihood::Linear || spec.config.hBeta.has_value();
}

std::string anchor_list(const std::vector<int>& anchor) {
  if (anchor.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < anchor.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(anchor[k]);
  }
  return out;
}

void emit_tsv(std::ostream& os, const Dataset& data, const RunSpec& spec,
              const Merged& m) {
  const SamplerConfig& cfg = spec.config;
  os << "# rows\t" << data.n() << "\n";
  os << "# covariates\t" << data.p() << "\n";
  os << "# likelihood\t" << likelihood_name(spec.likelihood) << "\n";
  os << "# variant\t" << variant_name(cfg.variant) << "\n";
  os << "# chains\t" << spec.chains << "\n";
  os << "# seed\t" << cfg.seed << "\n";
  os << "# iterations\t" << cfg.iterations << "\n";
  os << "# burn_in\t" << cfg.burnIn << "\n";
  os << "# retained\t" << m.acc.count() << "\n";
  if (cfg.h) {
    os << "# h\t" << fmt(*cfg.h) << "\n";
  } else {
    os << "# h_alpha\t" << fmt(cfg.hBeta->alpha) << "\n";
    os << "# h_beta\t" << fmt(cfg.hBeta->beta) << "\n";
  }
  os << "# tau\t" << fmt(cfg.tau) << "\n";
  os << "# tau_bias\t" << fmt(cfg.tau_bias()) << "\n";
  os << "# epsilon\t" << fmt(cfg.epsilon) << "\n";
  if (cfg.xi) os << "# xi\t" << fmt(*cfg.xi) << "\n";
  os << "# f_omega\t" << fmt(cfg.fOmega) << "\n";
  if (cfg.subsetSize) {
    os << "# subset_size\t" << *cfg.subsetSize << "\n";
    os << "# anchor_size\t" << cfg.anchorSize << "\n";
  }
  os << "# standardize\t" << (spec.standardize ? 1 : 0) << "\n";
  if (spec.likelihood == Likelihood::NegBinomial) {
    os << "# psi0\t" << fmt(spec.psi0.value_or(0.0)) << "\n";
    os << "# nu_rw_scale\t" << fmt(cfg.nuRwScale) << "\n";
  }
  os << "# weight_variance\t" << fmt(m.acc.weight_variance()) << "\n";
  os << "# ess\t" << fmt(m.acc.effective_sample_size()) << "\n";
  if (m.hasOmega) os << "# omega_accept\t" << fmt(m.omegaAccept) << "\n";
  if (has_refresh_slot(spec)) {
    os << "# untempered_fraction\t" << fmt(m.untempered) << "\n";
    os << "# xi_final\t" << fmt(m.xiFinal) << "\n";
  }
  if (!m.hDraws.empty()) {
    std::vector<std::pair<double, double>> vw(m.hDraws.size());
    for (std::size_t t = 0; t < m.hDraws.size(); ++t)
      vw[t] = {m.hDraws[t], m.weights[t]};
    os << "# h_mean\t" << fmt(weighted_mean(m.hDraws, m.weights)) << "\n";
    os << "# h_q05\t" << fmt(weighted_quantile(vw, 0.05)) << "\n";
    os << "# h_q50\t" << fmt(weighted_quantile(vw, 0.50)) << "\n";
    os << "# h_q95\t" << fmt(weighted_quantile(vw, 0.95)) << "\n";
  }
  if (!m.nuDraws.empty()) {
    os << "# nu_mean\t" << fmt(weighted_mean(m.nuDraws, m.weights)) << "\n";
    os << "# nu_sd\t" << fmt(weighted_sd(m.nuDraws, m.weights)) << "\n";
  }
  if (cfg.subsetSize) os << "# anchor\t" << anchor_list(m.anchor) << "\n";

  const Eigen::VectorXd pips = m.acc.pip_partial_rb();
  std::vector<double> coefMean, coefSd;
  m.acc.coef_summaries(coefMean, coefSd);
  os << "name\tpip\tcoef_mean\tcoef_sd\n";
  for (int j = 0; j < data.p(); ++j) {
    os << covariate_name(data, j) << '\t' << fmt(pips(j)) << '\t'
       << fmt(coefMean[static_cast<std::size_t>(j)]) << '\t'
       << fmt(coefSd[static_cast<std::size_t>(j)]) << '\n';
  }
}

void emit_json(std::ostream& os, const Dataset& data, const RunSpec& spec,
               const Merged& m) {
  const SamplerConfig& cfg = spec.config;
  nlohmann::json root;

  nlohmann::json config;
  config["likelihood"] = likelihood_name(spec.likelihood);
  config["variant"] = variant_name(cfg.variant);
  config["chains"] = spec.chains;
  config["seed"] = cfg.seed;
  config["iterations"] = cfg.iterations;
  config["burn_in"] = cfg.burnIn;
  if (cfg.h) {
    config["h"] = *cfg.h;
  } else {
    config["h_alpha"] = cfg.hBeta->alpha;
    config["h_beta"] = cfg.hBeta->beta;
  }
  config["tau"] = cfg.tau;
  config["tau_bias"] = cfg.tau_bias();
  config["epsilon"] = cfg.epsilon;
  if (cfg.xi) config["xi"] = *cfg.xi;
  config["f_omega"] = cfg.fOmega;
  if (cfg.subsetSize) {
    config["subset_size"] = *cfg.subsetSize;
    config["anchor_size"] = cfg.anchorSize;
  }
  config["standardize"] = spec.standardize;
  if (spec.likelihood == Likelihood::NegBinomial) {
    config["psi0"] = spec.psi0.value_or(0.0);
    config["nu_rw_scale"] = cfg.nuRwScale;
  }
  root["config"] = config;

  nlohmann::json summary;
  summary["rows"] = data.n();
  summary["covariates"] = data.p();
  summary["retained"] = m.acc.count();
  summary["weight_variance"] = m.acc.weight_variance();
  summary["ess"] = m.acc.effective_sample_size();
  if (m.hasOmega) summary["omega_accept"] = m.omegaAccept;
  if (has_refresh_slot(spec)) {
    summary["untempered_fraction"] = m.untempered;
    summary["xi_final"] = m.xiFinal;
  }
  if (!m.hDraws.empty()) {
    std::vector<std::pair<double, double>> vw(m.hDraws.size());
    for (std::size_t t = 0; t < m.hDraws.size(); ++t)
      vw[t] = {m.hDraws[t], m.weights[t]};
    summary["h_mean"] = weighted_mean(m.hDraws, m.weights);
    summary["h_q05"] = weighted_quantile(vw, 0.05);
    summary["h_q50"] = weighted_quantile(vw, 0.50);
    summary["h_q95"] = weighted_quantile(vw, 0.95);
  }
  if (!m.nuDraws.empty()) {
    summary["nu_mean"] = weighted_mean(m.nuDraws, m.weights);
    summary["nu_sd"] = weighted_sd(m.nuDraws, m.weights);
  }
  if (cfg.subsetSize) summary["anchor"] = m.anchor;
  root["summary"] = summary;

  const Eigen::VectorXd pips = m.acc.pip_partial_rb();
  std::vector<double> coefMean, coefSd;
  m.acc.coef_summaries(coefMean, coefSd);
  nlohmann::json covariates = nlohmann::json::array();
  for (int j = 0; j < data.p(); ++j) {
    covariates.push_back({{"name", covariate_name(data, j)},
                          {"pip", pips(j)},
                          {"coef_mean", coefMean[static_cast<std::size_t>(j)]},
                          {"coef_sd", coefSd[static_cast<std::size_t>(j)]}});
  }
  root["covariates"] = covariates;

  if (spec.trace) {
    nlohmann::json trace;
    trace["weights"] = m.weights;
    trace["model_sizes"] = m.modelSizes;
    if (!m.hDraws.empty()) trace["h"] = m.hDraws;
    if (!m.nuDraws.empty()) trace["nu"] = m.nuDraws;
    root["trace"] = trace;
  }

  os << root.dump(2) << "\n";
}

template <typename Body>
int guarded(const RunSpec& spec, std::ostream& fallback, std::ostream& diag,
            Body&& body) {
  try {
    if (!spec.outputPath.empty()) {
      std::ofstream file(spec.outputPath);
      if (!file) throw ConfigError("cannot open output path: " + spec.outputPath);
      body(file);
    } else {
      body(fallback);
    }
    return 0;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& responseColumn,
                   const std::optional<std::string>& totalCountColumn,
                   Likelihood kind, double psi0) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open input file: " + path);

  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty input file: " + path);
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> header = split_cells(line, delim);
  const int width = static_cast<int>(header.size());
  for (int k = 0; k < width; ++k)
    if (header[static_cast<std::size_t>(k)].empty())
      throw ParseError("empty name in header column " + std::to_string(k + 1));

  auto column_of = [&](const std::string& name) {
    for (int k = 0; k < width; ++k)
      if (header[static_cast<std::size_t>(k)] == name) return k;
    throw MissingColumn("column '" + name + "' not in header");
  };
  const int yCol = column_of(responseColumn);
  const int cCol = totalCountColumn ? column_of(*totalCountColumn) : -1;
  if (cCol == yCol)
    throw ConfigError("response and total-count columns must differ");

  std::vector<int> xCols;
  std::vector<std::string> names;
  for (int k = 0; k < width; ++k) {
    if (k == yCol || k == cCol) continue;
    xCols.push_back(k);
    names.push_back(header[static_cast<std::size_t>(k)]);
  }

  std::vector<double> cells;  // row-major, all columns
  long lineNo = 1;
  long rows = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> row = split_cells(line, delim);
    if (static_cast<int>(row.size()) != width)
      throw ParseError("line " + std::to_string(lineNo) + " has " +
                       std::to_string(row.size()) + " cells, expected " +
                       std::to_string(width));
    for (int k = 0; k < width; ++k)
      cells.push_back(parse_cell(row[static_cast<std::size_t>(k)], lineNo,
                                 header[static_cast<std::size_t>(k)]));
    ++rows;
  }
  if (rows == 0) throw ParseError("no data rows in " + path);

  Dataset data;
  data.kind = kind;
  data.psi0 = psi0;
  data.names = std::move(names);
  const int P = static_cast<int>(xCols.size());
  data.X.resize(rows, P);
  data.Y.resize(rows);
  if (cCol >= 0) data.C.resize(rows);
  for (long n = 0; n < rows; ++n) {
    const double* row = cells.data() + n * width;
    data.Y(n) = row[yCol];
    if (cCol >= 0) data.C(n) = row[cCol];
    for (int j = 0; j < P; ++j) data.X(n, j) = row[xCols[static_cast<std::size_t>(j)]];
  }
  return data;
}

void standardize_columns(Dataset& data) {
  const int N = data.n();
  if (N < 2) throw DomainError("standardizing needs at least two rows");
  for (int j = 0; j < data.p(); ++j) {
    const double mean = data.X.col(j).mean();
    data.X.col(j).array() -= mean;
    const double sd = std::sqrt(data.X.col(j).squaredNorm() / (N - 1));
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw DomainError("covariate '" + covariate_name(data, j) +
                        "' has zero variance");
    data.X.col(j) /= sd;
  }
}

void write_csv(const Dataset& data, std::ostream& os) {
  for (int j = 0; j < data.p(); ++j) os << covariate_name(data, j) << ',';
  os << 'y';
  if (data.C.size()) os << ",c";
  os << '\n';
  for (int n = 0; n < data.n(); ++n) {
    for (int j = 0; j < data.p(); ++j) os << fmt(data.X(n, j), "%.17g") << ',';
    os << fmt(data.Y(n), "%.17g");
    if (data.C.size()) os << ',' << fmt(data.C(n), "%.17g");
    os << '\n';
  }
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const TooLarge*>(&e) ||
      dynamic_cast<const EmptyChain*>(&e))
    return 2;
  if (dynamic_cast<const NumericalError*>(&e) ||
      dynamic_cast<const QuadratureNotConverged*>(&e))
    return 4;
  return 3;  // shape, domain, parse, missing column
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& diag) {
  return guarded(spec, out, diag, [&](std::ostream& os) {
    Dataset data =
        ingest_csv(spec.inputPath, spec.responseColumn, spec.totalCountColumn,
                   spec.likelihood, spec.psi0.value_or(0.0));
    if (spec.standardize) standardize_columns(data);
    RunSpec eff = spec;
    resolve_defaults(data, eff);
    const Merged merged = run_all_chains(data, eff);
    if (eff.format == OutputFormat::Tsv)
      emit_tsv(os, data, eff, merged);
    else
      emit_json(os, data, eff, merged);
  });
}

int emit_oracle(const RunSpec& spec, std::ostream& out, std::ostream& diag) {
  return guarded(spec, out, diag, [&](std::ostream& os) {
    Dataset data =
        ingest_csv(spec.inputPath, spec.responseColumn, spec.totalCountColumn,
                   spec.likelihood, spec.psi0.value_or(0.0));
    if (spec.standardize) standardize_columns(data);
    RunSpec eff = spec;
    resolve_defaults(data, eff);
    const SamplerConfig& cfg = eff.config;
    const BetaPrior* hBeta = cfg.hBeta ? &*cfg.hBeta : nullptr;
    const double h = cfg.h.value_or(0.5);
    const double tauBias = cfg.tauBias.value_or(-1.0);

    ExactPosterior post =
        spec.likelihood == Likelihood::Linear
            ? enumerate_linear(data, h, cfg.tau, cfg.includeBiasLinear, tauBias,
                               hBeta)
            : quadrature_count(data, h, cfg.tau, 1e-6, 1.0, tauBias, hBeta);

    if (eff.format == OutputFormat::Tsv) {
      os << "# log_evidence\t" << fmt(post.logEvidence) << "\n";
      os << "name\tpip\n";
      for (int j = 0; j < data.p(); ++j)
        os << covariate_name(data, j) << '\t' << fmt(post.pips(j)) << '\n';
    } else {
      nlohmann::json root;
      root["log_evidence"] = post.logEvidence;
      nlohmann::json covariates = nlohmann::json::array();
      for (int j = 0; j < data.p(); ++j)
        covariates.push_back(
            {{"name", covariate_name(data, j)}, {"pip", post.pips(j)}});
      root["covariates"] = covariates;
      os << root.dump(2) << "\n";
    }
  });
}

}  // namespace bvs
