#pragma once

// Replication engine for empirical size and power studies.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggmgof/edge_set.hpp"
#include "ggmgof/error.hpp"
#include "ggmgof/gof_test.hpp"
#include "ggmgof/matrix_gen.hpp"
#include "ggmgof/parallel.hpp"
#include "ggmgof/sampler.hpp"

namespace ggm {

enum class Family { ExponentialBand, PolynomialBand, Factor, Identity };

struct TruthSpec {
  Family family = Family::ExponentialBand;
  Index p = 150;
  Index s0 = 4;
  double base = 0.6;    // exponential decay
  double lambda = 2.0;  // polynomial decay
  std::vector<FactorTerm> factors;
};

enum class HypothesisKind {
  TruthSupport,
  Isolated,
  Band,
  Nested,    // band(s0 - 1)
  Included,  // band(s0 + 1)
  OneDiff,
  TwoDiff,
};

struct HypothesisSpec {
  HypothesisKind kind = HypothesisKind::TruthSupport;
  Index width = 0;  // Band only
};

enum class SimVariant { Plain, Empowered };

struct SimulationSpec {
  TruthSpec truth;
  HypothesisSpec hypothesis;
  Index n = 300;
  Index replications = 500;
  double level = 0.05;
  SimVariant variant = SimVariant::Plain;
  EmpowerOptions empower;
  std::optional<double> gamma_override;
  std::uint64_t seed = 20240101;
  int threads = 1;
  bool keep_statistics = false;
};

struct SimulationResult {
  double rejection_rate = 0.0;
  Index replications = 0;
  double mc_standard_error = 0.0;
  std::vector<double> statistics;  // filled when keep_statistics is set
  double centering = 0.0;
  double gamma = 1.0;
};

struct ComparisonResult {
  SimulationResult plain;
  SimulationResult empowered;
};

/// A replication failed; carries the failing replication index.
class ReplicationError : public Error {
 public:
  ReplicationError(const Error& cause, Index replication)
      : Error(cause.kind(), "replication " + std::to_string(replication) + ": " +
                                cause.what()),
        replication_(replication) {}

  Index replication() const noexcept { return replication_; }

 private:
  Index replication_;
};

inline PrecisionMatrix build_truth(const TruthSpec& t) {
  switch (t.family) {
    case Family::ExponentialBand:
      return banded_exponential_precision(t.p, t.s0, t.base);
    case Family::PolynomialBand:
      return banded_polynomial_precision(t.p, t.s0, t.lambda);
    case Family::Factor:
      return factor_precision(t.p, t.factors);
    case Family::Identity:
      return identity_precision(t.p);
  }
  throw InvalidArgument("unknown precision family");
}

/// The 1-diff structure reconnects node 0 to {2, 6, 7, 8}; 2-diff also
/// reconnects node 1 to {3, 8, 11} (0-based).
inline EdgeSet build_hypothesis(const HypothesisSpec& h, const TruthSpec& t,
                                const PrecisionMatrix& truth) {
  const EdgeSet support = support_edge_set(truth);
  switch (h.kind) {
    case HypothesisKind::TruthSupport:
      return support;
    case HypothesisKind::Isolated:
      return isolated_edge_set(t.p);
    case HypothesisKind::Band:
      return band_edge_set(t.p, h.width);
    case HypothesisKind::Nested:
      return band_edge_set(t.p, t.s0 - 1);
    case HypothesisKind::Included:
      return band_edge_set(t.p, t.s0 + 1);
    case HypothesisKind::OneDiff:
      if (t.p < 9) throw InvalidArgument("1-diff structure needs p >= 9");
      return node_rewire(support, 0, {2, 6, 7, 8});
    case HypothesisKind::TwoDiff:
      if (t.p < 12) throw InvalidArgument("2-diff structure needs p >= 12");
      return node_rewire(node_rewire(support, 0, {2, 6, 7, 8}), 1, {3, 8, 11});
  }
  throw InvalidArgument("unknown hypothesis kind");
}

inline double mc_standard_error(double rate, Index replications) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(replications));
}

namespace detail {

inline void validate(const SimulationSpec& spec) {
  if (spec.replications < 1) throw InvalidArgument("replications must be >= 1");
  if (!(spec.level > 0.0 && spec.level < 1.0))
    throw InvalidArgument("level must lie in (0, 1)");
  if (spec.n < 2) throw InvalidArgument("sample size must be >= 2");
}

inline SimulationResult aggregate(const std::vector<char>& rejected,
                                  std::vector<double> stats, bool keep,
                                  double centering, double gamma) {
  SimulationResult res;
  res.replications = static_cast<Index>(rejected.size());
  Index count = 0;
  for (char r : rejected) count += r ? 1 : 0;
  res.rejection_rate = static_cast<double>(count) / static_cast<double>(res.replications);
  res.mc_standard_error = mc_standard_error(res.rejection_rate, res.replications);
  if (keep) res.statistics = std::move(stats);
  res.centering = centering;
  res.gamma = gamma;
  return res;
}

}  // namespace detail

/// Runs both statistics on the same replication datasets. Replication r
/// draws from stream r of spec.seed.
inline ComparisonResult run_comparison(const SimulationSpec& spec) {
  detail::validate(spec);
  const PrecisionMatrix truth = build_truth(spec.truth);
  const EdgeSet hyp = build_hypothesis(spec.hypothesis, spec.truth, truth);
  const MvnSampler sampler(invert_to_covariance(truth));

  const auto reps = static_cast<std::size_t>(spec.replications);
  std::vector<char> rej_plain(reps), rej_emp(reps);
  std::vector<double> st_plain(reps), st_emp(reps);
  double centering = 0.0, gamma = 1.0;

  DecisionOptions dopt;
  dopt.level = spec.level;
  dopt.gamma_override = spec.gamma_override;

  parallel_for(spec.replications, spec.threads, [&](Index r) {
    try {
      const Dataset data = sampler.sample(spec.n, spec.seed, static_cast<std::uint64_t>(r));
      const PreparedFit prep = prepare_fit(data, hyp);
      const TestReport a = dn_statistic(prep, dopt);
      const TestReport b = empowered_statistic(prep, spec.empower, dopt);
      rej_plain[r] = a.reject;
      rej_emp[r] = b.reject;
      st_plain[r] = a.statistic;
      st_emp[r] = b.statistic;
      if (r == 0) {
        centering = a.centering;
        gamma = a.gamma.value_or(1.0);
      }
    } catch (const Error& e) {
      throw ReplicationError(e, r);
    }
  });

  ComparisonResult out;
  out.plain = detail::aggregate(rej_plain, std::move(st_plain), spec.keep_statistics,
                                centering, gamma);
  out.empowered = detail::aggregate(rej_emp, std::move(st_emp), spec.keep_statistics,
                                    centering, gamma);
  return out;
}

inline SimulationResult run_experiment(const SimulationSpec& spec) {
  detail::validate(spec);
  const PrecisionMatrix truth = build_truth(spec.truth);
  const EdgeSet hyp = build_hypothesis(spec.hypothesis, spec.truth, truth);
  const MvnSampler sampler(invert_to_covariance(truth));

  const auto reps = static_cast<std::size_t>(spec.replications);
  std::vector<char> rejected(reps);
  std::vector<double> stats(reps);
  double centering = 0.0, gamma = 1.0;

  DecisionOptions dopt;
  dopt.level = spec.level;
  dopt.gamma_override = spec.gamma_override;

  parallel_for(spec.replications, spec.threads, [&](Index r) {
    try {
      const Dataset data = sampler.sample(spec.n, spec.seed, static_cast<std::uint64_t>(r));
      const PreparedFit prep = prepare_fit(data, hyp);
      const TestReport rep = spec.variant == SimVariant::Plain
                                 ? dn_statistic(prep, dopt)
                                 : empowered_statistic(prep, spec.empower, dopt);
      rejected[r] = rep.reject;
      stats[r] = rep.statistic;
      if (r == 0) {
        centering = rep.centering;
        gamma = rep.gamma.value_or(1.0);
      }
    } catch (const Error& e) {
      throw ReplicationError(e, r);
    }
  });

  return detail::aggregate(rejected, std::move(stats), spec.keep_statistics,
                           centering, gamma);
}

/// Fraction of retained statistics above the calibrated threshold at `level`.
inline double exceedance_rate(const std::vector<double>& statistics,
                              double centering, double gamma, double level) {
  if (statistics.empty()) throw InvalidArgument("no retained statistics");
  const double thr =
      centering + GumbelLimit::global(gamma).quantile(1.0 - level);
  std::size_t count = 0;
  for (double s : statistics) count += s > thr ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(statistics.size());
}

// ---------------------------------------------------------------------------
// Spec files and result rows.

inline const char* to_string(Family f) {
  switch (f) {
    case Family::ExponentialBand: return "exp-band";
    case Family::PolynomialBand: return "poly-band";
    case Family::Factor: return "factor";
    case Family::Identity: return "identity";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "exp-band") return Family::ExponentialBand;
  if (s == "poly-band") return Family::PolynomialBand;
  if (s == "factor") return Family::Factor;
  if (s == "identity") return Family::Identity;
  throw ConfigError("unknown family '" + s +
                    "' (expected exp-band, poly-band, factor or identity)");
}

inline const char* to_string(HypothesisKind k) {
  switch (k) {
    case HypothesisKind::TruthSupport: return "truth-support";
    case HypothesisKind::Isolated: return "isolated";
    case HypothesisKind::Band: return "band";
    case HypothesisKind::Nested: return "nested";
    case HypothesisKind::Included: return "included";
    case HypothesisKind::OneDiff: return "1-diff";
    case HypothesisKind::TwoDiff: return "2-diff";
  }
  return "?";
}

inline HypothesisKind parse_hypothesis_kind(const std::string& s) {
  if (s == "truth-support") return HypothesisKind::TruthSupport;
  if (s == "isolated") return HypothesisKind::Isolated;
  if (s == "band") return HypothesisKind::Band;
  if (s == "nested") return HypothesisKind::Nested;
  if (s == "included") return HypothesisKind::Included;
  if (s == "1-diff") return HypothesisKind::OneDiff;
  if (s == "2-diff") return HypothesisKind::TwoDiff;
  throw ConfigError("unknown hypothesis '" + s + "'");
}

/// Result of parsing a spec file: the spec plus whether both statistics
/// were requested ("variant": "both").
struct SpecFile {
  SimulationSpec spec;
  bool compare = false;
};

/// {"truth": {"family", "p", "s0", "base", "lambda", "factors": [{"alpha", "u"}]},
///  "hypothesis": "band" | {"kind", "width"}, "n", "replications", "level",
///  "variant": "plain" | "empowered" | "both", "cn", "cn_mode", "delta_n",
///  "gamma", "seed", "threads"}
inline SpecFile parse_simulation_spec(const nlohmann::json& j) {
  SpecFile out;
  SimulationSpec& s = out.spec;
  try {
    const auto& t = j.at("truth");
    s.truth.family = parse_family(t.at("family").get<std::string>());
    s.truth.p = t.at("p").get<Index>();
    s.truth.s0 = t.value("s0", Index{1});
    s.truth.base = t.value("base", 0.6);
    s.truth.lambda = t.value("lambda", 2.0);
    if (t.contains("factors")) {
      for (const auto& f : t.at("factors")) {
        FactorTerm term;
        term.alpha = f.value("alpha", 1.0);
        const auto u = f.at("u").get<std::vector<double>>();
        term.u = Eigen::VectorXd::Zero(s.truth.p);
        if (static_cast<Index>(u.size()) > s.truth.p)
          throw ConfigError("factor loading longer than p");
        for (std::size_t k = 0; k < u.size(); ++k) term.u(static_cast<Index>(k)) = u[k];
        s.truth.factors.push_back(std::move(term));
      }
    }
    const auto& h = j.at("hypothesis");
    if (h.is_string()) {
      s.hypothesis.kind = parse_hypothesis_kind(h.get<std::string>());
    } else {
      s.hypothesis.kind = parse_hypothesis_kind(h.at("kind").get<std::string>());
      s.hypothesis.width = h.value("width", Index{0});
    }
    s.n = j.at("n").get<Index>();
    s.replications = j.value("replications", Index{500});
    s.level = j.value("level", 0.05);
    const std::string variant = j.value("variant", std::string("plain"));
    if (variant == "plain") {
      s.variant = SimVariant::Plain;
    } else if (variant == "empowered") {
      s.variant = SimVariant::Empowered;
    } else if (variant == "both") {
      out.compare = true;
    } else {
      throw ConfigError("unknown variant '" + variant + "'");
    }
    s.empower.cn = j.value("cn", 0.05);
    const std::string mode = j.value("cn_mode", std::string("constant"));
    if (mode == "constant") {
      s.empower.cn_mode = CnMode::Constant;
    } else if (mode == "scaled") {
      s.empower.cn_mode = CnMode::Scaled;
    } else {
      throw ConfigError("cn_mode must be constant or scaled");
    }
    if (j.contains("delta_n")) s.empower.delta_n = j.at("delta_n").get<double>();
    if (j.contains("gamma")) s.gamma_override = j.at("gamma").get<double>();
    s.seed = j.value("seed", std::uint64_t{20240101});
    s.threads = j.value("threads", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("simulation spec: ") + e.what());
  }
  return out;
}

inline std::string simulation_csv_header() {
  return "family,p,s0,decay,hypothesis,width,n,replications,level,variant,"
         "seed,rejection_rate,mc_standard_error";
}

inline std::string simulation_csv_row(const SimulationSpec& s, const char* variant,
                                      const SimulationResult& r) {
  const double decay = s.truth.family == Family::PolynomialBand ? s.truth.lambda
                       : s.truth.family == Family::ExponentialBand ? s.truth.base
                                                                   : 0.0;
  const Index width = s.hypothesis.kind == HypothesisKind::Band ? s.hypothesis.width : 0;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%ld,%ld,%g,%s,%ld,%ld,%ld,%g,%s,%llu,%.6f,%.6f",
                to_string(s.truth.family), static_cast<long>(s.truth.p),
                static_cast<long>(s.truth.s0), decay, to_string(s.hypothesis.kind),
                static_cast<long>(width), static_cast<long>(s.n),
                static_cast<long>(r.replications), s.level, variant,
                static_cast<unsigned long long>(s.seed), r.rejection_rate,
                r.mc_standard_error);
  return buf;
}

}  // namespace ggm
