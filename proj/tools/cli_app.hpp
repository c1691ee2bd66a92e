#pragma once

// Command-line front end. Each subcommand parses files, calls the library and
// writes the result; run_cli() is separate from main() so tests can drive it.
//
// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ggmgof/ggmgof.hpp"

namespace ggm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::uint64_t seed = 1;
  int threads = 0;
  double level = 0.05;
  std::string output;
  std::string format;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos)
        throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw ConfigError("cannot write '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline std::string column_hint(const Error& e) {
  std::ptrdiff_t col = -1;
  if (const auto* c = dynamic_cast<const ColumnSingular*>(&e)) col = c->column();
  if (const auto* c = dynamic_cast<const InsufficientData*>(&e)) col = c->column();
  return col >= 0 ? " [node " + std::to_string(col + 1) + "]" : "";
}

}  // namespace detail

inline void add_gen(CLI::App& app, GlobalOptions& g, std::ostream& out,
                    std::function<void()>& action) {
  auto* cmd = app.add_subcommand("gen", "Generate a precision matrix, its support and provenance");
  struct Args {
    std::string family = "exp-band";
    Index p = 0, s0 = 1;
    double base = 0.6, lambda = 2.0;
    std::vector<std::string> u;
    std::vector<double> alpha;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--family", a->family, "exp-band | poly-band | factor | identity")
      ->check(CLI::IsMember({"exp-band", "poly-band", "factor", "identity"}));
  cmd->add_option("--p", a->p, "dimension")->required();
  cmd->add_option("--s0", a->s0, "bandwidth: nonzeros satisfy |i-j| < s0");
  cmd->add_option("--base", a->base, "exponential decay base in (0,1)");
  cmd->add_option("--lambda", a->lambda, "polynomial decay exponent >= 2");
  cmd->add_option("--u", a->u, "factor loading prefix, comma separated (repeatable)");
  cmd->add_option("--alpha", a->alpha, "factor weights, one per --u (default 1)");
  action = [a, &g, &out] {
    TruthSpec t;
    t.family = parse_family(a->family);
    t.p = a->p;
    t.s0 = a->s0;
    t.base = a->base;
    t.lambda = a->lambda;
    if (t.family == Family::Factor && a->u.empty())
      throw InvalidArgument("factor family needs at least one --u");
    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t k = 0; k < a->u.size(); ++k) {
      const auto vals = detail::parse_list(a->u[k]);
      if (static_cast<Index>(vals.size()) > t.p)
        throw InvalidArgument("--u has more entries than p");
      FactorTerm term;
      term.alpha = k < a->alpha.size() ? a->alpha[k] : 1.0;
      term.u = Eigen::VectorXd::Zero(t.p);
      for (std::size_t c = 0; c < vals.size(); ++c) term.u(static_cast<Index>(c)) = vals[c];
      terms.push_back({{"alpha", term.alpha}, {"u", vals}});
      t.factors.push_back(std::move(term));
    }
    const PrecisionMatrix omega = build_truth(t);
    const std::string prefix = g.output.empty() ? "precision" : g.output;
    io::write_csv_matrix(prefix + ".csv", omega.matrix());
    nlohmann::json prov = {{"family", a->family}, {"p", t.p}};
    if (t.family == Family::ExponentialBand || t.family == Family::PolynomialBand)
      prov["s0"] = t.s0;
    if (t.family == Family::ExponentialBand) prov["base"] = t.base;
    if (t.family == Family::PolynomialBand) prov["lambda"] = t.lambda;
    if (t.family == Family::Factor) prov["factors"] = terms;
    {
      std::ofstream f(prefix + ".json");
      f << prov.dump(2) << '\n';
    }
    const double tol = t.family == Family::Factor ? 1e-12 : 0.0;
    const EdgeSet support = support_edge_set(omega, tol);
    {
      std::ofstream f(prefix + ".edges.json");
      f << io::edge_set_to_json(support).dump() << '\n';
    }
    const auto st = structure_stats(support);
    out << nlohmann::json{{"precision", prefix + ".csv"},
                          {"provenance", prefix + ".json"},
                          {"edges", prefix + ".edges.json"},
                          {"p", t.p},
                          {"s0", st.s0},
                          {"isolated", st.isolated_count}}
               .dump(2)
        << '\n';
  };
}

inline void add_structure(CLI::App& app, GlobalOptions& g, std::ostream& out,
                          std::function<void()>& action) {
  auto* cmd = app.add_subcommand("structure", "Write a hypothesized edge set as JSON");
  struct Args {
    std::string kind = "band";
    Index p = 0, width = 1;
    std::string precision;
    double tol = 1e-12;
    Index node = 0;
    std::string neighbors;
    std::string base;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--kind", a->kind, "isolated | band | complete | support | rewire")
      ->check(CLI::IsMember({"isolated", "band", "complete", "support", "rewire"}));
  cmd->add_option("--p", a->p, "node count");
  cmd->add_option("--width", a->width, "band width: edges satisfy |i-j| < width");
  cmd->add_option("--precision", a->precision, "matrix CSV for --kind support");
  cmd->add_option("--tol", a->tol, "support tolerance");
  cmd->add_option("--edges", a->base, "edge set JSON to rewire");
  cmd->add_option("--node", a->node, "node to rewire (1-based)");
  cmd->add_option("--neighbors", a->neighbors, "new neighbors (1-based, comma separated)");
  action = [a, &g, &out] {
    EdgeSet e;
    if (a->kind == "support") {
      if (a->precision.empty()) throw InvalidArgument("--kind support needs --precision");
      e = support_edge_set(io::read_csv_matrix(a->precision), a->tol);
    } else if (a->kind == "rewire") {
      if (a->base.empty()) throw InvalidArgument("--kind rewire needs --edges");
      const EdgeSet base = io::read_edge_set(a->base);
      std::vector<Index> nb;
      for (double v : detail::parse_list(a->neighbors)) nb.push_back(static_cast<Index>(v) - 1);
      e = node_rewire(base, a->node - 1, nb);
    } else {
      if (a->p < 1) throw InvalidArgument("--p must be >= 1");
      e = a->kind == "isolated"   ? isolated_edge_set(a->p)
          : a->kind == "complete" ? complete_edge_set(a->p)
                                  : band_edge_set(a->p, a->width);
    }
    detail::Sink sink(g.output, out);
    sink.stream() << io::edge_set_to_json(e).dump() << '\n';
  };
}

inline void add_sample(CLI::App& app, GlobalOptions& g, std::ostream& out,
                       std::function<void()>& action) {
  auto* cmd = app.add_subcommand("sample", "Draw a seeded Gaussian dataset (rows = observations)");
  struct Args {
    std::string precision, covariance;
    Index n = 0;
    std::uint64_t stream = 0;
  };
  auto a = std::make_shared<Args>();
  auto* po = cmd->add_option("--precision", a->precision, "precision matrix CSV");
  auto* co = cmd->add_option("--covariance", a->covariance, "covariance matrix CSV");
  po->excludes(co);
  cmd->add_option("--n", a->n, "sample size")->required();
  cmd->add_option("--stream", a->stream, "stream index under --seed");
  action = [a, &g, &out] {
    if (a->precision.empty() == a->covariance.empty())
      throw InvalidArgument("give exactly one of --precision or --covariance");
    const CovarianceMatrix sigma =
        a->precision.empty()
            ? CovarianceMatrix(io::read_csv_matrix(a->covariance))
            : invert_to_covariance(PrecisionMatrix(io::read_csv_matrix(a->precision)));
    const Dataset data = sample_mvn(sigma, a->n, g.seed, a->stream);
    detail::Sink sink(g.output, out);
    io::write_csv_matrix(sink.stream(), data.rows());
  };
}

inline void add_test(CLI::App& app, GlobalOptions& g, std::ostream& out,
                     std::function<void()>& action) {
  auto* cmd = app.add_subcommand("test", "Goodness-of-fit test of an edge set against data");
  struct Args {
    std::string data, edges, variant = "plain", gamma = "auto";
    Index node = 0;
    double cn = 0.05;
    bool cn_scaled = false;
    std::optional<double> delta_n;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--data", a->data, "dataset CSV, n rows x p columns")->required();
  cmd->add_option("--edges", a->edges, "edge set JSON")->required();
  cmd->add_option("--variant", a->variant, "plain | empowered | node")
      ->check(CLI::IsMember({"plain", "empowered", "node"}));
  cmd->add_option("--node", a->node, "node for --variant node (1-based)");
  cmd->add_option("--gamma", a->gamma, "auto | value >= 1 (1 is the conservative choice)");
  cmd->add_option("--cn", a->cn, "C_n for the empowered variant (nonzero)");
  cmd->add_flag("--cn-scaled", a->cn_scaled, "interpret --cn as C in C_n = C sqrt(log p)");
  cmd->add_option("--delta-n", a->delta_n, "threshold delta_n (default sqrt(log n))");
  action = [a, &g, &out] {
    const Dataset data(io::read_csv_matrix(a->data));
    const EdgeSet edges = io::read_edge_set(a->edges);
    if (data.p() != edges.p())
      throw InvalidArgument("data has " + std::to_string(data.p()) +
                            " columns but the edge set has p = " + std::to_string(edges.p()));
    DecisionOptions opt;
    opt.level = g.level;
    opt.threads = g.threads;
    if (a->gamma != "auto") {
      try {
        opt.gamma_override = std::stod(a->gamma);
      } catch (const std::exception&) {
        throw InvalidArgument("--gamma must be 'auto' or a number >= 1");
      }
      if (!(*opt.gamma_override >= 1.0)) throw InvalidArgument("--gamma must be >= 1");
    }
    TestReport rep;
    if (a->variant == "node") {
      if (a->node < 1 || a->node > edges.p())
        throw InvalidArgument("--node must lie in 1.." + std::to_string(edges.p()));
      rep = node_statistic(data, edges, a->node - 1, opt);
    } else if (a->variant == "empowered") {
      EmpowerOptions emp;
      emp.cn = a->cn;
      emp.cn_mode = a->cn_scaled ? CnMode::Scaled : CnMode::Constant;
      emp.delta_n = a->delta_n;
      rep = empowered_statistic(data, edges, emp, opt);
    } else {
      rep = dn_statistic(data, edges, opt);
    }
    detail::Sink sink(g.output, out);
    if (g.format == "csv") {
      sink.stream() << "variant,p,n,statistic,centering,gamma,p_value,decision,argmax_i,argmax_j\n"
                    << to_string(rep.variant) << ',' << rep.p << ',' << rep.n << ','
                    << io::format_double(rep.statistic) << ','
                    << io::format_double(rep.centering) << ','
                    << (rep.gamma ? io::format_double(*rep.gamma) : std::string()) << ','
                    << io::format_double(rep.p_value) << ','
                    << (rep.reject ? "reject" : "fail-to-reject") << ','
                    << rep.argmax.column + 1 << ',' << rep.argmax.row + 1 << '\n';
    } else {
      sink.stream() << io::to_json(rep).dump(2) << '\n';
    }
  };
}

inline void add_simulate(CLI::App& app, GlobalOptions& g, std::ostream& out,
                         std::function<void()>& action) {
  auto* cmd = app.add_subcommand("simulate", "Monte Carlo size/power experiment from a JSON spec");
  auto spec_path = std::make_shared<std::string>();
  cmd->add_option("--spec", *spec_path, "simulation spec JSON")->required();
  action = [spec_path, &g, &out] {
    SpecFile sf = parse_simulation_spec(detail::read_json_file(*spec_path));
    if (g.threads > 0) sf.spec.threads = g.threads;
    detail::Sink sink(g.output, out);
    std::ostream& os = sink.stream();
    auto emit = [&](const char* variant, const SimulationResult& r) {
      if (g.format == "json") {
        os << nlohmann::json{{"variant", variant},
                             {"rejection_rate", r.rejection_rate},
                             {"replications", r.replications},
                             {"mc_standard_error", r.mc_standard_error}}
                  .dump()
           << '\n';
      } else {
        os << simulation_csv_row(sf.spec, variant, r) << '\n';
      }
    };
    if (g.format != "json") os << simulation_csv_header() << '\n';
    if (sf.compare) {
      const auto res = run_comparison(sf.spec);
      emit("plain", res.plain);
      emit("empowered", res.empowered);
    } else {
      emit(sf.spec.variant == SimVariant::Plain ? "plain" : "empowered",
           run_experiment(sf.spec));
    }
  };
}

inline void add_covid_prep(CLI::App& app, GlobalOptions& /*g*/, std::ostream& out,
                           std::ostream& err, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("covid-prep", "NYT us-states.csv to weekly panel + region covariates");
  struct Args {
    std::string input, regions, panel = "panel.csv", covariates = "covariates.csv";
    int year = 2021;
    bool allow_partial = false;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--input", a->input, "us-states.csv path, or - for stdin")->required();
  cmd->add_option("--regions", a->regions, "state -> region JSON (default: Census regions)");
  cmd->add_option("--year", a->year, "calendar year to aggregate");
  cmd->add_option("--panel", a->panel, "output panel CSV (states x 52 weeks)");
  cmd->add_option("--covariates", a->covariates, "output covariate CSV (states x 3)");
  cmd->add_flag("--allow-partial", a->allow_partial, "accept panels missing mapped states");
  action = [a, &out, &err] {
    const RegionMap regions = a->regions.empty()
                                  ? census_regions()
                                  : parse_region_map(detail::read_json_file(a->regions));
    NytRecords rec;
    if (a->input == "-") {
      rec = load_nyt_csv(std::cin, regions);
    } else {
      std::ifstream in(a->input);
      if (!in) throw ConfigError("cannot open '" + a->input + "'");
      rec = load_nyt_csv(in, regions);
    }
    for (const auto& w : rec.warnings) err << "warning: " << w << '\n';
    const WeeklyPanel panel = weekly_aggregate(rec, a->year, regions);
    if (!a->allow_partial && panel.states.size() != regions.size())
      throw InvalidArgument("panel has " + std::to_string(panel.states.size()) +
                            " states but the mapping has " + std::to_string(regions.size()) +
                            " (use --allow-partial to accept)");
    io::write_csv_matrix(a->panel, panel.values);
    io::write_csv_matrix(a->covariates, region_dummies(panel, regions));
    out << nlohmann::json{{"states", panel.states},
                          {"weeks", panel.weeks.size()},
                          {"panel", a->panel},
                          {"covariates", a->covariates}}
               .dump(2)
        << '\n';
  };
}

inline void add_gee(CLI::App& app, GlobalOptions& g, std::ostream& out,
                    std::function<void()>& action) {
  auto* cmd = app.add_subcommand("gee", "GEE fit with a working precision matrix");
  struct Args {
    std::string panel, covariates, precision, edges, bootstrap;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--panel", a->panel, "responses CSV, subjects x times")->required();
  cmd->add_option("--covariates", a->covariates, "covariates CSV, subjects x q")->required();
  auto* po = cmd->add_option("--precision", a->precision, "working precision CSV (T x T)");
  auto* eo = cmd->add_option("--edges", a->edges,
                             "edge set JSON; working precision = symmetrized constrained fit");
  po->excludes(eo);
  cmd->add_option("--bootstrap", a->bootstrap, "subsample spec SIZExREPEATS, e.g. 40x100");
  action = [a, &g, &out] {
    Eigen::MatrixXd y = io::read_csv_matrix(a->panel);
    Eigen::MatrixXd x = io::read_csv_matrix(a->covariates);
    Eigen::MatrixXd w;
    if (!a->precision.empty()) {
      w = io::read_csv_matrix(a->precision);
    } else if (!a->edges.empty()) {
      const EdgeSet e = io::read_edge_set(a->edges);
      w = working_precision_from(fit_constrained_precision(Dataset(y), e, g.threads));
    } else {
      throw InvalidArgument("give --precision or --edges");
    }
    const GeeProblem prob(std::move(y), std::move(x), std::move(w));
    nlohmann::json j = io::to_json(fit_gee(prob));
    if (!a->bootstrap.empty()) {
      const auto xpos = a->bootstrap.find('x');
      if (xpos == std::string::npos) throw InvalidArgument("--bootstrap must look like 40x100");
      Index size = 0, reps = 0;
      try {
        size = std::stol(a->bootstrap.substr(0, xpos));
        reps = std::stol(a->bootstrap.substr(xpos + 1));
      } catch (const std::exception&) {
        throw InvalidArgument("--bootstrap must look like 40x100");
      }
      j["bootstrap"] = io::to_json(subsample_bootstrap(prob, size, reps, g.seed, g.threads));
      j["bootstrap"]["subset_size"] = size;
      j["bootstrap"]["seed"] = g.seed;
    }
    detail::Sink sink(g.output, out);
    sink.stream() << j.dump(2) << '\n';
  };
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Goodness-of-fit tests for Gaussian graphical model structures", "ggmgof"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "master random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--level", g.level, "test level")->check(CLI::Range(0.0, 1.0));
  app.add_option("--output", g.output, "output path (gen: file prefix); default stdout");
  app.add_option("--format", g.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  std::function<void()> gen, structure, sample, test, simulate, covid, gee;
  add_gen(app, g, out, gen);
  add_structure(app, g, out, structure);
  add_sample(app, g, out, sample);
  add_test(app, g, out, test);
  add_simulate(app, g, out, simulate);
  add_covid_prep(app, g, out, err, covid);
  add_gee(app, g, out, gee);

  std::vector<const char*> argv;
  argv.push_back("ggmgof");
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!(g.level > 0.0 && g.level < 1.0)) {
    err << "error: --level must lie in (0, 1)\n";
    return kExitUsage;
  }

  const std::vector<std::pair<const char*, std::function<void()>*>> table{
      {"gen", &gen},       {"structure", &structure}, {"sample", &sample},
      {"test", &test},     {"simulate", &simulate},   {"covid-prep", &covid},
      {"gee", &gee}};
  try {
    for (const auto& [name, fn] : table)
      if (app.got_subcommand(name)) (*fn)();
  } catch (const Error& e) {
    err << "error: " << e.what() << detail::column_hint(e) << '\n';
    return e.is_numerical() ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace ggm::cli
