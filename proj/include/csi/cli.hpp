#pragma once

// Command-line front end.  run() is the whole program minus process setup,
// so tests can drive it with in-memory streams.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "algebra.hpp"
#include "curve_spec.hpp"
#include "invariants.hpp"
#include "report.hpp"

namespace csi::cli {

struct RunConfig {
  // estimation
  std::string kind;  // invariant kind
  std::string curve;
  std::string diagram;
  std::string weights;
  std::string anomaly;
  std::string skein_invariant = "v2";
  double eps = kDefaultResolutionEps;
  MCParams params;
  std::optional<std::uint64_t> seed;
  std::string sampler = "sobol";
  // diagrams
  int degree = 0;
  int k = 2;
  std::optional<int> n;
  std::string parity;
  std::string family = "chord";
  int max_vertices = 6;
  std::optional<int> order;
  int max_degree = 3;
  bool trivalent_only = false;
  bool chords_only = false;
  bool matrix = false;
  // output
  std::string format;
  std::string cache_dir;
  bool no_cache = false;
  bool report_cache_status = false;
  bool verbose = false;
};

namespace detail {

inline Parity resolve_parity(const RunConfig& c) {
  std::optional<Parity> from_n;
  if (c.n) {
    if (*c.n < 2) throw Error("--n must be at least 2");
    from_n = *c.n % 2 ? Parity::odd : Parity::even;
  }
  if (!c.parity.empty()) {
    Parity p = parse_parity(c.parity);
    if (from_n && *from_n != p) throw Error("--n and --parity disagree");
    return p;
  }
  return from_n.value_or(Parity::odd);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline WeightSystem load_weights(const std::string& spec) {
  if (spec.empty()) throw Error("type-k needs --weights FILE (or builtin:casson)");
  if (spec == "builtin:casson") return casson_weight_system();
  return parse_weight_system(read_file(spec));
}

// Anomaly file: "value<TAB>encoding" lines.
inline Anomaly load_anomaly(const std::string& path) {
  Anomaly mu;
  if (path.empty()) return mu;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto sep = line.find_first_of(" \t", b);
    if (sep == std::string::npos) throw Error("anomaly file: expected 'value encoding'");
    double v = std::stod(line.substr(b, sep - b));
    auto cf = canonical_form(decode(line.substr(line.find_first_not_of(" \t", sep))));
    if (cf.sign != 0) mu[cf.diagram] += cf.sign * v;
  }
  return mu;
}

inline std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

template <class T>
const T& expect(const Geometry& g, const char* what) {
  if (auto* p = std::get_if<T>(&g)) return *p;
  throw Error(std::string("this operation needs ") + what);
}

}  // namespace detail

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Configuration space integrals for long knots and the diagram complexes behind them", "csi_cli"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");
    RunConfig& c = cfg_;

    auto add_mc = [&c](CLI::App* s) {
      s->add_option("--curve", c.curve, "Curve spec: builtin:NAME, inline JSON, or a JSON file");
      s->add_option("--seed", c.seed, "Random seed (omitted: a fresh seed, echoed in the report)");
      s->add_option("--samples,-N", c.params.samples, "Sample budget per diagram integral")->check(CLI::PositiveNumber);
      s->add_option("--workers,-j", c.params.workers, "Worker threads (does not change results)")->check(CLI::PositiveNumber);
      s->add_option("--L", c.params.truncation, "Time truncation half-width (0: 4 (R + 1))")->check(CLI::NonNegativeNumber);
      s->add_option("--a", c.params.concentration, "Free-vertex concentration scale")->check(CLI::PositiveNumber);
      s->add_option("--broad-weight", c.params.broad_weight, "Weight of the broad free-vertex component")->check(CLI::Range(0.0, 1.0));
      s->add_option("--hotspot-weight", c.params.hotspot_weight, "Time mass placed near self-approaches")->check(CLI::Range(0.0, 0.9));
      s->add_option("--batches", c.params.batches, "Independent randomized batches")->check(CLI::Range(2u, 4096u));
      s->add_option("--sampler", c.sampler, "sobol (randomized QMC) or plain (Monte Carlo)")->check(CLI::IsMember({"sobol", "plain"}));
      s->add_flag("--antithetic", c.params.antithetic, "Antithetic pairs (plain sampler)");
      s->add_option("--format", c.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
      s->add_option("--cache-dir", c.cache_dir, "Result cache directory (default $CSI_CACHE_DIR or ~/.cache/csi)");
      s->add_flag("--no-cache", c.no_cache, "Neither read nor write the result cache");
      s->add_flag("--report-cache-status", c.report_cache_status, "Add a 'cached' field to the report");
      s->add_flag("--verbose,-v", c.verbose, "Progress on stderr");
    };

    auto* inv = app.add_subcommand("invariant", "Estimate an invariant: lk, writhe, v2 or type-k");
    inv->add_option("kind", c.kind, "lk | writhe | v2 | type-k")->required()->check(CLI::IsMember({"lk", "writhe", "v2", "type-k"}));
    inv->add_option("--weights", c.weights, "type-k weight system file ('value encoding' lines) or builtin:casson");
    inv->add_option("--anomaly", c.anomaly, "type-k anomaly coefficients file ('value encoding' lines; default all 0)");
    add_mc(inv);

    auto* integ = app.add_subcommand("integrate", "Integrate one degree-0 diagram over a knot or two-strand link");
    integ->add_option("--diagram", c.diagram, "Diagram encoding")->required();
    add_mc(integ);

    auto* sk = app.add_subcommand("skein", "Alternating sum of an invariant over all resolutions of a singular knot");
    sk->add_option("--invariant", c.skein_invariant, "v2 or writhe")->check(CLI::IsMember({"v2", "writhe"}));
    sk->add_option("--eps", c.eps, "Resolution push-off length")->check(CLI::PositiveNumber);
    add_mc(sk);

    auto* dg = app.add_subcommand("diagrams", "Exact diagram combinatorics");
    dg->require_subcommand(1);
    auto add_parity = [&c](CLI::App* s) {
      s->add_option("--n", c.n, "Ambient dimension; odd n selects odd parity, even n even parity");
      s->add_option("--parity", c.parity, "odd or even")->check(CLI::IsMember({"odd", "even"}));
      s->add_option("--format", c.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    };
    auto* en = dg->add_subcommand("enumerate", "List canonical diagrams of a degree");
    en->add_option("--degree", c.degree, "Form degree 2E - 3q - p");
    en->add_option("--max-vertices", c.max_vertices, "Bound on p + q")->check(CLI::Range(1, 12));
    en->add_option("--order", c.order, "Restrict to order E - q");
    en->add_flag("--trivalent-only", c.trivalent_only, "Only trivalent diagrams");
    en->add_flag("--chords-only", c.chords_only, "Only chord diagrams");
    add_parity(en);
    auto* dims = dg->add_subcommand("dims", "Quotient dimension of a diagram family, as CSV family,k,relations,rank");
    dims->add_option("--family", c.family, "chord or trivalent")->check(CLI::IsMember({"chord", "trivalent"}));
    dims->add_option("--k", c.k, "Order")->check(CLI::Range(1, 5));
    add_parity(dims);
    auto* cob = dg->add_subcommand("coboundary", "Coboundary of a diagram, or the matrix of a degree slice");
    cob->add_option("--diagram", c.diagram, "Diagram encoding");
    cob->add_option("--degree", c.degree, "Slice degree (with --matrix)");
    cob->add_option("--max-vertices", c.max_vertices, "Bound on p + q (with --matrix)")->check(CLI::Range(1, 10));
    cob->add_option("--order", c.order, "Restrict the slice to one order (with --matrix)");
    cob->add_flag("--matrix", c.matrix, "Dump the slice matrix as 'rows cols nnz' then 'row col value' triplets");
    add_parity(cob);
    auto* vc = dg->add_subcommand("verify-complex", "Check that the coboundary squares to zero");
    vc->add_option("--max-vertices", c.max_vertices, "Bound on p + q")->check(CLI::Range(1, 10));
    vc->add_option("--max-degree", c.max_degree, "Largest degree checked")->check(CLI::Range(0, 6));
    add_parity(vc);

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out_, err_);
    }

    try {
      if (inv->parsed()) return invariant();
      if (integ->parsed()) return integrate();
      if (sk->parsed()) return skein();
      if (en->parsed()) return enumerate();
      if (dims->parsed()) return dimensions();
      if (cob->parsed()) return coboundary_cmd();
      if (vc->parsed()) return verify();
    } catch (const std::exception& e) {
      return fail(e.what());
    }
    return fail("no command");
  }

 private:
  int fail(const std::string& msg) {
    err_ << "error: " << msg << '\n';
    if (cfg_.format == "json") {
      Json j;
      j["error"] = msg;
      out_ << j.dump(2) << '\n';
    }
    return 1;
  }

  void prepare_params() {
    cfg_.params.sampler = parse_sampler(cfg_.sampler);
    cfg_.params.seed = cfg_.seed ? *cfg_.seed : detail::fresh_seed();
    if (!cfg_.seed && cfg_.verbose) err_ << "seed " << cfg_.params.seed << '\n';
  }

  // Looks up the cache, otherwise computes and stores.
  template <class Compute>
  int estimate(const std::string& operation, const CurveSpec& spec, const std::string& diagram, Compute&& compute) {
    prepare_params();
    const std::string spec_text = dump(spec);
    const std::string digest = sha256_hex(spec_text);
    Json params = params_json(cfg_.params);
    if (cfg_.eps != kDefaultResolutionEps) params["eps"] = cfg_.eps;
    const std::string key = ResultCache::key(operation, spec_text, diagram, params);
    ResultCache cache(cfg_.cache_dir.empty() ? ResultCache::default_dir() : std::filesystem::path(cfg_.cache_dir));
    std::optional<Json> report;
    bool hit = false;
    if (!cfg_.no_cache) {
      report = cache.load(key);
      hit = report.has_value();
      if (hit && cfg_.verbose) err_ << "cache hit " << key << '\n';
    }
    if (!report) {
      auto t0 = std::chrono::steady_clock::now();
      IntegralEstimate e = compute();
      if (cfg_.verbose)
        err_ << operation << " took "
             << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
      report = estimate_report(operation, digest, diagram, cfg_.params, e);
      if (!cfg_.no_cache) cache.store(key, *report);
    }
    if (cfg_.report_cache_status) (*report)["cached"] = hit;
    emit(*report);
    return 0;
  }

  void emit(const Json& r) {
    const std::string f = cfg_.format.empty() ? "json" : cfg_.format;
    if (f == "json") {
      out_ << r.dump(2) << '\n';
    } else if (f == "csv") {
      out_ << kCsvHeader << '\n' << csv_row(r) << '\n';
    } else {
      out_ << r.at("operation").get<std::string>() << ": " << csi::detail::num(r.at("value").get<double>())
           << " +- " << csi::detail::num(r.at("stderr").get<double>()) << '\n';
      if (!r.at("diagram").is_null()) out_ << "diagram: " << r.at("diagram").get<std::string>() << '\n';
      out_ << "seed: " << r.at("seed").get<std::uint64_t>() << "\nN: " << r.at("N").get<std::uint64_t>()
           << "\nL: " << csi::detail::num(r.at("L").get<double>()) << '\n';
      for (auto& [k, v] : r.at("diagnostics").items()) out_ << k << ": " << v.dump() << '\n';
    }
  }

  int invariant() {
    const std::string& kind = cfg_.kind;
    CurveSpec spec = parse_curve_spec(cfg_.curve.empty() ? (kind == "lk" ? "builtin:long_hopf" : "builtin:long_trefoil")
                                                         : cfg_.curve);
    Geometry g = realize(spec);
    const MCParams& p = cfg_.params;
    if (kind == "lk") {
      const auto& l = detail::expect<LongLink2>(g, "a two-strand long link");
      return estimate("invariant lk", spec, encode(single_chord()), [&] { return linking_number(l, p); });
    }
    const auto& k = detail::expect<LongCurve>(g, "a long knot");
    if (kind == "writhe")
      return estimate("invariant writhe", spec, encode(single_chord()), [&] { return self_linking_A(k, p); });
    if (kind == "v2") return estimate("invariant v2", spec, "", [&] { return casson_v2(k, p); });
    WeightSystem w = detail::load_weights(cfg_.weights);
    auto bad = weight_system_violations(w);
    if (!bad.empty())
      throw Error("weight system does not vanish on " + std::to_string(bad.size()) +
                  " relation(s), e.g.\n" + bad.front().to_string());
    Anomaly mu = detail::load_anomaly(cfg_.anomaly);
    std::string label = weight_system_text(w);
    for (auto& [d, v] : mu) label += "mu " + csi::detail::num(v) + '\t' + encode(d) + '\n';
    return estimate("invariant type-k", spec, label, [&] { return type_k_invariant(w, k, p, mu); });
  }

  int integrate() {
    CurveSpec spec = parse_curve_spec(cfg_.curve.empty() ? "builtin:long_trefoil" : cfg_.curve);
    Geometry g = realize(spec);
    Diagram d = decode(cfg_.diagram);
    DiagramIntegrand check(d);  // degree and validity errors before any sampling
    const MCParams& p = cfg_.params;
    if (auto* l = std::get_if<LongLink2>(&g))
      return estimate("integrate", spec, encode(d), [&] { return integrate_diagram(d, *l, p); });
    const auto& k = detail::expect<LongCurve>(g, "a long knot or a two-strand long link");
    return estimate("integrate", spec, encode(d), [&] { return integrate_diagram(d, k, p); });
  }

  int skein() {
    CurveSpec spec = parse_curve_spec(cfg_.curve.empty() ? "builtin:singular_x3" : cfg_.curve);
    Geometry g = realize(spec);
    const auto& s = detail::expect<SingularLongKnot>(g, "a singular long knot");
    KnotInvariant f = cfg_.skein_invariant == "v2" ? KnotInvariant(casson_v2) : KnotInvariant(self_linking_A);
    const MCParams& p = cfg_.params;
    return estimate("skein " + cfg_.skein_invariant, spec, "",
                    [&] { return skein_alternating_sum(s, f, cfg_.eps, p); });
  }

  int enumerate() {
    EnumerationOptions o;
    o.max_vertices = cfg_.max_vertices;
    o.order = cfg_.order;
    o.trivalent_only = cfg_.trivalent_only;
    o.chords_only = cfg_.chords_only;
    Parity par = detail::resolve_parity(cfg_);
    auto list = enumerate_diagrams(cfg_.degree, par, o);
    if (cfg_.format == "json") {
      Json j;
      j["operation"] = "diagrams enumerate";
      j["degree"] = cfg_.degree;
      j["parity"] = to_string(par);
      j["max_vertices"] = cfg_.max_vertices;
      j["count"] = list.size();
      j["diagrams"] = Json::array();
      for (auto& d : list) j["diagrams"].push_back(encode(d));
      out_ << j.dump(2) << '\n';
    } else if (cfg_.format == "csv") {
      out_ << "index,encoding\n";
      for (std::size_t i = 0; i < list.size(); ++i) out_ << i << ',' << csi::detail::csv_field(encode(list[i])) << '\n';
    } else {
      for (auto& d : list) out_ << encode(d) << '\n';
    }
    return 0;
  }

  int dimensions() {
    Family f = parse_family(cfg_.family);
    Parity par = detail::resolve_parity(cfg_);
    std::string row = dims_csv_row(f, cfg_.k, par);
    if (cfg_.format == "json") {
      auto space = family_space(cfg_.k, f, par);
      auto q = quotient_rank(space, family_relations(cfg_.k, f, par));
      Json j;
      j["operation"] = "diagrams dims";
      j["family"] = to_string(f);
      j["k"] = cfg_.k;
      j["parity"] = to_string(par);
      j["relations"] = family_relation_names(f);
      j["space"] = space.size();
      j["rank"] = q.rank;
      out_ << j.dump(2) << '\n';
    } else {
      out_ << "family,k,relations,rank\n" << row << '\n';
    }
    return 0;
  }

  int coboundary_cmd() {
    Parity par = detail::resolve_parity(cfg_);
    if (cfg_.matrix) {
      if (!cfg_.diagram.empty()) throw Error("--matrix takes --degree, not --diagram");
      auto s = complex_slice(par, cfg_.degree, cfg_.max_vertices, cfg_.order);
      out_ << triplet_text(s.boundary);
      return 0;
    }
    if (cfg_.diagram.empty()) throw Error("coboundary needs --diagram or --matrix");
    Diagram d = decode(cfg_.diagram);
    auto v = coboundary(d);
    if (cfg_.format == "json") {
      Json j;
      j["operation"] = "diagrams coboundary";
      j["diagram"] = encode(d);
      j["terms"] = Json::array();
      for (auto& [t, c] : v.terms()) j["terms"].push_back({{"coefficient", c.get_str()}, {"diagram", encode(t)}});
      out_ << j.dump(2) << '\n';
    } else {
      out_ << v.to_string();
    }
    return 0;
  }

  int verify() {
    Parity par = detail::resolve_parity(cfg_);
    auto r = verify_complex(par, cfg_.max_vertices, cfg_.max_degree);
    const bool ok = r.failures.empty();
    if (cfg_.format == "json") {
      Json j;
      j["operation"] = "diagrams verify-complex";
      j["parity"] = to_string(par);
      j["max_vertices"] = cfg_.max_vertices;
      j["max_degree"] = cfg_.max_degree;
      j["checked"] = r.checked;
      j["failures"] = Json::array();
      for (auto& d : r.failures) j["failures"].push_back(encode(d));
      j["pass"] = ok;
      out_ << j.dump(2) << '\n';
    } else {
      out_ << "δ²=0: " << (ok ? "PASS" : "FAIL") << " (" << r.checked << " diagrams, parity " << to_string(par)
           << ", at most " << cfg_.max_vertices << " vertices, degree <= " << cfg_.max_degree << ")\n";
      for (auto& d : r.failures) out_ << "failure: " << encode(d) << '\n';
    }
    return ok ? 0 : 1;
  }

  std::ostream& out_;
  std::ostream& err_;
  RunConfig cfg_;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"csi_cli"};
  for (auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace csi::cli
