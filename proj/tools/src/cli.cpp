#include "bgq_cli/cli.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bgq/distributions.hpp"
#include "bgq/format.hpp"
#include "bgq/percolation.hpp"
#include "bgq/queue.hpp"
#include "bgq/random.hpp"
#include "bgq/tandem.hpp"
#include "bgq/time_constants.hpp"
#include "bgq/verify.hpp"

namespace bgq::cli {
namespace {

using nlohmann::json;

// Reads --config files. Top-level keys set global options; a nested object
// named after a subcommand ("queue": {"slots": 1000}) sets that subcommand's
// options. Anything given on the command line wins.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static void flatten(const json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v, key));
      } else {
        item.inputs.push_back(scalar(value, key));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value for " + key);
  }
};

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  unsigned threads = 0;
};

// Where results go: the --out file if given, otherwise the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
      file_.imbue(std::locale::classic());
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

std::string format_or(const Globals& g, const std::string& fallback) {
  return g.format.empty() ? fallback : g.format;
}

struct DistOptions {
  std::string spec;
  std::string kind;
  std::optional<double> p, alpha, rate, value;
  std::vector<double> probs;

  void attach(CLI::App* app) {
    app->add_option("--spec", spec, "Distribution as JSON, e.g. {\"kind\":\"ber_geom\",\"p\":0.3,\"alpha\":0.5}");
    app->add_option("--kind", kind, "bernoulli|geom_plus|geom_zero|ber_geom|exp|ber_exp|deterministic|categorical");
    app->add_option("--p", p, "Bernoulli parameter");
    app->add_option("--alpha", alpha, "Geometric parameter");
    app->add_option("--rate", rate, "Exponential rate");
    app->add_option("--value", value, "Deterministic value");
    app->add_option("--probs", probs, "Categorical probabilities")->delimiter(',');
  }

  DistSpec resolve() const {
    if (!spec.empty()) {
      if (!kind.empty()) throw std::invalid_argument("use either --spec or --kind, not both");
      return dist_from_json(json::parse(spec));
    }
    if (kind.empty()) throw std::invalid_argument("a distribution is required (--spec or --kind)");
    json j{{"kind", kind}};
    if (p) j["p"] = *p;
    if (alpha) j["alpha"] = *alpha;
    if (rate) j["rate"] = *rate;
    if (value) j["value"] = *value;
    if (!probs.empty()) j["probs"] = probs;
    return dist_from_json(j);
  }
};

struct QueueOptions {
  double p = 1.0 / 3.0;
  double alpha = 2.0 / 3.0;
  double q = 0.5;
  double beta = 0.5;
  std::size_t slots = 100000;
  std::optional<std::size_t> burn_in;

  void attach(CLI::App* app) {
    app->add_option("--p", p, "Arrival Bernoulli parameter")->capture_default_str();
    app->add_option("--alpha", alpha, "Arrival geometric parameter")->capture_default_str();
    app->add_option("--q", q, "Service Bernoulli parameter")->capture_default_str();
    app->add_option("--beta", beta, "Service geometric parameter")->capture_default_str();
    app->add_option("--slots", slots, "Number of slots")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--burn-in", burn_in, "Slots discarded before statistics (default max(1e4, 100/(mu-lambda)), at most half the run)");
  }

  QueueParams params() const {
    QueueParams qp{p, alpha, q, beta};
    validate(qp);
    return qp;
  }

  std::size_t burn(const QueueParams& qp) const {
    if (burn_in) {
      if (*burn_in >= slots) throw std::invalid_argument("--burn-in must be smaller than --slots");
      return *burn_in;
    }
    const std::size_t fallback = is_stable(qp) ? burn_in_slots(qp.arrival_rate(), qp.service_rate()) : 0;
    return std::min(fallback, slots / 2);
  }
};

// Mean of X under the truncated-chain oracle; null when it cannot be resolved.
json oracle_mean(const QueueParams& qp) {
  if (!is_stable(qp)) return nullptr;
  for (int k : {200, 400}) {
    try {
      const auto r = markov_oracle(qp.arrival(), qp.service(), k);
      double m = 0.0;
      for (std::size_t i = 0; i < r.pi.size(); ++i) m += static_cast<double>(i) * r.pi[i];
      return {{"mean_x", m}, {"truncation", k}, {"leaked_mass", r.leaked_mass}};
    } catch (const std::runtime_error&) {
    }
  }
  return nullptr;
}

int cmd_dist_sample(const Globals& g, const DistOptions& d, std::size_t n, std::ostream& out) {
  const auto spec = d.resolve();
  RandomStream stream(g.seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample(spec, stream);
  Sink sink(g.out, out);
  if (format_or(g, "csv") == "json") {
    write_json(*sink, {{"spec", to_json(spec)}, {"seed", g.seed}, {"samples", xs}});
  } else {
    *sink << "value\n";
    for (double x : xs) *sink << format_double(x) << '\n';
  }
  return kOk;
}

int cmd_dist_pmf(const Globals& g, const DistOptions& d, std::int64_t kmax, std::ostream& out) {
  const auto spec = d.resolve();
  if (kmax < 0) throw std::invalid_argument("--kmax must be >= 0");
  std::vector<double> values;
  for (std::int64_t k = 0; k <= kmax; ++k) values.push_back(pmf(spec, k));
  Sink sink(g.out, out);
  if (format_or(g, "csv") == "json") {
    write_json(*sink, {{"spec", to_json(spec)}, {"pmf", values}, {"mean", mean(spec)}});
  } else {
    *sink << "k,pmf\n";
    for (std::size_t k = 0; k < values.size(); ++k) *sink << k << ',' << format_double(values[k]) << '\n';
  }
  return kOk;
}

int cmd_queue(const Globals& g, const QueueOptions& o, std::ostream& out) {
  const auto qp = o.params();
  const std::size_t burn = o.burn(qp);
  RandomStream stream(g.seed);
  const auto trace = simulate(qp.arrival(), qp.service(), o.slots, 0, stream);

  double sx = 0.0, sy = 0.0, sd = 0.0, sa = 0.0;
  for (std::size_t n = burn; n < trace.size(); ++n) {
    sx += static_cast<double>(trace[n].queue_before);
    sy += static_cast<double>(trace[n].queue_after);
    sd += static_cast<double>(trace[n].departures);
    sa += static_cast<double>(trace[n].arrivals);
  }
  const double m = static_cast<double>(trace.size() - burn);
  json theory = {{"oracle", oracle_mean(qp)}, {"stationary_law", nullptr}};
  if (is_stable(qp) && condition_holds(qp, 1e-6)) {
    auto law_json = to_json(stationary_law_unchecked(qp));
    theory["stationary_law"] = law_json;
  }
  const json summary = {
      {"params", to_json(qp)},
      {"condition_residual", check_condition(qp)},
      {"stable", is_stable(qp)},
      {"slots", o.slots},
      {"burn_in", burn},
      {"seed", g.seed},
      {"empirical",
       {{"mean_x", sx / m}, {"mean_y", sy / m}, {"mean_arrivals", sa / m}, {"mean_departures", sd / m}}},
      {"theory", theory}};

  if (!g.out.empty()) {
    Sink sink(g.out, out);
    if (format_or(g, "csv") == "json") {
      json rows = json::array();
      for (const auto& s : trace.slots) {
        rows.push_back({{"A", s.arrivals}, {"S", s.service}, {"X", s.queue_before}, {"Y", s.queue_after},
                        {"D", s.departures}, {"U", s.unused},
                        {"I", s.unused_plus_next ? json(*s.unused_plus_next) : json(nullptr)},
                        {"T", s.unused_plus_arrival}});
      }
      write_json(*sink, rows);
    } else {
      write_trace_csv(*sink, trace);
    }
  }
  write_json(out, summary);
  return kOk;
}

int cmd_tandem(const Globals& g, const QueueOptions& o, std::size_t stages, std::ostream& out) {
  const auto qp = o.params();
  const auto config = TandemConfig::ber_geom(qp.p, qp.alpha, qp.q, qp.beta, stages);
  validate(config);
  const std::size_t burn = o.burn(qp);
  RandomStream stream(g.seed);
  const auto trace = simulate_tandem(config, o.slots, stream);

  json per_stage = json::array();
  for (const auto& st : trace.stages) {
    double sx = 0.0, sd = 0.0;
    for (std::size_t n = burn; n < st.size(); ++n) {
      sx += static_cast<double>(st[n].queue_before);
      sd += static_cast<double>(st[n].departures);
    }
    const double m = static_cast<double>(st.size() - burn);
    per_stage.push_back({{"mean_x", sx / m}, {"mean_departures", sd / m}});
  }
  json summary = {{"params", to_json(qp)},  {"stages", stages},        {"slots", o.slots},
                  {"burn_in", burn},        {"seed", g.seed},          {"feed_forward", feed_forward_holds(trace)},
                  {"per_stage", per_stage}, {"product_form", nullptr}};
  if (o.slots - burn >= 100000) {
    summary["product_form"] = to_json(verify_product_form(trace, stationary_law(qp), burn));
  }
  if (!g.out.empty()) {
    Sink sink(g.out, out);
    write_tandem_csv(*sink, trace);
  }
  write_json(out, summary);
  return kOk;
}

int cmd_perc_simulate(const Globals& g, const std::string& weights, double x, std::size_t size,
                      std::size_t replicas, const std::string& model, std::ostream& out) {
  const auto spec = dist_from_json(json::parse(weights));
  const auto estimate = model == "continuous"
                            ? estimate_continuous_time_constant(spec, x, size, replicas, g.seed)
                            : estimate_time_constant(spec, x, size, replicas, g.seed, g.threads);
  Sink sink(g.out, out);
  if (format_or(g, "csv") == "json") {
    json j = to_json(estimate);
    j["weights"] = to_json(spec);
    j["model"] = model;
    write_json(*sink, j);
  } else {
    write_estimate_csv_header(*sink);
    write_estimate_csv_row(*sink, estimate);
  }
  return kOk;
}

int cmd_perc_identity(const Globals& g, const QueueOptions& o, std::size_t stages, std::size_t window,
                      std::size_t instances, std::ostream& out) {
  if (stages == 0 || window == 0) throw std::invalid_argument("--stages and --window must be positive");
  const QueueParams qp{o.p, o.alpha, o.q, o.beta};
  const DistSpec arrival = qp.arrival();
  validate(arrival);
  RandomStream stream(g.seed);
  const auto report =
      tandem_identity_check(arrival, std::vector<DistSpec>(stages, qp.service()), window, instances, stream);
  Sink sink(g.out, out);
  write_json(*sink, to_json(report));
  return report.passed() ? kOk : kVerificationFailed;
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&text](std::string_view piece) {
    double v = 0.0;
    const auto* end = piece.data() + piece.size();
    const auto [ptr, ec] = std::from_chars(piece.data(), end, v);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("bad grid value in '" + text + "'");
    return v;
  };
  std::vector<std::string_view> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto pos = rest.find(sep);
    parts.push_back(rest.substr(0, pos));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 3) throw std::invalid_argument("range grid must be lo:hi:step");
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("range grid needs step > 0 and hi >= lo");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  } else {
    for (auto piece : parts) {
      if (!piece.empty()) grid.push_back(number(piece));
    }
  }
  if (grid.empty()) throw std::invalid_argument("empty grid");
  return grid;
}

int cmd_tc(const Globals& g, const std::string& variant_text, double q, double beta, std::optional<double> x,
           std::optional<std::string> grid_text, std::ostream& out) {
  const Variant variant = parse_variant(variant_text);
  if (x.has_value() == grid_text.has_value()) throw std::invalid_argument("give exactly one of --x and --grid");
  const auto grid = x ? std::vector<double>{*x} : parse_grid(*grid_text);
  const auto result = curve(variant, q, beta, grid);
  Sink sink(g.out, out);
  const std::string fmt = format_or(g, x ? "value" : "csv");
  if (fmt == "json") {
    write_json(*sink, to_json(result));
  } else if (fmt == "value") {
    *sink << format_double(result.points.front().value) << '\n';
  } else {
    write_curve_csv(*sink, result);
  }
  return kOk;
}

int cmd_verify(const Globals& g, const std::string& suite, std::ostream& out) {
  const auto reports = run_verification(suite, g.seed);
  const auto report = verification_report(reports, g.seed);
  Sink sink(g.out, out);
  write_json(*sink, report);
  return report.at("passed").get<bool>() ? kOk : kVerificationFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const ClassicLocaleScope classic_out(out), classic_err(err);
  CLI::App app{"Discrete-time batch queues, tandems and directed first-passage percolation"};
  app.name("bgq");
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values (command-line flags take precedence)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "Worker threads for replica loops (default: all cores)");

  std::function<int()> action;

  auto* dist = app.add_subcommand("dist", "Distribution samples and pmf tables");
  dist->require_subcommand(1);
  DistOptions dist_opts;
  std::size_t n_samples = 10;
  std::int64_t kmax = 20;
  auto* dist_sample = dist->add_subcommand("sample", "Draw samples");
  dist_opts.attach(dist_sample);
  dist_sample->add_option("--n", n_samples, "Number of draws")->capture_default_str();
  dist_sample->callback([&] { action = [&] { return cmd_dist_sample(g, dist_opts, n_samples, out); }; });
  auto* dist_pmf = dist->add_subcommand("pmf", "Tabulate P(X = k) for k = 0..kmax");
  DistOptions pmf_opts;
  pmf_opts.attach(dist_pmf);
  dist_pmf->add_option("--kmax", kmax, "Largest k")->capture_default_str();
  dist_pmf->callback([&] { action = [&] { return cmd_dist_pmf(g, pmf_opts, kmax, out); }; });

  auto* queue = app.add_subcommand("queue", "Simulate one Ber-Geom batch queue");
  QueueOptions queue_opts;
  queue_opts.attach(queue);
  queue->callback([&] { action = [&] { return cmd_queue(g, queue_opts, out); }; });

  auto* tandem = app.add_subcommand("tandem", "Simulate Ber-Geom queues in series");
  QueueOptions tandem_opts;
  std::size_t stages = 4;
  tandem_opts.attach(tandem);
  tandem->add_option("--stages", stages, "Number of queues")->capture_default_str()->check(CLI::PositiveNumber);
  tandem->callback([&] { action = [&] { return cmd_tandem(g, tandem_opts, stages, out); }; });

  auto* perc = app.add_subcommand("perc", "First-passage percolation");
  perc->require_subcommand(1);
  auto* perc_sim = perc->add_subcommand("simulate", "Estimate a time constant by simulation");
  std::string weights = R"({"kind":"exp","rate":1})";
  double aspect = 3.0;
  std::size_t size = 100, replicas = 10;
  std::string model = "lattice";
  perc_sim->add_option("--weights", weights, "Weight distribution as JSON")->capture_default_str();
  perc_sim->add_option("--x", aspect, "Aspect ratio x (y for the continuous model)")->capture_default_str();
  perc_sim->add_option("--size", size, "N")->capture_default_str();
  perc_sim->add_option("--replicas", replicas, "Independent fields")->capture_default_str()->check(CLI::PositiveNumber);
  perc_sim->add_option("--model", model, "lattice or continuous")->capture_default_str()->check(
      CLI::IsMember({"lattice", "continuous"}));
  perc_sim->callback(
      [&] { action = [&] { return cmd_perc_simulate(g, weights, aspect, size, replicas, model, out); }; });

  auto* perc_id = perc->add_subcommand("identity", "Check the tandem/percolation queue-length identity");
  QueueOptions id_opts;
  std::size_t id_stages = 3, window = 50, instances = 1000;
  perc_id->add_option("--p", id_opts.p, "Arrival Bernoulli parameter")->capture_default_str();
  perc_id->add_option("--alpha", id_opts.alpha, "Arrival geometric parameter")->capture_default_str();
  perc_id->add_option("--q", id_opts.q, "Service Bernoulli parameter")->capture_default_str();
  perc_id->add_option("--beta", id_opts.beta, "Service geometric parameter")->capture_default_str();
  perc_id->add_option("--stages", id_stages, "Number of queues")->capture_default_str();
  perc_id->add_option("--window", window, "Slots per instance")->capture_default_str();
  perc_id->add_option("--instances", instances, "Random instances")->capture_default_str();
  perc_id->callback([&] {
    action = [&] { return cmd_perc_identity(g, id_opts, id_stages, window, instances, out); };
  });

  auto* tc = app.add_subcommand("tc", "Time constants from closed and variational forms");
  std::string variant;
  double q = 0.5, beta = 0.5;
  std::optional<double> x;
  std::optional<std::string> grid;
  tc->add_option("--variant", variant,
                 "ber|geom|exp|ber_geom|ber_exp|cont_geom|cont_exp|cont_poisson|legendre")
      ->required();
  tc->add_option("--q", q, "Bernoulli parameter of the weights")->capture_default_str();
  tc->add_option("--beta", beta, "Geometric parameter of the weights")->capture_default_str();
  tc->add_option("--x", x, "Single abscissa (prints the value)");
  tc->add_option("--grid", grid, "lo:hi:step or a comma-separated list");
  tc->callback([&] { action = [&] { return cmd_tc(g, variant, q, beta, x, grid, out); }; });

  auto* verify = app.add_subcommand("verify", "Run the self-verification suites");
  std::string suite = "all";
  verify->add_option("--suite", suite, "all|distributions|queue|tandem|perc|tc")->capture_default_str();
  verify->callback([&] { action = [&] { return cmd_verify(g, suite, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; anything else prints the error plus usage and exits 2.
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  if (g.threads == 0) g.threads = std::max(1u, std::thread::hardware_concurrency());
  try {
    return action ? action() : kInvalidInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

}  // namespace bgq::cli
