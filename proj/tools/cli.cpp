#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "tacnode/bridge_simulator.hpp"
#include "tacnode/errors.hpp"
#include "tacnode/finite_kernel.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/parallel.hpp"
#include "tacnode/tacnode_kernel.hpp"

namespace tacnode::cli {

namespace {

// ---- output -----------------------------------------------------------------

std::string fmt_num(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct Record;
using Table = std::vector<Record>;
using Value = std::variant<double, long long, bool, std::string, std::nullptr_t, Table>;

// Fields keep insertion order so output is byte-stable.
struct Record {
  std::vector<std::pair<std::string, Value>> fields;
  Record& add(std::string key, Value v) {
    fields.emplace_back(std::move(key), std::move(v));
    return *this;
  }
};

std::string scalar_text(const Value& v, bool json) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) return fmt_num(x);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return json ? quote(x) : x;
        else if constexpr (std::is_same_v<T, std::nullptr_t>) return json ? "null" : "";
        else return "";
      },
      v);
}

void write_json(std::ostream& os, const Record& r) {
  os << '{';
  bool first = true;
  for (const auto& [key, v] : r.fields) {
    if (!first) os << ',';
    first = false;
    os << quote(key) << ':';
    if (const auto* t = std::get_if<Table>(&v)) {
      os << '[';
      for (std::size_t i = 0; i < t->size(); ++i) {
        if (i) os << ',';
        write_json(os, (*t)[i]);
      }
      os << ']';
    } else {
      os << scalar_text(v, true);
    }
  }
  os << '}';
}

void write_csv_rows(std::ostream& os, const Table& rows) {
  if (rows.empty()) return;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i)
    os << (i ? "," : "") << rows[0].fields[i].first;
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.fields.size(); ++i)
      os << (i ? "," : "") << scalar_text(r.fields[i].second, false);
    os << '\n';
  }
}

// CSV of a record: a nested table (if any) becomes the rows; otherwise one row of scalars.
void write_csv(std::ostream& os, const Record& r) {
  for (const auto& [key, v] : r.fields)
    if (const auto* t = std::get_if<Table>(&v)) return write_csv_rows(os, *t);
  write_csv_rows(os, Table{r});
}

// ---- parsing helpers --------------------------------------------------------

struct Window3 {
  double time, lo, hi;
};

Window3 parse_triple(const std::string& text, const char* what) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> vals;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "expected T:LO:HI, got '" + text + "'");
    }
  }
  if (vals.size() != 3) throw CLI::ValidationError(what, "expected T:LO:HI, got '" + text + "'");
  return {vals[0], vals[1], vals[2]};
}

struct Common {
  std::string format = "json";
  unsigned threads = 1;
  std::optional<int> quad_order;
  std::optional<double> cutoff;
};

struct PointArgs {
  double lambda = 1.0, sigma = 0.0;
  double tau1 = 0.0, xi1 = 0.0, tau2 = 0.0, xi2 = 0.0;
};

void add_point_options(CLI::App* sub, PointArgs& p, bool required) {
  auto* l = sub->add_option("--lambda", p.lambda, "curvature ratio lambda > 0");
  auto* s = sub->add_option("--sigma", p.sigma, "interaction strength");
  sub->add_option("--tau1", p.tau1);
  sub->add_option("--xi1", p.xi1);
  sub->add_option("--tau2", p.tau2);
  sub->add_option("--xi2", p.xi2);
  if (required) {
    l->required();
    s->required();
  }
}

KernelOptions kernel_options(const Common& c) {
  KernelOptions o;
  if (c.quad_order) {
    o.resolvent_order = *c.quad_order;
    o.mu_order = std::max(20, static_cast<int>(std::lround(*c.quad_order * 6.0 / 7.0)));
  }
  if (c.cutoff) o.resolvent_cutoff = o.mu_cutoff = *c.cutoff;
  o.threads = c.threads;
  return o;
}

finite::FiniteOptions finite_options(const Common& c) {
  finite::FiniteOptions o;
  if (c.quad_order) o.nystrom_order = *c.quad_order;
  if (c.cutoff) o.nystrom_cutoff = *c.cutoff;
  return o;
}

Record point_record(const char* command, const PointArgs& p) {
  Record r;
  r.add("command", std::string(command))
      .add("lambda", p.lambda)
      .add("sigma", p.sigma)
      .add("tau1", p.tau1)
      .add("xi1", p.xi1)
      .add("tau2", p.tau2)
      .add("xi2", p.xi2);
  return r;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string quantity = "kernel";
  std::string param;
  double from = 0.0, to = 1.0;
  int points = 11;
  double s = 0.0;
  int n = 16;
  double tau = 0.0, lo = -1.0, hi = 1.0;
  int gap_order = 40;
};

double sweep_value(const SweepArgs& a, PointArgs p, double x, const Common& c) {
  auto set = [&](const std::string& name, double v) {
    if (name == "lambda") p.lambda = v;
    else if (name == "sigma") p.sigma = v;
    else if (name == "tau1") p.tau1 = v;
    else if (name == "xi1") p.xi1 = v;
    else if (name == "tau2") p.tau2 = v;
    else if (name == "xi2") p.xi2 = v;
    else return false;
    return true;
  };
  SweepArgs w = a;
  if (!set(a.param, x)) {
    if (a.param == "s") w.s = x;
    else if (a.param == "tau") w.tau = x;
    else if (a.param == "lo") w.lo = x;
    else if (a.param == "hi") w.hi = x;
  }
  Common serial = c;
  serial.threads = 1;
  const TacnodeParams params(p.lambda, p.sigma);
  const ScaledPoint p1{p.tau1, p.xi1}, p2{p.tau2, p.xi2};
  if (a.quantity == "kernel") return TacnodeKernel(params, kernel_options(serial)).value(p1, p2);
  if (a.quantity == "kernel-alt")
    return TacnodeKernel(params, kernel_options(serial)).value_alt(p1, p2);
  if (a.quantity == "gap")
    return TacnodeKernel(params, kernel_options(serial))
        .gap_probability({GapWindow(w.tau, w.lo, w.hi)}, w.gap_order)
        .value;
  if (a.quantity == "tw2") {
    fredholm::TracyWidomOptions o;
    if (c.quad_order) o.order = *c.quad_order;
    if (c.cutoff) o.cutoff = *c.cutoff;
    return fredholm::tracy_widom_f2(w.s, o);
  }
  return finite::scaled_finite_kernel(a.n, params, p1, p2, finite_options(serial));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerics for the asymmetric tacnode process", "tacnode"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; flags take precedence");

  Common common;
  app.add_option("--format", common.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", common.threads, "worker threads")
      ->envname("TACNODE_THREADS")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--quad-order", common.quad_order, "quadrature order of the main discretization")
      ->envname("TACNODE_QUAD_ORDER")
      ->check(CLI::Range(2, 100000));
  app.add_option("--cutoff", common.cutoff, "truncation length of semi-infinite domains")
      ->check(CLI::PositiveNumber);

  // kernel
  PointArgs kp;
  bool alt = false, check_alt = false;
  auto* kernel = app.add_subcommand("kernel", "evaluate the tacnode kernel");
  add_point_options(kernel, kp, true);
  auto* alt_flag = kernel->add_flag("--alt", alt, "use the single-integral formulation");
  kernel->add_flag("--check-alt", check_alt, "report both formulations")->excludes(alt_flag);

  // gap
  PointArgs gp;
  std::vector<std::string> windows;
  auto* gap = app.add_subcommand("gap", "gap probability det(1 - L) over windows");
  gap->add_option("--lambda", gp.lambda)->required();
  gap->add_option("--sigma", gp.sigma)->required();
  gap->add_option("--window", windows, "TAU:LO:HI (repeatable)")->required()->allow_extra_args(false);

  // tw2
  double tw_s = 0.0;
  auto* tw2 = app.add_subcommand("tw2", "Tracy-Widom GUE distribution F2(s)");
  tw2->add_option("--s", tw_s)->required();

  // finite
  PointArgs fp;
  int fin_n = 16;
  bool compare = false;
  auto* fin = app.add_subcommand("finite", "scaled finite-n kernel");
  fin->add_option("--n", fin_n)->required()->check(CLI::Range(1, finite::kMaxParticles));
  add_point_options(fin, fp, true);
  fin->add_flag("--compare", compare, "also report the limit kernel and the error");

  // converge
  PointArgs cp;
  std::vector<int> n_list;
  auto* conv = app.add_subcommand("converge", "finite-n convergence table");
  add_point_options(conv, cp, true);
  conv->add_option("--n-list", n_list)->required()->delimiter(',');

  // simulate
  int sim_n = 1, sim_m = 1, steps = 16;
  double a1 = -1.0, a2 = 1.0;
  std::size_t samples = 1000, max_prop = 0;
  std::uint64_t seed = 0;
  std::string gap_spec, dump;
  auto* sim = app.add_subcommand("simulate", "sample non-colliding bridge families");
  sim->add_option("--n", sim_n)->required()->check(CLI::PositiveNumber);
  sim->add_option("--m", sim_m)->required()->check(CLI::PositiveNumber);
  sim->add_option("--a1", a1)->required();
  sim->add_option("--a2", a2)->required();
  sim->add_option("--steps", steps)->required();
  sim->add_option("--samples", samples)->required();
  sim->add_option("--seed", seed)->required();
  sim->add_option("--max-proposals", max_prop, "default 1000 * samples");
  sim->add_option("--gap", gap_spec, "T:LO:HI empirical gap at a grid time");
  sim->add_option("--dump-paths", dump, "CSV file: sample,path,time,value");

  // sweep
  PointArgs sp;
  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "tabulate a scalar output over a parameter range (CSV)");
  add_point_options(sweep, sp, false);
  sweep->add_option("--quantity", sw.quantity)
      ->check(CLI::IsMember({"kernel", "kernel-alt", "gap", "tw2", "finite"}));
  sweep->add_option("--param", sw.param)
      ->required()
      ->check(CLI::IsMember({"lambda", "sigma", "tau1", "xi1", "tau2", "xi2", "s", "tau", "lo", "hi"}));
  sweep->add_option("--from", sw.from)->required();
  sweep->add_option("--to", sw.to)->required();
  sweep->add_option("--points", sw.points)->required()->check(CLI::Range(1, 100000));
  sweep->add_option("--s", sw.s, "tw2 argument");
  sweep->add_option("--n", sw.n, "finite: particle count")->check(CLI::Range(1, finite::kMaxParticles));
  sweep->add_option("--tau", sw.tau, "gap: window time");
  sweep->add_option("--lo", sw.lo, "gap: window lower end");
  sweep->add_option("--hi", sw.hi, "gap: window upper end");
  sweep->add_option("--gap-order", sw.gap_order)->check(CLI::Range(2, 1000));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    // CLI11 drops environment values that fail validation; treat them as usage errors.
    for (const CLI::Option* opt : app.get_options()) {
      const std::string& env = opt->get_envname();
      if (env.empty() || opt->count() > 0) continue;
      const char* raw = std::getenv(env.c_str());
      if (raw != nullptr && *raw != '\0')
        throw CLI::ValidationError(env, std::string("invalid value '") + raw + "'");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  Record rec;
  bool csv_override = false;
  try {
    if (cmd == "kernel") {
      const TacnodeKernel k(TacnodeParams(kp.lambda, kp.sigma), kernel_options(common));
      const ScaledPoint p1{kp.tau1, kp.xi1}, p2{kp.tau2, kp.xi2};
      rec = point_record("kernel", kp);
      if (check_alt) {
        const double v = k.value(p1, p2), va = k.value_alt(p1, p2);
        rec.add("value", v).add("value_alt", va).add("abs_diff", std::abs(v - va));
      } else {
        rec.add("formulation", std::string(alt ? "single-integral" : "resolvent"))
            .add("value", alt ? k.value_alt(p1, p2) : k.value(p1, p2));
      }
    } else if (cmd == "gap") {
      std::vector<GapWindow> ws;
      Table wt;
      for (const auto& w : windows) {
        const Window3 t = parse_triple(w, "--window");
        if (!(t.lo < t.hi)) throw CLI::ValidationError("--window", "needs LO < HI");
        ws.emplace_back(t.time, t.lo, t.hi);
        wt.push_back(Record().add("tau", t.time).add("lo", t.lo).add("hi", t.hi));
      }
      KernelOptions ko = kernel_options(common);
      const int order = common.quad_order.value_or(40);
      ko.resolvent_order = KernelOptions{}.resolvent_order;
      ko.mu_order = KernelOptions{}.mu_order;
      const auto g = TacnodeKernel(TacnodeParams(gp.lambda, gp.sigma), ko).gap_probability(ws, order);
      rec.add("command", std::string("gap"))
          .add("lambda", gp.lambda)
          .add("sigma", gp.sigma)
          .add("order", static_cast<long long>(order))
          .add("value", g.value)
          .add("outside_unit_interval", g.outside_unit_interval);
      if (common.format == "json") rec.add("windows", wt);
    } else if (cmd == "tw2") {
      fredholm::TracyWidomOptions o;
      if (common.quad_order) o.order = *common.quad_order;
      if (common.cutoff) o.cutoff = *common.cutoff;
      rec.add("command", std::string("tw2")).add("s", tw_s).add("value", fredholm::tracy_widom_f2(tw_s, o));
    } else if (cmd == "finite") {
      const TacnodeParams params(fp.lambda, fp.sigma);
      const ScaledPoint p1{fp.tau1, fp.xi1}, p2{fp.tau2, fp.xi2};
      const double v = finite::scaled_finite_kernel(fin_n, params, p1, p2, finite_options(common));
      rec = point_record("finite", fp);
      rec.add("n", static_cast<long long>(fin_n))
          .add("m", static_cast<long long>(std::lround(fp.lambda * fin_n)))
          .add("value", v);
      if (compare) {
        const double lim = full_kernel(params, p1, p2);
        rec.add("limit", lim).add("err", std::abs(v - lim));
      }
    } else if (cmd == "converge") {
      const auto rep = finite::convergence_report(n_list, TacnodeParams(cp.lambda, cp.sigma),
                                                  {cp.tau1, cp.xi1}, {cp.tau2, cp.xi2},
                                                  common.threads, finite_options(common));
      Table rows;
      for (const auto& row : rep.rows)
        rows.push_back(Record()
                           .add("n", static_cast<long long>(row.n))
                           .add("finite_value", row.finite_value)
                           .add("err", row.err));
      rec = point_record("converge", cp);
      rec.add("limit", rep.limit_value);
      if (rep.slope) rec.add("slope", *rep.slope);
      else rec.add("slope", nullptr);
      rec.add("rows", rows);
    } else if (cmd == "simulate") {
      const FiniteSystemConfig cfg(sim_n, sim_m, a1, a2, 1.0);
      const std::size_t cap = max_prop ? max_prop : 1000 * samples;
      const auto ens = sim::sample_bridges(cfg, steps, samples, seed, cap, common.threads);
      rec.add("command", std::string("simulate"))
          .add("n", static_cast<long long>(sim_n))
          .add("m", static_cast<long long>(sim_m))
          .add("a1", a1)
          .add("a2", a2)
          .add("steps", static_cast<long long>(steps))
          .add("seed", std::to_string(seed))
          .add("samples_accepted", static_cast<long long>(ens.samples()))
          .add("samples_proposed", static_cast<long long>(ens.proposals()))
          .add("acceptance_rate", ens.acceptance_rate());
      if (!gap_spec.empty()) {
        const Window3 t = parse_triple(gap_spec, "--gap");
        const auto g = sim::empirical_gap(ens, t.time, t.lo, t.hi);
        rec.add("gap_time", t.time).add("gap_lo", t.lo).add("gap_hi", t.hi)
            .add("p_hat", g.p_hat).add("stderr", g.stderr_);
      }
      if (!dump.empty()) {
        std::ofstream f(dump);
        if (!f) throw Error("simulate: cannot open " + dump);
        f << "sample,path,time,value\n";
        const auto& grid = ens.time_grid();
        for (std::size_t s = 0; s < ens.samples(); ++s)
          for (int p = 0; p < ens.paths(); ++p)
            for (std::size_t k = 0; k < grid.size(); ++k)
              f << s << ',' << p << ',' << fmt_num(grid[k]) << ',' << fmt_num(ens.at(s, p, k))
                << '\n';
      }
    } else if (cmd == "sweep") {
      if (sw.param == "s" && sw.quantity != "tw2")
        throw CLI::ValidationError("--param", "s is only swept with --quantity tw2");
      std::vector<double> xs(static_cast<std::size_t>(sw.points)), ys(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = sw.points == 1 ? sw.from
                               : sw.from + (sw.to - sw.from) * double(i) / double(sw.points - 1);
      parallel_for(xs.size(), common.threads,
                   [&](std::size_t i) { ys[i] = sweep_value(sw, sp, xs[i], common); });
      Table rows;
      for (std::size_t i = 0; i < xs.size(); ++i)
        rows.push_back(Record().add(sw.param, xs[i]).add(sw.quantity, ys[i]));
      rec.add("command", std::string("sweep")).add("rows", rows);
      csv_override = common.format != "json" || !app.get_option("--format")->count();
    }
  } catch (const CLI::ParseError& e) {
    err << "tacnode " << cmd << ": usage: " << e.what() << '\n';
    return 2;
  } catch (const AcceptanceError& e) {
    err << "tacnode " << cmd << ": bridge_simulator: " << e.what()
        << " (acceptance rate " << e.acceptance_rate() << ")\n";
    return 1;
  } catch (const Error& e) {
    err << "tacnode " << cmd << " failed: " << e.what() << '\n';
    return 1;
  }

  if (common.format == "csv" || csv_override) write_csv(out, rec);
  else {
    write_json(out, rec);
    out << '\n';
  }
  return 0;
}

}  // namespace tacnode::cli
