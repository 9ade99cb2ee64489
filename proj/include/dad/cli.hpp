#pragma once

// Command-line front end. run_command never touches std::cout directly so the
// tool and the tests share one code path.
//
// Exit status: 0 certified / success, 1 certificate violation, 2 usage or
// parse error.

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dad/action_lab.hpp"
#include "dad/cover_engine.hpp"
#include "dad/io.hpp"
#include "dad/metric.hpp"
#include "dad/partial_system.hpp"

namespace dad {

namespace cli {

inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kUsage = 2;

inline void print_check(std::ostream& out, const CoverCheck& c, const Cover& cover) {
  out << "certificate\n";
  out << "  scale " << c.scale << "\n";
  out << "  bound " << c.bound.str() << "\n";
  out << "  families " << cover.family_count() << " (" << cover.nonempty_families() << " nonempty)\n";
  out << "  max component " << c.max_component << "\n";
  out << "  per family";
  for (auto m : c.max_per_family) out << " " << m;
  out << "\n";
  if (c.violation) out << "violation: " << c.violation->describe() << "\n";
  out << "status " << (c.ok() ? "certified" : "violation") << "\n";
}

inline void print_schedule(std::ostream& out, const Schedule& s) {
  out << "schedule\n";
  for (std::size_t i = 0; i < s.R.size(); ++i)
    out << "  i=" << i << " r=" << s.r[i].str() << " f=" << s.f[i].str() << " R=" << s.R[i].str() << "\n";
}

inline std::vector<Point> read_subset(const std::string& path, std::size_t n) {
  std::vector<Point> pts;
  std::istringstream ss(read_file(path));
  std::string tok;
  while (ss >> tok) {
    std::size_t v = 0;
    try {
      v = std::stoull(tok);
    } catch (...) {
      throw ParseError(1, "bad point '" + tok + "' in subset file");
    }
    if (v >= n) throw ParseError(1, "subset point " + tok + " out of range");
    pts.push_back(v);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Quick axiom pass (words of length <= 4) before any work. The full check at
/// the declared horizon is the validate verb; certificates printed by the other
/// verbs come from component scans and do not depend on it.
inline PartialSystem load_system(const std::string& path) {
  auto sys = parse_system(read_file(path));
  auto rep = check_axioms(sys, std::min<std::int64_t>(sys.horizon(), 4));
  if (!rep.ok()) throw PreconditionError(path + ": axiom violation: " + rep.violations[0].detail);
  return sys;
}

inline void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") out << text;
  else write_file(path, text);
}

}  // namespace cli

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli;
  CLI::App app{"dynamic asymptotic dimension toolkit", "dad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  int status = kOk;

  std::string sys_path, cover_path, out_path, subset_path, space_path, rel_path;
  std::vector<std::string> cover_paths, controls;
  std::int64_t radius = 1, R = 2, brick = -1, max_radius = 8;
  std::uint64_t bound = 0, degree = 0, k = 15, M = 0;
  int dim = 0;
  std::string horizon;
  double eps = 0;
  std::string action;
  std::int64_t P = 1;
  std::uint64_t seed = 1;
  std::int64_t refine = 0;
  bool no_timing = false;

  auto* validate = app.add_subcommand("validate", "check the partial-action axioms");
  validate->add_option("system", sys_path)->required();
  validate->add_option("--horizon", horizon, "word length to check, or inf");

  auto* components = app.add_subcommand("components", "F^r chain components");
  components->add_option("system", sys_path)->required();
  components->add_option("--radius", radius)->required();
  components->add_option("--subset", subset_path, "file of point ids");

  auto* check = app.add_subcommand("check-cover", "certify a (d, F^r, M) cover");
  check->add_option("system", sys_path)->required();
  check->add_option("cover", cover_path)->required();
  check->add_option("--radius", radius)->required();
  check->add_option("--bound", bound)->required();

  auto* greedy = app.add_subcommand("greedy-color", "split related items into D+1 classes");
  greedy->add_option("relation", rel_path)->required();
  greedy->add_option("--degree", degree)->required();

  auto* transport = app.add_subcommand("transport", "brick cover of Z^d moved onto a free system");
  transport->add_option("system", sys_path)->required();
  transport->add_option("--dim", dim)->required();
  transport->add_option("--radius", radius)->required();
  transport->add_option("--subset", subset_path);
  transport->add_option("--out", out_path);

  auto* uni = app.add_subcommand("union", "combine covers of pieces");
  uni->add_option("system", sys_path)->required();
  uni->add_option("covers", cover_paths)->required();
  uni->add_option("--radius", radius)->required();
  uni->add_option("--control", controls, "piece:radius:bound table entry");
  uni->add_option("--brick", brick, "use the brick control function of Z^d");
  uni->add_option("--out", out_path);

  auto* poly = app.add_subcommand("poly-cover", "cover from polynomial growth");
  poly->add_option("system", sys_path)->required();
  poly->add_option("--R", R)->required();
  poly->add_option("--max-radius", max_radius, "radius of the growth fit");
  poly->add_option("--out", out_path);

  auto* ref = app.add_subcommand("refine", "reduce a polynomial-growth cover to d+1 families");
  ref->add_option("system", sys_path)->required();
  ref->add_option("--dim", dim)->required();
  ref->add_option("--radius", radius)->required();
  ref->add_option("--max-radius", max_radius);
  ref->add_option("--out", out_path);

  auto* brute = app.add_subcommand("brute-min", "exhaustive search for a (d, F^r, M) cover");
  brute->add_option("system", sys_path)->required();
  brute->add_option("--radius", radius)->required();
  brute->add_option("--dim", dim)->required();
  brute->add_option("--bound", bound)->required();
  brute->add_option("--subset", subset_path);

  auto* dec = app.add_subcommand("decompose", "(K, eps, k eps) Cantor decomposition");
  dec->add_option("space", space_path)->required();
  dec->add_option("--epsilon", eps)->required();
  dec->add_option("--k", k);
  dec->add_option("--M", M, "doubling constant; estimated when omitted");
  dec->add_option("--out", out_path);

  auto* approx = app.add_subcommand("approx", "finite approximating system of an action");
  approx->add_option("--action", action)->required();
  approx->add_option("--epsilon", eps)->required();
  approx->add_option("--radius", radius);
  approx->add_option("--out", out_path);

  auto* pipe = app.add_subcommand("pipeline", "end-to-end certified cover of an approximated action");
  pipe->add_option("--action", action)->required();
  pipe->add_option("--radius", radius);
  pipe->add_option("--epsilon", eps);
  pipe->add_option("--k", k);
  pipe->add_option("--P", P);
  pipe->add_option("--seed", seed);
  pipe->add_option("--refine", refine, "sample refinement per axis");
  pipe->add_flag("--no-timing", no_timing, "omit wall-clock figures");
  pipe->add_option("--out", out_path);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*validate) {
      auto sys = parse_system(read_file(sys_path));
      std::int64_t h = sys.horizon();
      if (!horizon.empty()) h = horizon == "inf" ? kUnboundedHorizon : std::stoll(horizon);
      auto rep = check_axioms(sys, h);
      out << "points " << sys.size() << "\ngroup " << sys.group().spec() << "\n";
      out << "horizon " << (h == kUnboundedHorizon ? std::string("inf") : std::to_string(h)) << "\n";
      out << "checked depth " << rep.checked_depth << "\n";
      for (const auto& v : rep.violations) out << "violation: " << v.detail << "\n";
      out << "status " << (rep.ok() ? "valid" : "violation") << "\n";
      return rep.ok() ? kOk : kViolation;
    }
    if (*components) {
      auto sys = load_system(sys_path);
      auto sub = subset_path.empty() ? all_points(sys) : read_subset(subset_path, sys.size());
      auto part = s_components(sys, sub, radius);
      out << "components " << part.classes.size() << "\nmax size " << part.max_size() << "\n";
      for (const auto& c : part.classes) out << "component:" << detail::join(c) << "\n";
      return kOk;
    }
    if (*check) {
      auto sys = load_system(sys_path);
      auto cf = parse_cover(read_file(cover_path), sys.size());
      auto c = check_cover(sys, cf.cover, radius, Bound(bound));
      print_check(out, c, cf.cover);
      return c.ok() ? kOk : kViolation;
    }
    if (*greedy) {
      auto rel = parse_relation(read_file(rel_path));
      try {
        auto col = greedy_color(rel, degree);
        for (std::size_t c = 0; c < col.classes.size(); ++c) out << "class " << c << ":" << detail::join(col.classes[c]) << "\n";
        out << "status certified\n";
        return kOk;
      } catch (const DegreeError& e) {
        out << "violation: " << e.what() << "\nstatus violation\n";
        return kViolation;
      }
    }
    if (*transport) {
      auto sys = load_system(sys_path);
      std::optional<std::vector<Point>> sub;
      if (!subset_path.empty()) sub = read_subset(subset_path, sys.size());
      auto t = transport_cover(zd_brick_cover(dim, radius), sys, sub);
      emit(out, out_path, serialize_cover(t.cover, t.check.scale, t.bound));
      out << "chart conflicts " << t.chart_conflicts << "\n";
      print_check(out, t.check, t.cover);
      return t.check.ok() ? kOk : kViolation;
    }
    if (*uni) {
      auto sys = load_system(sys_path);
      std::vector<Cover> pieces;
      for (const auto& p : cover_paths) pieces.push_back(parse_cover(read_file(p), sys.size()).cover);
      Schedule sched;
      if (brick >= 0) {
        auto f = brick_control(sys.group(), static_cast<int>(brick));
        sched = tabulate_schedule([&](std::size_t, const Bound& s) { return f(s); }, pieces.size() - 1,
                                  Bound(static_cast<std::uint64_t>(radius)), sys.group()).first;
      } else {
        std::vector<ControlTable> tables(pieces.size());
        for (const auto& c : controls) {
          auto a = c.find(':'), b = c.rfind(':');
          if (a == std::string::npos || a == b) throw ParseError(1, "control entries look like piece:radius:bound");
          auto i = std::stoull(c.substr(0, a));
          if (i >= tables.size()) throw ParseError(1, "control entry for missing piece " + std::to_string(i));
          tables[i].set(Bound(BigInt(c.substr(a + 1, b - a - 1))), Bound(BigInt(c.substr(b + 1))));
        }
        sched = union_schedule(tables, Bound(static_cast<std::uint64_t>(radius)), sys.group());
      }
      print_schedule(out, sched);
      try {
        auto u = union_covers(sys, pieces, radius, sched);
        emit(out, out_path, serialize_cover(u.cover, radius, sched.final_bound()));
        print_check(out, u.check, u.cover);
        return u.check.ok() ? kOk : kViolation;
      } catch (const UnionError& e) {
        out << "violation: " << e.what() << "\nstatus violation\n";
        return kViolation;
      }
    }
    if (*poly) {
      auto sys = load_system(sys_path);
      auto g = system_growth(sys, static_cast<int>(max_radius));
      if (!g.profile.fit) throw PreconditionError("no polynomial fit for the system's group");
      auto res = poly_growth_cover(sys, *g.profile.fit, R);
      emit(out, out_path, serialize_cover(res.cover, R, res.bound));
      out << "growth C=" << g.profile.fit->C << " d=" << g.profile.fit->degree << "\n";
      out << "K " << res.K << "\nm " << res.m << "\nRn " << res.Rn << "\nnet " << res.net.size() << "\n";
      out << "ratio misses " << res.ratio_misses.size() << "\n";
      print_check(out, res.check, res.cover);
      return res.check.ok() ? kOk : kViolation;
    }
    if (*ref) {
      auto sys = load_system(sys_path);
      auto g = system_growth(sys, static_cast<int>(max_radius));
      if (!g.profile.fit) throw PreconditionError("no polynomial fit for the system's group");
      auto res = refine_with_poly_outer(sys, *g.profile.fit, radius, brick_control(sys.group(), dim), brick_provider(dim));
      const auto& rr = res.refined.result;
      emit(out, out_path, serialize_cover(rr.cover, radius, res.refined.schedule.final_bound()));
      out << "outer families " << res.outer.cover.family_count() << "\n";
      print_schedule(out, res.refined.schedule);
      print_check(out, rr.check, rr.cover);
      return rr.check.ok() ? kOk : kViolation;
    }
    if (*brute) {
      auto sys = load_system(sys_path);
      std::optional<std::vector<Point>> sub;
      if (!subset_path.empty()) sub = read_subset(subset_path, sys.size());
      auto res = brute_min_cover(sys, radius, dim, bound, sub);
      out << "nodes " << res.nodes << "\n";
      if (!res.exists) {
        out << "no cover exists\nstatus violation\n";
        return kViolation;
      }
      out << "cover exists\n" << serialize_cover(*res.witness, radius, Bound(bound)) << "status certified\n";
      return kOk;
    }
    if (*dec) {
      auto space = parse_space(read_file(space_path));
      if (M == 0) M = doubling_estimate(space, {eps / 2, eps}).M;
      auto res = cantor_decompose(space, eps, k, M);
      emit(out, out_path, serialize_decomposition(res.dec));
      out << "M " << M << "\nfamilies " << res.dec.family_count() << "\nsets " << res.dec.set_count() << "\n";
      out << "family bound " << res.family_bound.str() << "\n";
      out << "max diameter " << format_fixed(res.check.max_diameter) << "\n";
      out << "min separation "
          << (std::isfinite(res.check.min_separation) ? format_fixed(res.check.min_separation) : std::string("inf")) << "\n";
      out << "status " << (res.check.ok() ? "certified" : "violation") << "\n";
      return res.check.ok() ? kOk : kViolation;
    }
    if (*approx) {
      auto ap = approximate_action(parse_action(action), radius, eps);
      emit(out, out_path, serialize_system(ap.system()));
      out << "points " << ap.system().size() << "\nspacing " << format_fixed(ap.spacing) << "\n";
      out << "equivariance error " << format_fixed(ap.equivariance_error) << "\n";
      return kOk;
    }
    if (*pipe) {
      PipelineOptions opt;
      opt.action = action;
      auto spec = parse_action(action);
      if (spec.kind == ActionSpec::Kind::Torus) {
        opt.eps = 0.04;
        opt.P = 1;
      } else if (spec.kind == ActionSpec::Kind::Cyclic) {
        opt.eps = 1.5 / static_cast<double>(spec.q[0]);
        opt.P = 1;
      }
      if (pipe->count("--epsilon")) opt.eps = eps;
      if (pipe->count("--P")) opt.P = P;
      opt.r = radius;
      opt.k = k;
      opt.seed = seed;
      if (refine > 0) opt.refine = refine;
      auto rep = pipeline_experiment(opt);
      auto text = format_report(rep, !no_timing);
      if (!out_path.empty()) write_file(out_path, text);
      out << text;
      return rep.certified && !rep.lower.exists ? kOk : kViolation;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: bad number\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return status;
}

}  // namespace dad
