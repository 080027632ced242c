#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "casray/even_engine.hpp"
#include "casray/piston.hpp"

namespace casray {
namespace cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string ordersTag(int evenOrder, int oddOrder) {
  return "e" + std::to_string(evenOrder) + ":o" + std::to_string(oddOrder);
}

constexpr const char* kUnitsNote =
    "Units: hbar*c = 1; lengths in one arbitrary unit, energies in 1/length, "
    "forces in 1/length^2.";

}  // namespace

std::vector<double> parseGrid(const std::string& spec) {
  double lo, hi, step;
  char extra;
  const int got =
      std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &extra);
  if (got != 3)
    throw UsageError("malformed grid '" + spec + "' (expected lo:hi:step)");
  if (!(step > 0.0) || hi < lo)
    throw UsageError("grid '" + spec + "' needs step > 0 and hi >= lo");
  std::vector<double> values;
  const long n = static_cast<long>((hi - lo) / step + 1e-9);
  for (long i = 0; i <= n; ++i) values.push_back(lo + i * step);
  return values;
}

RunConfig parseArgs(const std::vector<std::string>& args) {
  RunConfig cfg;
  std::string hGridSpec, aGridSpec, formatName = "csv", normalizeName = "pfa";

  CLI::App app{std::string("Ray-optics Casimir energy/force between two metal "
                           "squares next to parallel sidewalls.\n") +
               kUnitsNote};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help and exit");

  struct Sub {
    CLI::App* cmd;
    Command id;
  };
  std::vector<Sub> subs = {
      {app.add_subcommand("energy", "Energy breakdown at one geometry"),
       Command::Energy},
      {app.add_subcommand("force", "Force breakdown at one geometry"),
       Command::Force},
      {app.add_subcommand("sweep-h", "Force sweep over the sidewall gap h"),
       Command::SweepH},
      {app.add_subcommand("sweep-a", "Force sweep over the separation a"),
       Command::SweepA},
      {app.add_subcommand("piston", "Exact h=0 piston closed forms"),
       Command::Piston},
      {app.add_subcommand("convergence",
                          "Per-order convergence study at one geometry"),
       Command::Convergence},
  };
  for (Sub& s : subs) {
    CLI::App* c = s.cmd;
    c->set_help_flag("--help", "Print help and exit");
    c->add_option("--a", cfg.a, "Gap between the squares (> 0)");
    c->add_option("--s", cfg.s, "Square side (> 0)");
    c->add_option("--h", cfg.h, "Square-to-sidewall gap (>= 0)");
    c->add_option("--h-grid", hGridSpec, "h grid as lo:hi:step");
    c->add_option("--a-grid", aGridSpec, "a grid as lo:hi:step");
    c->add_option("--tol", cfg.tolerance, "Relative tolerance (default 1e-4)");
    c->add_option("--max-order", cfg.maxOrder,
                  "Cap the reflection order of both channels");
    c->add_option("--format", formatName, "Output format: csv|json");
    c->add_option("--out", cfg.outPath, "Output path (default stdout)");
    c->add_option("--threads", cfg.threads,
                  "Worker threads (default: hardware concurrency)");
    c->add_option("--normalize", normalizeName,
                  "sweep-a ratio column: pfa|piston");
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    HelpRequested help;
    help.text = app.help();
    for (const Sub& s : subs)
      if (s.cmd->parsed()) help.text = s.cmd->help();
    throw help;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (const Sub& s : subs)
    if (s.cmd->parsed()) cfg.command = s.id;

  if (formatName == "csv")
    cfg.format = Format::Csv;
  else if (formatName == "json")
    cfg.format = Format::Json;
  else
    throw UsageError("unknown --format '" + formatName + "' (csv|json)");

  if (normalizeName == "pfa")
    cfg.normalize = assembly::Normalization::Pfa;
  else if (normalizeName == "piston")
    cfg.normalize = assembly::Normalization::PistonAtSameA;
  else
    throw UsageError("unknown --normalize '" + normalizeName +
                     "' (pfa|piston)");

  if (!(cfg.a > 0.0)) throw UsageError("--a must be > 0");
  if (!(cfg.s > 0.0)) throw UsageError("--s must be > 0");
  if (!(cfg.h >= 0.0)) throw UsageError("--h must be >= 0");
  if (!(cfg.tolerance > 0.0)) throw UsageError("--tol must be > 0");
  if (cfg.maxOrder < 0) throw UsageError("--max-order must be >= 0");
  if (cfg.threads < 0) throw UsageError("--threads must be >= 0");

  if (!hGridSpec.empty()) cfg.hGrid = parseGrid(hGridSpec);
  if (!aGridSpec.empty()) cfg.aGrid = parseGrid(aGridSpec);
  if (cfg.command == Command::SweepH && cfg.hGrid.empty())
    throw UsageError("sweep-h requires --h-grid lo:hi:step");
  if (cfg.command == Command::SweepA && cfg.aGrid.empty())
    throw UsageError("sweep-a requires --a-grid lo:hi:step");
  for (double h : cfg.hGrid)
    if (!(h >= 0.0)) throw UsageError("--h-grid values must be >= 0");
  for (double a : cfg.aGrid)
    if (!(a > 0.0)) throw UsageError("--a-grid values must be > 0");
  return cfg;
}

void writeRecords(const std::vector<assembly::SweepRecord>& records,
                  Format format, std::ostream& out) {
  if (records.empty())
    throw std::invalid_argument("writeRecords: no records");
  if (format == Format::Csv) {
    out << "a,s,h,F_even,F_odd,F_pfa,F_neumann,F_dirichlet,F_total,"
           "F_total_over_Fpfa,converged,orders\n";
    for (const assembly::SweepRecord& r : records) {
      const ForceChannels& f = r.force.force;
      out << fmt(r.geometry.a) << ',' << fmt(r.geometry.s) << ','
          << fmt(r.geometry.h) << ',' << fmt(f.evenPaths) << ','
          << fmt(f.oddPaths) << ',' << fmt(f.pfa) << ',' << fmt(f.neumann)
          << ',' << fmt(f.dirichlet) << ',' << fmt(f.total) << ','
          << fmt(r.totalOverNormalization) << ',' << (r.converged ? 1 : 0)
          << ',' << ordersTag(r.evenOrder, r.oddOrder) << '\n';
    }
  } else {
    ordered_json arr = ordered_json::array();
    for (const assembly::SweepRecord& r : records) {
      const ForceChannels& f = r.force.force;
      ordered_json o;
      o["a"] = r.geometry.a;
      o["s"] = r.geometry.s;
      o["h"] = r.geometry.h;
      o["F_even"] = f.evenPaths;
      o["F_odd"] = f.oddPaths;
      o["F_pfa"] = f.pfa;
      o["F_neumann"] = f.neumann;
      o["F_dirichlet"] = f.dirichlet;
      o["F_total"] = f.total;
      o["F_total_over_Fpfa"] = r.totalOverNormalization;
      o["converged"] = r.converged;
      o["orders"] = ordersTag(r.evenOrder, r.oddOrder);
      arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
  }
}

namespace {

assembly::EngineSettings makeSettings(const RunConfig& cfg) {
  assembly::EngineSettings s;
  s.tolerance = cfg.tolerance;
  s.threads = cfg.threads;
  if (cfg.maxOrder > 0) {
    s.evenOrderCap = cfg.maxOrder;
    s.oddOrderCap = cfg.maxOrder >= 3 ? cfg.maxOrder : 3;
  }
  return s;
}

int runEnergy(const RunConfig& cfg, std::ostream& out) {
  const Geometry g(cfg.a, cfg.s, cfg.h);
  const assembly::EnergyResult res =
      assembly::energyBreakdown(g, makeSettings(cfg));
  const EnergyBreakdown& e = res.energy;
  if (cfg.format == Format::Csv) {
    out << "a,s,h,E_even,E_pfa,E_odd,E_neumann,E_dirichlet,E_total,converged,"
           "orders\n"
        << fmt(g.a) << ',' << fmt(g.s) << ',' << fmt(g.h) << ','
        << fmt(e.evenPaths) << ',' << fmt(e.pfa) << ',' << fmt(e.oddPaths)
        << ',' << fmt(e.neumann) << ',' << fmt(e.dirichlet) << ','
        << fmt(e.total) << ',' << (res.converged ? 1 : 0) << ','
        << ordersTag(res.evenOrder, res.oddOrder) << '\n';
  } else {
    ordered_json o;
    o["a"] = g.a;
    o["s"] = g.s;
    o["h"] = g.h;
    o["E_even"] = e.evenPaths;
    o["E_pfa"] = e.pfa;
    o["E_odd"] = e.oddPaths;
    o["E_neumann"] = e.neumann;
    o["E_dirichlet"] = e.dirichlet;
    o["E_total"] = e.total;
    o["converged"] = res.converged;
    o["orders"] = ordersTag(res.evenOrder, res.oddOrder);
    out << o.dump(2) << '\n';
  }
  return res.converged ? 0 : 2;
}

int runPiston(const RunConfig& cfg, std::ostream& out) {
  const double a = cfg.a, s = cfg.s;
  const Geometry g(a, s, 0.0);
  const piston::EpsteinResult z = piston::epsteinZ2({a, s, 3}, 1e-10);
  const double eEven = -(a * s / (8.0 * kPi)) * z.value;
  const double eOdd = piston::pistonOddEnergy(a, s);
  const double ePfa = even_engine::pfaEnergy(g);
  const double fEven = piston::pistonEvenForce(a, s);
  const double fOdd = piston::pistonOddForce(a, s);
  const double fPfa = even_engine::pfaForce(g);
  const double fTotal = 2.0 * (fEven + fPfa);
  if (cfg.format == Format::Csv) {
    out << "a,s,E_even,E_odd,E_pfa,F_even,F_odd,F_pfa,F_total,Z2\n"
        << fmt(a) << ',' << fmt(s) << ',' << fmt(eEven) << ',' << fmt(eOdd)
        << ',' << fmt(ePfa) << ',' << fmt(fEven) << ',' << fmt(fOdd) << ','
        << fmt(fPfa) << ',' << fmt(fTotal) << ',' << fmt(z.value) << '\n';
  } else {
    ordered_json o;
    o["a"] = a;
    o["s"] = s;
    o["E_even"] = eEven;
    o["E_odd"] = eOdd;
    o["E_pfa"] = ePfa;
    o["F_even"] = fEven;
    o["F_odd"] = fOdd;
    o["F_pfa"] = fPfa;
    o["F_total"] = fTotal;
    o["Z2"] = z.value;
    out << o.dump(2) << '\n';
  }
  return 0;
}

int runConvergence(const RunConfig& cfg, std::ostream& out) {
  assembly::EngineSettings s = makeSettings(cfg);
  s.recordConvergence = true;
  s.usePistonShortcut = false;
  const Geometry g(cfg.a, cfg.s, cfg.h);
  const assembly::EnergyResult res = assembly::energyBreakdown(g, s);
  if (cfg.format == Format::Csv) {
    out << "channel,order,partial,rel_diff\n";
    auto dump = [&](const char* name, const assembly::ChannelConvergence& c) {
      for (std::size_t i = 0; i < c.orders.size(); ++i) {
        out << name << ',' << c.orders[i] << ',' << fmt(c.partials[i]) << ','
            << (i > 0 ? fmt(c.relDiffs[i - 1]) : std::string()) << '\n';
      }
    };
    dump("even", res.report.even);
    dump("odd", res.report.odd);
  } else {
    auto channel = [](const assembly::ChannelConvergence& c) {
      ordered_json o;
      o["orders"] = c.orders;
      o["partials"] = c.partials;
      o["rel_diffs"] = c.relDiffs;
      if (c.slopeValid) o["fitted_slope"] = c.fittedSlope;
      o["terminated_by"] =
          c.terminatedBy == assembly::Terminated::Tolerance ? "tolerance"
                                                            : "cap";
      return o;
    };
    ordered_json o;
    o["even"] = channel(res.report.even);
    o["odd"] = channel(res.report.odd);
    o["converged"] = res.converged;
    out << o.dump(2) << '\n';
  }
  return res.converged ? 0 : 2;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.command) {
    case Command::Energy:
      return runEnergy(cfg, out);
    case Command::Piston:
      return runPiston(cfg, out);
    case Command::Convergence:
      return runConvergence(cfg, out);
    case Command::Force: {
      const assembly::SweepResult res = assembly::sweepA(
          {cfg.a}, cfg.s, cfg.h, makeSettings(cfg), cfg.normalize);
      writeRecords(res.records, cfg.format, out);
      return res.allConverged ? 0 : 2;
    }
    case Command::SweepH: {
      const assembly::SweepResult res =
          assembly::sweepH(cfg.a, cfg.s, cfg.hGrid, makeSettings(cfg));
      writeRecords(res.records, cfg.format, out);
      if (res.extremum)
        err << "interior |F_total| extremum at h = " << fmt(res.extremum->h)
            << " (|F| = " << fmt(res.extremum->absForce) << ")\n";
      return res.allConverged ? 0 : 2;
    }
    case Command::SweepA: {
      const assembly::SweepResult res = assembly::sweepA(
          cfg.aGrid, cfg.s, cfg.h, makeSettings(cfg), cfg.normalize);
      writeRecords(res.records, cfg.format, out);
      return res.allConverged ? 0 : 2;
    }
  }
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parseArgs(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  try {
    if (!cfg.outPath.empty()) {
      std::ofstream file(cfg.outPath);
      if (!file) {
        err << "error: cannot open output file '" << cfg.outPath << "'\n";
        return 1;
      }
      const int code = dispatch(cfg, file, err);
      file.flush();
      if (!file) {
        err << "error: write failed on '" << cfg.outPath << "'\n";
        return 1;
      }
      return code;
    }
    return dispatch(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cli
}  // namespace casray
