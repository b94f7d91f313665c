#include "nilconj/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nilconj/algebra.hpp"
#include "nilconj/conjugate.hpp"
#include "nilconj/error.hpp"
#include "nilconj/locus.hpp"
#include "nilconj/oracle.hpp"
#include "nilconj/spectral.hpp"

namespace nilconj::cli {

namespace {

using nlohmann::json;

Vec parse_vector(const std::string& text, int dim, const std::string& name) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--" + name + ": '" + cell + "' is not a number");
    }
  }
  if (static_cast<int>(vals.size()) != dim)
    throw Error(ErrorCode::InvalidArgument,
                "--" + name + " needs " + std::to_string(dim) + " components, got " + std::to_string(vals.size()));
  return Eigen::Map<Vec>(vals.data(), dim);
}

std::string format_vector(const Vec& v) {
  std::ostringstream os;
  os.precision(10);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
  return os.str();
}

json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<double> a_grid(double a_max, int count) {
  if (count <= 1) return {0.0};
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = -a_max + 2.0 * a_max * i / (count - 1);
  return out;
}

struct Settings {
  std::string algebra;
  std::string z0;
  std::string x0;
  double t_max = 10.0;
  bool json = false;
  std::uint64_t seed = 0;
  ConjugateOptions conj;
  double rank_tol = kOracleRankTol;
  double dt_tol = kCompareTol;
  int steps = 0;
  std::string witness;
  std::string csv;
  int random = 0;
  std::string mode = "Z";
  int grid = 16;
  double a_max = 0.5;
  int a_count = 9;
  std::string out_path;
  std::string format = "csv";
};

void echo_closed_tolerances(std::ostream& out, const Settings& s) {
  out << "# tolerances merge=" << s.conj.merge_tol << " equality=" << s.conj.equality_tol
      << " bisection=" << s.conj.bisection_tol << " tangent=" << s.conj.tangent_tol << '\n';
}

void echo_oracle_tolerances(std::ostream& out, const Settings& s, int steps) {
  out << "# oracle steps=" << steps << " rank_tol=" << s.rank_tol << '\n';
}

GeodesicSpec make_geodesic(const MetricLieAlgebra& alg, const Settings& s) {
  const Vec z0 = s.z0.empty() ? Vec::Zero(alg.dim_center()) : parse_vector(s.z0, alg.dim_center(), "z0");
  const Vec x0 = s.x0.empty() ? Vec::Zero(alg.dim_v()) : parse_vector(s.x0, alg.dim_v(), "x0");
  return GeodesicSpec(alg, z0, x0);
}

int steps_for(const Settings& s, double t_max) { return s.steps > 0 ? s.steps : default_steps(t_max); }

// ---------------------------------------------------------------------------

int cmd_validate(const Settings& s, std::ostream& out) {
  const MetricLieAlgebra alg = resolve_algebra(s.algebra);
  Eigen::SelfAdjointEigenSolver<Mat> eig(alg.gram(), Eigen::EigenvaluesOnly);
  int pos = 0;
  for (double e : eig.eigenvalues()) pos += e > 0;
  const int neg = alg.dim() - pos;
  if (s.json) {
    out << json{{"name", alg.name()}, {"dim_center", alg.dim_center()}, {"dim_v", alg.dim_v()},
                {"signature", {pos, neg}}, {"valid", true}}.dump(2)
        << '\n';
  } else {
    out << alg.name() << ": dim z = " << alg.dim_center() << ", dim v = " << alg.dim_v() << ", signature (" << pos
        << ", " << neg << "), valid\n";
  }
  return kExitOk;
}

int cmd_spectrum(const Settings& s, std::ostream& out) {
  const MetricLieAlgebra alg = resolve_algebra(s.algebra);
  const Vec z0 = parse_vector(s.z0, alg.dim_center(), "z0");
  const Spectrum spec = spectrum(j_map(alg, z0));
  if (s.json) {
    auto blocks = [](const std::vector<EigenBlock>& bs) {
      json a = json::array();
      for (const auto& b : bs) a.push_back({{"lambda", b.lambda}, {"mult", b.mult}, {"algebraic_mult", b.algebraic_mult}});
      return a;
    };
    json complex = json::array();
    for (const auto& c : spec.complex_eigenvalues) complex.push_back({c.real(), c.imag()});
    out << json{{"dim", spec.dim},
                {"negative", blocks(spec.neg)},
                {"positive", blocks(spec.pos)},
                {"zero_mult", spec.zero_mult},
                {"zero_plain", spec.zero_plain},
                {"diagonalizable", spec.diagonalizable},
                {"complex", complex}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  out << "# spectrum of J^2 for J = J_z0, algebra=" << alg.name() << " z0=" << format_vector(z0) << '\n';
  out << std::setw(8) << "sign" << std::setw(22) << "lambda" << std::setw(6) << "mult" << '\n';
  out << std::setprecision(15);
  for (const auto& b : spec.neg) out << std::setw(8) << "-l^2" << std::setw(22) << b.lambda << std::setw(6) << b.mult << '\n';
  for (const auto& b : spec.pos) out << std::setw(8) << "+l^2" << std::setw(22) << b.lambda << std::setw(6) << b.mult << '\n';
  out << "zero_mult=" << spec.zero_mult << " zero_plain=" << spec.zero_plain
      << " diagonalizable=" << (spec.diagonalizable ? "yes" : "no") << " complex=" << spec.complex_eigenvalues.size()
      << '\n';
  return kExitOk;
}

int cmd_conjugate(const Settings& s, std::ostream& out) {
  const MetricLieAlgebra alg = resolve_algebra(s.algebra);
  const GeodesicSpec geo = make_geodesic(alg, s);
  ConjugateOptions opts = s.conj;
  opts.attach_witnesses = !s.witness.empty();
  const auto times = conjugate_times(geo, s.t_max, opts);

  std::vector<std::string> witness_paths;
  for (std::size_t k = 0; k < times.size() && opts.attach_witnesses; ++k) {
    const std::string path = s.witness + std::to_string(k) + ".csv";
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_field_csv(f, *times[k].certificate);
    witness_paths.push_back(path);
  }

  if (s.json) {
    json arr = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
      json e{{"t", times[k].t},
             {"mult", times[k].multiplicity},
             {"branch", std::string(to_string(times[k].branch))},
             {"tangent", times[k].tangent}};
      if (!witness_paths.empty()) e["witness"] = witness_paths[k];
      arr.push_back(e);
    }
    out << arr.dump(2) << '\n';
    return kExitOk;
  }
  out << "# conjugate algebra=" << alg.name() << " z0=" << format_vector(geo.z0()) << " x0=" << format_vector(geo.x0())
      << " tmax=" << s.t_max << '\n';
  echo_closed_tolerances(out, s);
  out << std::setw(22) << "t" << std::setw(6) << "mult" << "  branch\n" << std::setprecision(15);
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << std::setw(22) << times[k].t << std::setw(6) << times[k].multiplicity << "  " << to_string(times[k].branch)
        << (times[k].tangent ? " (tangent)" : "");
    if (!witness_paths.empty()) out << "  " << witness_paths[k];
    out << '\n';
  }
  if (times.empty()) out << "no conjugate points in (0, " << s.t_max << "]\n";
  return kExitOk;
}

json detected_json(const std::vector<DetectedTime>& d) {
  json arr = json::array();
  for (const auto& e : d)
    arr.push_back({{"t", e.t}, {"mult", e.multiplicity}, {"sigma_min", e.sigma_min}, {"sigma_max", e.sigma_max}});
  return arr;
}

int cmd_oracle(const Settings& s, std::ostream& out) {
  const MetricLieAlgebra alg = resolve_algebra(s.algebra);
  const GeodesicSpec geo = make_geodesic(alg, s);
  const int steps = steps_for(s, s.t_max);
  const Propagator prop = integrate_propagator(geo, s.t_max, steps);
  const auto detected = detect_conjugate(geo, prop, s.t_max, s.rank_tol);
  if (!s.csv.empty()) {
    std::ofstream f(s.csv);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + s.csv + "' for writing");
    write_sigma_csv(f, sigma_scan(prop));
  }
  if (s.json) {
    out << json{{"steps", steps}, {"rank_tol", s.rank_tol}, {"numerical_only", true}, {"times", detected_json(detected)}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  out << "# oracle (numerical) algebra=" << alg.name() << " z0=" << format_vector(geo.z0())
      << " x0=" << format_vector(geo.x0()) << " tmax=" << s.t_max << '\n';
  echo_oracle_tolerances(out, s, steps);
  out << std::setw(22) << "t" << std::setw(6) << "mult" << std::setw(14) << "sigma_min" << '\n';
  for (const auto& d : detected)
    out << std::setprecision(15) << std::setw(22) << d.t << std::setw(6) << d.multiplicity << std::setprecision(4)
        << std::setw(14) << d.sigma_min << '\n';
  if (detected.empty()) out << "no rank drop in (0, " << s.t_max << "]\n";
  return kExitOk;
}

int cmd_compare(const Settings& s, std::ostream& out) {
  std::vector<RandomCase> cases;
  if (s.random > 0) {
    cases = random_cases(s.random, s.seed);
  } else {
    const MetricLieAlgebra alg = resolve_algebra(s.algebra);
    const GeodesicSpec geo = make_geodesic(alg, s);
    cases.push_back({s.algebra, geo.z0(), geo.x0(), s.t_max});
  }

  bool all_ok = true;
  json doc{{"dt_tol", s.dt_tol}, {"rank_tol", s.rank_tol}, {"cases", json::array()}};
  if (!s.json) {
    out << "# compare closed form vs oracle, cases=" << cases.size() << '\n';
    echo_closed_tolerances(out, s);
    out << "# dt_tol=" << s.dt_tol << " rank_tol=" << s.rank_tol << '\n';
  }
  for (const auto& c : cases) {
    const GeodesicSpec geo(resolve_algebra(c.algebra), c.z0, c.x0);
    const auto closed = conjugate_times(geo, c.t_max, s.conj);
    const auto detected = detect_conjugate(geo, c.t_max, steps_for(s, c.t_max), s.rank_tol);
    const ComparisonReport r = compare(closed, detected, s.dt_tol);
    all_ok = all_ok && r.ok();

    if (s.json) {
      auto pairs = [](const std::vector<ComparisonReport::Match>& ms) {
        json a = json::array();
        for (const auto& m : ms)
          a.push_back({{"t_closed", m.closed.t},
                       {"t_oracle", m.detected.t},
                       {"mult_closed", m.closed.multiplicity},
                       {"mult_oracle", m.detected.multiplicity}});
        return a;
      };
      json missing = json::array();
      for (const auto& m : r.missing) missing.push_back({{"t", m.t}, {"mult", m.multiplicity}});
      doc["cases"].push_back({{"algebra", c.algebra},
                              {"z0", to_json(c.z0)},
                              {"x0", to_json(c.x0)},
                              {"t_max", c.t_max},
                              {"ok", r.ok()},
                              {"matched", pairs(r.matched)},
                              {"multiplicity_mismatch", pairs(r.multiplicity_mismatch)},
                              {"missing", missing},
                              {"spurious", detected_json(r.spurious)}});
      continue;
    }
    out << (r.ok() ? "ok          " : "DISCREPANCY ") << c.algebra << " z0=" << format_vector(c.z0)
        << " x0=" << format_vector(c.x0) << " matched=" << r.matched.size() << '\n';
    out << std::setprecision(15);
    for (const auto& m : r.missing) out << "  missing   t=" << m.t << " mult=" << m.multiplicity << '\n';
    for (const auto& d : r.spurious) out << "  spurious  t=" << d.t << " mult=" << d.multiplicity << '\n';
    for (const auto& m : r.multiplicity_mismatch)
      out << "  mult      t=" << m.closed.t << " closed=" << m.closed.multiplicity
          << " oracle=" << m.detected.multiplicity << '\n';
    out << std::setprecision(6);
  }
  if (s.json) {
    doc["ok"] = all_ok;
    out << doc.dump(2) << '\n';
  } else {
    out << (all_ok ? "all cases agree\n" : "discrepancies found\n");
  }
  return all_ok ? kExitOk : kExitDiscrepancy;
}

void emit_samples(const Settings& s, const std::vector<LocusSample>& samples, std::ostream& out) {
  const ExportFormat format = s.format == "obj" ? ExportFormat::Obj : ExportFormat::Csv;
  if (!s.out_path.empty()) {
    export_samples(samples, s.out_path, format);
  } else if (s.json) {
    json arr = json::array();
    for (const auto& x : samples)
      arr.push_back({{"a", x.a},
                     {"t", x.t},
                     {"delta", x.delta},
                     {"x0", to_json(x.x0)},
                     {"point", {{"z", to_json(x.point.z)}, {"v", to_json(x.point.v)}}}});
    out << arr.dump(2) << '\n';
  } else if (format == ExportFormat::Obj) {
    write_samples_obj(out, samples);
  } else {
    write_samples_csv(out, samples);
  }
}

int cmd_locus(const Settings& s, std::ostream& out, std::ostream& err) {
  const MetricLieAlgebra alg = resolve_algebra(s.algebra);
  std::vector<Vec> directions;
  if (!s.x0.empty())
    directions.push_back(parse_vector(s.x0, alg.dim_v(), "x0"));
  else
    directions = direction_grid(alg.dim_v(), s.grid, s.seed);

  std::vector<LocusSample> samples;
  if (s.mode == "Z") {
    samples = sample_Z(alg, directions);
  } else {
    const auto grid = a_grid(s.a_max, s.a_count);
    ContinuationOptions opts;
    opts.a_max = s.a_max;
    for (const auto& x : directions) {
      if (!delta(alg, x)) continue;
      try {
        const auto track = continuation(alg, x, grid, opts);
        samples.insert(samples.end(), track.begin(), track.end());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RootLost) throw;
        err << "warning: direction " << format_vector(x) << ": " << e.what() << '\n';
      }
    }
  }
  emit_samples(s, samples, out);
  if (!s.out_path.empty() && !s.json) out << "wrote " << samples.size() << " samples to " << s.out_path << '\n';
  return kExitOk;
}

int cmd_continuation(const Settings& s, std::ostream& out) {
  const MetricLieAlgebra alg = resolve_algebra(s.algebra);
  const Vec x0 = parse_vector(s.x0, alg.dim_v(), "x0");
  ContinuationOptions opts;
  opts.a_max = s.a_max;
  const auto samples = continuation(alg, x0, a_grid(s.a_max, s.a_count), opts);
  const double t0 = 2.0 * std::sqrt(3.0) / delta(alg, normalize_direction(alg, x0)).value();
  if (s.json || !s.out_path.empty()) {
    emit_samples(s, samples, out);
    return kExitOk;
  }
  out << "# continuation algebra=" << alg.name() << " x0=" << format_vector(x0) << " amax=" << s.a_max
      << " t(0)=" << std::setprecision(15) << t0 << '\n';
  out << std::setw(10) << "a" << std::setw(22) << "t" << std::setw(16) << "t - t(0)" << '\n';
  for (const auto& x : samples)
    out << std::setprecision(6) << std::setw(10) << x.a << std::setprecision(15) << std::setw(22) << x.t
        << std::setprecision(6) << std::setw(16) << x.t - t0 << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conjugate points on 2-step nilpotent metric Lie groups", "nilconj"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Settings s;

  auto algebra = [&](CLI::App* sub) {
    sub->add_option("--algebra", s.algebra, "fixture name or algebra JSON file")->required();
    sub->add_flag("--json", s.json, "machine-readable output");
  };
  auto geodesic = [&](CLI::App* sub) {
    sub->add_option("--z0", s.z0, "central part of the initial velocity, comma separated");
    sub->add_option("--x0", s.x0, "horizontal part of the initial velocity, comma separated");
    sub->add_option("--tmax", s.t_max, "time horizon")->check(CLI::PositiveNumber);
  };
  auto closed_tols = [&](CLI::App* sub) {
    sub->add_option("--merge-tol", s.conj.merge_tol, "relative merge tolerance for lattice times");
    sub->add_option("--equality-tol", s.conj.equality_tol, "tolerance of the <Jx0,v> = <gdot,gdot> test");
    sub->add_option("--bisection-tol", s.conj.bisection_tol, "root bracket width");
    sub->add_option("--tangent-tol", s.conj.tangent_tol, "|g - <gdot,gdot>| bound for double roots");
  };
  auto oracle_tols = [&](CLI::App* sub) {
    sub->add_option("--steps", s.steps, "RK4 steps (default 256 per unit time)");
    sub->add_option("--rank-tol", s.rank_tol, "relative singular value threshold");
  };

  CLI::App* validate = app.add_subcommand("validate", "check an algebra document");
  algebra(validate);

  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "spectrum of J_z0^2");
  algebra(spectrum_cmd);
  spectrum_cmd->add_option("--z0", s.z0, "central vector")->required();

  CLI::App* conjugate = app.add_subcommand("conjugate", "closed-form conjugate times");
  algebra(conjugate);
  geodesic(conjugate);
  closed_tols(conjugate);
  conjugate->add_option("--witness", s.witness, "write witness Jacobi fields to <prefix><k>.csv");

  CLI::App* oracle = app.add_subcommand("oracle", "numerical conjugate times from the Jacobi ODE");
  algebra(oracle);
  geodesic(oracle);
  oracle_tols(oracle);
  oracle->add_option("--csv", s.csv, "write (t, sigma_min, sigma_max) to this file");

  CLI::App* compare_cmd = app.add_subcommand("compare", "closed form vs oracle");
  compare_cmd->add_option("--algebra", s.algebra, "fixture name or algebra JSON file");
  compare_cmd->add_flag("--json", s.json, "machine-readable output");
  geodesic(compare_cmd);
  closed_tols(compare_cmd);
  oracle_tols(compare_cmd);
  compare_cmd->add_option("--dt-tol", s.dt_tol, "matching tolerance in t");
  compare_cmd->add_option("--random", s.random, "compare this many seeded random geodesics instead");
  compare_cmd->add_option("--seed", s.seed, "random seed");

  CLI::App* locus = app.add_subcommand("locus", "sample the conjugate locus");
  algebra(locus);
  locus->add_option("--mode", s.mode, "Z or tube")->check(CLI::IsMember({"Z", "tube"}));
  locus->add_option("--x0", s.x0, "single direction");
  locus->add_option("--grid", s.grid, "number of grid directions")->check(CLI::PositiveNumber);
  locus->add_option("--seed", s.seed, "seed for directions in dim v > 3");
  locus->add_option("--amax", s.a_max, "largest |a| in tube mode")->check(CLI::NonNegativeNumber);
  locus->add_option("--a-count", s.a_count, "number of a values in [-amax, amax]")->check(CLI::PositiveNumber);
  locus->add_option("--out", s.out_path, "output file");
  locus->add_option("--format", s.format, "csv or obj")->check(CLI::IsMember({"csv", "obj"}));

  CLI::App* cont = app.add_subcommand("continuation", "track t(a) through the family gamma_a");
  algebra(cont);
  cont->add_option("--x0", s.x0, "horizontal direction")->required();
  cont->add_option("--amax", s.a_max, "largest |a|")->check(CLI::NonNegativeNumber);
  cont->add_option("--a-count", s.a_count, "number of a values in [-amax, amax]")->check(CLI::PositiveNumber);
  cont->add_option("--out", s.out_path, "write samples to this file");
  cont->add_option("--format", s.format, "csv or obj")->check(CLI::IsMember({"csv", "obj"}));

  std::vector<std::string> argv_store{"nilconj"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*validate) return cmd_validate(s, out);
    if (*spectrum_cmd) return cmd_spectrum(s, out);
    if (*conjugate) return cmd_conjugate(s, out);
    if (*oracle) return cmd_oracle(s, out);
    if (*compare_cmd) {
      if (s.random <= 0 && s.algebra.empty()) throw Error(ErrorCode::InvalidArgument, "compare needs --algebra or --random");
      return cmd_compare(s, out);
    }
    if (*locus) return cmd_locus(s, out, err);
    if (*cont) return cmd_continuation(s, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::UnsupportedCase) err << "hint: `nilconj oracle` handles this geodesic numerically\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace nilconj::cli
