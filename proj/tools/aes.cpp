// aes: command-line front end for state-set constructions, heuristic
// minimization, sweeps, moment-relaxation bounds and SDPA files.

#include "aes/aesbound.hpp"
#include "aes/heuristic.hpp"
#include "aes/io.hpp"
#include "aes/parallel.hpp"
#include "aes/qstate.hpp"
#include "aes/sdpa.hpp"
#include "aes/sets.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace aes;

bool g_quiet = false;

void log_line(const std::string& msg) {
  if (!g_quiet) std::cerr << "aes: " << msg << "\n";
}

// Human-readable numbers on stdout; files carry 17 digits.
std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    log_line("wrote " + out);
  }
}

json complex_matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

// A set is a built-in label or a path to a state-set JSON file.
StateSet load_set(const std::string& source, double noise) {
  StateSet s = std::filesystem::exists(source) ? state_set_from_json(json::parse(read_text_file(source), nullptr, true))
                                             : named_set(source);
  if (noise < 1.0) s = add_white_noise(s, noise);
  return s;
}

PureState named_state(const std::string& name) {
  ComplexVector v = ComplexVector::Zero(4);
  if (name == "bell" || name == "phi+") {
    v(0) = v(3) = 1.0;
  } else if (name == "singlet" || name == "psi-") {
    v(1) = 1.0;
    v(2) = -1.0;
  } else if (name == "product") {
    v(0) = 1.0;
  } else {
    throw invalid_input("unknown state '" + name + "' (bell, phi+, singlet, psi-, product)");
  }
  return PureState::normalized(v);
}

// a:b:n, n points from a to b inclusive.
std::vector<double> parse_grid(const std::string& text) {
  const auto p1 = text.find(':');
  const auto p2 = p1 == std::string::npos ? std::string::npos : text.find(':', p1 + 1);
  if (p2 == std::string::npos) throw invalid_input("grid must look like <from>:<to>:<points>");
  const double a = parse_real(text.substr(0, p1));
  const double b = parse_real(text.substr(p1 + 1, p2 - p1 - 1));
  long n = 0;
  if (!aes::detail::parse_integer(text.substr(p2 + 1), n) || n < 1) throw invalid_input("grid needs >= 1 points");
  std::vector<double> g;
  for (long i = 0; i < n; ++i) g.push_back(n == 1 ? a : (i == n - 1 ? b : a + (b - a) * static_cast<double>(i) / (n - 1)));
  return g;
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& ch : out)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-' && ch != '_') ch = '_';
  return out;
}

struct SetArgs {
  std::string set;
  double noise = 1.0;

  void add(CLI::App* app, bool required = true) {
    auto* o = app->add_option("--set", set,
                              "state set: set2, warmup, one-param:<d1>x<d2>:<c>, appb:<c21>, or a JSON file");
    if (required) o->required();
    app->add_option("--noise", noise, "visibility v of white noise mixed into every state (1 = none)")
        ->check(CLI::Range(0.0, 1.0));
  }
};

struct MinArgs {
  std::string measure = "negativity";
  int starts = 20;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
  int max_iter = 2000;

  void add(CLI::App* app) {
    app->add_option("--measure", measure, "negativity or entropy")
        ->check(CLI::IsMember({"negativity", "entropy"}))
        ->capture_default_str();
    app->add_option("--starts", starts, "random starting points")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--jobs", jobs, "worker threads (default from AES_JOBS, else 1)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-iter", max_iter, "quasi-Newton iterations per start")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  MinimizeOptions options() const {
    MinimizeOptions o;
    o.starts = starts;
    o.seed = seed;
    o.jobs = jobs;
    o.max_iter = max_iter;
    return o;
  }
};

// ---- commands -------------------------------------------------------------

struct StateArgs {
  std::string state;
  SetArgs set;
  std::string out;
};

void add_state_or_set(CLI::App* app, StateArgs& a) {
  auto* st = app->add_option("--state", a.state, "named two-qubit state: bell, phi+, singlet, psi-, product");
  a.set.add(app, false);
  app->get_option("--set")->excludes(st);
  app->add_option("--out", a.out, "output file (default stdout)");
}

int run_negativity(const StateArgs& a) {
  if (!a.state.empty()) {
    emit(a.out, short_real(negativity(named_state(a.state), Bipartition(2, 2))) + "\n");
    return 0;
  }
  if (a.set.set.empty()) throw CLI::ValidationError("negativity", "one of --state or --set is required");
  const StateSet s = load_set(a.set.set, a.set.noise);
  std::string text;
  double total = 0.0;
  const auto rhos = s.densities();
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const double n = negativity(rhos[k], s.bp);
    total += n;
    text += "state " + std::to_string(k + 1) + " " + short_real(n) + "\n";
  }
  emit(a.out, text + "total " + short_real(total) + "\n");
  return 0;
}

struct EntropyArgs {
  StateArgs base;
  double bound = -1.0;
  int states = 0;
};

int run_entropy(const EntropyArgs& a) {
  if (a.bound >= 0.0) {
    if (a.states < 1) throw CLI::ValidationError("entropy", "--from-negativity needs --states K");
    emit(a.base.out, short_real(entropy_lower_bound(a.bound, a.states)) + "\n");
    return 0;
  }
  if (!a.base.state.empty()) {
    emit(a.base.out, short_real(entropy_of_entanglement(named_state(a.base.state), Bipartition(2, 2))) + "\n");
    return 0;
  }
  if (a.base.set.set.empty()) {
    throw CLI::ValidationError("entropy", "one of --state, --set or --from-negativity is required");
  }
  const StateSet s = load_set(a.base.set.set, a.base.set.noise);
  if (!s.is_pure()) throw invalid_input("entropy of entanglement needs pure states");
  std::string text;
  double total = 0.0;
  for (std::size_t k = 0; k < s.pure.size(); ++k) {
    const double e = entropy_of_entanglement(s.pure[k], s.bp);
    total += e;
    text += "state " + std::to_string(k + 1) + " " + short_real(e) + "\n";
  }
  emit(a.base.out, text + "total " + short_real(total) + "\n");
  return 0;
}

struct ConstructArgs {
  SetArgs set;
  std::string out;
};

int run_construct(const ConstructArgs& a) {
  emit(a.out, dump_json(state_set_to_json(load_set(a.set.set, a.set.noise))));
  return 0;
}

json residual_report(const StateSet& s, const ComplexMatrix& u) {
  json res = json::array();
  double worst = 0.0;
  for (const auto& p : s.pure) {
    const double r = product_residual(PureState(u * p.amplitudes()), s.bp);
    res.push_back(r);
    worst = std::max(worst, r);
  }
  const double defect =
      (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  return {{"residuals", res}, {"max_residual", worst}, {"unitarity_defect", defect}};
}

struct ProductizeArgs {
  std::string set;
  int random = 0;
  std::string bipartition = "2x2";
  std::uint64_t seed = 0;
  std::string out;
};

int run_productize(const ProductizeArgs& a) {
  StateSet s;
  if (a.random > 0) {
    const Bipartition bp = aes::detail::parse_bipartition(a.bipartition);
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> g;
    std::vector<PureState> states;
    for (int k = 0; k < a.random; ++k) {
      ComplexVector v(bp.dim());
      for (int i = 0; i < bp.dim(); ++i) v(i) = complex(g(rng), g(rng));
      states.push_back(PureState::normalized(v));
    }
    s = StateSet::from_pure("random", bp, std::move(states));
  } else if (!a.set.empty()) {
    s = load_set(a.set, 1.0);
  } else {
    throw CLI::ValidationError("productize", "one of --set or --random is required");
  }
  if (!s.is_pure()) throw invalid_input("productize needs pure states");
  const ComplexMatrix u = productizing_basis(s.pure, s.bp);
  json j = residual_report(s, u);
  j["label"] = s.label;
  j["unitary"] = complex_matrix_json(u);
  emit(a.out, dump_json(j));
  return 0;
}

struct AppbArgs {
  double c21 = 0.3;
  std::string out;
};

int run_appb(const AppbArgs& a) {
  const AppendixBResult r = separability_unitary_appB(a.c21);
  json j = residual_report(r.states, r.unitary);
  j["c21"] = a.c21;
  j["unitary"] = complex_matrix_json(r.unitary);
  j["states"] = state_set_to_json(r.states);
  emit(a.out, dump_json(j));
  return 0;
}

struct SweepArgs {
  std::string set;
  std::string param;
  double from = 0.0, to = 0.0;
  int steps = 0;
  std::string grid, noise_grid;
  MinArgs min;
  std::string format = "csv";
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  std::vector<double> grid;
  if (!a.noise_grid.empty()) {
    grid = parse_grid(a.noise_grid);
  } else if (!a.grid.empty()) {
    grid = parse_grid(a.grid);
  } else if (a.steps >= 1) {
    grid = parse_grid(format_real(a.from) + ":" + format_real(a.to) + ":" + std::to_string(a.steps));
  } else {
    throw CLI::ValidationError("sweep", "give --noise-grid, --grid, or --from/--to/--steps");
  }
  FamilyParams family;
  std::string expected;
  if (!a.noise_grid.empty()) {
    family = noise_family(load_set(a.set, 1.0), grid);
    expected = "v";
  } else if (a.set.starts_with("one-param:") && a.set.find(':', 10) == std::string::npos) {
    family = one_param_family(aes::detail::parse_bipartition(a.set.substr(10)), grid);
    expected = "c";
  } else if (a.set == "appb") {
    family = appb_family(grid);
    expected = "c21";
  } else {
    throw CLI::ValidationError("sweep", "--set must be one-param:<d1>x<d2> or appb, or use --noise-grid with a set");
  }
  if (!a.param.empty() && a.param != expected) {
    throw CLI::ValidationError("sweep", "this family sweeps parameter '" + expected + "', not '" + a.param + "'");
  }
  log_line("sweeping " + family.name + " over " + std::to_string(grid.size()) + " points with " +
           std::to_string(a.min.jobs) + " job(s)");
  const auto rows = sweep(family, parse_measure(a.min.measure), a.min.options());
  const int k = static_cast<int>(family.make(grid.front()).size());
  int failed = 0;
  for (const auto& r : rows)
    if (!r.ok()) {
      ++failed;
      log_line("point " + format_real(r.param) + " failed: " + r.error);
    }
  const Table t = sweep_table(rows, k, a.min.starts, a.min.seed);
  if (a.format == "csv") {
    emit(a.out, to_csv(t));
  } else {
    json arr = json::array();
    for (const auto& row : t.rows) {
      json o;
      for (std::size_t c = 0; c < t.header.size(); ++c) o[t.header[c]] = row[c];
      arr.push_back(std::move(o));
    }
    emit(a.out, dump_json(arr));
  }
  return failed == 0 ? 0 : 1;
}

struct MinimizeArgs {
  SetArgs set;
  MinArgs min;
  std::string out;
};

int run_minimize(const MinimizeArgs& a) {
  const StateSet s = load_set(a.set.set, a.set.noise);
  const MinimizationResult r = minimize_set_entanglement(s, parse_measure(a.min.measure), a.min.options());
  json j = {{"label", s.label},
            {"measure", a.min.measure},
            {"value", r.value},
            {"per_state", r.per_state},
            {"converged", r.converged},
            {"starts", r.starts},
            {"seed", a.min.seed},
            {"unitary", complex_matrix_json(unitary_from_params(r.theta_opt, s.dim()))}};
  emit(a.out, dump_json(j));
  log_line(a.min.measure + " upper bound " + short_real(r.value));
  return 0;
}

struct BoundArgs {
  SetArgs set;
  std::string mode = "internal";
  std::string config = "fast";
  int deg_u = -1, deg_xi = -1, loc_deg = -1, eq_deg = -1;
  bool left_unitarity = false, sigma_psd = false;
  double tol = 1e-8;
  std::string out;
};

int run_bound(const BoundArgs& a) {
  const StateSet s = load_set(a.set.set, a.set.noise);
  RelaxationConfig cfg = a.config == "full" ? RelaxationConfig::full() : RelaxationConfig::fast();
  if (a.deg_u >= 0) cfg.moment_deg_u = a.deg_u;
  if (a.deg_xi >= 0) cfg.moment_deg_xi = a.deg_xi;
  if (a.loc_deg >= 0) cfg.loc_deg_u = a.loc_deg;
  if (a.eq_deg >= 0) cfg.eq_deg = a.eq_deg;
  cfg.include_left_unitarity = a.left_unitarity;
  cfg.include_sigma_psd = a.sigma_psd;
  if (cfg.include_sigma_psd) log_line("warning: --sigma-psd cuts off feasible points; the result is not a lower bound");

  if (a.mode == "export") {
    const std::string path = a.out.empty() ? sanitize(s.label) + ".dat-s" : a.out;
    std::string stem = path;
    if (stem.ends_with(".dat-s")) stem.resize(stem.size() - 6);
    const ExportedRelaxation ex = export_negativity_relaxation(s, cfg);
    write_text_file(path, ex.sdpa);
    write_text_file(stem + ".json", dump_json(ex.sidecar));
    log_line("wrote " + path + " (" + std::to_string(ex.problem.nvars) + " variables, largest block " +
             std::to_string(ex.problem.largest_block()) + ") and " + stem + ".json");
    return 0;
  }
  SolveOptions opts;
  opts.tol = a.tol;
  const BoundResult r = lower_bound_negativity(s, cfg, opts);
  json j = {{"label", s.label},
            {"config", relaxation_sidecar(s, cfg, SymbolicSDP{}, Presolved{}).at("config")},
            {"bound", r.bound},
            {"dual_objective", r.dual_objective},
            {"primal_objective", r.primal_objective},
            {"status", to_string(r.status)},
            {"certified", r.certified()},
            {"iterations", r.iterations},
            {"moment_variables", r.moment_variables},
            {"largest_block", r.largest_block},
            {"equalities", r.equalities},
            {"certificate", r.certificate.summary()}};
  emit(a.out, dump_json(j));
  log_line("negativity lower bound " + short_real(r.bound) + (r.certified() ? " (certified)" : " (NOT certified)"));
  return r.certified() ? 0 : 1;
}

struct CheckArgs {
  std::string problem, solution;
  double tol = 1e-8;
  std::string out;
};

int run_check(const CheckArgs& a) {
  const NumericSDP p = import_sdpa(read_text_file(a.problem));
  const SDPSolution sol = read_external_solution(read_text_file(a.solution), p);
  const BoundResult r = bound_from_solution(p, sol, a.tol);
  const CertificateReport& c = r.certificate;
  json j = {{"pass", c.pass},
            {"min_eig", c.min_eig},
            {"equality_residual", c.equality_residual},
            {"objective", c.objective},
            {"has_dual", c.has_dual},
            {"tol", a.tol}};
  if (c.has_dual) {
    j["dual_min_eig"] = c.dual_min_eig;
    j["dual_residual"] = c.dual_residual;
    j["dual_objective"] = c.dual_objective;
    j["bound"] = r.bound;
  }
  emit(a.out, dump_json(j));
  log_line(c.summary());
  return c.pass ? 0 : 1;
}

struct RoundtripArgs {
  std::string in, out;
};

int run_roundtrip(const RoundtripArgs& a) {
  const std::string text = read_text_file(a.in);
  const std::string again = export_sdpa(import_sdpa(text));
  if (!a.out.empty()) write_text_file(a.out, again);
  std::cout << (again == text ? "byte-identical" : "normalized (input formatting differs)") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Absolutely entangled sets: constructions, heuristic bounds and moment relaxations"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "suppress log lines on standard error");

  StateArgs neg;
  auto* c_neg = app.add_subcommand("negativity", "negativity of a named state or of each state in a set");
  add_state_or_set(c_neg, neg);

  EntropyArgs ent;
  auto* c_ent = app.add_subcommand("entropy", "entanglement entropy, or the entropy bound K f(N/K)");
  add_state_or_set(c_ent, ent.base);
  c_ent->add_option("--from-negativity", ent.bound, "negativity lower bound N to convert")
      ->check(CLI::NonNegativeNumber);
  c_ent->add_option("--states", ent.states, "number of states K for --from-negativity");

  ConstructArgs con;
  auto* c_con = app.add_subcommand("construct", "write a built-in state set as JSON");
  con.set.add(c_con);
  c_con->add_option("--out", con.out, "output file (default stdout)");

  ProductizeArgs pro;
  auto* c_pro = app.add_subcommand("productize", "unitary making up to max(d1,d2)+1 pure states product");
  c_pro->add_option("--set", pro.set, "JSON file or label of a pure state set");
  c_pro->add_option("--random", pro.random, "use this many seeded random pure states instead")
      ->check(CLI::PositiveNumber);
  c_pro->add_option("--bipartition", pro.bipartition, "bipartition for --random, <d1>x<d2>")->capture_default_str();
  c_pro->add_option("--seed", pro.seed, "random seed for --random")->capture_default_str();
  c_pro->add_option("--out", pro.out, "output file (default stdout)");

  AppbArgs apb;
  auto* c_apb = app.add_subcommand("appb", "four-state family and the unitary making it product");
  c_apb->add_option("--c21", apb.c21, "modulus |c21| in (0, 0.5]")->capture_default_str();
  c_apb->add_option("--out", apb.out, "output file (default stdout)");

  SweepArgs swp;
  auto* c_swp = app.add_subcommand("sweep", "minimize over a parameter grid and write one row per point");
  c_swp->add_option("--set", swp.set, "one-param:<d1>x<d2>, appb, or a set for --noise-grid")->required();
  c_swp->add_option("--param", swp.param, "swept parameter: c, c21 or v (checked against the family)");
  c_swp->add_option("--from", swp.from, "first grid value");
  c_swp->add_option("--to", swp.to, "last grid value");
  c_swp->add_option("--steps", swp.steps, "number of grid points from --from to --to");
  c_swp->add_option("--grid", swp.grid, "grid as <from>:<to>:<points>");
  c_swp->add_option("--noise-grid", swp.noise_grid, "visibility grid <from>:<to>:<points> applied to --set");
  swp.min.add(c_swp);
  c_swp->add_option("--format", swp.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  c_swp->add_option("--out", swp.out, "output file (default stdout)");

  MinimizeArgs mn;
  auto* c_min = app.add_subcommand("minimize", "heuristic upper bound on the absolute set entanglement");
  mn.set.add(c_min);
  mn.min.add(c_min);
  c_min->add_option("--out", mn.out, "output file (default stdout)");

  BoundArgs bd;
  auto* c_bd = app.add_subcommand("bound", "moment-relaxation lower bound on the absolute set negativity");
  bd.set.add(c_bd);
  c_bd->add_option("--mode", bd.mode, "internal (solve here) or export (write SDPA + sidecar)")
      ->check(CLI::IsMember({"internal", "export"}))
      ->capture_default_str();
  c_bd->add_option("--config", bd.config, "fast or full relaxation")
      ->check(CLI::IsMember({"fast", "full"}))
      ->capture_default_str();
  c_bd->add_option("--deg-u", bd.deg_u, "override: moment degree of the U block")->check(CLI::NonNegativeNumber);
  c_bd->add_option("--deg-xi", bd.deg_xi, "override: moment degree of each part block")->check(CLI::NonNegativeNumber);
  c_bd->add_option("--loc-deg", bd.loc_deg, "override: U-basis degree of PPT localizers")->check(CLI::NonNegativeNumber);
  c_bd->add_option("--eq-deg", bd.eq_deg, "override: basis degree localizing U U^dagger = I");
  c_bd->add_flag("--left-unitarity", bd.left_unitarity, "also impose U^dagger U = I");
  c_bd->add_flag("--sigma-psd", bd.sigma_psd, "also require each part to be positive (not a valid bound)");
  c_bd->add_option("--tol", bd.tol, "solver and certificate tolerance")->capture_default_str();
  c_bd->add_option("--out", bd.out, "result JSON (internal) or .dat-s path (export, default <label>.dat-s)");

  CheckArgs chk;
  auto* c_chk = app.add_subcommand("check-cert", "validate a solution of an SDPA problem");
  c_chk->add_option("--problem", chk.problem, "SDPA .dat-s file")->required()->check(CLI::ExistingFile);
  c_chk->add_option("--solution", chk.solution, "solution: SDPA output, CSDP layout, or a plain y vector")
      ->required()
      ->check(CLI::ExistingFile);
  c_chk->add_option("--tol", chk.tol, "tolerance for eigenvalues and residuals")->capture_default_str();
  c_chk->add_option("--out", chk.out, "report JSON (default stdout)");

  RoundtripArgs rt;
  auto* c_rt = app.add_subcommand("sdpa-roundtrip", "parse an SDPA file and write it back");
  c_rt->add_option("--in", rt.in, "SDPA .dat-s file")->required()->check(CLI::ExistingFile);
  c_rt->add_option("--out", rt.out, "write the re-exported text here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "aes: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (c_neg->parsed()) return run_negativity(neg);
    if (c_ent->parsed()) return run_entropy(ent);
    if (c_con->parsed()) return run_construct(con);
    if (c_pro->parsed()) return run_productize(pro);
    if (c_apb->parsed()) return run_appb(apb);
    if (c_swp->parsed()) return run_sweep(swp);
    if (c_min->parsed()) return run_minimize(mn);
    if (c_bd->parsed()) return run_bound(bd);
    if (c_chk->parsed()) return run_check(chk);
    if (c_rt->parsed()) return run_roundtrip(rt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "aes: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input& e) {
    std::cerr << "aes: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "aes: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "aes: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
