#include "mmot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mmot/geometry.hpp"
#include "mmot/lp.hpp"
#include "mmot/structure.hpp"
#include "mmot/transforms.hpp"

namespace mmot {

namespace {

namespace fs = std::filesystem;

std::map<std::string, double> default_tolerances() {
  return {{"kkt", 1e-8},         {"certify", 1e-8},     {"gap", 1e-8},
          {"feasibility", 1e-9}, {"noise_floor", 1e-6}, {"graph", 1e-6},
          {"three_point", 1e-6}, {"copula", 1e-8}};
}

struct StageSpec {
  std::string name;
  std::vector<int> S;
};

StageSpec parse_stage(const std::string& token) {
  StageSpec s;
  auto open = token.find('(');
  if (open == std::string::npos) {
    s.name = token;
    return s;
  }
  auto close = token.find(')', open);
  if (close == std::string::npos) throw std::invalid_argument("bad stage token: " + token);
  s.name = token.substr(0, open);
  std::stringstream ss(token.substr(open + 1, close - open - 1));
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!cell.empty()) s.S.push_back(std::stoi(cell));
  return s;
}

void validate_pipeline(const std::vector<StageSpec>& stages) {
  static const std::set<std::string> known = {"solve",      "dual",        "normalize",
                                              "transforms", "copula_check", "extremality",
                                              "staying",    "graph",       "three_point",
                                              "chi_probe"};
  if (stages.empty()) throw std::invalid_argument("empty pipeline");
  std::set<std::string> seen;
  for (const StageSpec& st : stages) {
    if (!known.count(st.name)) throw std::invalid_argument("unknown stage: " + st.name);
    auto need = [&](const char* dep) {
      if (!seen.count(dep))
        throw std::invalid_argument("stage '" + st.name + "' requires '" + dep + "'");
    };
    if (st.name != "solve") need("solve");
    if (st.name == "normalize" || st.name == "transforms" || st.name == "chi_probe")
      need("dual");
    if (st.name == "copula_check") need("transforms");
    if (st.name == "graph" && st.S.empty())
      throw std::invalid_argument("graph stage needs coordinate indices, e.g. graph(0)");
    seen.insert(st.name);
  }
}

struct PipelineState {
  std::optional<PrimalResult> primal;
  std::optional<DualTriple> dual;
  std::optional<TransformBundle> bundle;
};

std::string csv_path(const std::string& out_dir, const std::string& name,
                     const std::string& stage) {
  return (fs::path(out_dir) / (name + "_" + stage + ".csv")).string();
}

// Runs one stage; returns metrics, sets pass/why on assertion failure.
json run_stage(const MmotProblem& problem, PipelineState& state, const StageSpec& st,
               const std::map<std::string, double>& tol, const std::string& out_dir,
               const std::string& name, bool& pass, std::string& why) {
  json m;
  pass = true;
  auto fail = [&](const std::string& what) {
    pass = false;
    why = what;
  };
  double certify_tol = tol.at("certify");

  if (st.name == "solve") {
    LinearProgram lp = build_lp(problem);
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) {
      fail("solver status not optimal");
      return m;
    }
    KktReport kkt = check_kkt(lp, sol, tol.at("kkt"));
    PrimalResult res;
    res.plan = JointPlan(problem.d, problem.x_grid, problem.y_grid);
    int ny = problem.y_size();
    for (int v = 0; v < lp.n_vars; ++v)
      if (sol.primal[v] > 1e-12) res.plan.add_entry(v / ny, v % ny, sol.primal[v]);
    res.value = sol.objective_value;
    res.lp = std::move(sol);
    m["value"] = res.value;
    m["iterations"] = res.lp.iterations;
    m["support_size"] = res.plan.support_size();
    m["kkt_primal_residual"] = kkt.max_primal_residual;
    m["kkt_dual_violation"] = kkt.max_dual_violation;
    m["kkt_cs_gap"] = kkt.max_cs_gap;
    state.primal = std::move(res);
    if (!kkt.pass(tol.at("kkt"))) fail("kkt residuals exceed tolerance");
  } else if (st.name == "dual") {
    DualTriple dual = recover_dual(problem, state.primal->lp);
    CertificationReport cert = certify_dual(dual, problem, &state.primal->plan);
    double gap = duality_gap(problem, *state.primal, dual);
    m["gap"] = gap;
    m["max_pointwise_violation"] = cert.max_violation;
    m["max_support_residual"] = cert.max_support_residual;
    state.dual = std::move(dual);
    if (std::abs(gap) > tol.at("gap")) fail("duality gap exceeds tolerance");
  } else if (st.name == "normalize") {
    DualTriple normalized = gauge_normalize(*state.dual, problem);
    double before = dual_objective(*state.dual, problem);
    double after = dual_objective(normalized, problem);
    CertificationReport cert = certify_dual(normalized, problem, &state.primal->plan);
    m["objective_shift"] = after - before;
    m["max_pointwise_violation"] = cert.max_violation;
    state.dual = std::move(normalized);
    if (std::abs(after - before) > 1e-12) fail("gauge shift moved the dual objective");
    else if (!cert.pass(certify_tol)) fail("normalized dual lost certification");
  } else if (st.name == "transforms") {
    TransformBundle bundle = build_transform_bundle(problem, *state.dual);
    double dual1 = 0.0;  // alpha(x) + gamma.(y-x) - c <= beta(y)
    for (int xi = 0; xi < problem.x_size(); ++xi) {
      const GridPoint& x = problem.x_grid[xi];
      for (int yi = 0; yi < problem.y_size(); ++yi) {
        double v = bundle.alpha[xi] - problem.cost_at(xi, yi);
        const GridPoint& y = problem.y_grid[yi];
        for (int i = 0; i < problem.d; ++i) v += bundle.gamma[xi][i] * (y[i] - x[i]);
        dual1 = std::max(dual1, v - bundle.beta[yi]);
      }
    }
    double phi_gap = 0.0, psi_gap = 0.0;
    for (int xi = 0; xi < problem.x_size(); ++xi) {
      double s = 0.0;
      for (int i = 0; i < problem.d; ++i) s += bundle.phi[i][problem.x_digits(xi)[i]];
      phi_gap = std::max(phi_gap, s - bundle.alpha[xi]);
    }
    for (int yi = 0; yi < problem.y_size(); ++yi) {
      double s = 0.0;
      for (int i = 0; i < problem.d; ++i) s += bundle.psi[i][problem.y_digits(yi)[i]];
      psi_gap = std::max(psi_gap, bundle.beta[yi] - s);
    }
    m["max_dual1_violation"] = dual1;
    m["max_phi_over_alpha"] = phi_gap;
    m["max_beta_over_psi"] = psi_gap;
    int non_unique = 0;
    for (char u : bundle.gamma_unique)
      if (!u) ++non_unique;
    m["gamma_non_unique_count"] = non_unique;
    std::vector<std::vector<double>> rows;
    for (int xi = 0; xi < problem.x_size(); ++xi) {
      std::vector<double> row = problem.x_grid[xi];
      row.push_back(bundle.alpha[xi]);
      for (double gcomp : bundle.gamma[xi]) row.push_back(gcomp);
      rows.push_back(std::move(row));
    }
    std::vector<std::string> header;
    for (int i = 0; i < problem.d; ++i) header.push_back("x" + std::to_string(i));
    header.push_back("alpha");
    for (int i = 0; i < problem.d; ++i) header.push_back("gamma" + std::to_string(i));
    write_csv(csv_path(out_dir, name, "alpha"), header, rows);
    state.bundle = std::move(bundle);
    if (dual1 > certify_tol || phi_gap > certify_tol || psi_gap > certify_tol)
      fail("transform bundle invariants exceed tolerance");
  } else if (st.name == "copula_check") {
    CopulaOptimalityReport rep =
        verify_copula_optimality(*state.dual, state.primal->plan, *state.bundle, problem);
    m["grid_f_violation"] = rep.grid_f_violation;
    m["support_f_residual"] = rep.support_f_residual;
    m["grid_g_violation"] = rep.grid_g_violation;
    m["support_g_residual"] = rep.support_g_residual;
    if (!rep.pass(tol.at("copula"))) fail("copula optimality residuals exceed tolerance");
  } else if (st.name == "extremality") {
    ExtremalityReport rep =
        check_conditional_extremality(state.primal->plan, tol.at("noise_floor"));
    m["worst_fraction"] = rep.worst_fraction;
    m["extreme_fraction_of_mass"] = rep.extreme_fraction_of_mass;
    m["violating_mass"] = rep.violating_mass;
    std::vector<std::vector<double>> rows;
    for (const ExtremalityRecord& r : rep.records)
      rows.push_back({static_cast<double>(r.x_index), r.mass,
                      static_cast<double>(r.support_size),
                      static_cast<double>(r.non_extreme.size()), r.extreme_fraction});
    write_csv(csv_path(out_dir, name, "extremality"),
              {"x_index", "mass", "support_size", "non_extreme", "extreme_fraction"}, rows);
    auto bar = tol.find("min_extreme_fraction");
    if (bar != tol.end() && rep.extreme_fraction_of_mass < bar->second)
      fail("extreme mass fraction below the required bar");
  } else if (st.name == "staying") {
    StayingReport rep = staying_decomposition(state.primal->plan);
    m["diagonal_mass"] = rep.diagonal_mass;
    m["dominance_ok"] = rep.dominance_ok;
    m["residual_mass"] = rep.residual.mass();
    if (rep.residual.mass() > 1e-12) {
      ExtremalityReport res_rep =
          check_conditional_extremality(rep.residual.normalized(), tol.at("noise_floor"));
      m["residual_extreme_fraction"] = res_rep.extreme_fraction_of_mass;
    }
    if (!rep.dominance_ok) fail("diagonal dominance does not hold");
  } else if (st.name == "graph") {
    GraphReport rep = check_graph_structure(state.primal->plan, st.S, tol.at("graph"));
    m["violations"] = rep.violations.size();
    m["pass"] = rep.pass;
    if (!rep.pass) fail("conditionals are not graph-structured on the probed block");
  } else if (st.name == "three_point") {
    ThreePointStructure tps = three_point_structure_1d(state.primal->plan);
    m["max_weight_residual"] = tps.max_weight_residual;
    m["max_barycenter_residual"] = tps.max_barycenter_residual;
    m["max_lambda_residual"] = tps.max_lambda_residual;
    std::vector<std::vector<double>> rows;
    for (const ThreePointRow& r : tps.rows)
      rows.push_back({r.x, r.t_minus, r.t_plus, r.lambda_minus, r.lambda_plus, r.stay});
    write_csv(csv_path(out_dir, name, "three_point"),
              {"x", "t_minus", "t_plus", "lambda_minus", "lambda_plus", "stay"}, rows);
    double t = tol.at("three_point");
    if (tps.max_weight_residual > t || tps.max_barycenter_residual > t ||
        tps.max_lambda_residual > t)
      fail("three-point residuals exceed tolerance");
  } else if (st.name == "chi_probe") {
    double left = 0.0;
    for (int xi = 0; xi < problem.x_size(); ++xi)
      left = std::max(left, state.dual->f_sum(problem, xi) -
                                chi_from_dual(*state.dual, problem, problem.x_grid[xi]));
    double right = 0.0;
    for (int yi = 0; yi < problem.y_size(); ++yi) {
      double ctilde = -std::numeric_limits<double>::infinity();
      for (int xi = 0; xi < problem.x_size(); ++xi)
        ctilde = std::max(ctilde, problem.cost_at(xi, yi));
      double chi = chi_from_dual(*state.dual, problem, problem.y_grid[yi]);
      right = std::max(right, chi - ctilde - state.dual->g_sum(problem, yi));
    }
    int anchor = chi_anchor_index(problem);
    m["anchor_index"] = anchor;
    m["chi_normalized_at_anchor"] =
        chi_normalized(*state.dual, problem, problem.x_grid[anchor]);
    m["max_left_sandwich_violation"] = left;
    m["max_right_sandwich_violation"] = right;
    std::vector<std::vector<double>> rows;
    for (int yi = 0; yi < problem.y_size(); ++yi) {
      bool interior = true;
      for (int i = 0; i < problem.d; ++i) {
        double v = problem.y_grid[yi][i];
        if (v <= problem.nus[i].min_position() + kCoordTol ||
            v >= problem.nus[i].max_position() - kCoordTol)
          interior = false;
      }
      if (!interior) continue;
      std::vector<double> row = problem.y_grid[yi];
      row.push_back(chi_from_dual(*state.dual, problem, problem.y_grid[yi]));
      row.push_back(chi_normalized(*state.dual, problem, problem.y_grid[yi]));
      rows.push_back(std::move(row));
    }
    std::vector<std::string> header;
    for (int i = 0; i < problem.d; ++i) header.push_back("y" + std::to_string(i));
    header.push_back("chi");
    header.push_back("chi_normalized");
    write_csv(csv_path(out_dir, name, "chi"), header, rows);
    if (left > certify_tol || right > certify_tol) fail("chi sandwich violated");
  } else {
    fail("unknown stage");
  }
  return m;
}

json tolerances_to_json(const std::map<std::string, double>& tol) {
  json j;
  for (auto& [k, v] : tol) j[k] = v;
  return j;
}

RunOutcome execute_pipeline(const MmotProblem& problem, const std::vector<StageSpec>& stages,
                            std::map<std::string, double> tol, const std::string& out_dir,
                            const std::string& name, bool dump_lp_file) {
  fs::create_directories(out_dir);
  RunOutcome outcome;
  json report;
  report["name"] = name;
  report["tolerances"] = tolerances_to_json(tol);
  report["problem"] = {{"d", problem.d},
                       {"x_size", problem.x_size()},
                       {"y_size", problem.y_size()},
                       {"cost", problem.cost.kind_name()}};
  json stage_reports = json::array();
  PipelineState state;
  bool all_pass = true;
  std::string failure;
  if (dump_lp_file) {
    std::ofstream lp_out(fs::path(out_dir) / (name + ".lp"));
    dump_lp(build_lp(problem), lp_out);
  }
  for (const StageSpec& st : stages) {
    json sj;
    sj["stage"] = st.name;
    if (!st.S.empty()) sj["S"] = st.S;
    bool pass = true;
    std::string why;
    try {
      sj["metrics"] = run_stage(problem, state, st, tol, out_dir, name, pass, why);
    } catch (const std::exception& e) {
      pass = false;
      why = e.what();
    }
    sj["status"] = pass ? "pass" : "fail";
    if (!pass) sj["failure"] = why;
    stage_reports.push_back(std::move(sj));
    if (!pass) {
      all_pass = false;
      failure = st.name + ": " + why;
      break;
    }
  }
  report["stages"] = std::move(stage_reports);
  report["status"] = all_pass ? "pass" : "fail";
  if (!all_pass) report["failed_assertion"] = failure;
  outcome.report_path = (fs::path(out_dir) / (name + "_report.json")).string();
  write_json_file(outcome.report_path, report);
  outcome.pass = all_pass;
  outcome.exit_code = all_pass ? 0 : 1;
  outcome.failure = failure;
  return outcome;
}

}  // namespace

RunOutcome run_scenario_file(const std::string& path, const std::string& out_dir,
                             const std::map<std::string, double>& tol_overrides,
                             bool dump_lp_file) {
  RunOutcome outcome;
  MmotProblem problem;
  std::vector<StageSpec> stages;
  std::map<std::string, double> tol = default_tolerances();
  std::string name;
  try {
    json j = load_json_file(path);
    name = j.value("name", fs::path(path).stem().string());
    json pj = j.at("problem");
    if (pj.contains("file")) {
      fs::path ref = fs::path(path).parent_path() / pj.at("file").get<std::string>();
      pj = load_json_file(ref.string());
    }
    problem = problem_from_json(pj);
    for (const json& s : j.at("pipeline")) stages.push_back(parse_stage(s.get<std::string>()));
    validate_pipeline(stages);
    if (j.contains("tolerances"))
      for (auto& [k, v] : j.at("tolerances").items()) tol[k] = v.get<double>();
    for (auto& [k, v] : tol_overrides) tol[k] = v;
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.failure = e.what();
    return outcome;
  }
  return execute_pipeline(problem, stages, tol, out_dir, name, dump_lp_file);
}

RunOutcome run_batch(const std::string& dir, const std::string& out_dir,
                     const std::map<std::string, double>& tol_overrides) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  RunOutcome outcome;
  if (files.empty()) {
    outcome.failure = "no scenario files in " + dir;
    return outcome;
  }
  std::vector<std::future<RunOutcome>> futures;
  for (const std::string& f : files)
    futures.push_back(std::async(std::launch::async, [&, f] {
      return run_scenario_file(f, out_dir, tol_overrides, false);
    }));
  json summary = json::array();
  int worst = 0;
  bool all = true;
  for (std::size_t i = 0; i < files.size(); ++i) {
    RunOutcome r = futures[i].get();
    worst = std::max(worst, r.exit_code);
    all = all && r.pass;
    summary.push_back({{"file", files[i]},
                       {"exit_code", r.exit_code},
                       {"failure", r.failure},
                       {"report", r.report_path}});
  }
  fs::create_directories(out_dir);
  outcome.report_path = (fs::path(out_dir) / "batch_summary.json").string();
  write_json_file(outcome.report_path, summary);
  outcome.exit_code = worst;
  outcome.pass = all;
  return outcome;
}

// ---- bundled instances ----

DiscreteMeasure aligned_mu(int n) {
  return discretize_density(DensitySpec::uniform(-0.5, 0.5), n);
}

DiscreteMeasure aligned_nu(int n) {
  return discretize_density(DensitySpec::uniform(-1.0, 1.0), 2 * n);
}

MmotProblem instance_ex2_4() {
  DiscreteMeasure mu = DiscreteMeasure::dirac(0.0);
  DiscreteMeasure nu =
      DiscreteMeasure::from_pairs({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  return make_problem({mu, mu}, {nu, nu}, CostSpec::neg_norm(2.0));
}

MmotProblem instance_ex2_5_1d(int n) {
  return make_problem({aligned_mu(n)}, {aligned_nu(n)}, CostSpec::pos_norm(2.0));
}

MmotProblem instance_ex2_5(int n) {
  DiscreteMeasure mu = aligned_mu(n), nu = aligned_nu(n);
  int nx1 = static_cast<int>(mu.size()), ny1 = static_cast<int>(nu.size());
  // Coordinate cost |x_1 - y_1| as a table over the product grids.
  std::vector<double> table(static_cast<std::size_t>(nx1) * nx1 * ny1 * ny1);
  std::size_t at = 0;
  for (int a = 0; a < nx1; ++a)
    for (int b = 0; b < nx1; ++b) {
      (void)b;
      for (int c = 0; c < ny1; ++c)
        for (int e = 0; e < ny1; ++e) {
          (void)e;
          table[at++] = std::abs(mu.atoms()[a].position - nu.atoms()[c].position);
        }
    }
  return make_problem({mu, mu}, {nu, nu}, CostSpec::from_table(std::move(table)));
}

MmotProblem instance_ex2_7(int n) {
  DiscreteMeasure mu = aligned_mu(n);
  DiscreteMeasure nu1 = DiscreteMeasure::from_pairs({{-10.0, 0.5}, {10.0, 0.5}});
  return make_problem({mu, mu}, {nu1, aligned_nu(n)}, CostSpec::max_norm(1));
}

MmotProblem instance_ex2_8(int n) {
  DiscreteMeasure mu = aligned_mu(n), nu = aligned_nu(n);
  return make_problem({mu, mu}, {nu, nu}, CostSpec::neg_product_pair(0, 1));
}

namespace {

int nu_index_of_position(const DiscreteMeasure& nu, double position) {
  for (std::size_t t = 0; t < nu.size(); ++t)
    if (std::abs(nu.atoms()[t].position - position) <= kCoordTol) return static_cast<int>(t);
  throw std::runtime_error("grids are not aligned: marginal atom missing from the target grid");
}

}  // namespace

JointPlan assemble_ex2_5_plan(const MmotProblem& p2, const MmotProblem& p1,
                              const JointPlan& plan1) {
  const DiscreteMeasure& mu = p1.mus[0];
  const DiscreteMeasure& nu = p1.nus[0];
  int n = static_cast<int>(mu.size()), ny1 = static_cast<int>(nu.size());
  std::vector<double> stay(n, 0.0);
  std::vector<std::vector<std::pair<int, double>>> moving(n);
  for (auto& [k, w] : plan1.entries()) {
    double x = mu.atoms()[k.first].position;
    double y = nu.atoms()[k.second].position;
    if (std::abs(x - y) <= kCoordTol) stay[k.first] += w;
    else moving[k.first].push_back({k.second, w});
  }
  std::vector<int> nu_of_mu(n);
  for (int a = 0; a < n; ++a) {
    nu_of_mu[a] = nu_index_of_position(nu, mu.atoms()[a].position);
    if (std::abs(stay[a] - 0.5 * mu.atoms()[a].weight) > 1e-8)
      throw std::runtime_error("1D optimum does not stay with weight 1/2");
  }
  JointPlan plan(2, p2.x_grid, p2.y_grid);
  for (int a = 0; a < n; ++a) {
    double wa = mu.atoms()[a].weight;
    for (int b = 0; b < n; ++b) {
      double wb = mu.atoms()[b].weight;
      int xi = a * n + b;
      for (auto& [t, mass] : moving[a]) plan.add_entry(xi, t * ny1 + nu_of_mu[b], mass * wb);
      for (auto& [t, mass] : moving[b]) plan.add_entry(xi, nu_of_mu[a] * ny1 + t, mass * wa);
    }
  }
  return plan;
}

JointPlan assemble_ex2_7_plan(const MmotProblem& p2, const JointPlan& second_coupling) {
  const DiscreteMeasure& mu1 = p2.mus[0];
  const DiscreteMeasure& nu2 = p2.nus[1];
  int n2 = static_cast<int>(p2.mus[1].size());
  int ny2 = static_cast<int>(nu2.size());
  JointPlan plan(2, p2.x_grid, p2.y_grid);
  for (int a = 0; a < static_cast<int>(mu1.size()); ++a) {
    double pos = mu1.atoms()[a].position;
    double wa = mu1.atoms()[a].weight;
    // The two-point target forces the conditional: p(+10) = (pos + 10) / 20.
    double up = (pos + 10.0) / 20.0;
    for (auto& [k, w2] : second_coupling.entries()) {
      int xi = a * n2 + k.first;
      plan.add_entry(xi, 0 * ny2 + k.second, wa * (1.0 - up) * w2);
      plan.add_entry(xi, 1 * ny2 + k.second, wa * up * w2);
    }
  }
  return plan;
}

namespace {

struct Assertion {
  std::string name;
  bool pass;
  double value;
};

RunOutcome write_reproduce_report(const std::string& out_dir, const std::string& name,
                                  const std::vector<Assertion>& asserts, json extra) {
  fs::create_directories(out_dir);
  RunOutcome outcome;
  json report;
  report["name"] = name;
  report["tolerances"] = tolerances_to_json(default_tolerances());
  json checks = json::array();
  bool all = true;
  std::string failure;
  for (const Assertion& a : asserts) {
    checks.push_back({{"claim", a.name}, {"status", a.pass ? "pass" : "fail"}, {"value", a.value}});
    if (!a.pass && all) {
      all = false;
      failure = a.name;
    }
  }
  report["claims"] = std::move(checks);
  for (auto& [k, v] : extra.items()) report[k] = v;
  report["status"] = all ? "pass" : "fail";
  if (!all) report["failed_assertion"] = failure;
  outcome.report_path = (fs::path(out_dir) / (name + "_report.json")).string();
  write_json_file(outcome.report_path, report);
  outcome.pass = all;
  outcome.exit_code = all ? 0 : 1;
  outcome.failure = failure;
  return outcome;
}

RunOutcome reproduce_ex2_4(const std::string& out_dir) {
  MmotProblem p = instance_ex2_4();
  PrimalResult r = solve_primal(p);
  std::vector<Assertion> checks;
  checks.push_back({"optimal value is -1", std::abs(r.value + 1.0) <= 1e-8, r.value});

  ExtremalityReport ext = check_conditional_extremality(r.plan, 1e-6);
  bool support4 = ext.records.size() == 1 && ext.records[0].support_size == 4;
  checks.push_back({"conditional support has 4 points", support4,
                    ext.records.empty() ? 0.0 : ext.records[0].support_size});
  checks.push_back(
      {"conditional support is extreme", ext.extreme_fraction_of_mass == 1.0,
       ext.extreme_fraction_of_mass});

  // Closed-form certificate with total constant -1/2: f_i = x_i^2/2,
  // g_i = y_i^2/2 + 1/4, h_i = x_i; tight exactly at distance 1.
  DualTriple cert;
  cert.f.resize(2);
  cert.g.resize(2);
  for (int i = 0; i < 2; ++i) {
    for (const Atom& a : p.mus[i].atoms()) cert.f[i].push_back(0.5 * a.position * a.position);
    for (const Atom& b : p.nus[i].atoms())
      cert.g[i].push_back(0.5 * b.position * b.position + 0.25);
  }
  cert.h.assign(p.x_size(), std::vector<double>(2, 0.0));
  for (int xi = 0; xi < p.x_size(); ++xi)
    for (int i = 0; i < 2; ++i) cert.h[xi][i] = p.x_grid[xi][i];
  CertificationReport cr = certify_dual(cert, p, &r.plan);
  checks.push_back({"closed-form certificate is feasible", cr.max_violation <= 1e-9,
                    cr.max_violation});
  double cert_value = dual_objective(cert, p);
  checks.push_back({"certificate value is -1", std::abs(cert_value + 1.0) <= 1e-12, cert_value});
  bool tight_iff_unit = true;
  for (int xi = 0; xi < p.x_size(); ++xi)
    for (int yi = 0; yi < p.y_size(); ++yi) {
      std::vector<double> diff(2);
      for (int i = 0; i < 2; ++i) diff[i] = p.x_grid[xi][i] - p.y_grid[yi][i];
      double dist = norm_p(diff, 2.0);
      double residual = p.cost_at(xi, yi) - cert.pairing(p, xi, yi);
      bool tight = std::abs(residual) <= 1e-9;
      if (tight != (std::abs(dist - 1.0) <= 1e-9)) tight_iff_unit = false;
    }
  checks.push_back({"certificate tight exactly at distance 1", tight_iff_unit, 0.0});

  json extra;
  extra["value"] = r.value;
  return write_reproduce_report(out_dir, "ex2_4", checks, extra);
}

RunOutcome reproduce_ex2_5(int n, const std::string& out_dir) {
  MmotProblem p1 = instance_ex2_5_1d(n);
  PrimalResult r1 = solve_primal(p1);
  std::vector<Assertion> checks;

  ThreePointStructure tps = three_point_structure_1d(r1.plan);
  double worst_tp = std::max({tps.max_weight_residual, tps.max_barycenter_residual,
                              tps.max_lambda_residual});
  checks.push_back({"1D conditionals split to three points", worst_tp <= 1e-6, worst_tp});

  MmotProblem p2 = instance_ex2_5(n);
  PrimalResult r2 = solve_primal(p2);
  JointPlan assembled = assemble_ex2_5_plan(p2, p1, r1.plan);
  double feas = feasibility_residual(p2, assembled);
  checks.push_back({"assembled plan is feasible", feas <= 1e-9, feas});
  double assembled_cost = plan_cost(p2, assembled);
  checks.push_back({"assembled plan cost equals the 1D value",
                    std::abs(assembled_cost - r1.value) <= 1e-8, assembled_cost});
  checks.push_back({"lower bound: value >= 1D value", r2.value >= r1.value - 1e-8, r2.value});
  checks.push_back({"upper bound: value <= assembled cost",
                    r2.value <= assembled_cost + 1e-8, r2.value});
  checks.push_back({"two bounds agree", std::abs(assembled_cost - r1.value) <= 1e-8,
                    assembled_cost - r1.value});

  DualTriple dual = recover_dual(p2, r2.lp);
  double gap = duality_gap(p2, r2, dual);
  checks.push_back({"zero duality gap", std::abs(gap) <= 1e-8, gap});

  std::vector<std::vector<double>> rows;
  for (const ThreePointRow& row : tps.rows)
    rows.push_back({row.x, row.t_minus, row.t_plus, row.lambda_minus, row.lambda_plus,
                    row.stay});
  fs::create_directories(out_dir);
  write_csv(csv_path(out_dir, "ex2_5", "three_point"),
            {"x", "t_minus", "t_plus", "lambda_minus", "lambda_plus", "stay"}, rows);

  json extra;
  extra["value_2d"] = r2.value;
  extra["value_1d"] = r1.value;
  extra["assembled_cost"] = assembled_cost;
  return write_reproduce_report(out_dir, "ex2_5", checks, extra);
}

RunOutcome reproduce_ex2_7(int n, const std::string& out_dir) {
  MmotProblem p = instance_ex2_7(n);
  PrimalResult r = solve_primal(p);
  std::vector<Assertion> checks;

  double closed_form = 0.0;
  for (const Atom& a : p.mus[0].atoms())
    closed_form += a.weight * (100.0 - a.position * a.position) / 10.0;
  checks.push_back({"value matches the closed-form marginal integral",
                    std::abs(r.value - closed_form) <= 1e-8, r.value - closed_form});

  MmotProblem spread = make_problem({p.mus[1]}, {p.nus[1]}, CostSpec::neg_norm(2.0));
  MmotProblem stay = make_problem({p.mus[1]}, {p.nus[1]}, CostSpec::pos_norm(2.0));
  JointPlan plan_a = assemble_ex2_7_plan(p, solve_primal(spread).plan);
  JointPlan plan_b = assemble_ex2_7_plan(p, solve_primal(stay).plan);
  double feas_a = feasibility_residual(p, plan_a);
  double feas_b = feasibility_residual(p, plan_b);
  checks.push_back({"constructed optima are feasible", std::max(feas_a, feas_b) <= 1e-9,
                    std::max(feas_a, feas_b)});
  double cost_a = plan_cost(p, plan_a), cost_b = plan_cost(p, plan_b);
  checks.push_back({"both constructions attain the optimum",
                    std::abs(cost_a - r.value) <= 1e-8 && std::abs(cost_b - r.value) <= 1e-8,
                    std::max(std::abs(cost_a - r.value), std::abs(cost_b - r.value))});

  ExtremalityReport ext_a = check_conditional_extremality(plan_a, 1e-6);
  ExtremalityReport ext_b = check_conditional_extremality(plan_b, 1e-6);
  checks.push_back({"spread optimum is extremal", ext_a.extreme_fraction_of_mass >= 0.99,
                    ext_a.extreme_fraction_of_mass});
  checks.push_back({"staying optimum places interior conditional mass",
                    ext_b.extreme_fraction_of_mass <= 0.9, ext_b.extreme_fraction_of_mass});

  json extra;
  extra["value"] = r.value;
  extra["closed_form"] = closed_form;
  extra["extreme_fraction_spread"] = ext_a.extreme_fraction_of_mass;
  extra["extreme_fraction_staying"] = ext_b.extreme_fraction_of_mass;
  return write_reproduce_report(out_dir, "ex2_7", checks, extra);
}

RunOutcome reproduce_ex2_8(int n, const std::string& out_dir) {
  MmotProblem p = instance_ex2_8(n);
  PrimalResult r = solve_primal(p);
  std::vector<Assertion> checks;

  double closed_form = 0.0;
  for (const Atom& b : p.nus[0].atoms())
    closed_form -= b.weight * b.position * b.position;
  checks.push_back({"value is minus the second moment of nu_1",
                    std::abs(r.value - closed_form) <= 1e-8, r.value - closed_form});

  std::vector<double> yw = r.plan.y_weights();
  double diag = 0.0;
  for (int yi = 0; yi < p.y_size(); ++yi)
    if (std::abs(p.y_grid[yi][0] - p.y_grid[yi][1]) <= kCoordTol) diag += yw[yi];
  checks.push_back({"second copula sits on the diagonal", std::abs(diag - 1.0) <= 1e-8, diag});

  GraphReport graph = check_graph_structure(r.plan, {0}, 1e-6);
  checks.push_back({"conditionals are graph-structured over y_1", graph.pass,
                    static_cast<double>(graph.violations.size())});

  DualTriple dual = recover_dual(p, r.lp);
  double gap = duality_gap(p, r, dual);
  checks.push_back({"zero duality gap", std::abs(gap) <= 1e-8, gap});

  json extra;
  extra["value"] = r.value;
  extra["closed_form"] = closed_form;
  extra["diagonal_mass"] = diag;
  return write_reproduce_report(out_dir, "ex2_8", checks, extra);
}

}  // namespace

RunOutcome run_reproduce(const std::string& example, int n, const std::string& out_dir) {
  try {
    if (example == "ex2_4") return reproduce_ex2_4(out_dir);
    if (example == "ex2_5") return reproduce_ex2_5(n, out_dir);
    if (example == "ex2_7") return reproduce_ex2_7(n, out_dir);
    if (example == "ex2_8") return reproduce_ex2_8(n, out_dir);
  } catch (const std::exception& e) {
    RunOutcome outcome;
    outcome.exit_code = 1;
    outcome.failure = e.what();
    return outcome;
  }
  RunOutcome outcome;
  outcome.failure = "unknown example: " + example + " (expected ex2_4|ex2_5|ex2_7|ex2_8)";
  return outcome;
}

RunOutcome run_solve(const std::string& problem_path, const std::string& out_dir,
                     const std::map<std::string, double>& tol_overrides, bool dump_lp_file) {
  RunOutcome outcome;
  MmotProblem problem;
  std::map<std::string, double> tol = default_tolerances();
  for (auto& [k, v] : tol_overrides) tol[k] = v;
  try {
    problem = problem_from_json(load_json_file(problem_path));
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.failure = e.what();
    return outcome;
  }
  std::string name = fs::path(problem_path).stem().string();
  try {
    fs::create_directories(out_dir);
    if (dump_lp_file) {
      std::ofstream lp_out(fs::path(out_dir) / (name + ".lp"));
      dump_lp(build_lp(problem), lp_out);
    }
    PrimalResult r = solve_primal(problem);
    DualTriple dual = gauge_normalize(recover_dual(problem, r.lp), problem);
    double gap = duality_gap(problem, r, dual);
    json report;
    report["name"] = name;
    report["tolerances"] = tolerances_to_json(tol);
    report["value"] = r.value;
    report["gap"] = gap;
    report["plan"] = plan_to_json(r.plan);
    report["dual"] = dual_to_json(dual);
    outcome.report_path = (fs::path(out_dir) / (name + "_result.json")).string();
    write_json_file(outcome.report_path, report);
    outcome.pass = std::abs(gap) <= tol.at("gap");
    outcome.exit_code = outcome.pass ? 0 : 1;
    if (!outcome.pass) outcome.failure = "duality gap exceeds tolerance";
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.failure = e.what();
  }
  return outcome;
}

RunOutcome run_decompose(const std::string& mu_path, const std::string& nu_path,
                         const std::string& out_dir) {
  RunOutcome outcome;
  DiscreteMeasure mu, nu;
  try {
    mu = measure_from_json(load_json_file(mu_path));
    nu = measure_from_json(load_json_file(nu_path));
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.failure = e.what();
    return outcome;
  }
  try {
    Decomposition dec = irreducible_components(mu, nu);
    fs::create_directories(out_dir);
    outcome.report_path = (fs::path(out_dir) / "decomposition.json").string();
    write_json_file(outcome.report_path, decomposition_to_json(dec));
    outcome.pass = true;
    outcome.exit_code = 0;
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.failure = e.what();
  }
  return outcome;
}

}  // namespace mmot
