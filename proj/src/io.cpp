#include "mmot/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mmot {

json measure_to_json(const DiscreteMeasure& m) {
  json arr = json::array();
  for (const Atom& a : m.atoms()) arr.push_back({a.position, a.weight});
  return arr;
}

DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("measure: expected array of [position, weight]");
  std::vector<Atom> atoms;
  for (const json& pair : j) {
    if (!pair.is_array() || pair.size() != 2)
      throw std::invalid_argument("measure: expected [position, weight] pairs");
    atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return DiscreteMeasure(std::move(atoms));
}

json plan_to_json(const JointPlan& plan) {
  json j;
  j["dim"] = plan.dim();
  j["x_grid"] = plan.x_grid();
  j["y_grid"] = plan.y_grid();
  json entries = json::array();
  for (auto& [k, w] : plan.entries()) entries.push_back({k.first, k.second, w});
  j["entries"] = std::move(entries);
  return j;
}

JointPlan plan_from_json(const json& j) {
  JointPlan plan(j.at("dim").get<int>(), j.at("x_grid").get<std::vector<GridPoint>>(),
                 j.at("y_grid").get<std::vector<GridPoint>>());
  for (const json& e : j.at("entries"))
    plan.add_entry(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
  return plan;
}

namespace {

json endpoint_or_null(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

}  // namespace

json decomposition_to_json(const Decomposition& dec) {
  json j;
  j["fixed"] = measure_to_json(dec.fixed);
  json comps = json::array();
  for (const IrreducibleComponent& c : dec.components) {
    json cj;
    cj["index"] = c.index;
    cj["I"] = {endpoint_or_null(c.lo), endpoint_or_null(c.hi)};
    cj["J"] = {{"lo", endpoint_or_null(c.lo)},
               {"hi", endpoint_or_null(c.hi)},
               {"closed_lo", c.closed_lo},
               {"closed_hi", c.closed_hi}};
    cj["mu"] = measure_to_json(c.mu);
    cj["nu"] = measure_to_json(c.nu);
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  return j;
}

json cost_to_json(const CostSpec& cost, int x_size, int y_size) {
  json j;
  j["kind"] = cost.kind_name();
  switch (cost.kind) {
    case CostSpec::Kind::neg_norm:
    case CostSpec::Kind::pos_norm:
      j["p"] = cost.p;
      break;
    case CostSpec::Kind::max_norm:
      j["sign"] = cost.sign;
      break;
    case CostSpec::Kind::neg_product_pair:
      j["i"] = cost.i;
      j["j"] = cost.j;
      break;
    case CostSpec::Kind::table: {
      json rows = json::array();
      for (int xi = 0; xi < x_size; ++xi) {
        json row = json::array();
        for (int yi = 0; yi < y_size; ++yi)
          row.push_back(cost.table[static_cast<std::size_t>(xi) * y_size + yi]);
        rows.push_back(std::move(row));
      }
      j["table"] = std::move(rows);
      break;
    }
  }
  return j;
}

CostSpec cost_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "neg_norm") return CostSpec::neg_norm(j.value("p", 2.0));
  if (kind == "pos_norm") return CostSpec::pos_norm(j.value("p", 2.0));
  if (kind == "max_norm") return CostSpec::max_norm(j.value("sign", 1));
  if (kind == "neg_product_pair")
    return CostSpec::neg_product_pair(j.value("i", 0), j.value("j", 1));
  if (kind == "table") {
    std::vector<double> flat;
    for (const json& row : j.at("table"))
      for (const json& v : row) flat.push_back(v.get<double>());
    return CostSpec::from_table(std::move(flat));
  }
  throw std::invalid_argument("unknown cost kind: " + kind);
}

json problem_to_json(const MmotProblem& problem) {
  json j;
  j["d"] = problem.d;
  json mus = json::array(), nus = json::array();
  for (const DiscreteMeasure& m : problem.mus) mus.push_back(measure_to_json(m));
  for (const DiscreteMeasure& m : problem.nus) nus.push_back(measure_to_json(m));
  j["mu"] = std::move(mus);
  j["nu"] = std::move(nus);
  j["cost"] = cost_to_json(problem.cost, problem.x_size(), problem.y_size());
  return j;
}

MmotProblem problem_from_json(const json& j) {
  int d = j.at("d").get<int>();
  std::vector<DiscreteMeasure> mus, nus;
  for (const json& m : j.at("mu")) mus.push_back(measure_from_json(m));
  for (const json& m : j.at("nu")) nus.push_back(measure_from_json(m));
  if (static_cast<int>(mus.size()) != d || static_cast<int>(nus.size()) != d)
    throw std::invalid_argument("marginal count does not match d");
  return make_problem(std::move(mus), std::move(nus), cost_from_json(j.at("cost")));
}

json dual_to_json(const DualTriple& dual) {
  json j;
  j["f"] = dual.f;
  j["g"] = dual.g;
  j["h"] = dual.h;
  return j;
}

DualTriple dual_from_json(const json& j) {
  DualTriple dual;
  dual.f = j.at("f").get<std::vector<std::vector<double>>>();
  dual.g = j.at("g").get<std::vector<std::vector<double>>>();
  dual.h = j.at("h").get<std::vector<std::vector<double>>>();
  return dual;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return json::parse(in);  // nlohmann parse_error carries the byte offset
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const std::vector<double>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
}

}  // namespace mmot
