#include "problem_file.hpp"

#include "avgtrack/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace avgtrack::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view source, std::string_view key, const std::string& what) {
  throw ProblemFileError(std::string(source) + ": key '" + std::string(key) + "': " + what);
}

double number_at(std::string_view source, std::string_view key, const json& value) {
  if (!value.is_number()) fail(source, key, "expected a number, got " + std::string(value.type_name()));
  return value.get<double>();
}

Matrix read_matrix(std::string_view source, const json& doc, std::string_view key) {
  const auto it = doc.find(std::string(key));
  if (it == doc.end()) fail(source, key, "missing required matrix");
  const json& rows = *it;
  if (!rows.is_array() || rows.empty()) fail(source, key, "expected a non-empty array of rows");
  const std::size_t n_rows = rows.size();
  if (!rows[0].is_array() || rows[0].empty()) fail(source, key, "row 0 must be a non-empty array");
  const std::size_t n_cols = rows[0].size();
  Matrix m(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n_cols) {
      fail(source, key, "row " + std::to_string(i) + " must have " + std::to_string(n_cols) + " entries");
    }
    for (std::size_t j = 0; j < n_cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number_at(source, key, rows[i][j]);
    }
  }
  return m;
}

Vector read_vector(std::string_view source, const json& value, std::string_view key) {
  if (!value.is_array() || value.empty()) fail(source, key, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_at(source, key, value[i]);
  return v;
}

}  // namespace

ProblemFile parse_problem(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProblemFileError(std::string(source) + ": " + e.what());
  }
  if (!doc.is_object()) throw ProblemFileError(std::string(source) + ": top level must be a JSON object");

  Matrix a = read_matrix(source, doc, "A");
  Matrix b = read_matrix(source, doc, "B");
  Matrix c = read_matrix(source, doc, "C");
  Matrix q = read_matrix(source, doc, "Q");
  Matrix r = read_matrix(source, doc, "R");
  if (!doc.contains("r_ss")) fail(source, "r_ss", "missing required reference vector");
  Vector r_ss = read_vector(source, doc["r_ss"], "r_ss");

  std::optional<TrackingProblem> problem;
  try {
    problem.emplace(LinearSystem(std::move(a), std::move(b), std::move(c)), std::move(q), std::move(r),
                    std::move(r_ss));
  } catch (const Error& e) {
    throw ProblemFileError(std::string(source) + ": inconsistent problem: " + e.what());
  }

  ProblemFile pf{std::move(*problem), std::nullopt, MpcConfig{}, Convention::HalfLinearTerms};

  if (doc.contains("x0")) {
    Vector x0 = read_vector(source, doc["x0"], "x0");
    if (x0.size() != pf.problem.system().n()) {
      fail(source, "x0", "expected " + std::to_string(pf.problem.system().n()) + " entries");
    }
    pf.x0 = std::move(x0);
  }

  if (doc.contains("mpc")) {
    const json& mpc = doc["mpc"];
    if (!mpc.is_object()) fail(source, "mpc", "expected an object");
    if (mpc.contains("N")) {
      if (!mpc["N"].is_number_integer() || mpc["N"].get<int>() < 1) fail(source, "mpc.N", "expected an integer >= 1");
      pf.mpc.horizon = mpc["N"].get<int>();
    }
    if (mpc.contains("L")) {
      if (!mpc["L"].is_number_integer() || mpc["L"].get<int>() < 0) fail(source, "mpc.L", "expected an integer >= 0");
      pf.mpc.rollout = mpc["L"].get<int>();
    }
    if (mpc.contains("qp_tol")) {
      const double tol = number_at(source, "mpc.qp_tol", mpc["qp_tol"]);
      if (!(tol > 0.0)) fail(source, "mpc.qp_tol", "must be positive");
      pf.mpc.qp_tol = tol;
    }
  }

  if (doc.contains("convention")) {
    const json& conv = doc["convention"];
    if (conv == "half") {
      pf.convention = Convention::HalfLinearTerms;
    } else if (conv == "exact") {
      pf.convention = Convention::ExactExpansion;
    } else {
      fail(source, "convention", "expected \"half\" or \"exact\"");
    }
  }
  return pf;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFileError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

bool is_reference_scalar_example(const ProblemFile& pf) {
  const TrackingProblem& p = pf.problem;
  const LinearSystem& s = p.system();
  if (s.n() != 1 || s.m() != 1 || s.p() != 1) return false;
  return s.A()(0, 0) == 2.0 && s.B()(0, 0) == 1.0 && s.C()(0, 0) == 1.0 && p.Q()(0, 0) == 1.0 &&
         p.R()(0, 0) == 1.0 && p.reference()(0) == 1.0 && pf.convention == Convention::HalfLinearTerms;
}

}  // namespace avgtrack::cli
