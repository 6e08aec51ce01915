#include "smallball/fields.hpp"

#include <json.hpp>

#include <cmath>
#include <utility>

#include "smallball/errors.hpp"
#include "smallball/kernels.hpp"
#include "smallball/linalg.hpp"

namespace smallball {

void eval_field_batch(const VectorFieldSpec& f, std::size_t k, const double* X,
                      double* OUT) {
  if (f.eval_batch) {
    f.eval_batch(k, X, OUT);
    return;
  }
  const std::size_t n = f.dim;
  Vec x(n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) x[j] = X[j * k + i];
    const Vec y = f(x);
    for (std::size_t j = 0; j < n; ++j) OUT[j * k + i] = y[j];
  }
}

VectorFieldSpec make_constant_field(Vec b, double rho) {
  if (!all_finite(b)) throw Error("constant field: b must be finite");
  const std::size_t n = b.size();
  VectorFieldSpec f;
  f.dim = n;
  f.rho = rho;
  f.family = "constant";
  f.analytic = AnalyticConstants{0.0, 0.0};
  f.eval = [b](const Vec&) { return b; };
  f.jacobian = [n](const Vec&) { return Mat(n); };
  f.eval_batch = [b, n](std::size_t k, const double*, double* OUT) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < k; ++i) OUT[j * k + i] = b[j];
  };
  return f;
}

VectorFieldSpec make_affine_field(Mat A, Vec b, double rho) {
  if (!all_finite(A) || !all_finite(b)) throw Error("affine field: data must be finite");
  if (A.n() != b.size()) throw Error("affine field: dimension mismatch");
  VectorFieldSpec f;
  f.dim = b.size();
  f.rho = rho;
  f.family = "affine";
  f.analytic = AnalyticConstants{operator_norm(A), 0.0};
  f.eval = [A, b](const Vec& x) { return matvec(A, x) + b; };
  f.jacobian = [A](const Vec&) { return A; };
  f.eval_batch = [A, b](std::size_t k, const double* X, double* OUT) {
    kernels::active_ops().affine_map(b.size(), k, A.data(), b.data(), X, OUT);
  };
  return f;
}

VectorFieldSpec make_smooth_perturbed_field(Mat A, Vec b, double eps, double rho) {
  if (!std::isfinite(eps)) throw Error("perturbed field: eps must be finite");
  if (A.n() != b.size()) throw Error("perturbed field: dimension mismatch");
  const std::size_t n = b.size();
  VectorFieldSpec f;
  f.dim = n;
  f.rho = rho;
  f.family = "affine_plus_smooth";
  // s_j(x) = sin(x_{(j+1) mod n}): s' is a shifted diagonal of cosines, so
  // sup||s'|| = 1 and ||s'(x)-s'(y)|| = max_j |cos x_j - cos y_j| <= ||x-y||.
  f.analytic = AnalyticConstants{operator_norm(A) + std::fabs(eps), std::fabs(eps)};
  f.eval = [A, b, eps, n](const Vec& x) {
    Vec y = matvec(A, x) + b;
    for (std::size_t j = 0; j < n; ++j) y[j] += eps * std::sin(x[(j + 1) % n]);
    return y;
  };
  f.jacobian = [A, eps, n](const Vec& x) {
    Mat J = A;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = (j + 1) % n;
      J(j, m) += eps * std::cos(x[m]);
    }
    return J;
  };
  f.eval_batch = [A, b, eps, n](std::size_t k, const double* X, double* OUT) {
    kernels::active_ops().affine_map(n, k, A.data(), b.data(), X, OUT);
    for (std::size_t j = 0; j < n; ++j) {
      const double* xs = X + ((j + 1) % n) * k;
      double* out = OUT + j * k;
      for (std::size_t i = 0; i < k; ++i) out[i] += eps * std::sin(xs[i]);
    }
  };
  return f;
}

VectorFieldSpec make_quadratic_field(Vec coeff, Vec b, double rho) {
  if (!all_finite(coeff) || !all_finite(b)) throw Error("quadratic field: data must be finite");
  if (coeff.size() != b.size()) throw Error("quadratic field: dimension mismatch");
  const std::size_t n = b.size();
  double cmax = 0.0;
  for (double c : coeff) cmax = std::max(cmax, std::fabs(c));
  VectorFieldSpec f;
  f.dim = n;
  f.rho = rho;
  f.family = "gradient_quadratic";
  f.analytic = AnalyticConstants{2.0 * rho * cmax, 2.0 * cmax};
  f.eval = [coeff, b, n](const Vec& x) {
    Vec y(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = coeff[j] * x[j] * x[j] + b[j];
    return y;
  };
  f.jacobian = [coeff, n](const Vec& x) {
    Mat J(n);
    for (std::size_t j = 0; j < n; ++j) J(j, j) = 2.0 * coeff[j] * x[j];
    return J;
  };
  f.eval_batch = [coeff, b, n](std::size_t k, const double* X, double* OUT) {
    kernels::active_ops().square_scale_add(n, k, coeff.data(), b.data(), X, OUT);
  };
  return f;
}

VectorFieldSpec make_shifted_field(const VectorFieldSpec& base, const Vec& w) {
  if (w.size() != base.dim) throw Error("shifted field: dimension mismatch");
  VectorFieldSpec f = base;
  f.family = "shifted";
  const auto base_eval = base.eval;
  f.eval = [base_eval, w](const Vec& x) { return base_eval(x) - w; };
  if (base.eval_batch) {
    const auto inner = base.eval_batch;
    const std::size_t n = base.dim;
    f.eval_batch = [inner, w, n](std::size_t k, const double* X, double* OUT) {
      inner(k, X, OUT);
      for (std::size_t j = 0; j < n; ++j) {
        double* out = OUT + j * k;
        for (std::size_t i = 0; i < k; ++i) out[i] -= w[j];
      }
    };
  }
  return f;
}

double default_fd_step(const Vec& x) { return 1e-5 * (1.0 + norm(x)); }

Mat finite_diff_jacobian(const VectorFieldSpec& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw Error("finite_diff_jacobian: step must be positive");
  const std::size_t n = f.dim;
  Mat J(n);
  Vec xp = x, xm = x;
  for (std::size_t j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const bool plus_ok = norm(xp) <= f.rho;
    const bool minus_ok = norm(xm) <= f.rho;
    Vec col(n);
    if (plus_ok && minus_ok) {
      col = (1.0 / (2.0 * h)) * (f(xp) - f(xm));
    } else if (plus_ok) {
      col = (1.0 / h) * (f(xp) - f(x));
    } else if (minus_ok) {
      col = (1.0 / h) * (f(x) - f(xm));
    } else {
      throw Error("finite_diff_jacobian: step leaves the domain in both directions");
    }
    for (std::size_t i = 0; i < n; ++i) J(i, j) = col[i];
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::constant: return "constant";
    case Family::affine: return "affine";
    case Family::affine_plus_smooth: return "affine_plus_smooth";
    case Family::gradient_quadratic: return "gradient_quadratic";
    case Family::shifted: return "shifted";
  }
  return "?";
}

namespace {

using nlohmann::ordered_json;
using PK = ParseError::Kind;

Family family_from_name(const std::string& s) {
  if (s == "constant") return Family::constant;
  if (s == "affine") return Family::affine;
  if (s == "affine_plus_smooth") return Family::affine_plus_smooth;
  if (s == "gradient_quadratic") return Family::gradient_quadratic;
  if (s == "shifted") return Family::shifted;
  throw ParseError(PK::unknown_family, "unknown family '" + s + "'");
}

void reject_unknown_keys(const ordered_json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw ParseError(PK::unknown_key, "unknown key '" + it.key() + "' in " + where);
  }
}

const ordered_json& require_key(const ordered_json& obj, const std::string& key,
                                const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(PK::missing_key, "missing key '" + key + "' in " + where);
  return *it;
}

Vec parse_vec(const ordered_json& j, const std::string& name) {
  if (!j.is_array())
    throw ParseError(PK::bad_value, "'" + name + "' must be an array of numbers");
  Vec v;
  for (const auto& e : j) {
    if (!e.is_number())
      throw ParseError(PK::bad_value, "'" + name + "' must contain only numbers");
    v.push_back(e.get<double>());
  }
  if (!all_finite(v))
    throw ParseError(PK::bad_value, "'" + name + "' must be finite");
  return v;
}

Mat parse_mat(const ordered_json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw ParseError(PK::bad_value, "'" + name + "' must be an array of row arrays");
  const std::size_t n = j.size();
  Mat A(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec row = parse_vec(j[i], name);
    if (row.size() != n)
      throw ParseError(PK::dimension_mismatch, "'" + name + "' must be square");
    for (std::size_t c = 0; c < n; ++c) A(i, c) = row[c];
  }
  return A;
}

}  // namespace

Problem build_problem(const ProblemConfig& cfg) {
  const std::size_t n = cfg.dimension;
  auto need = [&](bool present, const char* key) {
    if (!present)
      throw ParseError(PK::missing_key, std::string("family '") +
                                            family_name(cfg.family) +
                                            "' requires '" + key + "'");
  };
  VectorFieldSpec field;
  switch (cfg.family) {
    case Family::constant:
      need(cfg.b.has_value(), "b");
      field = make_constant_field(*cfg.b, cfg.rho);
      break;
    case Family::affine:
      need(cfg.A.has_value(), "A");
      field = make_affine_field(*cfg.A, cfg.b ? *cfg.b : Vec(n, 0.0), cfg.rho);
      break;
    case Family::affine_plus_smooth:
      need(cfg.A.has_value(), "A");
      need(cfg.eps.has_value(), "eps");
      field = make_smooth_perturbed_field(*cfg.A, cfg.b ? *cfg.b : Vec(n, 0.0),
                                          *cfg.eps, cfg.rho);
      break;
    case Family::gradient_quadratic:
      field = make_quadratic_field(Vec(n, 1.0), cfg.b ? *cfg.b : Vec(n, 0.0), cfg.rho);
      break;
    case Family::shifted: {
      need(cfg.d.has_value(), "d");
      VectorFieldSpec base =
          make_quadratic_field(Vec(n, 1.0), cfg.b ? *cfg.b : Vec(n, 0.0), cfg.rho);
      // M1 from the base's analytic constants; w at the equality case of the
      // shift bound ||w - Psi(0)|| = 2 M1 rho along d.
      const double M1 = 2.0 * (base.analytic->theta + cfg.rho * base.analytic->gamma);
      const Vec psi0 = base.eval(Vec(n, 0.0));
      Vec w = psi0;
      axpy(2.0 * M1 * cfg.rho, *cfg.d, w);
      field = make_shifted_field(base, w);
      break;
    }
  }
  return Problem{std::move(field), cfg};
}

Problem parse_problem(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(PK::malformed_document, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ParseError(PK::malformed_document, "problem document must be a JSON object");

  reject_unknown_keys(doc, {"family", "dimension", "rho", "parameters", "budgets", "seed"},
                      "problem document");

  ProblemConfig cfg;
  const auto& fam = require_key(doc, "family", "problem document");
  if (!fam.is_string()) throw ParseError(PK::bad_value, "'family' must be a string");
  cfg.family = family_from_name(fam.get<std::string>());

  const auto& dim = require_key(doc, "dimension", "problem document");
  if (!dim.is_number_integer() || dim.get<long>() < 1)
    throw ParseError(PK::bad_value, "'dimension' must be a positive integer");
  cfg.dimension = dim.get<std::size_t>();

  const auto& rho = require_key(doc, "rho", "problem document");
  if (!rho.is_number() || !(rho.get<double>() > 0.0) ||
      !std::isfinite(rho.get<double>()))
    throw ParseError(PK::non_positive_rho, "'rho' must be a positive finite number");
  cfg.rho = rho.get<double>();

  ordered_json params = ordered_json::object();
  if (doc.contains("parameters")) {
    params = doc["parameters"];
    if (!params.is_object())
      throw ParseError(PK::bad_value, "'parameters' must be an object");
  }
  reject_unknown_keys(params, {"A", "b", "eps", "d"}, "parameters");

  auto get_vec = [&](const char* key) -> std::optional<Vec> {
    if (!params.contains(key)) return std::nullopt;
    Vec v = parse_vec(params[key], key);
    if (v.size() != cfg.dimension)
      throw ParseError(PK::dimension_mismatch,
                       std::string("'") + key + "' length does not match dimension");
    return v;
  };

  if (params.contains("A")) {
    Mat A = parse_mat(params["A"], "A");
    if (A.n() != cfg.dimension)
      throw ParseError(PK::dimension_mismatch, "'A' size does not match dimension");
    cfg.A = std::move(A);
  }
  cfg.b = get_vec("b");
  if (params.contains("eps")) {
    if (!params["eps"].is_number())
      throw ParseError(PK::bad_value, "'eps' must be a number");
    cfg.eps = params["eps"].get<double>();
  }
  cfg.d = get_vec("d");

  // family-specific requirements; keys that do not apply are rejected
  auto forbid = [&](const char* key) {
    if (params.contains(key))
      throw ParseError(PK::unknown_key, std::string("'") + key +
                                            "' does not apply to family '" +
                                            family_name(cfg.family) + "'");
  };
  switch (cfg.family) {
    case Family::constant:
      if (!cfg.b) throw ParseError(PK::missing_key, "constant family requires 'b'");
      forbid("A");
      forbid("eps");
      forbid("d");
      break;
    case Family::affine:
      if (!cfg.A) throw ParseError(PK::missing_key, "affine family requires 'A'");
      forbid("eps");
      forbid("d");
      break;
    case Family::affine_plus_smooth:
      if (!cfg.A)
        throw ParseError(PK::missing_key, "affine_plus_smooth family requires 'A'");
      if (!cfg.eps)
        throw ParseError(PK::missing_key, "affine_plus_smooth family requires 'eps'");
      forbid("d");
      break;
    case Family::gradient_quadratic:
      forbid("A");
      forbid("eps");
      forbid("d");
      break;
    case Family::shifted: {
      if (!cfg.d) throw ParseError(PK::missing_key, "shifted family requires 'd'");
      forbid("A");
      forbid("eps");
      const double nd = norm(*cfg.d);
      if (nd < 1e-12)
        throw ParseError(PK::bad_value, "'d' must be a nonzero direction");
      cfg.d = (1.0 / nd) * *cfg.d;  // stored normalized
      break;
    }
  }

  if (doc.contains("budgets")) {
    const auto& b = doc["budgets"];
    if (!b.is_object()) throw ParseError(PK::bad_value, "'budgets' must be an object");
    reject_unknown_keys(
        b, {"theta_samples", "gamma_samples", "minty_starts", "verify_samples"},
        "budgets");
    auto get_budget = [&](const char* key, auto& slot) {
      if (!b.contains(key)) return;
      if (!b[key].is_number_integer() || b[key].template get<long>() < 1)
        throw ParseError(PK::bad_value,
                         std::string("budget '") + key + "' must be an integer >= 1");
      slot = b[key].template get<std::decay_t<decltype(slot)>>();
    };
    get_budget("theta_samples", cfg.budgets.theta_samples);
    get_budget("gamma_samples", cfg.budgets.gamma_samples);
    get_budget("minty_starts", cfg.budgets.minty_starts);
    get_budget("verify_samples", cfg.budgets.verify_samples);
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer())
      throw ParseError(PK::bad_value, "'seed' must be an integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }

  return build_problem(cfg);
}

std::string emit_problem(const ProblemConfig& cfg) {
  ordered_json doc;
  doc["family"] = family_name(cfg.family);
  doc["dimension"] = cfg.dimension;
  doc["rho"] = cfg.rho;
  ordered_json params = ordered_json::object();
  if (cfg.A) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < cfg.A->n(); ++i) {
      ordered_json row = ordered_json::array();
      for (std::size_t j = 0; j < cfg.A->n(); ++j) row.push_back((*cfg.A)(i, j));
      rows.push_back(row);
    }
    params["A"] = rows;
  }
  if (cfg.b) params["b"] = *cfg.b;
  if (cfg.eps) params["eps"] = *cfg.eps;
  if (cfg.d) params["d"] = *cfg.d;
  doc["parameters"] = params;
  doc["budgets"] = {{"theta_samples", cfg.budgets.theta_samples},
                    {"gamma_samples", cfg.budgets.gamma_samples},
                    {"minty_starts", cfg.budgets.minty_starts},
                    {"verify_samples", cfg.budgets.verify_samples}};
  doc["seed"] = cfg.seed;
  return doc.dump(2) + "\n";
}

}  // namespace smallball
