#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypwp/analysis.hpp"
#include "hypwp/conjugator.hpp"
#include "hypwp/errors.hpp"
#include "hypwp/numerics.hpp"
#include "hypwp/spectral.hpp"

namespace hypwp::io {

using Json = nlohmann::ordered_json;

// Field access with JSON-path diagnostics ("$.levi.s: expected a number").
class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& raw() const { return j_; }
  bool has(const std::string& k) const { return j_.is_object() && j_.contains(k); }

  Node at(const std::string& k) const {
    object();
    if (!j_.contains(k)) fail(path_ + "." + k, "required field missing");
    return Node(j_.at(k), path_ + "." + k);
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const {
    if (!j_.is_array()) fail(path_, "expected an array");
    return j_.size();
  }

  double num() const {
    if (!j_.is_number()) fail(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail(path_, "expected a finite number");
    return v;
  }
  int integer() const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    return j_.get<int>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }
  std::string str() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }
  double num(const std::string& k, double def) const { return has(k) ? at(k).num() : def; }
  int integer(const std::string& k, int def) const { return has(k) ? at(k).integer() : def; }
  std::string str(const std::string& k, const std::string& def) const {
    return has(k) ? at(k).str() : def;
  }

  void object() const {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw InputError(path + ": " + msg);
  }

  // runs a constructor, re-raising domain errors against this node's path
  template <class F>
  auto build(F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const DomainError& e) {
      fail(path_, e.what());
    }
  }

 private:
  const Json& j_;
  std::string path_;
};

inline ShapeFunction parse_shape(const Node& n) {
  n.object();
  const std::string kind = n.at("kind").str();
  const double T = n.num("T", 1.0);
  if (kind == "monomial") {
    const double l = n.at("l").num();
    return n.build([&] { return ShapeFunction::monomial(l, T); });
  }
  if (kind == "exponential_flat") {
    const double r = n.at("r").num();
    return n.build([&] { return ShapeFunction::exponential_flat(r, T); });
  }
  Node::fail(n.path() + ".kind", "unknown shape '" + kind + "' (monomial, exponential_flat)");
}

inline LeviWeight parse_levi(const Node& n, const ShapeFunction& shape) {
  n.object();
  const int m = n.at("m").integer();
  const std::string profile = n.str("profile", "");
  if (!profile.empty()) {
    if (profile == "log_squared") return n.build([&] { return LeviWeight::log_squared(m, shape); });
    Node::fail(n.path() + ".profile", "unknown profile '" + profile + "' (log_squared)");
  }
  const double s = n.at("s").num();
  const int mt = n.integer("m_tilde", 0);
  const double beta = n.num("beta", 0.0);
  return n.build([&] { return LeviWeight(m, s, mt, beta, shape); });
}

inline Modulus parse_modulus(const Node& n) {
  n.object();
  const std::string kind = n.at("kind").str();
  if (kind == "lipschitz") return Modulus::lipschitz();
  if (kind == "log_lip") return Modulus::log_lip();
  if (kind == "log_lip_squared") return Modulus::log_lip_squared();
  if (kind == "log_log_lip") {
    const int d = n.integer("depth", 1);
    return n.build([&] { return Modulus::log_log_lip(d); });
  }
  if (kind == "hoelder") {
    const double a = n.at("alpha").num();
    return n.build([&] { return Modulus::hoelder(a); });
  }
  if (kind == "log_inverse") {
    const double a = n.at("alpha").num();
    return n.build([&] { return Modulus::log_inverse(a); });
  }
  Node::fail(n.path() + ".kind",
             "unknown modulus '" + kind +
                 "' (lipschitz, log_lip, log_log_lip, hoelder, log_inverse, log_lip_squared)");
}

inline WeightSequence parse_sequence(const Node& n) {
  n.object();
  const std::string kind = n.at("kind").str();
  const int P = n.integer("P_max", 20000);
  if (kind == "gevrey") {
    const double s = n.at("s_star").num(), A = n.num("A", 1.0);
    return n.build([&] { return WeightSequence::gevrey(s, A, P); });
  }
  if (kind == "log_factorial") return n.build([&] { return WeightSequence::log_factorial(P); });
  Node::fail(n.path() + ".kind", "unknown sequence '" + kind + "' (gevrey, log_factorial)");
}

inline WeightFunction parse_eta(const Node& n) {
  n.object();
  const std::string kind = n.at("kind").str();
  const double d0 = n.num("delta0", 1.0), d1 = n.num("delta1", 1.0);
  if (kind == "power") {
    const double th = n.at("theta").num();
    return n.build([&] { return WeightFunction::power(th, d0, d1); });
  }
  if (kind == "power_over_log") {
    const double th = n.at("theta").num(), k = n.at("kappa").num();
    return n.build([&] { return WeightFunction::power_over_log(th, k, d0, d1); });
  }
  if (kind == "example_log_corrected") {
    const double s = n.at("s").num();
    return n.build([&] { return WeightFunction::example_log_corrected(s, d0, d1); });
  }
  Node::fail(n.path() + ".kind",
             "unknown eta '" + kind + "' (power, power_over_log, example_log_corrected)");
}

inline ZonePartition parse_zones(const Node& n) {
  n.object();
  ZonePartition z;
  z.N = n.num("N", 1.0);
  z.M_cut = n.num("M_cut", 2.0);
  n.build([&] {
    z.validate();
    return 0;
  });
  return z;
}

// const | power c t^p | abs_power b + c |t - t0|^alpha | polynomial sum c_k t^k | levi_saturating
inline TimeCoefficient parse_coefficient(const Node& n, const LeviWeight& lw, int j, int gamma) {
  n.object();
  const std::string kind = n.at("kind").str();
  const double T = lw.shape().T();
  if (kind == "const") return TimeCoefficient::constant_value(n.at("value").num(), T);
  if (kind == "power") return power_coefficient(n.num("c", 1.0), n.at("p").num(), T);
  if (kind == "abs_power") {
    const double b = n.num("offset", 0.0), c = n.num("c", 1.0), t0 = n.num("t0", 0.5);
    const double a = n.at("alpha").num();
    if (!(a > 0 && a <= 1)) Node::fail(n.path() + ".alpha", "expected a value in (0, 1]");
    TimeCoefficient tc;
    tc.a = [b, c, t0, a](double t) { return b + c * std::pow(std::fabs(t - t0), a); };
    tc.T = T;
    tc.name = "abs_power";
    tc.breaks = {t0};
    tc.declared_modulus = a < 1 ? Modulus::hoelder(a) : Modulus::lipschitz();
    return tc;
  }
  if (kind == "polynomial") {
    const Node cs = n.at("coeffs");
    std::vector<double> c;
    for (std::size_t i = 0; i < cs.size(); ++i) c.push_back(cs.at(i).num());
    TimeCoefficient tc;
    tc.a = [c](double t) {
      double v = 0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
      return v;
    };
    tc.T = T;
    tc.name = "polynomial";
    return tc;
  }
  if (kind == "levi_saturating") return levi_saturating_coefficient(lw, j, gamma, n.num("scale", 1.0));
  Node::fail(n.path() + ".kind",
             "unknown coefficient '" + kind +
                 "' (const, power, abs_power, polynomial, levi_saturating)");
}

inline ModelProblem parse_model(const Node& n, const ProblemSpec& ps) {
  n.object();
  ModelProblem mp;
  mp.m = ps.lw.m();
  mp.lw = ps.lw;
  mp.zones = ps.zones;
  mp.mu = ps.mu;
  mp.lambda_one = n.has("lambda_one") && n.at("lambda_one").boolean();
  const Node pr = n.at("principal");
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const Node e = pr.at(i);
    const int j = e.at("j").integer();
    mp.principal.push_back({j, parse_coefficient(e.at("coef"), ps.lw, j, mp.m - j)});
  }
  if (n.has("lower")) {
    const Node lo = n.at("lower");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const Node e = lo.at(i);
      const int j = e.at("j").integer(), g = e.at("gamma").integer();
      cdouble f(1, 0);
      if (e.has("factor")) {
        const Node fa = e.at("factor");
        if (fa.size() != 2) Node::fail(fa.path(), "expected [re, im]");
        f = cdouble(fa.at(0).num(), fa.at(1).num());
      }
      mp.lower.push_back({j, g, f, parse_coefficient(e.at("coef"), ps.lw, j, g)});
    }
  }
  n.build([&] {
    validate_model(mp);
    return 0;
  });
  return mp;
}

struct FitSpec {
  std::string target = "levi";  // levi | phi | total
  Json g;                       // comparison function
  double tol = 0.02;
};

inline double eval_fit_g(const Node& g, double xi) {
  const std::string kind = g.at("kind").str();
  if (kind == "power") return std::pow(xi, g.at("theta").num());
  if (kind == "log_power") return std::pow(std::log(xi), g.at("k").num());
  if (kind == "example2") return example2_weight(g.at("s").num(), xi);
  if (kind == "family")
    return family_weight(g.at("s").num(), g.at("m_tilde").integer(), g.at("beta").num(), xi);
  Node::fail(g.path() + ".kind", "unknown fit function '" + kind +
                                     "' (power, log_power, example2, family)");
}

struct Experiment {
  std::string name;
  ProblemSpec ps;
  std::optional<ModelProblem> model;
  std::optional<ConjugatorConfig> conjugator;
  std::optional<FitSpec> fit;
};

inline Experiment parse_experiment(const Json& doc) {
  const Node root(doc, "$");
  root.object();
  const ShapeFunction shape = parse_shape(root.at("shape"));
  const LeviWeight lw = parse_levi(root.at("levi"), shape);
  const double s_eff = lw.is_custom() ? 2.0 : lw.s();
  Modulus mu = root.has("modulus") ? parse_modulus(root.at("modulus")) : Modulus::lipschitz();
  WeightSequence ws = root.has("sequence") ? parse_sequence(root.at("sequence"))
                                           : WeightSequence::gevrey(s_eff, 1, 20000);
  WeightFunction eta =
      root.has("eta") ? parse_eta(root.at("eta")) : WeightFunction::power(1 / s_eff);
  ZonePartition z = root.has("zones") ? parse_zones(root.at("zones")) : ZonePartition{};
  Experiment ex{root.str("name", ""),
                ProblemSpec{lw, std::move(mu), std::move(ws), std::move(eta), z,
                            root.num("nu", 0.0)},
                std::nullopt,
                std::nullopt,
                std::nullopt};
  if (root.has("model")) ex.model = parse_model(root.at("model"), ex.ps);
  if (root.has("conjugator")) {
    const Node c = root.at("conjugator");
    c.object();
    ConjugatorConfig cfg(ex.ps);
    if (c.has("M")) {
      const Node M = c.at("M");
      if (M.size() != 7) Node::fail(M.path(), "expected 7 constants");
      for (std::size_t i = 0; i < 7; ++i) cfg.Mt[i] = M.at(i).num();
    }
    cfg.M8 = c.num("M8", 1.0);
    cfg.kappa = c.num("kappa", 1.0);
    if (c.has("t1")) cfg.t1 = c.at("t1").num();
    c.build([&] {
      cfg.validate();
      return 0;
    });
    ex.conjugator = cfg;
  }
  if (root.has("fit")) {
    const Node f = root.at("fit");
    FitSpec fs;
    fs.target = f.str("target", "levi");
    if (fs.target != "levi" && fs.target != "phi" && fs.target != "total")
      Node::fail(f.path() + ".target", "expected levi, phi or total");
    fs.g = f.at("g").raw();
    fs.tol = f.num("tol", 0.02);
    eval_fit_g(f.at("g"), 10.0);  // validates the kind and its fields
    ex.fit = fs;
  }
  return ex;
}

// Parses text; JSON syntax errors report line and column.
inline Experiment parse_experiment_text(const std::string& text, const std::string& origin) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": malformed JSON");
  }
  return parse_experiment(doc);
}

inline Experiment load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open spec file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_text(ss.str(), path);
}

// CSV with every number at 17 significant digits.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<double>& v) {
    if (v.size() != header_.size()) throw DomainError("csv row width mismatch");
    rows_.push_back(v);
  }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += "\n";
    for (auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + numerics::fmt17(r[i]);
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

// nlohmann prints doubles round-trip exactly; non-finite values become null.
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(); }

// JSON text with floats at 17 significant digits, two-space indentation.
inline void dump17(const Json& j, std::string& out, int indent = 0) {
  const std::string pad(indent + 2, ' '), close(indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump17(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump17(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? numerics::fmt17(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

inline std::string dump17(const Json& j) {
  std::string out;
  dump17(j, out);
  return out + "\n";
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write output file");
  out << text;
  if (!out) throw InputError(path + ": write failed");
}

}  // namespace hypwp::io
