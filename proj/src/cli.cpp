#include "fermobius/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fermobius/asymptotics.hpp"
#include "fermobius/errors.hpp"
#include "fermobius/riemann.hpp"

namespace fm::cli {

namespace {

using json = nlohmann::json;

const char* kVersion = "0.1.0";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("malformed number '" + s + "' in " + what);
  }
}

long to_long(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("malformed integer '" + s + "' in " + what);
  }
}

std::vector<double> double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(to_double(t, what));
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string join(const std::vector<double>& v, char sep = ';') {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + fmt(v[i]);
  return s;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

struct Cell {
  bool numeric = true;
  double v = 0.0;
  std::string s;
  Cell(double x) : v(x) {}
  Cell(long x) : v(double(x)) {}
  Cell(int x) : v(double(x)) {}
  Cell(std::string x) : numeric(false), s(std::move(x)) {}
  Cell(const char* x) : numeric(false), s(x) {}
  std::string text() const { return numeric ? fmt(v) : s; }
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Library failures are re-raised with the module and operation that produced them.
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto stage(const char* where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageError(std::string(where) + ": " + e.what());
  }
}

std::string provenance(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# fermobius " << kVersion << " command=" << cfg.command;
  if (!cfg.chain_label.empty()) {
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)fnv1a(cfg.chain_label));
    os << " chain=" << cfg.chain_label << " chain_hash=" << hex;
  }
  os << " mode=" << (cfg.mode.kind == Mode::Finite ? "finite:" + std::to_string(cfg.mode.N) : std::string("thermo"))
     << " tol=" << fmt(cfg.tol);
  if (cfg.mobius) {
    const MobiusMap& m = *cfg.mobius;
    os << " mobius=" << join({m.a.real(), m.a.imag(), m.b.real(), m.b.imag(), m.c.real(), m.c.imag(), m.d.real(),
                              m.d.imag()}, ',');
  }
  return os.str();
}

void write_csv(const std::filesystem::path& path, const std::string& prov, const Table& t) {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write " + path.string());
  os << prov << "\n";
  for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i].text();
    os << "\n";
  }
}

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i].numeric && std::isfinite(row[i].v)) r[t.columns[i]] = row[i].v;
      else r[t.columns[i]] = row[i].text();
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> angles(const std::vector<cd>& pts) {
  std::vector<double> a;
  for (cd p : pts) a.push_back(std::arg(p));
  return a;
}

// largest insertion angle in (0, pi]
double theta_F(const CriticalityReport& rep) {
  double best = std::nan("");
  for (const auto* set : {&rep.u, &rep.v})
    for (cd p : *set) {
      double a = std::arg(p);
      if (a > 1e-12 && (std::isnan(best) || a > best)) best = a;
    }
  return best;
}

const CouplingSet& need_chain(const RunConfig& cfg) {
  if (!cfg.chain) throw UsageError(cfg.command + " needs --chain or --xydm");
  return *cfg.chain;
}

SubsystemSpec subsystem_for(const RunConfig& cfg, long X) {
  if (!cfg.intervals.empty()) return make_subsystem(cfg.intervals);
  return single_interval(X);
}

std::string intervals_text(const SubsystemSpec& sub) {
  std::string s;
  for (size_t i = 0; i < sub.intervals.size(); ++i)
    s += (i ? ";" : "") + std::to_string(sub.intervals[i].first) + ":" + std::to_string(sub.intervals[i].second);
  return s;
}

std::vector<Table> cmd_classify(const RunConfig& cfg) {
  const CouplingSet& c = need_chain(cfg);
  Table t{"classify", {"class", "R", "Q", "pinch_angles", "fermi_angles", "dirac_arcs"}, {}};
  CriticalityReport rep = stage("chain_model.classify", [&] { return classify(c); });
  std::string arcs;
  for (size_t i = 0; i < rep.dirac_intervals.size(); ++i)
    arcs += (i ? ";" : "") + fmt(rep.dirac_intervals[i].first) + ":" + fmt(rep.dirac_intervals[i].second);
  t.rows.push_back({to_string(rep.cls), rep.R, rep.Q, join(angles(rep.u)), join(angles(rep.v)), arcs});
  return {t};
}

std::vector<Table> cmd_entropy(const RunConfig& cfg, const std::filesystem::path& out, const std::string& prov) {
  const CouplingSet& c = need_chain(cfg);
  std::vector<SubsystemSpec> subs;
  if (!cfg.intervals.empty()) subs.push_back(make_subsystem(cfg.intervals));
  else
    for (long X : cfg.X) subs.push_back(single_interval(X));
  std::vector<std::vector<double>> spectra(subs.size());
  parallel_for(int(subs.size()), cfg.jobs, [&](int i) {
    spectra[i] = stage("correlation.entanglement_spectrum",
                       [&] { return entanglement_spectrum(build_VX(c, subs[i], cfg.mode)); });
  });
  Table t{"entropy", {"alpha", "X_size", "intervals", "S", "Z", "spectrum_path"}, {}};
  for (size_t i = 0; i < subs.size(); ++i) {
    std::string name = "spectrum_X" + std::to_string(subs[i].size()) + "_" + std::to_string(i) + ".csv";
    Table sp{"spectrum", {"l", "nu"}, {}};
    for (size_t l = 0; l < spectra[i].size(); ++l) sp.rows.push_back({long(l + 1), spectra[i][l]});
    write_csv(out / name, prov, sp);
    for (double a : cfg.alphas) {
      EntropyResult r = stage("correlation.renyi", [&] { return renyi(spectra[i], a); });
      t.rows.push_back({a, subs[i].size(), intervals_text(subs[i]), r.S, r.Z, name});
    }
  }
  return {t};
}

std::vector<Table> cmd_asym(const RunConfig& cfg) {
  const CouplingSet& c = need_chain(cfg);
  Table t{"asym", {"model", "params", "alpha", "X", "S_asym", "log_coefficient"}, {}};
  CriticalityReport rep = stage("chain_model.classify", [&] { return classify(c); });
  std::optional<ClosedFormParams> cf;
  std::string params;
  if (cfg.xydm && !cfg.mobius) {
    const XYDM& p = *cfg.xydm;
    params = fmt(p.gamma) + ";" + fmt(p.s) + ";" + fmt(p.h);
    if (p.gamma == 0 && p.s == 0 && std::abs(p.h) < 2) cf = ClosedFormParams{ClosedFormModel::CritXX, p.h, 1.0, 0.0};
    else if (p.s == 0 && p.gamma > 0 && std::abs(std::abs(p.h) - 2) < 1e-12)
      cf = ClosedFormParams{ClosedFormModel::IsingLine, 0.0, p.gamma, 0.0};
    else if (p.gamma == 0 && p.s != 0 && rep.cls == CriticalityClass::CriticalDiracSea)
      cf = ClosedFormParams{ClosedFormModel::XXDM, p.h, 0.0, p.s};
  }
  std::optional<CurveData> curve;
  if (!cf && rep.cls == CriticalityClass::Gapped) curve = stage("riemann.curve_data", [&] { return curve_data(c); });
  for (double a : cfg.alphas) {
    double logc = rep.cls == CriticalityClass::Gapped ? 0.0 : asymptotic_form(rep, 1, a).log_coefficient;
    for (long X : cfg.X) {
      if (cf) {
        const char* model = cf->model == ClosedFormModel::CritXX ? "crit_xx"
                            : cf->model == ClosedFormModel::IsingLine ? "ising_line"
                                                                     : "xx_dm";
        double S = stage("asymptotics.closed_form", [&] { return closed_form(*cf, double(X), a); });
        t.rows.push_back({model, params, a, X, S, logc});
      } else if (curve) {
        double S = stage("riemann.entropy_contour", [&] { return entropy_contour(*curve, a); });
        t.rows.push_back({"theta", params, a, X, S, 0.0});
      } else if (rep.Q == 0) {
        double S = stage("asymptotics.entropy_aef", [&] { return entropy_aef(rep.u, double(X), a); });
        t.rows.push_back({"aef", params, a, X, S, logc});
      } else {
        // constant term not known in closed form
        t.rows.push_back({"log_only", params, a, X, std::nan(""), logc});
      }
    }
  }
  return {t};
}

std::vector<Table> cmd_flow(const RunConfig& cfg) {
  const CouplingSet& c = need_chain(cfg);
  Table t{"flow", {"alpha", "X", "zeta", "theta_F", "angles", "S", "dS_numeric", "dS_predicted", "diff"}, {}};
  for (double a : cfg.alphas)
    for (long X : cfg.X) {
      SubsystemSpec sub = subsystem_for(cfg, X);
      auto rows = stage("correlation.entropy_flow_scan",
                        [&] { return entropy_flow_scan(c, cfg.zetas, a, sub, cfg.mode, cfg.jobs); });
      for (const auto& r : rows) {
        std::vector<double> ang = angles(r.report.u), av = angles(r.report.v);
        ang.insert(ang.end(), av.begin(), av.end());
        t.rows.push_back({a, sub.size(), r.zeta, theta_F(r.report), join(ang), r.S, r.dS_numeric, r.dS_predicted,
                          r.dS_numeric - r.dS_predicted});
      }
    }
  return {t};
}

std::vector<Table> cmd_theta_entropy(const RunConfig& cfg) {
  const CouplingSet& c = need_chain(cfg);
  CurveData d = stage("riemann.curve_data", [&] { return curve_data(c); });
  Table t{"theta_entropy", {"alpha", "X", "genus", "S_theta", "S_direct", "diff"}, {}};
  for (double a : cfg.alphas) {
    double St = stage("riemann.entropy_contour", [&] { return entropy_contour(d, a); });
    if (!cfg.check_direct) {
      t.rows.push_back({a, std::nan(""), d.curve.g, St, std::nan(""), std::nan("")});
      continue;
    }
    std::vector<double> Sd(cfg.X.size());
    parallel_for(int(cfg.X.size()), cfg.jobs, [&](int i) {
      Sd[i] = stage("correlation.entropy", [&] { return entropy(c, single_interval(cfg.X[i]), a, cfg.mode).S; });
    });
    for (size_t i = 0; i < cfg.X.size(); ++i) t.rows.push_back({a, cfg.X[i], d.curve.g, St, Sd[i], St - Sd[i]});
  }
  return {t};
}

std::vector<Table> cmd_multi(const RunConfig& cfg) {
  const CouplingSet& c = need_chain(cfg);
  if (cfg.intervals.empty()) throw UsageError("multi needs --intervals");
  SubsystemSpec sub = make_subsystem(cfg.intervals);
  std::vector<double> x;
  for (auto& iv : sub.intervals) {
    x.push_back(double(iv.first));
    x.push_back(double(iv.second + 1));
  }
  // distinct single-interval lengths needed by the product formula
  std::vector<long> lengths;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i + 1; j < x.size(); ++j) {
      long l = long(std::lround(x[j] - x[i]));
      if (std::find(lengths.begin(), lengths.end(), l) == lengths.end()) lengths.push_back(l);
    }
  int P = int(sub.intervals.size());
  Table t{"multi", {"alpha", "intervals", "S_direct", "S_product", "diff", "exponent_sum"}, {}};
  for (double a : cfg.alphas) {
    std::vector<double> S1(lengths.size());
    double Sd = 0.0;
    parallel_for(int(lengths.size()) + 1, cfg.jobs, [&](int i) {
      if (i == int(lengths.size())) Sd = stage("correlation.entropy", [&] { return entropy(c, sub, a, cfg.mode).S; });
      else S1[i] = stage("correlation.entropy", [&] { return entropy(c, single_interval(lengths[i]), a, cfg.mode).S; });
    });
    double Sp = stage("asymptotics.multiinterval_S", [&] {
      return multiinterval_S(
          [&](double l) {
            auto it = std::find(lengths.begin(), lengths.end(), long(std::lround(l)));
            return S1[it - lengths.begin()];
          },
          x);
    });
    t.rows.push_back({a, intervals_text(sub), Sd, Sp, Sd - Sp, exponent_sum(P)});
  }
  return {t};
}

Table flow_figure(const std::string& name, const CouplingSet& c, const std::vector<double>& zetas, double alpha,
                  long X, const RunConfig& cfg) {
  Table t{name, {"zeta", "theta_F", "S", "dS_numeric", "dS_conjectured"}, {}};
  auto rows = stage("correlation.entropy_flow_scan",
                    [&] { return entropy_flow_scan(c, zetas, alpha, single_interval(X), cfg.mode, cfg.jobs); });
  for (const auto& r : rows) t.rows.push_back({r.zeta, theta_F(r.report), r.S, r.dS_numeric, r.dS_predicted});
  return t;
}

std::vector<double> grid(double a, double b, double step) {
  std::vector<double> g;
  for (long i = 0;; ++i) {
    double v = a + double(i) * step;
    if (v > b + 1e-9 * step) break;
    g.push_back(std::abs(v) < 1e-12 ? 0.0 : v);
  }
  return g;
}

std::vector<Table> cmd_figures(const RunConfig& cfg) {
  std::vector<Table> out;
  double alpha = cfg.alphas.front();
  for (int w : cfg.which) {
    if (w == 3) {
      CouplingSet c = cfg.chain ? *cfg.chain : parity_preserving_l2();
      std::vector<double> z = cfg.zetas_given ? cfg.zetas : grid(-0.44, 0.44, 0.04);
      out.push_back(flow_figure("fig3", c, z, alpha, cfg.X_given ? cfg.X.front() : 400, cfg));
    } else if (w == 4) {
      CouplingSet c = cfg.chain ? *cfg.chain : xydm_couplings(0, 1, 0);
      std::vector<double> z = cfg.zetas_given ? cfg.zetas : grid(0.0, 0.5, 0.05);
      out.push_back(flow_figure("fig4", c, z, alpha, cfg.X_given ? cfg.X.front() : 400, cfg));
    } else if (w == 5) {
      long X = cfg.X_given ? cfg.X.front() : 100;
      Table t{"fig5", {"kind", "id", "zeta", "gamma", "h", "S"}, {}};
      struct Pt {
        std::string kind;
        int id;
        double zeta, gamma, h;
      };
      std::vector<Pt> pts;
      int id = 0;
      for (double g : grid(0.25, 2.0, 0.25))
        for (double h : grid(2.25, 4.0, 0.25)) pts.push_back({"grid", id++, 0.0, g, h});
      std::vector<double> z = cfg.zetas_given ? cfg.zetas : grid(-0.2, 0.5, 0.05);
      int traj = 0;
      for (auto [g, h] : std::vector<std::pair<double, double>>{{0.5, 3.0}, {1.0, 4.0}, {2.0, 5.0}}) {
        for (double zeta : z) {
          XYDM p = stage("mobius.transform_xydm", [&] { return transform_xydm(zeta, g, 0.0, h); });
          pts.push_back({"trajectory", traj, zeta, p.gamma, p.h});
        }
        ++traj;
      }
      std::vector<double> S(pts.size());
      parallel_for(int(pts.size()), cfg.jobs, [&](int i) {
        S[i] = stage("correlation.entropy", [&] {
          return entropy(xydm_couplings(pts[i].gamma, 0.0, pts[i].h), single_interval(X), alpha, cfg.mode).S;
        });
      });
      for (size_t i = 0; i < pts.size(); ++i)
        t.rows.push_back({pts[i].kind, pts[i].id, pts[i].zeta, pts[i].gamma, pts[i].h, S[i]});
      out.push_back(t);
    }
  }
  return out;
}

json chain_json_of(const CouplingSet& c) {
  json A = json::array(), B = json::array();
  for (int l = 0; l <= c.L; ++l) {
    A.push_back({c.a(l).real(), c.a(l).imag()});
    B.push_back({c.b(l).real(), c.b(l).imag()});
  }
  return {{"L", c.L}, {"A", A}, {"B", B}};
}

cd json_complex(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw UsageError(what + ": coefficients must be numbers or [re, im] pairs");
}

std::optional<XYDM> xydm_from_json(const json& j, const std::string& what) {
  if (!j.contains("xydm")) return std::nullopt;
  const json& x = j.at("xydm");
  if (x.is_object()) return XYDM{x.at("gamma").get<double>(), x.value("s", 0.0), x.at("h").get<double>()};
  auto v = x.get<std::vector<double>>();
  if (v.size() != 3) throw UsageError(what + ": xydm needs [gamma, s, h]");
  return XYDM{v[0], v[1], v[2]};
}

std::vector<cd> json_coeffs(const json& j, const std::string& key, const std::string& what) {
  std::vector<cd> out;
  if (j.contains(key)) {
    for (const auto& v : j.at(key)) out.push_back(json_complex(v, what));
    return out;
  }
  // split form: key_re, key_im
  auto re = j.at(key + "_re").get<std::vector<double>>();
  auto im = j.contains(key + "_im") ? j.at(key + "_im").get<std::vector<double>>() : std::vector<double>(re.size());
  if (im.size() != re.size()) throw UsageError(what + ": " + key + "_re and " + key + "_im differ in length");
  for (size_t i = 0; i < re.size(); ++i) out.emplace_back(re[i], im[i]);
  return out;
}

CouplingSet chain_from_json(const json& j, const std::string& what, std::optional<XYDM>* xydm = nullptr) {
  try {
    if (!j.is_object()) throw UsageError(what + ": chain must be a JSON object");
    if (auto p = xydm_from_json(j, what)) {
      if (xydm) *xydm = p;
      return xydm_couplings(p->gamma, p->s, p->h);
    }
    if (j.contains("fplus")) return couplings_from_fplus(j.at("fplus").get<std::vector<double>>());
    int L = j.at("L").get<int>();
    return couplings_from_nonnegative(L, json_coeffs(j, "A", what), json_coeffs(j, "B", what));
  } catch (const json::exception& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(what + ": " + e.what());
  }
}

std::string json_to_flag(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long>());
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + json_to_flag(v[i]);
    return s;
  }
  throw UsageError("config value " + v.dump() + " has an unsupported type");
}

}  // namespace

std::vector<double> parse_zeta_grid(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.size() == 1) return {to_double(parts[0], "--zeta")};
  if (parts.size() != 3) throw UsageError("--zeta expects start:stop:step");
  double a = to_double(parts[0], "--zeta"), b = to_double(parts[1], "--zeta"), h = to_double(parts[2], "--zeta");
  if (!(h > 0) || b < a) throw UsageError("--zeta needs step > 0 and stop >= start");
  if ((b - a) / h > 1e6) throw UsageError("--zeta grid too large");
  return grid(a, b, h);
}

std::vector<std::pair<long, long>> parse_intervals(const std::string& s) {
  std::vector<std::pair<long, long>> out;
  for (const auto& t : split(s, ',')) {
    auto ab = split(t, ':');
    if (ab.size() != 2) throw UsageError("--intervals expects a:b[,c:d...]");
    out.push_back({to_long(ab[0], "--intervals"), to_long(ab[1], "--intervals")});
  }
  try {
    make_subsystem(out);
  } catch (const Error& e) {
    throw UsageError(std::string("--intervals: ") + e.what());
  }
  return out;
}

Mode parse_mode(const std::string& s, double tol) {
  if (s == "thermo") return Mode::thermo(tol);
  if (s.rfind("finite:", 0) == 0) {
    long N = to_long(s.substr(7), "--mode");
    if (N < 2 || N > 1000000) throw UsageError("--mode finite:N needs 2 <= N <= 1e6");
    Mode m = Mode::finite(int(N));
    m.tol = tol;
    return m;
  }
  throw UsageError("--mode expects finite:<N> or thermo");
}

CouplingSet load_chain_file(const std::string& path, std::string* label, std::optional<XYDM>* xydm) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read chain file " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw UsageError("malformed JSON in " + path + ": " + e.what());
  }
  CouplingSet c = chain_from_json(j, path, xydm);
  if (label) *label = j.dump();
  return c;
}

CouplingSet parity_preserving_l2() {
  // z^2 (Theta + Xi) = (z^2 + 1)((a1 + g) z^2 + a0 z + (a1 - g)): pinchings at +-pi/2
  const double a0 = 2.0, a1 = 0.3, g = 1.0;
  std::vector<double> q{a1 - g, a0, a1 + g};
  return couplings_from_fplus({q[0], q[1], q[2] + q[0], q[1], q[2]});
}

CouplingSet dirac_sea_l2() {
  return couplings_from_nonnegative(2, {0.5, cd(1.0, 1.0), cd(0.3, 0.5)}, {0.0, 0.4, 0.2});
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"fermobius: entanglement of free fermionic chains"};
  app.set_help_flag();
  std::string command, chain, xydm, alpha, X, zeta, intervals, mode, out, tol, mobius, which, config, json_out;
  std::string jobs;
  bool check_direct = false;
  app.add_option("command", command)->required();
  std::map<std::string, CLI::Option*> opt;
  opt["chain"] = app.add_option("--chain", chain);
  opt["xydm"] = app.add_option("--xydm", xydm);
  opt["alpha"] = app.add_option("--alpha", alpha);
  opt["X"] = app.add_option("--X", X);
  opt["zeta"] = app.add_option("--zeta", zeta);
  opt["intervals"] = app.add_option("--intervals", intervals);
  opt["mode"] = app.add_option("--mode", mode);
  opt["out"] = app.add_option("--out", out);
  opt["jobs"] = app.add_option("--jobs", jobs);
  opt["tol"] = app.add_option("--tol", tol);
  opt["mobius"] = app.add_option("--mobius", mobius);
  opt["which"] = app.add_option("--which", which);
  opt["json"] = app.add_option("--json", json_out);
  opt["check_direct"] = app.add_flag("--check-direct", check_direct);
  app.add_option("--config", config);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  std::map<std::string, std::string> val;
  auto take = [&](const std::string& k, const std::string& v) {
    if (opt.at(k)->count() > 0) val[k] = v;
  };
  take("chain", chain);
  take("xydm", xydm);
  take("alpha", alpha);
  take("X", X);
  take("zeta", zeta);
  take("intervals", intervals);
  take("mode", mode);
  take("out", out);
  take("jobs", jobs);
  take("tol", tol);
  take("mobius", mobius);
  take("which", which);
  take("json", json_out);
  if (check_direct) val["check_direct"] = "true";

  std::optional<json> config_chain;
  if (!config.empty()) {
    std::ifstream is(config);
    if (!is) throw UsageError("cannot read config file " + config);
    json j;
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      throw UsageError("malformed JSON in " + config + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::string k = it.key() == "check-direct" ? "check_direct" : it.key();
      if (k == "command") {
        if (it->get<std::string>() != command) throw UsageError("config command does not match " + command);
        continue;
      }
      if (!opt.count(k)) throw UsageError("unknown config key '" + it.key() + "'");
      if (k == "chain" && it->is_object()) {
        if (!val.count("chain") && !val.count("xydm")) config_chain = *it;
        continue;
      }
      if (!val.count(k)) val[k] = json_to_flag(*it);
    }
  }

  RunConfig cfg;
  static const std::vector<std::string> commands{"classify", "entropy", "asym", "flow",
                                                 "theta-entropy", "multi", "figures"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw UsageError("unknown command '" + command + "'");
  cfg.command = command;

  if (val.count("tol")) {
    cfg.tol = to_double(val["tol"], "--tol");
    if (!(cfg.tol > 0 && cfg.tol < 1)) throw UsageError("--tol must lie in (0, 1)");
  }
  cfg.mode = parse_mode(val.count("mode") ? val["mode"] : "thermo", cfg.tol);

  if (val.count("chain") && val.count("xydm")) throw UsageError("give either --chain or --xydm, not both");
  if (val.count("chain")) {
    cfg.chain = load_chain_file(val["chain"], &cfg.chain_label, &cfg.xydm);
  } else if (config_chain) {
    cfg.chain = chain_from_json(*config_chain, "config chain", &cfg.xydm);
    cfg.chain_label = config_chain->dump();
  } else if (val.count("xydm")) {
    auto v = double_list(val["xydm"], "--xydm");
    if (v.size() != 3) throw UsageError("--xydm expects g,s,h");
    cfg.xydm = XYDM{v[0], v[1], v[2]};
    cfg.chain = xydm_couplings(v[0], v[1], v[2]);
    cfg.chain_label = "xydm:" + join(v, ',');
  }
  if (val.count("alpha")) {
    cfg.alphas = double_list(val["alpha"], "--alpha");
    for (double a : cfg.alphas)
      if (!(a > 0)) throw UsageError("--alpha values must be positive");
  }
  if (val.count("X")) {
    cfg.X.clear();
    for (const auto& t : split(val["X"], ',')) {
      long x = to_long(t, "--X");
      if (x < 1 || x > 20000) throw UsageError("--X values must lie in [1, 20000]");
      cfg.X.push_back(x);
    }
    if (cfg.X.empty()) throw UsageError("--X is empty");
    cfg.X_given = true;
  }
  if (val.count("zeta")) {
    cfg.zetas = parse_zeta_grid(val["zeta"]);
    cfg.zetas_given = true;
  }
  if (val.count("intervals")) cfg.intervals = parse_intervals(val["intervals"]);
  if (val.count("out")) cfg.out_dir = val["out"];
  if (val.count("json")) cfg.json_path = val["json"];
  if (val.count("jobs")) {
    long j = to_long(val["jobs"], "--jobs");
    if (j < 1 || j > 256) throw UsageError("--jobs must lie in [1, 256]");
    cfg.jobs = int(j);
  }
  if (val.count("mobius")) {
    auto v = double_list(val["mobius"], "--mobius");
    if (v.size() != 8) throw UsageError("--mobius expects a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im");
    try {
      cfg.mobius = make_mobius({v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]});
    } catch (const Error& e) {
      throw UsageError(std::string("--mobius: ") + e.what());
    }
  }
  if (val.count("which")) {
    if (command != "figures") throw UsageError("--which applies to figures only");
    cfg.which.clear();
    if (val["which"] == "all") cfg.which = {3, 4, 5};
    else
      for (const auto& t : split(val["which"], ',')) {
        long w = to_long(t, "--which");
        if (w < 3 || w > 5) throw UsageError("--which takes 3, 4, 5 or all");
        cfg.which.push_back(int(w));
      }
  }
  if (val.count("check_direct")) {
    if (command != "theta-entropy") throw UsageError("--check-direct applies to theta-entropy only");
    cfg.check_direct = val["check_direct"] == "true" || val["check_direct"] == "1";
  }
  if (command != "figures" && !cfg.chain) throw UsageError(command + " needs --chain or --xydm");
  return cfg;
}

int run(const RunConfig& cfg0, std::ostream& err) {
  RunConfig cfg = cfg0;
  try {
    std::filesystem::path out(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec || !std::filesystem::is_directory(out)) throw UsageError("cannot create output directory " + cfg.out_dir);
    if (cfg.mobius && cfg.chain) {
      cfg.chain = stage("mobius.transform_couplings", [&] { return transform_couplings(*cfg.mobius, *cfg.chain); });
    }
    std::string prov = provenance(cfg);
    std::vector<Table> tables;
    if (cfg.command == "classify") tables = cmd_classify(cfg);
    else if (cfg.command == "entropy") tables = cmd_entropy(cfg, out, prov);
    else if (cfg.command == "asym") tables = cmd_asym(cfg);
    else if (cfg.command == "flow") tables = cmd_flow(cfg);
    else if (cfg.command == "theta-entropy") tables = cmd_theta_entropy(cfg);
    else if (cfg.command == "multi") tables = cmd_multi(cfg);
    else if (cfg.command == "figures") tables = cmd_figures(cfg);
    else throw UsageError("unknown command '" + cfg.command + "'");
    for (const auto& t : tables) write_csv(out / (t.name + ".csv"), prov, t);
    if (cfg.json_path) {
      json j{{"command", cfg.command}, {"provenance", prov.substr(2)}, {"tables", json::object()}};
      if (cfg.chain) j["chain"] = chain_json_of(*cfg.chain);
      for (const auto& t : tables) j["tables"][t.name] = table_json(t);
      std::ofstream os(*cfg.json_path);
      if (!os) throw UsageError("cannot write " + *cfg.json_path);
      os << j.dump(2) << "\n";
    }
    return 0;
  } catch (const UsageError& e) {
    err << "fermobius: usage: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    err << "fermobius: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "fermobius: " << e.what() << "\n";
    return 1;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "-h" || args[0] == "--help") {
    std::cout << "usage: fermobius <classify|entropy|asym|flow|theta-entropy|multi|figures> [options]\n"
                 "  --chain <file.json> | --xydm g,s,h\n"
                 "  --alpha a1,a2,...   --X n1,n2,...   --zeta start:stop:step\n"
                 "  --intervals a:b[,c:d...]   --mode finite:<N>|thermo   --tol <t>\n"
                 "  --mobius a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im\n"
                 "  --out <dir>   --json <file>   --jobs <n>   --config <file.json>\n"
                 "  --which 3,4,5|all (figures)   --check-direct (theta-entropy)\n";
    return args.empty() ? 2 : 0;
  }
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    std::cerr << "fermobius: usage: " << e.what() << "\n";
    return 2;
  }
  return run(cfg, std::cerr);
}

}  // namespace fm::cli
