#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cwfield/cwfield.hpp"

namespace fs = std::filesystem;
using namespace cwfield;

namespace {

// Thread count from CWFIELD_THREADS, default hardware concurrency.
std::size_t thread_count() {
  if (const char* env = std::getenv("CWFIELD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("CWFIELD_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(0..count-1) on a small worker pool; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, F fn) {
  const std::size_t workers = std::min(count, thread_count());
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Checks {
  struct Item {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Item> items;

  bool add(std::string name, bool pass, std::string detail) {
    items.push_back({std::move(name), pass, std::move(detail)});
    return pass;
  }
  bool all() const {
    return std::all_of(items.begin(), items.end(), [](const Item& i) { return i.pass; });
  }
};

struct Report {
  std::ostringstream text;
  Checks checks;
};

struct Opts {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string beta, j, n, alpha, field, x;
  std::string p;  // explicit field sequence
  std::size_t depth = 25;
  std::size_t resolution = 64;
  std::size_t etk_m = 32;
  std::vector<std::size_t> H{10, 100, 1000};
  std::size_t z_points = 199;
  std::size_t x_count = 100;
  std::uint64_t sweeps = 0;
  bool config_beta = false;
  std::size_t n_clt = 4000;
  std::size_t n_critical = 8000;
  std::string cache;
};

std::string g17(double v) { return fmt17(v); }

std::string g10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Runner {
public:
  Runner(ExperimentConfig cfg, Opts opts) : cfg_(std::move(cfg)), o_(std::move(opts)), out_(cfg_.out) {
    fs::create_directories(out_);
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  const fs::path& out() const { return out_; }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream os(out_ / name);
    if (!os) throw std::runtime_error("cannot write " + (out_ / name).string());
    os << content;
  }

  std::uint64_t seed() const { return o_.seed_set ? o_.seed : cfg_.seeds.front(); }

  FieldSequence field(std::size_t n) const {
    if (!o_.p.empty()) {
      std::vector<double> p;
      std::istringstream is(o_.p);
      std::string tok;
      while (std::getline(is, tok, ',')) p.push_back(std::stod(tok));
      try {
        return make_field_sequence(std::move(p), "explicit");
      } catch (const DomainError& e) {
        throw ConfigError(std::string("--p: ") + e.what());
      }
    }
    return field_sequence(cfg_.rotation(), cfg_.field_function(), cfg_.x, n);
  }

  std::vector<std::size_t> ladder() const {
    if (!o_.p.empty()) return {field(1).size()};
    return cfg_.n;
  }

  FieldDistribution dist() const {
    if (!o_.p.empty()) {
      const auto f = field(1);
      return FieldDistribution::sampled(f.p, std::vector<double>(f.size(), 1.0));
    }
    return cfg_.distribution();
  }

  ModelParams params(double beta) const { return ModelParams::make(beta, cfg_.J); }

  MagnetizationLaw law(const FieldSequence& f, const ModelParams& p) const {
    if (o_.cache.empty()) return gibbs_pmf(f, p);
    fs::create_directories(o_.cache);
    std::ostringstream name;
    name << std::hex << field_hash(f) << "_" << std::hash<std::string>{}(g17(p.beta) + "/" + g17(p.J)) << "_"
         << std::dec << f.size() << ".law";
    return cached_gibbs_pmf((fs::path(o_.cache) / name.str()).string(), f, p);
  }

  // ---- subcommands --------------------------------------------------------

  void orbit_cmd(Report& r) const {
    const std::size_t n = cfg_.n.back();
    const auto rot = cfg_.rotation();
    const auto pts = orbit(rot, cfg_.x, n);
    const auto f = field(n);
    std::string csv = "i";
    for (std::size_t j = 0; j < rot.dimension(); ++j) csv += ",x" + std::to_string(j);
    csv += ",p\n";
    for (std::size_t i = 0; i < n; ++i) {
      csv += std::to_string(i + 1);
      for (std::size_t j = 0; j < rot.dimension(); ++j) csv += "," + g17(pts(i, j));
      csv += "," + g17(f.p[i]) + "\n";
    }
    write("orbit.csv", csv);
    const double integral = cfg_.field_function().integral();
    r.text << "system " << rot.describe() << "\nn " << n << "\nmean p " << g17(f.mean()) << "\nintegral f "
           << g17(integral) << "\n";
  }

  void cfrac_cmd(Report& r) const {
    for (std::size_t axis = 0; axis < cfg_.alpha.size(); ++axis) {
      const ExactReal alpha = ExperimentConfig::exact_angle(cfg_.alpha[axis]);
      const auto cf = std::visit([&](const auto& a) { return continued_fraction(a, o_.depth); }, alpha);
      std::string csv = "k,a,p,q,within_inverse_square\n";
      bool ok = true;
      r.text << "alpha[" << axis << "] = " << cfg_.alpha[axis] << "\n  quotients " << cf.integer_part << ";";
      for (std::size_t k = 0; k < cf.p.size(); ++k) {
        const bool w = within_inverse_square(alpha, cf.p[k], cf.q[k]);
        ok = ok && w;
        const BigInt a = k == 0 ? cf.integer_part : cf.quotients[k - 1];
        if (k > 0) r.text << " " << a;
        csv += std::to_string(k) + "," + a.str() + "," + cf.p[k].str() + "," + cf.q[k].str() + "," +
               (w ? "1" : "0") + "\n";
      }
      r.text << (cf.terminated ? " (terminated)" : "") << "\n";
      write("cfrac_" + std::to_string(axis) + ".csv", csv);
      r.checks.add("convergents within 1/q^2 (axis " + std::to_string(axis) + ")", ok,
                   std::to_string(cf.p.size()) + " convergents");
    }
  }

  void discrepancy_cmd(Report& r) const {
    const auto rot = cfg_.rotation();
    std::string csv = "n,method,d_star,n_dstar_over_log2n\n";
    for (std::size_t n : cfg_.n) {
      const auto pts = orbit(rot, cfg_.x, n);
      DiscrepancyReport d = rot.dimension() == 1 ? star_discrepancy_1d(pts.coords())
                                                 : star_discrepancy_grid(pts, o_.resolution);
      const double ln = std::log(static_cast<double>(n));
      const double ratio = n > 1 ? d.d_star * static_cast<double>(n) / (ln * ln) : 0.0;
      csv += csv_row({std::to_string(n), to_string(d.method), g17(d.d_star), g17(ratio)});
      r.text << "n " << n << " " << to_string(d.method) << " D* " << g10(d.d_star) << "  nD*/log^2n "
             << g10(ratio) << "\n";
    }
    write("discrepancy.csv", csv);
  }

  void eta_cmd(Report& r) const {
    const auto rot = cfg_.rotation();
    std::string csv = "H,eta_hat,raw_crossing\n";
    for (std::size_t H : o_.H) {
      const auto t = type_eta_estimate(rot.angles(), H);
      csv += csv_row({std::to_string(H), g17(t.eta_hat), g17(t.raw_crossing)});
      r.text << "H " << H << " eta_hat " << g10(t.eta_hat) << " (raw " << g10(t.raw_crossing) << ")\n";
    }
    write("eta.csv", csv);
  }

  void bounds_cmd(Report& r) const {
    const auto rot = cfg_.rotation();
    const auto f = cfg_.field_function();
    const std::size_t dim = rot.dimension();
    const std::size_t nmax = cfg_.n.back();

    if (dim == 1) {
      const ExactReal alpha = ExperimentConfig::exact_angle(cfg_.alpha[0]);
      const auto cf = std::visit([](const auto& a) { return continued_fraction(a, 80); }, alpha);
      std::mt19937_64 rng(seed());
      std::uniform_real_distribution<double> U(0.0, 1.0);
      std::vector<double> xs{cfg_.x[0]};
      for (std::size_t i = 0; i < o_.x_count; ++i) xs.push_back(U(rng));
      std::string csv = "q,x,lhs,variation,pass\n";
      bool ok = true;
      double worst = 0.0;
      for (std::size_t k = 1; k < cf.q.size() && cf.q[k] <= nmax; ++k) {
        for (double x : xs) {
          const auto dk = denjoy_koksma_check(f, cf, rot.angles()[0], x, k);
          ok = ok && dk.pass;
          worst = std::max(worst, dk.lhs);
          csv += csv_row({std::to_string(dk.q), g17(x), g17(dk.lhs), g17(dk.variation), dk.pass ? "1" : "0"});
        }
      }
      write("denjoy_koksma.csv", csv);
      r.checks.add("Denjoy-Koksma at convergent denominators", ok,
                   "worst |sum - q int f| = " + g10(worst) + ", V = " + g10(f.variation()));
    }

    std::string csv = "n,etk_bound,reference,reference_method,deviation,hz_bound\n";
    bool etk_ok = true, hz_ok = true;
    const auto variations = hardy_krause_variations(f, dim);
    const double integral = f.integral();
    std::optional<double> etk_c;
    if (cfg_.tol.count("etk_constant")) etk_c = cfg_.tol.at("etk_constant");
    for (std::size_t n : cfg_.n) {
      const auto pts = orbit(rot, cfg_.x, n);
      const auto etk = etk_bound(pts, o_.etk_m, etk_c);
      const auto ref = dim == 1 ? star_discrepancy_1d(pts.coords()) : star_discrepancy_grid(pts, o_.resolution);
      etk_ok = etk_ok && etk.d_star >= ref.d_star;
      std::map<std::uint32_t, double> disc;
      for (const auto& [mask, v] : variations) {
        if (v == 0.0) continue;
        std::vector<std::size_t> dims;
        for (std::size_t j = 0; j < dim; ++j)
          if (mask & (1u << j)) dims.push_back(j);
        const auto proj = pts.project(dims);
        disc[mask] = dims.size() == 1 ? star_discrepancy_1d(proj.coords()).d_star : etk_bound(proj, o_.etk_m, etk_c).d_star;
      }
      const double hz = hlawka_zaremba_bound(variations, disc);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += f(pts.point(i));
      const double dev = std::abs(s / static_cast<double>(n) - integral);
      hz_ok = hz_ok && dev <= hz + 1e-12;
      csv += csv_row({std::to_string(n), g17(etk.d_star), g17(ref.d_star), to_string(ref.method), g17(dev), g17(hz)});
      r.text << "n " << n << " ETK " << g10(etk.d_star) << " >= " << to_string(ref.method) << " "
             << g10(ref.d_star) << "; |mean - int f| " << g10(dev) << " <= HZ " << g10(hz) << "\n";
    }
    write("bounds.csv", csv);
    r.checks.add("ETK bound dominates the reference discrepancy", etk_ok, "");
    r.checks.add("Hlawka-Zaremba bound dominates the ergodic deviation", hz_ok, "");
  }

  void g_analyze_cmd(Report& r) const {
    const auto d = dist();
    std::vector<FreeEnergyReport> reps;
    std::vector<std::optional<FreeEnergyReport>> slots(cfg_.beta.size());
    parallel_for(cfg_.beta.size(), [&](std::size_t i) {
      slots[i] = find_minima(params(cfg_.beta[i]), d);
      write("g_minima_" + std::to_string(i) + ".csv", slots[i]->minima_csv());
    });
    std::string csv = "beta,g,beta_c,a,I2,I4,H,phase,minima\n";
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& rep = *slots[i];
      const auto& mo = d.moments();
      csv += csv_row({g17(cfg_.beta[i]), g17(rep.g), rep.beta_c ? g17(*rep.beta_c) : "nan", g17(mo.a), g17(mo.i2),
                      g17(mo.i4), to_string(rep.h_status), to_string(rep.phase), std::to_string(rep.minima.size())});
      r.text << "beta " << g10(cfg_.beta[i]) << ": g " << g10(rep.g) << ", " << to_string(rep.phase) << ", H "
             << to_string(rep.h_status) << "\n";
      for (const auto& m : rep.minima)
        r.text << "  m " << g10(m.m) << " type " << m.type << " strength " << g10(m.strength) << " strength~ "
               << g10(m.strength_tilde) << "\n";
      bool grad_ok = rep.g <= 0.0;
      for (const auto& m : rep.minima) grad_ok = grad_ok && std::abs(G_limit_jet<2>(m.m, rep.params, d)[1]) < 1e-10;
      r.checks.add("g <= 0 and |G'(m)| < 1e-10 (beta " + g10(cfg_.beta[i]) + ")", grad_ok, "");
    }
    write("g_summary.csv", csv);
  }

  void beta_c_cmd(Report& r) const {
    const auto d = dist();
    const auto bc = critical_beta_details(d, cfg_.J);
    const double a = d.moments().a;
    const double lo = 1.0 / cfg_.J, hi = 1.0 / (cfg_.J * a);
    write("beta_c.csv", "beta_c,sup_ratio,argsup,lower,upper,H\n" +
                            csv_row({g17(bc.beta_c), g17(bc.sup_ratio), g17(bc.argsup), g17(lo), g17(hi),
                                     to_string(hypothesis_H_check(d).status)}));
    std::cout << g10(bc.beta_c) << "\n";
    r.text << "beta_c " << g17(bc.beta_c) << " (sup Lambda/u^2 = " << g10(bc.sup_ratio) << " at u = "
           << g10(bc.argsup) << ")\n";
    r.checks.add("1/J <= beta_c <= 1/(J a)", bc.beta_c >= lo - 1e-9 && bc.beta_c <= hi + 1e-9,
                 "[" + g10(lo) + ", " + g10(hi) + "]");
  }

  void rate_cmd(Report& r) const {
    const auto d = dist();
    const auto p = params(cfg_.beta.front());
    std::vector<double> zs;
    for (std::size_t i = 0; i < o_.z_points; ++i)
      zs.push_back(-0.99 + 1.98 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, o_.z_points - 1)));
    const auto rf = rate_function(p, d, zs);
    write("rate.csv", rf.csv());
    std::string lam = "u,Lambda\n";
    for (std::size_t i = 0; i < rf.u.size(); ++i) lam += csv_row({g17(rf.u[i]), g17(rf.lambda[i])});
    write("lambda.csv", lam);
    const double mn = *std::min_element(rf.rate.begin(), rf.rate.end());
    r.text << "inf(Lambda* - theta z^2/2) " << g17(rf.infimum) << " at";
    for (double z : rf.argmin) r.text << " " << g10(z);
    r.text << "\nmin I on grid " << g10(mn) << "\n";
    r.checks.add("I >= 0 on the grid", mn >= -1e-9, g10(mn));
  }

  void pmf_cmd(Report& r) const {
    const auto ns = ladder();
    struct Task {
      std::size_t n;
      std::size_t bi;
    };
    std::vector<Task> tasks;
    for (std::size_t n : ns)
      for (std::size_t b = 0; b < cfg_.beta.size(); ++b) tasks.push_back({n, b});
    std::vector<std::string> lines(tasks.size());
    std::vector<char> ok(tasks.size(), 1);
    parallel_for(tasks.size(), [&](std::size_t t) {
      const auto f = field(tasks[t].n);
      const auto l = law(f, params(cfg_.beta[tasks[t].bi]));
      const std::string name = "pmf_n" + std::to_string(tasks[t].n) + "_b" + std::to_string(tasks[t].bi) + ".csv";
      write(name, l.csv());
      const double tot = l.total_mass();
      ok[t] = std::abs(tot - 1.0) < 1e-12;
      std::ostringstream os;
      os << name << ": n " << tasks[t].n << " beta " << g10(cfg_.beta[tasks[t].bi]) << " total mass " << g17(tot)
         << "\n";
      if (l.n <= 32) os << l.csv();
      if (o_.sweeps > 0) {
        const auto mc = metropolis_sample(f, params(cfg_.beta[tasks[t].bi]), o_.sweeps, seed());
        os << "metropolis TV " << g10(total_variation(mc, l)) << " (acceptance " << g10(mc.acceptance_rate) << ")\n";
      }
      lines[t] = os.str();
    });
    for (const auto& s : lines) r.text << s;
    r.checks.add("masses sum to 1 within 1e-12", std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; }), "");
  }

  void verify_lln_cmd(Report& r) const {
    const auto d = dist();
    const double bc = critical_beta(d, cfg_.J);
    const double eps = cfg_.tolerance("lln_eps", 0.05);
    const double lim = cfg_.tolerance("lln_mass", 1e-3);
    std::string csv = "beta,n,mass_outside\n";
    for (double beta : cfg_.beta) {
      r.checks.add("beta " + g10(beta) + " < beta_c " + g10(bc), beta < bc, "");
      double last = 1.0;
      for (std::size_t n : ladder()) {
        const auto sl = scaled_law(law(field(n), params(beta)), 0.0, 0.0);
        last = std::max(0.0, 1.0 - sl.mass_in(-eps, eps));
        csv += csv_row({g17(beta), std::to_string(n), g17(last)});
        r.text << "beta " << g10(beta) << " n " << n << " P(|M_n/n| >= " << eps << ") = " << g10(last) << "\n";
      }
      r.checks.add("LLN mass outside (-eps, eps) at largest n (beta " + g10(beta) + ")", last < lim,
                   g10(last) + " < " + g10(lim));
    }
    write("verify_lln.csv", csv);
  }

  // Shared by verify-clt and paper-5-7.
  void clt_check(Report& r, const FieldDistribution& d, double beta, std::size_t n, std::optional<double> sigma2_expected,
                 const std::string& tag) const {
    const auto p = params(beta);
    const auto rep = find_minima(p, d);
    if (!r.checks.add(tag + "single type-2 minimum at 0",
                      rep.minima.size() == 1 && rep.minima[0].type == 2 && std::abs(rep.minima[0].m) < 1e-8, "")) {
      return;
    }
    const double sigma2 = sigma2_expected.value_or(1.0 / rep.minima[0].strength_tilde);
    const auto sl = scaled_law(law(field(n), p), 0.0, 0.5);
    const double var = sl.variance();
    const double ks = ks_distance(sl, LimitDensity::normal(sigma2));
    const double var_tol = cfg_.tolerance("var_rel", 0.05);
    const double ks_tol = cfg_.tolerance("ks", 0.05);
    write("clt.csv", "beta,n,sigma2_expected,variance,ks\n" +
                         csv_row({g17(beta), std::to_string(n), g17(sigma2), g17(var), g17(ks)}));
    r.text << tag << "beta " << g10(beta) << " n " << n << ": sigma^2 estimate " << g10(var) << " (expected "
           << g10(sigma2) << "), KS " << g10(ks) << "\n";
    r.checks.add(tag + "variance within " + g10(100 * var_tol) + "% of sigma^2", std::abs(var / sigma2 - 1.0) < var_tol,
                 g10(var));
    r.checks.add(tag + "KS to Normal(0, sigma^2) < " + g10(ks_tol), ks < ks_tol, g10(ks));
  }

  void verify_clt_cmd(Report& r) const { clt_check(r, dist(), cfg_.beta.front(), ladder().back(), std::nullopt, ""); }

  void critical_check(Report& r, const FieldDistribution& d, double beta, std::size_t n, const std::string& tag,
                      std::optional<double> expected_strength) const {
    const auto p = params(beta);
    const auto rep = find_minima(p, d);
    if (!r.checks.add(tag + "single minimum at 0 of type >= 4",
                      rep.minima.size() == 1 && rep.minima[0].type >= 4 && std::abs(rep.minima[0].m) < 1e-8,
                      rep.minima.empty() ? "none" : "type " + std::to_string(rep.minima[0].type))) {
      return;
    }
    const auto& mn = rep.minima[0];
    r.text << tag << "beta " << g17(beta) << ": type " << mn.type << " strength " << g17(mn.strength) << "\n";
    if (expected_strength) {
      const auto& mo = d.moments();
      const double th = p.theta();
      const double formula = 2.0 * std::pow(th, 4) * (3.0 * mo.i4 - 4.0 * mo.i2 + 1.0);
      r.checks.add(tag + "strength " + g10(*expected_strength) + " +- 1e-6",
                   mn.type == 4 && std::abs(mn.strength - *expected_strength) < 1e-6, g17(mn.strength));
      r.checks.add(tag + "strength/4! = 9/80 +- 1e-8", std::abs(mn.strength / 24.0 - 9.0 / 80.0) < 1e-8,
                   g17(mn.strength / 24.0));
      r.checks.add(tag + "G''''(0) = 2 theta^4 (3 I4 - 4 I2 + 1) within 1e-8", std::abs(formula - mn.strength) < 1e-8,
                   g17(formula));
    }
    const LimitDensity limit(mn.type, mn.strength_tilde);
    if (expected_strength) {
      const double closed = std::sqrt(3.0) * std::tgamma(0.75) / (std::sqrt(2.0) * M_PI * std::pow(5.0, 0.25));
      r.checks.add(tag + "normalizing constant matches closed form within 1e-8",
                   std::abs(limit.normalizer() - closed) < 1e-8, g17(limit.normalizer()));
    }
    r.checks.add(tag + "density integrates to 1 by quadrature within 1e-8", std::abs(limit.quadrature_mass() - 1.0) < 1e-8,
                 g17(limit.quadrature_mass()));
    const double gamma = 1.0 / mn.type;
    const auto sl = scaled_law(law(field(n), p), 0.0, gamma);
    const double ks = ks_distance(sl, limit);
    const double ks_tol = cfg_.tolerance("ks_critical", 0.07);
    write("critical.csv", "beta,n,type,strength,ks\n" + csv_row({g17(beta), std::to_string(n), std::to_string(mn.type),
                                                                  g17(mn.strength), g17(ks)}));
    r.text << tag << "KS of M_n/n^(1-1/" << mn.type << ") at n " << n << ": " << g10(ks) << "\n";
    r.checks.add(tag + "KS to the limit density < " + g10(ks_tol), ks < ks_tol, g10(ks));
  }

  void verify_critical_cmd(Report& r) const {
    const auto d = dist();
    const double beta = o_.config_beta ? cfg_.beta.front() : critical_beta(d, cfg_.J);
    critical_check(r, d, beta, ladder().back(), "", std::nullopt);
  }

  void verify_supercritical_cmd(Report& r) const {
    const auto d = dist();
    const double beta = cfg_.beta.front();
    const auto p = params(beta);
    const double bc = critical_beta(d, cfg_.J);
    r.checks.add("beta > beta_c", beta > bc, g10(beta) + " vs " + g10(bc));
    const auto rep = find_minima(p, d);
    for (const auto& m : rep.minima)
      r.text << "m " << g17(m.m) << " type " << m.type << " strength " << g17(m.strength) << "\n";
    const bool pair = rep.minima.size() == 2 && rep.minima[0].type == 2 && rep.minima[1].type == 2;
    if (!r.checks.add("two type-2 minima", pair, std::to_string(rep.minima.size()) + " minima")) return;
    const double m = rep.minima[1].m;
    r.checks.add("minima symmetric", std::abs(rep.minima[0].m + m) < 1e-8, "");
    if (rep.h_status == HStatus::Pass) {
      const double sm = spontaneous_magnetization(p, d);
      r.checks.add("spontaneous magnetization matches the located minimum", std::abs(sm - m) < 1e-8, g17(sm));
    }
    const double delta = cfg_.tolerance("delta", 0.1);
    const double lim = cfg_.tolerance("mass", 0.05);
    std::string csv = "n,mass_outside,b_plus_normalized,b_plus_product_normalized\n";
    double outside = 1.0;
    for (std::size_t n : ladder()) {
      const auto f = field(n);
      const auto sl = scaled_law(law(f, p), 0.0, 0.0);
      outside = std::max(0.0, 1.0 - sl.mass_in(m - delta, m + delta) - sl.mass_in(-m - delta, -m + delta));
      const auto w = mixture_weights(rep, f).normalized();
      const auto wp = mixture_weights_symmetric(m, p, f).normalized();
      csv += csv_row({std::to_string(n), g17(outside), g17(w[1]), g17(wp[1])});
      r.text << "n " << n << ": mass outside " << g10(outside) << ", weights (" << g10(w[0]) << ", " << g10(w[1])
             << ")\n";
      const bool constant_half = std::all_of(f.p.begin(), f.p.end(), [](double v) { return v == 0.5; });
      if (constant_half)
        r.checks.add("equal mixture weights for the constant field (n " + std::to_string(n) + ")",
                     std::abs(w[0] - w[1]) < 1e-10 && std::abs(wp[0] - wp[1]) < 1e-10, "");
    }
    write("supercritical.csv", csv);
    r.checks.add("mass concentrates near +-m at largest n", outside < lim, g10(outside) + " < " + g10(lim));
  }

  void theorem_5_7_cmd(Report& r) const {
    ExperimentConfig c = cfg_;
    c.field = "identity";
    Runner sub(c, o_);
    const auto d = FieldDistribution::uniform();
    const double J = cfg_.J;

    Report r1, r2, r3;
    const double bc = critical_beta(d, J);
    r1.checks.add("beta_c = 3/(2J) +- 1e-6", std::abs(bc - 1.5 / J) < 1e-6, g17(bc));
    const double theta_clt = 1.0;
    sub.clt_check(r2, d, theta_clt / J, o_.n_clt, 2.0 / (3.0 - 2.0 * theta_clt), "");
    sub.critical_check(r3, d, 1.5 / J, o_.n_critical, "", 2.7);

    const std::pair<const char*, Report*> parts[] = {{"critical temperature", &r1},
                                                     {"sub-critical CLT", &r2},
                                                     {"critical quartic law", &r3}};
    for (const auto& [name, rep] : parts) {
      r.text << rep->text.str();
      std::string detail;
      for (const auto& it : rep->checks.items) {
        if (!detail.empty()) detail += "; ";
        detail += (it.pass ? "ok " : "FAILED ") + it.name + (it.detail.empty() ? "" : " [" + it.detail + "]");
      }
      r.checks.add(name, rep->checks.all(), detail);
    }
  }

private:
  ExperimentConfig cfg_;
  Opts o_;
  fs::path out_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curie-Weiss model in a quasi-periodic random field: analysis harness"};
  app.require_subcommand(1);
  app.fallthrough();
  Opts o;
  app.add_option("--config", o.config, "experiment config file");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.seed_set = true; });
  app.add_option("--beta", o.beta, "inverse temperature(s), comma separated");
  app.add_option("--j", o.j, "coupling constant J");
  app.add_option("--n", o.n, "system size ladder, comma separated");
  app.add_option("--alpha", o.alpha, "rotation angle(s): golden | sqrt2 | <decimal>");
  app.add_option("--field", o.field, "identity | half | two-point:<l> | table:<path>");
  app.add_option("--x", o.x, "orbit start point (comma separated for r > 1)");

  struct Cmd {
    const char* name;
    const char* help;
    void (Runner::*fn)(Report&) const;
  };
  const Cmd cmds[] = {
      {"orbit", "orbit points and field values", &Runner::orbit_cmd},
      {"cfrac", "continued fraction and convergents of alpha", &Runner::cfrac_cmd},
      {"discrepancy", "star discrepancy along the n ladder", &Runner::discrepancy_cmd},
      {"eta", "diophantine type estimate", &Runner::eta_cmd},
      {"bounds", "Denjoy-Koksma, ETK and Hlawka-Zaremba checks", &Runner::bounds_cmd},
      {"g-analyze", "free energy minima report per beta", &Runner::g_analyze_cmd},
      {"beta-c", "critical inverse temperature", &Runner::beta_c_cmd},
      {"rate", "Lambda, Lambda* and rate function tables", &Runner::rate_cmd},
      {"pmf", "exact magnetization law", &Runner::pmf_cmd},
      {"verify-lln", "law of large numbers below beta_c", &Runner::verify_lln_cmd},
      {"verify-clt", "central limit theorem below beta_c", &Runner::verify_clt_cmd},
      {"verify-critical", "non-Gaussian limit at beta_c", &Runner::verify_critical_cmd},
      {"verify-supercritical", "two-peak structure above beta_c", &Runner::verify_supercritical_cmd},
      {"paper-5-7", "uniform field scenario: beta_c, CLT and quartic law", &Runner::theorem_5_7_cmd},
  };
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const auto& c : cmds) subs.emplace_back(app.add_subcommand(c.name, c.help), &c);

  for (auto& [sub, c] : subs) {
    const std::string name = c->name;
    if (name == "cfrac") sub->add_option("--depth", o.depth, "expansion depth");
    if (name == "discrepancy" || name == "bounds")
      sub->add_option("--resolution", o.resolution, "grid resolution for r >= 2");
    if (name == "bounds") {
      sub->add_option("--etk-m", o.etk_m, "ETK frequency box");
      sub->add_option("--x-count", o.x_count, "random start points for Denjoy-Koksma");
    }
    if (name == "eta") sub->add_option("--H", o.H, "frequency boxes")->delimiter(',');
    if (name == "rate") sub->add_option("--z-points", o.z_points, "z grid size on [-0.99, 0.99]");
    if (name == "pmf") sub->add_option("--sweeps", o.sweeps, "Metropolis cross-check sweeps (0 = off)");
    if (name == "pmf" || name == "g-analyze" || name == "beta-c" || name == "rate" || name.rfind("verify", 0) == 0)
      sub->add_option("--p", o.p, "explicit field sequence p_1,..,p_n (overrides the rotation)");
    if (name == "pmf" || name.rfind("verify", 0) == 0 || name == "paper-5-7")
      sub->add_option("--cache", o.cache, "binary law cache directory");
    if (name == "verify-critical") sub->add_flag("--config-beta", o.config_beta, "use the configured beta, not beta_c");
    if (name == "paper-5-7") {
      sub->add_option("--n-clt", o.n_clt, "system size for the CLT check");
      sub->add_option("--n-critical", o.n_critical, "system size for the critical check");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const Cmd* chosen = nullptr;
  for (auto& [sub, c] : subs)
    if (sub->parsed()) chosen = c;

  try {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config);
    if (!o.out.empty()) cfg.set("out", o.out);
    if (!o.beta.empty()) cfg.set("beta", o.beta);
    if (!o.j.empty()) cfg.set("J", o.j);
    if (!o.n.empty()) cfg.set("n", o.n);
    if (!o.alpha.empty()) cfg.set("alpha", o.alpha);
    if (!o.field.empty()) cfg.set("field", o.field);
    if (!o.x.empty()) cfg.set("x", o.x);
    if (o.alpha.size() && o.x.empty() && cfg.x.size() != cfg.alpha.size()) cfg.x.assign(cfg.alpha.size(), 0.0);
    if (o.seed_set) cfg.seeds = {o.seed};
    cfg.validate();
    cfg.field_function();
    thread_count();

    Runner runner(cfg, o);
    runner.write("config.txt", cfg.to_text());
    Report rep;
    (runner.*(chosen->fn))(rep);

    std::ostringstream summary;
    summary << "# " << chosen->name << "\n" << rep.text.str();
    for (const auto& it : rep.checks.items)
      summary << (it.pass ? "PASS " : "FAIL ") << it.name << (it.detail.empty() ? "" : ": " + it.detail) << "\n";
    const bool ok = rep.checks.all();
    summary << (ok ? "OK" : "ASSERTION FAILED") << "\n";
    std::cout << summary.str();
    runner.write(std::string(chosen->name) + "_summary.txt", summary.str());
    return ok ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
