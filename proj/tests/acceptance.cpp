// Acceptance run: one PASS/FAIL line per criterion, runtime budgets included.
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stabcert/certify.hpp"
#include "stabcert/feedback.hpp"
#include "stabcert/probes.hpp"
#include "stabcert/run.hpp"
#include "stabcert/specineq.hpp"

using namespace stabcert;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail: " << what << "] ";
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> body;
};

double rel(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Largest singular value of e^{-tH} acting on grid values.
double semigroup_operator_norm(const SpectralDecomposition& dec, double t) {
  const std::size_t n = dec.size();
  Eigen::MatrixXd S(n, n);
  GridFunction unit(dec.domain());
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(unit.values.begin(), unit.values.end(), 0.0);
    unit[j] = 1.0;
    const GridFunction col = semigroup_apply(dec, t, unit);
    for (std::size_t i = 0; i < n; ++i) S(i, j) = col[i];
  }
  const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

GridDomain line(double R, int m, bool periodic) {
  return GridDomain::make(1, R, m, periodic);
}

GridFunction shifted_potential(const GridDomain& d, double shift) {
  GridFunction v(d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.center(i)[0];
    v[i] = x * x - shift;
  }
  return v;
}

// Criteria 7 and 11 go through the command dispatcher so 12 can repeat them.
Json certify_config() {
  return Json{{"operator", {{"kind", "frac"}, {"s", 1.0}, {"c", 0.0}}},
              {"domain",
               {{"dim", 1},
                {"half_width", 5.0},
                {"points_per_axis", 256},
                {"periodic", true}}},
              {"set", "slabs:period=1,fill=0.25"},
              {"seed", 20240607},
              {"k_max", 12},
              {"trials", 1000},
              {"recurrence_trials", 200}};
}

Json feedback_config(const std::string& set, const std::string& initial,
                     int count) {
  const GridDomain d = line(10.0, 256, false);
  return Json{{"operator",
               {{"kind", "schrodinger"},
                {"potential", to_json(shifted_potential(d, 4.0))},
                {"condition", "II"}}},
              {"domain",
               {{"dim", 1},
                {"half_width", 10.0},
                {"points_per_axis", 256},
                {"periodic", false}}},
              {"set", set},
              {"seed", 97},
              {"feedback", "finite-rank"},
              {"initial", initial},
              {"initial_count", count},
              {"t_end", 20.0},
              {"dt", 0.01}};
}

std::vector<ResultDocument> first_runs;

void hermite_spectrum(Outcome& o) {
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{0.0},
                                                      line(10.0, 512, false));
  double worst = 0.0;
  for (int k = 0; k < 10; ++k)
    worst = std::max(worst, std::abs(dec.eigenvalues()[k] - (2.0 * k + 1.0)));
  o.detail << "max|lambda_k - (2k+1)| = " << worst << " ";
  o.require(worst <= 1e-3, "eigenvalue error above 1e-3");
}

void semigroup_norms(Outcome& o) {
  const double c = 0.7;
  for (double s : {1.0, 0.5}) {
    const auto dec = SpectralDecomposition::diagonalize(
        FractionalLaplacian{s, c}, line(10.0, 256, true));
    for (double t : {0.1, 1.0, 5.0}) {
      const double e = rel(semigroup_operator_norm(dec, t), std::exp(c * t));
      o.require(e <= 1e-10, "fractional s=" + std::to_string(s) +
                                " t=" + std::to_string(t) + " off by " +
                                std::to_string(e));
    }
  }
  const auto her = SpectralDecomposition::diagonalize(ShiftedHermite{c},
                                                      line(10.0, 256, false));
  double worst = 0.0;
  for (double t : {0.1, 1.0, 5.0})
    worst = std::max(worst, rel(semigroup_operator_norm(her, t),
                                std::exp((c - 1.0) * t)));
  o.detail << "hermite rel err " << worst << " ";
  o.require(worst <= 1e-3, "hermite norm off by more than 1e-3");
}

void dissipative(Outcome& o) {
  const std::vector<double> ts{0.1, 0.5, 1.0};
  const auto frac = SpectralDecomposition::diagonalize(
      FractionalLaplacian{1.0, 0.0}, line(10.0, 256, true));
  const auto her = SpectralDecomposition::diagonalize(ShiftedHermite{0.0},
                                                      line(10.0, 256, false));
  double worst = 0.0;
  for (const auto* dec : {&frac, &her}) {
    std::mt19937_64 rng(31);
    std::vector<GridFunction> phis;
    for (int i = 0; i < 100; ++i) phis.push_back(random_unit(dec->domain(), rng));
    for (int k = 1; k <= 10; ++k) {
      worst = std::max(worst, dissipative_margin(*dec, k, ts, 100, 31).max_ratio);
      // Same bound evaluated in grid space.
      for (const auto& phi : phis)
        for (double t : ts) {
          const GridFunction u = semigroup_apply(*dec, t, phi);
          const double high = norm(u - project(*dec, k, u));
          worst = std::max(worst, high * std::exp(t * k) / norm(phi));
        }
    }
  }
  o.detail << "max ratio " << worst << " ";
  o.require(worst <= 1.0 + 1e-10, "ratio above 1 + 1e-10");
}

void projection_algebra(Outcome& o) {
  const GridDomain box = line(10.0, 256, false);
  std::vector<SpectralDecomposition> decs;
  decs.push_back(SpectralDecomposition::diagonalize(FractionalLaplacian{1.0, 0.3},
                                                    line(10.0, 256, true)));
  decs.push_back(SpectralDecomposition::diagonalize(ShiftedHermite{1.0}, box));
  decs.push_back(SpectralDecomposition::diagonalize(
      Schrodinger{shifted_potential(box, 4.0)}, box));
  double worst = 0.0;
  for (const auto& dec : decs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> kd(0.5, 15.0), td(0.05, 2.0);
    for (int i = 0; i < 100; ++i) {
      const GridFunction phi = random_unit(dec.domain(), rng);
      const GridFunction psi = random_unit(dec.domain(), rng);
      const double k = kd(rng), t = td(rng);
      const GridFunction p = project(dec, k, phi);
      worst = std::max(worst, norm(project(dec, k, p) - p));
      worst = std::max(worst, std::abs(inner_product(p, psi) -
                                       inner_product(phi, project(dec, k, psi))));
      worst = std::max(worst, norm(project(dec, k, semigroup_apply(dec, t, phi)) -
                                   semigroup_apply(dec, t, p)) /
                                  std::max(1.0, norm(semigroup_apply(dec, t, phi))));
      const double q = norm(phi - p);
      worst = std::max(worst, std::abs(1.0 - norm(p) * norm(p) - q * q));
    }
  }
  o.detail << "max defect " << worst << " ";
  o.require(worst <= 1e-10, "projection identity defect above 1e-10");
}

void spectral_constants(Outcome& o) {
  const GridDomain d = line(10.0, 256, true);
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{1.0, 0.0}, d);
  const auto full = make_set(d, shape::Full{});
  for (int k = 1; k <= 10; ++k)
    o.require(best_constant(dec, k, full).constant == 1.0,
              "full set constant not exactly 1 at k=" + std::to_string(k));

  const auto slabs = make_set(d, shape::PeriodicSlabs{1.0, 0.25});
  double worst = 0.0;
  for (double k : {2.0, 5.0, 9.0}) {
    const BestConstant b = best_constant(dec, k, slabs);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dec.size()));
    c.head(b.witness.size()) = b.witness;
    const GridFunction f = dec.synthesize(c);
    const double ratio = norm(f) / restrict_norm(f, slabs);
    worst = std::max(worst, std::abs(ratio - b.constant) / b.constant);
  }
  o.detail << "witness rel err " << worst << " ";
  o.require(worst <= 1e-8, "witness ratio off by more than 1e-8");

  std::vector<SetIndicator> chain;
  for (double r : {4.0, 3.0, 2.0, 1.0, 0.25})
    chain.push_back(make_set(d, shape::BallComplement{{0.0, 0.0}, r}));
  for (std::size_t i = 1; i < chain.size(); ++i) {
    o.require(chain[i - 1].subset_of(chain[i]), "fixture chain is not nested");
    for (double k : {1.0, 4.0, 8.0})
      o.require(best_constant(dec, k, chain[i - 1]).constant >=
                    best_constant(dec, k, chain[i]).constant,
                "anti-monotonicity broken");
  }
}

void certificate_arithmetic(Outcome& o) {
  // 60-digit evaluation by tests/oracles/certificate_oracle.py.
  const Certificate c = build_certificate({1, 1, 1, 1, 1, 0});
  const double want[12] = {1.3862943611198906188,  0.69314718055994530942,
                           0.31845373111853461581, -10.772588722239781238,
                           4.0472472864792006603,  3.7595652140274197328,
                           -28.994530615826308622, -29.312984956876707962,
                           -18.509623966038308312, 3.3541001059192553509,
                           -9.2548119830191541561, 3.3626707178802902887};
  const double got[12] = {c.log_gamma, c.log_N,      c.log_CMgamma, c.log_DMN,
                          c.log_A,     c.log_tau0,   c.log_alpha0,  c.log_B,
                          c.log_beta,  c.log_T,      c.log_alpha,   c.log_C};
  double worst = 0.0;
  for (int i = 0; i < 12; ++i)
    worst = std::max(worst, std::abs(got[i] - want[i]) /
                                std::max(1.0, std::abs(want[i])));
  o.detail << "max log rel err " << worst << " ";
  o.require(worst <= 1e-12, "log constants off by more than 1e-12");
  o.require(c.beta > 0.0 && c.beta < 1.0, "beta outside (0, 1)");
  o.require(std::abs(std::log(c.T) - c.log_T) <= 1e-12 * std::abs(c.log_T),
            "T inconsistent with its log");
}

void end_to_end(Outcome& o) {
  ResultDocument r = run("certify", certify_config());
  const Json& res = r.document["result"];
  o.require(r.exit_class == ExitClass::kSuccess, "certify did not succeed");
  o.require(res.value("status", "") == "certified", "status not certified");
  if (res.contains("observability")) {
    const Json& ob = res["observability"];
    o.detail << "violations " << ob["violations"] << " of " << ob["trials"]
             << ", min slack " << ob["min_slack"] << " ";
    o.require(ob["violations"] == 0, "observability violations");
    o.require(ob["trials"] == 1000, "trial count");
    o.require(ob["tolerance"].get<double>() <= 1e-7, "tolerance above 1e-7");
  } else {
    o.require(false, "no observability report: " + res.value("message", ""));
  }
  first_runs.push_back(std::move(r));
}

void necessity(Outcome& o) {
  const GridDomain box = line(10.0, 256, false);
  const auto her = SpectralDecomposition::diagonalize(ShiftedHermite{1.0}, box);
  const auto g = ground_state_probe(her, make_set(box, shape::HalfSpace{0, 0.0}),
                                    {1.0, 1.0, 0.0});
  o.detail << "(i) lhs " << g.lhs << " rhs " << g.rhs << " closed form "
           << g.closed_form_rhs << "; ";
  o.require(g.violated, "(i) discrete probe not violated");
  o.require(g.closed_form_violated, "(i) closed form not violated");

  const GridDomain d = line(20.0, 256, true);
  const auto frac = SpectralDecomposition::diagonalize(FractionalLaplacian{1.0, 0.0}, d);
  const auto e = make_set(d, shape::BallComplement{{0.0, 0.0}, 5.0});
  const auto f = falsify_weak_observability(frac, e, {0.5, 1.0, 0.5}, {{0.0, 0.0}});
  o.detail << "(ii) lhs " << f.centers[0].lhs << " rhs " << f.centers[0].rhs;
  o.require(f.violations >= 1, "(ii) no violation witnessed");
}

void geometry(Outcome& o) {
  const GridDomain d = line(10.0, 320, true);
  const double h = d.spacing();
  const auto half = make_set(d, shape::HalfSpace{0, 0.0});
  o.require(!check_thick(half, {1.0, 2.0, 4.0}).is_thick, "half-space thick");
  const auto w = check_weakly_thick(half, {2.5, 5.0, 7.5, 10.0});
  for (double rho : w.densities)
    o.require(std::abs(rho - 0.5) <= 0.02, "half-space density off");
  o.detail << "half-space liminf " << w.liminf_proxy << "; ";

  const auto slabs = check_thick(make_set(d, shape::PeriodicSlabs{1.0, 0.25}), {1.0});
  o.require(slabs.is_thick && slabs.gamma.has_value(), "slabs not thick");
  if (slabs.gamma) {
    o.detail << "slabs gamma(1) " << *slabs.gamma << "; ";
    o.require(std::abs(*slabs.gamma - 0.25) <= h, "slabs gamma off by more than h");
  }
  const auto outside = check_thick(
      make_set(d, shape::BallComplement{{0.0, 0.0}, 1.0}), {1.0, 2.0, 4.0});
  o.require(outside.is_thick, "{|x| >= 1} not thick");
  if (outside.gamma) o.detail << "{|x|>=1} gamma " << *outside.gamma;
}

void damping(Outcome& o) {
  const GridDomain d = line(5.0, 128, true);
  const auto e = make_set(d, shape::PeriodicSlabs{1.0, 0.25});
  const auto half = SpectralDecomposition::diagonalize(FractionalLaplacian{1.0, 0.0}, d);
  const auto lap = SpectralDecomposition::diagonalize(FractionalLaplacian{2.0, 0.0}, d);
  const DampingBound b =
      damping_decay_bound(half, e, 0.0, 1, std::min(10, max_resolvable_k(half)));
  Eigen::MatrixXd H = lap.dense_operator();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (e.contains(i)) H(i, i) += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  o.detail << "lambda_min " << lmin << " omega " << b.omega << " ";
  o.require(b.omega > 0.0, "omega not positive");
  o.require(lmin >= b.omega, "lambda_min below omega");
  o.require(std::abs(lmin - damped_min_eigenvalue(lap, e)) <= 1e-9,
            "library lambda_min disagrees with dense solve");
}

void finite_rank(Outcome& o) {
  const GridDomain d = line(10.0, 256, false);
  const auto dec = SpectralDecomposition::diagonalize(
      Schrodinger{shifted_potential(d, 4.0)}, d);
  const auto e = make_set(d, shape::HalfSpace{0, 0.0});
  const auto fb = build_finite_rank_feedback(dec, e);
  o.require(fb.unstable_count == 2, "expected two unstable modes");
  if (fb.unstable_count == 2) {
    o.require(std::abs(fb.eigenvalues[0] + 3.0) <= 1e-3 &&
                  std::abs(fb.eigenvalues[1] + 1.0) <= 1e-3,
              "unstable eigenvalues off");
    // Midpoint quadrature of the analytic eigenfunctions over E.
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double g = 0.0;
        for (std::size_t c = 0; c < d.size(); ++c) {
          if (!e.contains(c)) continue;
          const double x = d.center(c)[0];
          g += hermite_function(i, x) * hermite_function(j, x) * d.spacing();
        }
        worst = std::max(worst, std::abs(std::abs(fb.gram(i, j)) - std::abs(g)));
      }
    o.detail << "gram err " << worst << "; ";
    o.require(worst <= 1e-6, "gram off by more than 1e-6");
  }

  ResultDocument r = run("simulate", feedback_config("halfspace", "random", 20));
  o.require(r.exit_class == ExitClass::kSuccess, "simulate failed");
  double min_omega = 1e300;
  bool monotone = true;
  for (const auto& x : r.document["result"]["runs"]) {
    min_omega = std::min(min_omega, x["fitted_omega"].get<double>());
    monotone = monotone && x["monotone_tail"].get<bool>();
  }
  o.detail << "min fitted_omega " << min_omega << "; ";
  o.require(r.document["result"]["runs"].size() == 20, "expected 20 runs");
  o.require(min_omega > 0.2, "fitted_omega not above 0.2");
  o.require(monotone, "norm envelope not monotone after the transient");
  first_runs.push_back(std::move(r));

  ResultDocument f = run("simulate", feedback_config("full", "mode:0", 1));
  const double w = f.document["result"]["runs"][0]["fitted_omega"].get<double>();
  o.detail << "full-set omega " << w;
  o.require(std::abs(w - 1.0) <= 0.02, "full-set rate not 1 +- 2%");
  first_runs.push_back(std::move(f));
}

void determinism(Outcome& o) {
  if (first_runs.size() != 3) {
    o.require(false, "criteria 7 and 11 did not leave their runs");
    return;
  }
  const ResultDocument again[3] = {
      run("certify", certify_config()),
      run("simulate", feedback_config("halfspace", "random", 20)),
      run("simulate", feedback_config("full", "mode:0", 1))};
  for (int i = 0; i < 3; ++i) {
    o.require(again[i].document["result"].dump() ==
                  first_runs[i].document["result"].dump(),
              "result payload differs on run " + std::to_string(i));
    o.require(again[i].document["input_hashes"] ==
                  first_runs[i].document["input_hashes"],
              "input hashes differ");
    bool same_files = again[i].side_files.size() == first_runs[i].side_files.size();
    for (std::size_t k = 0; same_files && k < again[i].side_files.size(); ++k)
      same_files = again[i].side_files[k].contents ==
                   first_runs[i].side_files[k].contents;
    o.require(same_files, "side files differ");
  }
  o.detail << "3 payloads identical";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "hermite-spectrum", 5, hermite_spectrum},
      {2, "semigroup-norms", 5, semigroup_norms},
      {3, "dissipative-inequality", 30, dissipative},
      {4, "projection-algebra", 10, projection_algebra},
      {5, "spectral-constant-exactness", 60, spectral_constants},
      {6, "certificate-arithmetic", 1, certificate_arithmetic},
      {7, "end-to-end-certification", 300, end_to_end},
      {8, "necessity-witnesses", 120, necessity},
      {9, "geometry-classifier", 10, geometry},
      {10, "damping-feedback", 30, damping},
      {11, "finite-rank-feedback", 180, finite_rank},
      {12, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds)
      o.require(false, "over the " + std::to_string(c.budget_seconds) + " s budget");
    if (!o.pass) ++failures;
    std::printf("%s %2d %-28s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
