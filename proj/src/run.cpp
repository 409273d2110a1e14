#include "stabcert/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <random>
#include <sstream>

#include "stabcert/certify.hpp"
#include "stabcert/feedback.hpp"
#include "stabcert/probes.hpp"
#include "stabcert/specineq.hpp"

namespace stabcert {

namespace {

const std::pair<Command, const char*> kCommands[] = {
    {Command::kCheckThick, "check-thick"},
    {Command::kSpectralConstant, "spectral-constant"},
    {Command::kCertify, "certify"},
    {Command::kFeedbackBuild, "feedback-build"},
    {Command::kSimulate, "simulate"},
    {Command::kProbe, "probe"},
};

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& [c, n] : kCommands)
    if (name == n) return c;
  return std::nullopt;
}

std::string to_string(Command c) {
  for (const auto& [k, n] : kCommands)
    if (k == c) return n;
  return "unknown";
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json to_json(const RunConfig& c) {
  Json op{{"kind", c.op.kind}, {"s", c.op.s}, {"c", c.op.c},
          {"condition", c.op.condition}, {"delta", c.op.delta}};
  if (c.op.potential) op["potential"] = *c.op.potential;
  Json centers = Json::array();
  for (const auto& x : c.centers) centers.push_back({x[0], x[1]});
  Json j{{"operator", op},
         {"domain",
          {{"dim", c.domain.dim},
           {"half_width", c.domain.half_width},
           {"points_per_axis", c.domain.points_per_axis},
           {"periodic", c.domain.periodic}}},
         {"set", c.set},
         {"seed", c.seed},
         {"k_max", c.k_max},
         {"trials", c.trials},
         {"recurrence_trials", c.recurrence_trials},
         {"t_end", c.t_end},
         {"dt", c.dt},
         {"side_lengths", c.side_lengths},
         {"radii", c.radii},
         {"thresholds", c.thresholds},
         {"feedback", c.feedback},
         {"damping_delta", c.damping_delta},
         {"initial", c.initial},
         {"initial_count", c.initial_count},
         {"claim",
          {{"C", c.claim_C}, {"T", c.claim_T}, {"alpha", c.claim_alpha}}},
         {"centers", centers}};
  j["a"] = c.a ? Json(*c.a) : Json(nullptr);
  return j;
}

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(ErrorCode::kInvalidArgument,
                  "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  try {
    reject_unknown(j,
                   {"operator", "domain", "set", "seed", "k_max", "trials",
                    "recurrence_trials", "t_end", "dt", "side_lengths", "radii",
                    "thresholds", "a", "feedback", "damping_delta", "initial",
                    "initial_count", "claim", "centers"},
                   "config");
    if (j.contains("operator")) {
      const Json& o = j.at("operator");
      reject_unknown(o, {"kind", "s", "c", "potential", "condition", "delta"},
                     "operator");
      read(o, "kind", c.op.kind);
      read(o, "s", c.op.s);
      read(o, "c", c.op.c);
      read(o, "condition", c.op.condition);
      read(o, "delta", c.op.delta);
      if (o.contains("potential") && !o.at("potential").is_null())
        c.op.potential = o.at("potential");
    }
    if (j.contains("domain")) {
      const Json& d = j.at("domain");
      reject_unknown(d, {"dim", "half_width", "points_per_axis", "periodic"},
                     "domain");
      read(d, "dim", c.domain.dim);
      read(d, "half_width", c.domain.half_width);
      read(d, "points_per_axis", c.domain.points_per_axis);
      read(d, "periodic", c.domain.periodic);
    }
    read(j, "set", c.set);
    read(j, "seed", c.seed);
    read(j, "k_max", c.k_max);
    read(j, "trials", c.trials);
    read(j, "recurrence_trials", c.recurrence_trials);
    read(j, "t_end", c.t_end);
    read(j, "dt", c.dt);
    read(j, "side_lengths", c.side_lengths);
    read(j, "radii", c.radii);
    read(j, "thresholds", c.thresholds);
    if (j.contains("a") && !j.at("a").is_null()) c.a = j.at("a").get<double>();
    read(j, "feedback", c.feedback);
    read(j, "damping_delta", c.damping_delta);
    read(j, "initial", c.initial);
    read(j, "initial_count", c.initial_count);
    if (j.contains("claim")) {
      const Json& cl = j.at("claim");
      reject_unknown(cl, {"C", "T", "alpha"}, "claim");
      read(cl, "C", c.claim_C);
      read(cl, "T", c.claim_T);
      read(cl, "alpha", c.claim_alpha);
    }
    if (j.contains("centers")) {
      for (const auto& x : j.at("centers")) {
        require(x.is_array() && !x.empty() && x.size() <= 2,
                "each center must be [x] or [x, y]");
        c.centers.push_back({x.at(0).get<double>(),
                             x.size() > 1 ? x.at(1).get<double>() : 0.0});
      }
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed config: ") + e.what());
  }
  return c;
}

namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json number_list(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Json matrix(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    out.push_back(row);
  }
  return out;
}

Json to_json(const Certificate& c) {
  Json lin{{"gamma", number(c.gamma)},   {"N", number(c.N)},
           {"CMgamma", number(c.CMgamma)}, {"DMN", number(c.DMN)},
           {"A", number(c.A)},           {"tau0", number(c.tau0)},
           {"alpha0", number(c.alpha0)}, {"B", number(c.B)},
           {"beta", number(c.beta)},     {"T", number(c.T)},
           {"alpha", number(c.alpha)},   {"C", number(c.C)}};
  Json logs{{"gamma", c.log_gamma},   {"N", c.log_N},
            {"CMgamma", c.log_CMgamma}, {"DMN", c.log_DMN},
            {"A", c.log_A},           {"tau0", c.log_tau0},
            {"alpha0", c.log_alpha0}, {"B", c.log_B},
            {"beta", c.log_beta},     {"T", c.log_T},
            {"alpha", c.log_alpha},   {"C", c.log_C}};
  const auto& k = c.constants;
  return Json{{"constants", lin},
              {"log_constants", logs},
              {"hypothesis_constants",
               {{"c1", k.c1},
                {"a", k.a},
                {"c2", k.c2},
                {"b", k.b},
                {"M", k.M},
                {"delta0", k.delta0}}}};
}

Json curve_json(const SpectralConstantCurve& curve) {
  Json j{{"thresholds", curve.thresholds},
         {"constants", number_list(curve.constants)},
         {"all_finite", curve.all_finite()}};
  if (curve.fit) {
    const auto& f = *curve.fit;
    j["fit"] = {{"model", f.model == GrowthModel::kExpPower ? "exp-power"
                                                             : "k-log-k"},
                {"exponent", f.exponent},
                {"coefficient", f.coefficient},
                {"residual", f.residual},
                {"signal", f.signal},
                {"points", f.points}};
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

std::string curve_csv(const SpectralConstantCurve& curve) {
  std::string out = "k,C,lnC\n";
  for (std::size_t i = 0; i < curve.constants.size(); ++i) {
    const double c = curve.constants[i];
    out += format_double(curve.thresholds[i]) + "," + format_double(c) + "," +
           format_double(std::log(c)) + "\n";
  }
  return out;
}

struct Inputs {
  GridDomain domain;
  std::optional<OperatorSpec> spec;
  std::optional<SetIndicator> set;
};

GridDomain make_domain(const DomainParams& p) {
  return GridDomain::make(p.dim, p.half_width, p.points_per_axis, p.periodic);
}

OperatorSpec make_operator(const OperatorParams& p, const GridDomain& d) {
  Json j{{"kind", p.kind}};
  if (p.kind == "frac") {
    j["s"] = p.s;
    j["c"] = p.c;
  } else if (p.kind == "hermite") {
    j["c"] = p.c;
  } else if (p.kind == "schrodinger") {
    require(p.potential.has_value(), "schrodinger operator needs a potential");
    j["potential"] = *p.potential;
    j["condition"] = p.condition;
    j["delta"] = p.delta;
  }
  return operator_from_json(j, d);
}

Json threshold_list(const RunConfig& cfg) {
  std::vector<double> ks = cfg.thresholds;
  if (ks.empty())
    for (int k = 1; k <= cfg.k_max; ++k) ks.push_back(k);
  return ks;
}

double default_exponent(const OperatorSpec& spec) {
  if (const auto* f = std::get_if<FractionalLaplacian>(&spec)) return 1.0 / f->s;
  return 1.0;
}

struct Outcome {
  Json result;
  bool math_failure = false;
  std::vector<SideFile> side_files;
};

Outcome check_thick_cmd(const RunConfig& cfg, const SetIndicator& e) {
  const double R = cfg.domain.half_width;
  std::vector<double> sides = cfg.side_lengths;
  if (sides.empty()) sides = {1.0, 2.0, 4.0};
  std::vector<double> radii = cfg.radii;
  if (radii.empty()) radii = {R / 4.0, R / 2.0, 3.0 * R / 4.0, R};
  const ThicknessReport t = check_thick(e, sides);
  const WeakThicknessReport w = check_weakly_thick(e, radii);
  Outcome o;
  o.result = {{"is_thick", t.is_thick},
              {"gamma", t.gamma ? Json(*t.gamma) : Json(nullptr)},
              {"side_length",
               t.side_length ? Json(*t.side_length) : Json(nullptr)},
              {"worst_cube_center", {t.worst_cube_center[0],
                                     t.worst_cube_center[1]}},
              {"side_lengths", t.side_lengths},
              {"gammas", t.gammas},
              {"truncated", t.truncated},
              {"weak",
               {{"radii", w.radii},
                {"densities", w.densities},
                {"liminf_proxy", w.liminf_proxy},
                {"caveat", w.caveat}}}};
  o.math_failure = !t.is_thick;
  return o;
}

Outcome spectral_constant_cmd(const RunConfig& cfg,
                              const SpectralDecomposition& dec,
                              const SetIndicator& e) {
  SpectralConstantCurve curve = spectral_constant_curve(
      dec, e, threshold_list(cfg).get<std::vector<double>>());
  try {
    curve.fit = fit_growth(curve, GrowthModel::kExpPower,
                           cfg.a.value_or(default_exponent(dec.spec())));
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kUnverifiable) throw;
  }
  Outcome o;
  o.result = {{"curve", curve_json(curve)},
              {"max_resolvable_k", max_resolvable_k(dec)}};
  o.math_failure = !curve.all_finite();
  o.side_files.push_back({"spectral_constant.csv", curve_csv(curve)});
  return o;
}

Outcome certify_cmd(const RunConfig& cfg, const SpectralDecomposition& dec,
                    const SetIndicator& e) {
  CertifyOptions opt;
  opt.k_max = cfg.k_max;
  opt.trials = cfg.trials;
  opt.recurrence_trials = cfg.recurrence_trials;
  opt.seed = cfg.seed;
  opt.a = cfg.a;
  const CertifyResult r = certify_end_to_end(dec, e, opt);
  Outcome o;
  Json j{{"status", to_string(r.status)},
         {"message", r.message},
         {"curve", curve_json(r.curve)}};
  if (r.hypothesis) {
    const auto& h = *r.hypothesis;
    j["hypothesis"] = {{"holds", h.holds},
                       {"c1", h.c1},
                       {"a", h.a},
                       {"k_max", h.k_max},
                       {"worst_ratio", number(h.worst_ratio)},
                       {"worst_k", h.worst_k}};
  }
  if (r.dissipative) {
    const auto& d = *r.dissipative;
    j["dissipative"] = {{"k", d.k},           {"t_samples", d.t_samples},
                        {"trials", d.trials}, {"seed", d.seed},
                        {"max_ratio", d.max_ratio}, {"worst_t", d.worst_t}};
  }
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  if (r.recurrence) {
    const auto& rc = *r.recurrence;
    Json samples = Json::array();
    for (const auto& s : rc.samples)
      samples.push_back({{"tau", s.tau},
                         {"k_tau", s.k_tau},
                         {"max_excess", number(s.max_excess)},
                         {"violations", s.violations}});
    j["recurrence"] = {{"samples", samples},
                       {"trials", rc.trials},
                       {"seed", rc.seed},
                       {"tolerance", rc.tolerance},
                       {"violations", rc.violations},
                       {"quadrature_discrepancy", rc.quadrature_discrepancy}};
  }
  if (r.observability) {
    const auto& ob = *r.observability;
    j["observability"] = {{"claim",
                           {{"C", number(ob.claim.C)},
                            {"T", ob.claim.T},
                            {"alpha", ob.claim.alpha}}},
                          {"trials", ob.trials},
                          {"seed", ob.seed},
                          {"min_slack", number(ob.min_slack)},
                          {"worst_trial", ob.worst_trial},
                          {"violations", ob.violations},
                          {"tolerance", ob.tolerance},
                          {"quadrature_discrepancy", ob.quadrature_discrepancy}};
  }
  o.result = j;
  o.math_failure = r.status != CertifyStatus::kCertified;
  o.side_files.push_back({"spectral_constant.csv", curve_csv(r.curve)});
  return o;
}

Json finite_rank_json(const FiniteRankFeedback& fb) {
  return Json{{"kind", "finite-rank"},
              {"rho", fb.rho},
              {"unstable_count", fb.unstable_count},
              {"eigenvalues", fb.eigenvalues},
              {"gram", matrix(fb.gram)},
              {"gram_inverse", matrix(fb.gram_inverse)},
              {"condition_number", fb.condition_number},
              {"norm_bound", fb.norm_bound()}};
}

struct BuiltFeedback {
  FeedbackOperator op;
  Json summary;
};

BuiltFeedback build_feedback(const RunConfig& cfg,
                             const SpectralDecomposition& dec,
                             const SetIndicator& e) {
  if (cfg.feedback == "finite-rank") {
    FiniteRankFeedback fb = build_finite_rank_feedback(dec, e);
    Json j = finite_rank_json(fb);
    return {std::move(fb), std::move(j)};
  }
  require(cfg.feedback == "damping",
          "feedback must be 'finite-rank' or 'damping'");
  Json j{{"kind", "damping"}, {"lambda_min", damped_min_eigenvalue(dec, e)}};
  if (dec.domain().periodic()) {
    const auto half = SpectralDecomposition::diagonalize_cached(
        FractionalLaplacian{1.0, 0.0}, dec.domain());
    const int n_max = std::min(cfg.k_max, max_resolvable_k(half));
    require(n_max >= 1, "the grid resolves no threshold for the damping bound");
    const DampingBound b =
        damping_decay_bound(half, e, cfg.damping_delta, 1, n_max);
    j["omega"] = b.omega;
    j["chosen_n"] = b.chosen_n;
    j["c1"] = b.c1;
    j["tested_n"] = b.tested_n;
    j["omegas"] = b.omegas;
    j["bound_holds"] = j["lambda_min"].get<double>() >= b.omega;
  }
  return {DampingFeedback{e}, std::move(j)};
}

Outcome feedback_build_cmd(const RunConfig& cfg,
                           const SpectralDecomposition& dec,
                           const SetIndicator& e) {
  BuiltFeedback fb = build_feedback(cfg, dec, e);
  Outcome o;
  o.result = {{"feedback", fb.summary}};
  if (fb.summary.contains("bound_holds"))
    o.math_failure = !fb.summary["bound_holds"].get<bool>();
  return o;
}

std::vector<GridFunction> initial_states(const RunConfig& cfg,
                                         const SpectralDecomposition& dec) {
  std::vector<GridFunction> out;
  if (cfg.initial == "random") {
    require(cfg.initial_count >= 1, "initial_count must be positive");
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < cfg.initial_count; ++i)
      out.push_back(random_unit(dec.domain(), rng));
    return out;
  }
  if (cfg.initial.rfind("mode:", 0) == 0) {
    std::size_t j = 0;
    try {
      j = std::stoul(cfg.initial.substr(5));
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad mode index in '" + cfg.initial + "'");
    }
    require(j < dec.size(), "mode index out of range");
    out.push_back(dec.mode(j));
    return out;
  }
  fail(ErrorCode::kInvalidArgument,
       "initial must be 'random' or 'mode:<j>', got '" + cfg.initial + "'");
}

Outcome simulate_cmd(const RunConfig& cfg, const SpectralDecomposition& dec,
                     const SetIndicator& e) {
  BuiltFeedback fb = build_feedback(cfg, dec, e);
  const ClosedLoop loop(dec, fb.op);
  Json runs = Json::array();
  std::string csv = "trial,t,norm,ln_norm\n";
  const auto states = initial_states(cfg, dec);
  bool all_decay = true;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const DecayReport r = simulate_decay(loop, states[i], cfg.t_end, cfg.dt);
    runs.push_back({{"fitted_omega", r.fitted_omega},
                    {"fitted_prefactor", r.fitted_prefactor},
                    {"fit_residual", r.fit_residual},
                    {"monotone_tail", r.monotone_tail},
                    {"initial_norm", r.norms.front()},
                    {"final_norm", r.norms.back()},
                    {"steps_per_sample", r.steps_per_sample}});
    all_decay = all_decay && r.fitted_omega > 0.0;
    for (std::size_t k = 0; k < r.times.size(); ++k)
      csv += std::to_string(i) + "," + format_double(r.times[k]) + "," +
             format_double(r.norms[k]) + "," +
             format_double(std::log(r.norms[k])) + "\n";
  }
  Outcome o;
  o.result = {{"feedback", fb.summary},
              {"t_end", cfg.t_end},
              {"dt", cfg.dt},
              {"runs", runs}};
  o.math_failure = !all_decay;
  o.side_files.push_back({"decay.csv", csv});
  return o;
}

Outcome probe_cmd(const RunConfig& cfg, const SpectralDecomposition& dec,
                  const SetIndicator& e) {
  const ObservabilityClaim claim{cfg.claim_C, cfg.claim_T, cfg.claim_alpha};
  Outcome o;
  if (std::holds_alternative<ShiftedHermite>(dec.spec())) {
    const GroundStateProbeReport r = ground_state_probe(dec, e, claim);
    o.result = {{"probe", "ground-state"},
                {"claim", {{"C", claim.C}, {"T", claim.T}, {"alpha", claim.alpha}}},
                {"c", r.c},
                {"gaussian_mass", r.gaussian_mass},
                {"lhs", r.lhs},
                {"observation", r.observation},
                {"rhs", r.rhs},
                {"violated", r.violated},
                {"closed_form_rhs", r.closed_form_rhs},
                {"closed_form_violated", r.closed_form_violated}};
    o.math_failure = r.violated || r.closed_form_violated;
    o.side_files.push_back(
        {"probe.csv", "x0,lhs,observation,violated\n0," + format_double(r.lhs) +
                          "," + format_double(r.observation) + "," +
                          (r.violated ? "1" : "0") + "\n"});
    return o;
  }
  std::vector<std::array<double, 2>> centers = cfg.centers;
  if (centers.empty()) centers.push_back({0.0, 0.0});
  const FalsificationReport r = falsify_weak_observability(dec, e, claim, centers);
  Json per = Json::array();
  std::string csv = dec.domain().dim() == 2
                        ? "x0,y0,lhs,observation,violated\n"
                        : "x0,lhs,observation,violated\n";
  for (const auto& c : r.centers) {
    per.push_back({{"center", {c.center[0], c.center[1]}},
                   {"lhs", c.lhs},
                   {"initial_norm", c.initial_norm},
                   {"observation", c.observation},
                   {"rhs", c.rhs},
                   {"violated", c.violated},
                   {"radius", number(c.radius)},
                   {"local_mass_bound", number(c.local_mass_bound)},
                   {"local_mass", c.local_mass}});
    csv += format_double(c.center[0]) + ",";
    if (dec.domain().dim() == 2) csv += format_double(c.center[1]) + ",";
    csv += format_double(c.lhs) + "," + format_double(c.observation) + "," +
           (c.violated ? "1" : "0") + "\n";
  }
  o.result = {{"probe", "kernel"},
              {"claim", {{"C", claim.C}, {"T", claim.T}, {"alpha", claim.alpha}}},
              {"s", r.s},
              {"c", r.c},
              {"l0", r.l0},
              {"decay_constant", r.decay_constant},
              {"norm_constant", r.norm_constant},
              {"centers", per},
              {"violations", r.violations}};
  o.math_failure = r.violations > 0;
  o.side_files.push_back({"probe.csv", csv});
  return o;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ExitClass exit_class_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDomainMismatch:
    case ErrorCode::kIo:
      return ExitClass::kUsage;
    default:
      return ExitClass::kMathFailure;
  }
}

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDomainMismatch: return "domain-mismatch";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kResolution: return "resolution";
    case ErrorCode::kAlreadyStable: return "already-stable";
    case ErrorCode::kSingularGram: return "singular-gram";
    case ErrorCode::kInstability: return "instability";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUnverifiable: return "unverifiable";
  }
  return "unknown";
}

}  // namespace

ResultDocument run(const std::string& command, const Json& config) {
  const auto started = std::chrono::steady_clock::now();
  ResultDocument out;
  Json& doc = out.document;
  doc["schema_version"] = kSchemaVersion;
  doc["tool_version"] = kToolVersion;
  doc["command"] = command;
  doc["metadata"] = {{"started_utc", utc_now()}};

  auto finish = [&](ExitClass cls) {
    out.exit_class = cls;
    doc["exit_class"] = static_cast<int>(cls);
    doc["metadata"]["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    return out;
  };
  auto error = [&](const std::string& code, const std::string& message,
                   ExitClass cls) {
    doc["status"] = cls == ExitClass::kUsage ? "usage-error" : "failure";
    doc["error"] = {{"code", code}, {"message", message}};
    return finish(cls);
  };

  const auto cmd = parse_command(command);
  if (!cmd)
    return error("unknown-command", "unknown command '" + command + "'",
                 ExitClass::kUsage);

  RunConfig cfg;
  try {
    cfg = config_from_json(config);
  } catch (const Error& e) {
    return error(code_name(e.code()), e.what(), ExitClass::kUsage);
  }
  doc["config"] = to_json(cfg);
  doc["input_hashes"] = {{"config", content_hash(doc["config"])}};

  try {
    const GridDomain domain = make_domain(cfg.domain);
    const SetIndicator e = make_set(domain, parse_shape(cfg.set));
    doc["input_hashes"]["set"] = content_hash(to_json(e));
    doc["set_measure"] = e.measure();

    Outcome o;
    if (*cmd == Command::kCheckThick) {
      o = check_thick_cmd(cfg, e);
    } else {
      const OperatorSpec spec = make_operator(cfg.op, domain);
      doc["input_hashes"]["operator"] = content_hash(spec, domain);
      const auto dec = SpectralDecomposition::diagonalize_cached(spec, domain);
      switch (*cmd) {
        case Command::kSpectralConstant:
          o = spectral_constant_cmd(cfg, dec, e);
          break;
        case Command::kCertify:
          o = certify_cmd(cfg, dec, e);
          break;
        case Command::kFeedbackBuild:
          o = feedback_build_cmd(cfg, dec, e);
          break;
        case Command::kSimulate:
          o = simulate_cmd(cfg, dec, e);
          break;
        case Command::kProbe:
          o = probe_cmd(cfg, dec, e);
          break;
        case Command::kCheckThick:
          break;
      }
    }
    doc["result"] = o.result;
    doc["status"] = o.math_failure ? "failure" : "ok";
    out.side_files = std::move(o.side_files);
    return finish(o.math_failure ? ExitClass::kMathFailure : ExitClass::kSuccess);
  } catch (const Error& e) {
    return error(code_name(e.code()), e.what(), exit_class_of(e.code()));
  } catch (const Json::exception& e) {
    return error("invalid-argument", e.what(), ExitClass::kUsage);
  }
}

}  // namespace stabcert
