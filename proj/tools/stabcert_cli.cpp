// Command-line front end over the C interface.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "stabcert/stabcert.h"

using Json = nlohmann::json;

namespace {

struct Flags {
  std::string config_path;
  std::string out;
  std::optional<std::string> op, potential, condition, domain, set, feedback,
      initial, side_lengths, radii, thresholds, claim, centers;
  std::optional<double> s, c, delta, t_end, dt, a, damping_delta, claim_C,
      claim_T, claim_alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> k_max, trials, recurrence_trials, initial_count;
};

std::string slurp(const std::string& path) {
  char* buf = nullptr;
  if (stab_read_file(path.c_str(), &buf) != STAB_OK)
    throw std::runtime_error(stab_last_error_message());
  std::string s(buf);
  stab_string_free(buf);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> number_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(std::stod(t));
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("not a boolean: " + v);
}

// "dim=1,R=10,m=512,periodic=true"
Json parse_domain(const std::string& text, Json base) {
  for (const auto& kv : split(text, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("domain entry '" + kv + "' is not key=value");
    const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "dim") base["dim"] = std::stoi(v);
    else if (k == "R") base["half_width"] = std::stod(v);
    else if (k == "m") base["points_per_axis"] = std::stoi(v);
    else if (k == "periodic") base["periodic"] = parse_bool(v);
    else throw std::runtime_error("unknown domain key '" + k + "'");
  }
  return base;
}

// "x" or "x:y" entries separated by ';'.
Json parse_centers(const std::string& text) {
  Json out = Json::array();
  for (const auto& item : split(text, ';')) {
    Json p = Json::array();
    for (const auto& v : split(item, ':')) p.push_back(std::stod(v));
    out.push_back(p);
  }
  return out;
}

Json build_config(const Flags& f) {
  Json cfg = Json::object();
  if (!f.config_path.empty()) cfg = Json::parse(slurp(f.config_path));
  auto& op = cfg["operator"];
  if (op.is_null()) op = Json::object();
  if (f.op) op["kind"] = *f.op;
  if (f.s) op["s"] = *f.s;
  if (f.c) op["c"] = *f.c;
  if (f.condition) op["condition"] = *f.condition;
  if (f.delta) op["delta"] = *f.delta;
  if (f.potential) op["potential"] = Json::parse(slurp(*f.potential));
  if (op.empty()) cfg.erase("operator");
  if (f.domain)
    cfg["domain"] = parse_domain(*f.domain, cfg.value("domain", Json::object()));
  if (f.set) cfg["set"] = *f.set;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.k_max) cfg["k_max"] = *f.k_max;
  if (f.trials) cfg["trials"] = *f.trials;
  if (f.recurrence_trials) cfg["recurrence_trials"] = *f.recurrence_trials;
  if (f.t_end) cfg["t_end"] = *f.t_end;
  if (f.dt) cfg["dt"] = *f.dt;
  if (f.side_lengths) cfg["side_lengths"] = number_list(*f.side_lengths);
  if (f.radii) cfg["radii"] = number_list(*f.radii);
  if (f.thresholds) cfg["thresholds"] = number_list(*f.thresholds);
  if (f.a) cfg["a"] = *f.a;
  if (f.feedback) cfg["feedback"] = *f.feedback;
  if (f.damping_delta) cfg["damping_delta"] = *f.damping_delta;
  if (f.initial) cfg["initial"] = *f.initial;
  if (f.initial_count) cfg["initial_count"] = *f.initial_count;
  if (f.claim) {
    const std::string& c = *f.claim;
    cfg["claim"] = Json::parse(!c.empty() && c.front() == '{' ? c : slurp(c));
  }
  if (f.claim_C) cfg["claim"]["C"] = *f.claim_C;
  if (f.claim_T) cfg["claim"]["T"] = *f.claim_T;
  if (f.claim_alpha) cfg["claim"]["alpha"] = *f.claim_alpha;
  if (f.centers) cfg["centers"] = parse_centers(*f.centers);
  return cfg;
}

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_path, "JSON config; flags override it");
  app->add_option("--out", f.out, "result JSON path (stdout when omitted)");
  app->add_option("--operator", f.op, "frac | hermite | schrodinger");
  app->add_option("--s", f.s, "fractional order");
  app->add_option("--c", f.c, "spectral shift");
  app->add_option("--potential", f.potential, "grid-function JSON file of V");
  app->add_option("--condition", f.condition, "potential condition I | II");
  app->add_option("--delta", f.delta, "potential condition constant");
  app->add_option("--domain", f.domain, "dim=1,R=10,m=512,periodic=true");
  app->add_option("--set", f.set, "shape, e.g. slabs:period=1,fill=0.25");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--k-max", f.k_max, "largest spectral threshold");
  app->add_option("--trials", f.trials, "random initial states");
  app->add_option("--recurrence-trials", f.recurrence_trials,
                  "random states for the recurrence check");
  app->add_option("--t-end", f.t_end, "simulation horizon");
  app->add_option("--dt", f.dt, "time step");
  app->add_option("--side-lengths", f.side_lengths, "cube sides, comma list");
  app->add_option("--radii", f.radii, "ball radii, comma list");
  app->add_option("--thresholds", f.thresholds, "thresholds k, comma list");
  app->add_option("--a", f.a, "growth exponent override");
  app->add_option("--feedback", f.feedback, "finite-rank | damping");
  app->add_option("--damping-delta", f.damping_delta,
                  "constant in the damping rate");
  app->add_option("--initial", f.initial, "random | mode:<j>");
  app->add_option("--initial-count", f.initial_count, "random initial states");
  app->add_option("--claim", f.claim, "claim JSON {C, T, alpha} or file");
  app->add_option("--claim-C", f.claim_C);
  app->add_option("--claim-T", f.claim_T);
  app->add_option("--claim-alpha", f.claim_alpha);
  app->add_option("--centers", f.centers, "probe centers: x[:y];...");
}

int emit(const std::string& command, const Flags& f) {
  Json cfg;
  try {
    cfg = build_config(f);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  stab_result_t* r = nullptr;
  if (stab_run(command.c_str(), cfg.dump().c_str(), &r) != STAB_OK) {
    std::cerr << "error: " << stab_last_error_message() << "\n";
    return 2;
  }
  const int code = stab_result_exit_class(r);
  const std::string doc = std::string(stab_result_json(r)) + "\n";
  int status = code;
  if (f.out.empty()) {
    std::cout << doc;
  } else {
    namespace fs = std::filesystem;
    const fs::path out(f.out);
    if (stab_write_file_atomic(out.c_str(), doc.c_str()) != STAB_OK) {
      std::cerr << "error: " << stab_last_error_message() << "\n";
      status = 2;
    }
    const std::string stem = out.stem().string();
    for (size_t i = 0; i < stab_result_side_file_count(r) && status != 2; ++i) {
      const fs::path side = out.parent_path() /
                            (stem + "." + stab_result_side_file_name(r, i));
      if (stab_write_file_atomic(side.c_str(),
                                 stab_result_side_file_contents(r, i)) !=
          STAB_OK) {
        std::cerr << "error: " << stab_last_error_message() << "\n";
        status = 2;
      }
    }
  }
  if (code != 0) {
    const Json d = Json::parse(stab_result_json(r));
    if (d.contains("error"))
      std::cerr << d["error"].value("message", "") << "\n";
  }
  stab_result_free(r);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilization certificates for parabolic equations"};
  app.set_version_flag("--version", stab_version());
  app.require_subcommand(1);
  const char* commands[][2] = {
      {"check-thick", "classify a set as thick / weakly thick"},
      {"spectral-constant", "spectral-inequality constants C(k, E)"},
      {"certify", "build and validate a weak-observability certificate"},
      {"feedback-build", "construct a stabilizing feedback"},
      {"simulate", "closed-loop decay simulation"},
      {"probe", "falsify a claimed observability triple"},
  };
  Flags flags;
  std::string chosen;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    add_flags(sub, flags);
    sub->callback([&chosen, name = std::string(c[0])] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return emit(chosen, flags);
}
