#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stabcert/io.hpp"

namespace stabcert {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum class Command {
  kCheckThick,
  kSpectralConstant,
  kCertify,
  kFeedbackBuild,
  kSimulate,
  kProbe,
};

std::optional<Command> parse_command(const std::string& name);
std::string to_string(Command c);

enum class ExitClass : int { kSuccess = 0, kMathFailure = 1, kUsage = 2 };

struct OperatorParams {
  // "frac", "hermite" or "schrodinger".
  std::string kind = "frac";
  double s = 1.0;
  double c = 0.0;
  // Schrodinger only: grid-function JSON of V, "I" or "II", and delta.
  std::optional<Json> potential;
  std::string condition = "II";
  double delta = 0.5;
};

struct DomainParams {
  int dim = 1;
  double half_width = 10.0;
  int points_per_axis = 256;
  bool periodic = true;
};

// Every command reads the fields it needs and ignores the rest. Unknown keys
// in the JSON form are rejected.
struct RunConfig {
  OperatorParams op;
  DomainParams domain;
  std::string set = "full";
  std::uint64_t seed = 0;
  int k_max = 10;
  int trials = 1000;
  int recurrence_trials = 500;
  double t_end = 10.0;
  double dt = 0.01;
  // check-thick / weak thickness.
  std::vector<double> side_lengths;
  std::vector<double> radii;
  // spectral-constant.
  std::vector<double> thresholds;
  // certify: exponent override.
  std::optional<double> a;
  // feedback-build / simulate: "finite-rank" or "damping".
  std::string feedback = "finite-rank";
  // Damping: Condition I constant in omega(N).
  double damping_delta = 0.0;
  // simulate: "random" or "mode:<j>".
  std::string initial = "random";
  int initial_count = 1;
  // probe.
  double claim_C = 1.0;
  double claim_T = 1.0;
  double claim_alpha = 0.5;
  std::vector<std::array<double, 2>> centers;
};

Json to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);

struct SideFile {
  std::string name;
  std::string contents;
};

struct ResultDocument {
  Json document;
  ExitClass exit_class = ExitClass::kSuccess;
  std::vector<SideFile> side_files;
};

// Dispatches one command. Usage errors (bad config, unknown command) come
// back as exit class kUsage with the message in result.error; witnessed
// mathematical failures as kMathFailure.
ResultDocument run(const std::string& command, const Json& config);

// Formats a double with 17 significant digits.
std::string format_double(double x);

}  // namespace stabcert
