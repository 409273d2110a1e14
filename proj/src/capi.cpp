#include "stabcert/stabcert.h"

#include <cstring>
#include <new>
#include <string>

#include "stabcert/certify.hpp"
#include "stabcert/run.hpp"
#include "stabcert/specineq.hpp"

struct stab_domain {
  stabcert::GridDomain d;
};
struct stab_set {
  stabcert::SetIndicator e;
};
struct stab_decomposition {
  stabcert::SpectralDecomposition dec;
};
struct stab_certificate {
  stabcert::Certificate cert;
  std::string json;
};
struct stab_result {
  stabcert::ResultDocument doc;
  std::string json;
};

namespace {

thread_local std::string last_error;

template <class F>
stab_status_t guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return STAB_OK;
  } catch (const stabcert::Error& e) {
    last_error = e.what();
    return static_cast<stab_status_t>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return STAB_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return STAB_E_INTERNAL;
  } catch (...) {
    last_error = "unknown internal error";
    return STAB_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr)
    stabcert::fail(stabcert::ErrorCode::kInvalidArgument,
                   std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* stab_version(void) { return stabcert::kToolVersion; }

const char* stab_last_error_message(void) { return last_error.c_str(); }

stab_status_t stab_domain_create(int dim, double half_width,
                                 int points_per_axis, int periodic,
                                 stab_domain_t** out) {
  return guarded([&] {
    need(out, "out");
    *out = new stab_domain{stabcert::GridDomain::make(
        dim, half_width, points_per_axis, periodic != 0)};
  });
}

size_t stab_domain_size(const stab_domain_t* d) { return d ? d->d.size() : 0; }

void stab_domain_free(stab_domain_t* d) { delete d; }

stab_status_t stab_set_create(const stab_domain_t* d, const char* shape,
                              stab_set_t** out) {
  return guarded([&] {
    need(d, "domain");
    need(shape, "shape");
    need(out, "out");
    *out = new stab_set{stabcert::make_set(d->d, stabcert::parse_shape(shape))};
  });
}

double stab_set_measure(const stab_set_t* e) { return e ? e->e.measure() : 0.0; }

void stab_set_free(stab_set_t* e) { delete e; }

stab_status_t stab_decomposition_create(const stab_domain_t* d,
                                        const char* operator_json,
                                        stab_decomposition_t** out) {
  return guarded([&] {
    need(d, "domain");
    need(operator_json, "operator_json");
    need(out, "out");
    stabcert::Json j;
    try {
      j = stabcert::Json::parse(operator_json);
    } catch (const stabcert::Json::exception& ex) {
      stabcert::fail(stabcert::ErrorCode::kInvalidArgument,
                     std::string("operator JSON: ") + ex.what());
    }
    const auto spec = stabcert::operator_from_json(j, d->d);
    *out = new stab_decomposition{
        stabcert::SpectralDecomposition::diagonalize_cached(spec, d->d)};
  });
}

size_t stab_decomposition_size(const stab_decomposition_t* dec) {
  return dec ? dec->dec.size() : 0;
}

double stab_decomposition_eigenvalue(const stab_decomposition_t* dec,
                                     size_t j) {
  if (!dec || j >= dec->dec.size()) return std::numeric_limits<double>::quiet_NaN();
  return dec->dec.eigenvalues()[j];
}

stab_status_t stab_best_constant(const stab_decomposition_t* dec,
                                 const stab_set_t* e, double k, double* out) {
  return guarded([&] {
    need(dec, "decomposition");
    need(e, "set");
    need(out, "out");
    *out = stabcert::best_constant(dec->dec, k, e->e).constant;
  });
}

void stab_decomposition_free(stab_decomposition_t* dec) { delete dec; }

stab_status_t stab_certificate_build(double c1, double a, double c2, double b,
                                     double M, double delta0,
                                     stab_certificate_t** out) {
  return guarded([&] {
    need(out, "out");
    const auto cert =
        stabcert::build_certificate({c1, a, c2, b, M, delta0});
    auto num = [](double x) {
      return std::isfinite(x) ? stabcert::Json(x) : stabcert::Json(nullptr);
    };
    stabcert::Json j{
        {"constants",
         {{"gamma", num(cert.gamma)}, {"N", num(cert.N)},
          {"CMgamma", num(cert.CMgamma)}, {"DMN", num(cert.DMN)},
          {"A", num(cert.A)}, {"tau0", num(cert.tau0)},
          {"alpha0", num(cert.alpha0)}, {"B", num(cert.B)},
          {"beta", num(cert.beta)}, {"T", num(cert.T)},
          {"alpha", num(cert.alpha)}, {"C", num(cert.C)}}},
        {"log_constants",
         {{"gamma", cert.log_gamma}, {"N", cert.log_N},
          {"CMgamma", cert.log_CMgamma}, {"DMN", cert.log_DMN},
          {"A", cert.log_A}, {"tau0", cert.log_tau0},
          {"alpha0", cert.log_alpha0}, {"B", cert.log_B},
          {"beta", cert.log_beta}, {"T", cert.log_T},
          {"alpha", cert.log_alpha}, {"C", cert.log_C}}}};
    *out = new stab_certificate{cert, j.dump()};
  });
}

double stab_certificate_T(const stab_certificate_t* c) {
  return c ? c->cert.T : std::numeric_limits<double>::quiet_NaN();
}

double stab_certificate_alpha(const stab_certificate_t* c) {
  return c ? c->cert.alpha : std::numeric_limits<double>::quiet_NaN();
}

double stab_certificate_log_C(const stab_certificate_t* c) {
  return c ? c->cert.log_C : std::numeric_limits<double>::quiet_NaN();
}

const char* stab_certificate_json(const stab_certificate_t* c) {
  return c ? c->json.c_str() : nullptr;
}

void stab_certificate_free(stab_certificate_t* c) { delete c; }

stab_status_t stab_run(const char* command, const char* config_json,
                       stab_result_t** out) {
  return guarded([&] {
    need(command, "command");
    need(out, "out");
    stabcert::Json cfg = stabcert::Json::object();
    stabcert::ResultDocument doc;
    bool parsed = true;
    if (config_json != nullptr && *config_json != '\0') {
      try {
        cfg = stabcert::Json::parse(config_json);
      } catch (const stabcert::Json::exception& ex) {
        parsed = false;
        doc.document = {{"schema_version", stabcert::kSchemaVersion},
                        {"tool_version", stabcert::kToolVersion},
                        {"command", command},
                        {"status", "usage-error"},
                        {"exit_class", 2},
                        {"error",
                         {{"code", "invalid-argument"},
                          {"message", std::string("config is not JSON: ") +
                                          ex.what()}}}};
        doc.exit_class = stabcert::ExitClass::kUsage;
      }
    }
    if (parsed) doc = stabcert::run(command, cfg);
    auto* r = new stab_result{std::move(doc), {}};
    r->json = r->doc.document.dump(2);
    *out = r;
  });
}

const char* stab_result_json(const stab_result_t* r) {
  return r ? r->json.c_str() : nullptr;
}

int stab_result_exit_class(const stab_result_t* r) {
  return r ? static_cast<int>(r->doc.exit_class) : 2;
}

size_t stab_result_side_file_count(const stab_result_t* r) {
  return r ? r->doc.side_files.size() : 0;
}

const char* stab_result_side_file_name(const stab_result_t* r, size_t i) {
  if (!r || i >= r->doc.side_files.size()) return nullptr;
  return r->doc.side_files[i].name.c_str();
}

const char* stab_result_side_file_contents(const stab_result_t* r, size_t i) {
  if (!r || i >= r->doc.side_files.size()) return nullptr;
  return r->doc.side_files[i].contents.c_str();
}

void stab_result_free(stab_result_t* r) { delete r; }

stab_status_t stab_write_file_atomic(const char* path, const char* contents) {
  return guarded([&] {
    need(path, "path");
    need(contents, "contents");
    stabcert::write_file_atomic(path, contents);
  });
}

stab_status_t stab_read_file(const char* path, char** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string s = stabcert::read_file(path);
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, s.data(), s.size());
    buf[s.size()] = '\0';
    *out = buf;
  });
}

void stab_string_free(char* s) { std::free(s); }

}  // extern "C"
