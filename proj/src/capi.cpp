#include "polaron/polaron.h"

#include <cstring>
#include <exception>
#include <json.hpp>
#include <new>
#include <string>

#include "commands.hpp"
#include "polaron/error.hpp"
#include "polaron/pair_kernel.hpp"
#include "polaron/potential.hpp"
#include "polaron/scan.hpp"
#include "polaron/spectral.hpp"
#include "polaron/version.hpp"

struct pl_context {
  std::string last_error;
};

struct pl_kernel {
  polaron::PairKernel kernel;
};

struct pl_potential {
  polaron::ExternalPotential potential;
};

namespace {

template <class F>
pl_status guarded(pl_context* ctx, F&& body) {
  try {
    body();
    if (ctx) ctx->last_error.clear();
    return PL_OK;
  } catch (const polaron::Error& e) {
    if (ctx) ctx->last_error = e.what();
    return static_cast<pl_status>(e.kind());
  } catch (const std::bad_alloc&) {
    if (ctx) ctx->last_error = "out of memory";
    return PL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    if (ctx) ctx->last_error = e.what();
    return PL_ERR_INTERNAL;
  } catch (...) {
    if (ctx) ctx->last_error = "unknown error";
    return PL_ERR_INTERNAL;
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* pl_version(void) { return polaron::version_string(); }

pl_status pl_context_create(pl_context** out) {
  if (!out) return PL_ERR_VALIDATION;
  *out = new (std::nothrow) pl_context();
  return *out ? PL_OK : PL_ERR_INTERNAL;
}

void pl_context_destroy(pl_context* ctx) { delete ctx; }

const char* pl_last_error(const pl_context* ctx) { return ctx ? ctx->last_error.c_str() : "null context"; }

pl_status pl_run_command(pl_context* ctx, const char* command, const char* request_json, char** response_json) {
  if (response_json) *response_json = nullptr;
  int status = 0;
  const pl_status rc = guarded(ctx, [&] {
    polaron::require(command && response_json, "pl_run_command: command and response must be non-null");
    const auto result = polaron::run_command(command, request_json ? request_json : "");
    *response_json = duplicate(result.response);
    status = result.status;
  });
  if (rc == PL_OK && status == PL_VIOLATION && ctx) ctx->last_error = "flagged inequality violation";
  return rc == PL_OK ? static_cast<pl_status>(status) : rc;
}

void pl_free_string(char* s) { std::free(s); }

pl_status pl_kernel_create(pl_context* ctx, const char* kernel_json, int dimension, pl_kernel** out) {
  return guarded(ctx, [&] {
    polaron::require(out != nullptr, "pl_kernel_create: out must be non-null");
    *out = nullptr;
    nlohmann::json cfg = {{"model", {{"d", dimension}}}};
    if (kernel_json && *kernel_json) {
      try {
        cfg["kernel"] = nlohmann::json::parse(kernel_json);
      } catch (const nlohmann::json::exception& e) {
        throw polaron::ValidationError(std::string("kernel: ") + e.what());
      }
    }
    const auto config = polaron::run_config_from_json(cfg.dump());
    *out = new pl_kernel{config.kernel.build(config.d)};
  });
}

pl_status pl_kernel_eval(pl_context* ctx, const pl_kernel* kernel, double r, double t, double* value) {
  return guarded(ctx, [&] {
    polaron::require(kernel && value, "pl_kernel_eval: null argument");
    *value = kernel->kernel.eval(r, t);
  });
}

void pl_kernel_destroy(pl_kernel* kernel) { delete kernel; }

pl_status pl_potential_well(pl_context* ctx, double radius, pl_potential** out) {
  return guarded(ctx, [&] {
    polaron::require(out != nullptr, "pl_potential_well: out must be non-null");
    *out = nullptr;
    *out = new pl_potential{polaron::ExternalPotential::well(radius)};
  });
}

pl_status pl_potential_eval(pl_context* ctx, const pl_potential* potential, const double* x, size_t d,
                            double* value) {
  return guarded(ctx, [&] {
    polaron::require(potential && x && value, "pl_potential_eval: null argument");
    *value = potential->potential.eval({x, d});
  });
}

void pl_potential_destroy(pl_potential* potential) { delete potential; }

pl_status pl_well_threshold(pl_context* ctx, const pl_potential* potential, double* value) {
  return guarded(ctx, [&] {
    polaron::require(potential && value, "pl_well_threshold: null argument");
    *value = polaron::well_threshold(potential->potential, 1.0, 3);
  });
}

}  // extern "C"
