#include "fracopt.h"

#include <cstring>
#include <fstream>
#include <string>

#include "fracopt/driver.hpp"

using namespace fracopt;

struct fracopt_config {
  AfemConfig cfg;
};

struct fracopt_run {
  Manifest manifest;
  AfemTrace trace;
};

struct fracopt_report {
  RateReport report;
  std::string text;
};

namespace {

thread_local std::string g_last_error;

fracopt_status classify(const std::exception& e) {
  g_last_error = e.what();
  if (dynamic_cast<const NumericalError*>(&e)) return FRACOPT_ERR_NUMERICAL;
  if (dynamic_cast<const IoError*>(&e)) return FRACOPT_ERR_IO;
  if (dynamic_cast<const ValidationError*>(&e)) return FRACOPT_ERR_VALIDATION;
  return FRACOPT_ERR_GENERIC;
}

template <class F>
fracopt_status guarded(F&& f) {
  try {
    f();
    return FRACOPT_OK;
  } catch (const std::exception& e) {
    return classify(e);
  } catch (...) {
    g_last_error = "unknown error";
    return FRACOPT_ERR_GENERIC;
  }
}

fracopt_status invalid_argument(const char* what) {
  g_last_error = what;
  return FRACOPT_ERR_VALIDATION;
}

}  // namespace

extern "C" {

const char* fracopt_version(void) { return version_string(); }

const char* fracopt_last_error(void) { return g_last_error.c_str(); }

fracopt_status fracopt_config_parse_file(const char* path, fracopt_config** out) {
  if (!path || !out) return invalid_argument("null argument");
  return guarded([&] { *out = new fracopt_config{parse_config_file(path)}; });
}

fracopt_status fracopt_config_parse_string(const char* text, fracopt_config** out) {
  if (!text || !out) return invalid_argument("null argument");
  return guarded([&] { *out = new fracopt_config{parse_config_text(text)}; });
}

fracopt_status fracopt_config_override(fracopt_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid_argument("null argument");
  return guarded([&] {
    // Re-parse the echoed config with the field replaced; keeps one schema.
    std::string text = config_echo(cfg->cfg);
    const std::string needle = std::string(key) + " = ";
    const auto pos = text.find(needle);
    if (pos == std::string::npos || (pos != 0 && text[pos - 1] != '\n'))
      throw ValidationError("unknown config field '" + std::string(key) + "'");
    const auto eol = text.find('\n', pos);
    text = text.substr(0, pos) + needle + value + text.substr(eol);
    cfg->cfg = parse_config_text(text);
  });
}

void fracopt_config_free(fracopt_config* cfg) { delete cfg; }

fracopt_status fracopt_run_execute(const fracopt_config* cfg, const char* out_dir,
                                   fracopt_run** out) {
  if (!cfg || !out_dir || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto* run = new fracopt_run;
    try {
      run->manifest = run_to_directory(cfg->cfg, out_dir);
      std::ifstream trace_in(std::string(out_dir) + "/trace.csv");
      run->trace = read_trace_csv(trace_in);
    } catch (...) {
      delete run;
      throw;
    }
    *out = run;
  });
}

void fracopt_run_free(fracopt_run* run) { delete run; }

int fracopt_run_iteration_count(const fracopt_run* run) {
  return run ? static_cast<int>(run->trace.size()) : 0;
}

fracopt_status fracopt_run_trace_value(const fracopt_run* run, int iteration, const char* column,
                                       double* out) {
  if (!run || !column || !out) return invalid_argument("null argument");
  if (iteration < 0 || iteration >= static_cast<int>(run->trace.size()))
    return invalid_argument("iteration out of range");
  const AfemIterate& r = run->trace[iteration];
  const std::string c = column;
  double v;
  if (c == "iter") v = r.iter;
  else if (c == "nT_base") v = r.nT_base;
  else if (c == "nT_cyl") v = static_cast<double>(r.nT_cyl);
  else if (c == "dofs") v = static_cast<double>(r.dofs);
  else if (c == "Y") v = r.Y;
  else if (c == "M") v = r.M;
  else if (c == "E_V") v = r.E_V;
  else if (c == "E_P") v = r.E_P;
  else if (c == "E_Z") v = r.E_Z;
  else if (c == "E_Lambda") v = r.E_Lambda;
  else if (c == "osc") v = r.osc;
  else if (c == "total") v = r.total;
  else if (c == "J") v = r.J;
  else if (c == "as_iters") v = r.as_iters;
  else if (c == "seconds") v = r.seconds;
  else return invalid_argument("unknown trace column");
  *out = v;
  return FRACOPT_OK;
}

fracopt_status fracopt_report_csv(const char* trace_csv_path, int window, fracopt_report** out) {
  if (!trace_csv_path || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto* rep = new fracopt_report;
    try {
      rep->report = report_csv_file(trace_csv_path, window > 0 ? window : 5);
      rep->text = rep->report.text();
    } catch (...) {
      delete rep;
      throw;
    }
    *out = rep;
  });
}

void fracopt_report_free(fracopt_report* rep) { delete rep; }

const char* fracopt_report_text(const fracopt_report* rep) {
  return rep ? rep->text.c_str() : "";
}

int fracopt_report_passed(const fracopt_report* rep) {
  return rep && rep->report.pass ? 1 : 0;
}

fracopt_status fracopt_report_slope(const fracopt_report* rep, const char* name, double* out) {
  if (!rep || !name || !out) return invalid_argument("null argument");
  for (const auto& row : rep->report.rows) {
    if (row.name == name) {
      if (!row.defined) return invalid_argument("slope undefined for this trace");
      *out = row.slope;
      return FRACOPT_OK;
    }
  }
  return invalid_argument("unknown contribution name");
}

}  // extern "C"
