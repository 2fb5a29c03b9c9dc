#include "fracopt/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fracopt {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[40];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* label_name(CellLabel l) {
  switch (l) {
    case CellLabel::Lower: return "lower";
    case CellLabel::Zero: return "zero";
    case CellLabel::FreeNeg: return "free-";
    case CellLabel::FreePos: return "free+";
    case CellLabel::Upper: return "upper";
  }
  return "?";
}

}  // namespace

const char* version_string() { return "0.1.0"; }

void write_trace_csv(std::ostream& os, const AfemTrace& trace, bool include_timing) {
  os << kTraceHeader << "\n";
  for (const auto& r : trace) {
    os << r.iter << "," << r.nT_base << "," << r.nT_cyl << "," << r.dofs << "," << fmt(r.Y) << ","
       << r.M << "," << fmt(r.E_V) << "," << fmt(r.E_P) << "," << fmt(r.E_Z) << ","
       << fmt(r.E_Lambda) << "," << fmt(r.osc) << "," << fmt(r.total) << "," << fmt(r.J) << ","
       << r.as_iters << "," << fmt(include_timing ? r.seconds : 0.0) << "\n";
  }
}

AfemTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InsufficientData("trace csv: empty file");
  if (line != kTraceHeader) throw IoError("trace csv: unexpected header");
  AfemTrace trace;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    AfemIterate r;
    if (!(ls >> r.iter >> r.nT_base >> r.nT_cyl >> r.dofs >> r.Y >> r.M >> r.E_V >> r.E_P >>
          r.E_Z >> r.E_Lambda >> r.osc >> r.total >> r.J >> r.as_iters >> r.seconds))
      throw IoError("trace csv: malformed row at line " + std::to_string(lineno));
    trace.push_back(r);
  }
  return trace;
}

RateReport report_trace(const AfemTrace& trace, int window) {
  if (static_cast<int>(trace.size()) < std::max(window, 3))
    throw InsufficientData("report: trace has fewer rows than the fit window");
  RateReport rep;
  rep.window = window;

  std::vector<double> n;
  for (const auto& r : trace) n.push_back(static_cast<double>(r.nT_cyl));
  const auto add_row = [&](const std::string& name, auto getter) {
    std::vector<double> e;
    for (const auto& r : trace) e.push_back(getter(r));
    RateRow row;
    row.name = name;
    try {
      row.slope = fit_rate(n, e, window);
      row.defined = true;
      row.in_range = row.slope >= -0.43 && row.slope <= -0.23;
    } catch (const InsufficientData&) {
      row.defined = false;
    }
    rep.rows.push_back(row);
  };
  add_row("total", [](const AfemIterate& r) { return r.total; });
  add_row("E_V", [](const AfemIterate& r) { return r.E_V; });
  add_row("E_P", [](const AfemIterate& r) { return r.E_P; });
  add_row("E_Z", [](const AfemIterate& r) { return r.E_Z; });
  add_row("E_Lambda", [](const AfemIterate& r) { return r.E_Lambda; });

  if (!rep.rows[0].defined) throw InsufficientData("report: total indicator vanishes in window");
  rep.pass = true;
  for (const auto& row : rep.rows)
    if (row.defined && !row.in_range) rep.pass = false;
  return rep;
}

std::string RateReport::text() const {
  std::ostringstream os;
  os << "decay rates over the last " << window << " iterations (target -1/3, band [-0.43,-0.23])\n";
  for (const auto& row : rows) {
    os << "  " << row.name;
    for (std::size_t p = row.name.size(); p < 9; ++p) os << ' ';
    if (row.defined) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%+.4f", row.slope);
      os << buf << (row.in_range ? "  ok" : "  out of band") << "\n";
    } else {
      os << "n/a (nonpositive data)\n";
    }
  }
  os << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

RateReport report_csv_file(const std::string& path, int window) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  AfemTrace trace = read_trace_csv(in);
  return report_trace(trace, window);
}

Manifest run_to_directory(const AfemConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

  Manifest man;
  man.version = version_string();
  man.started = utc_now();
  man.config_echo = config_echo(config);

  const RunResult result = run_afem(config);

  auto open_out = [&](const std::string& name) {
    std::ofstream os(fs::path(out_dir) / name);
    if (!os) throw IoError("cannot write '" + (fs::path(out_dir) / name).string() + "'");
    return os;
  };

  {
    auto os = open_out("trace.csv");
    write_trace_csv(os, result.trace, config.timing);
    man.artifacts.push_back("trace.csv");
  }
  {
    auto os = open_out("mesh_final.txt");
    write_mesh_text(os, result.final_base);
    man.artifacts.push_back("mesh_final.txt");
  }
  {
    auto os = open_out("control_final.txt");
    os << "controls " << result.final_base.triangle_count() << "\n";
    for (int t = 0; t < result.final_base.triangle_count(); ++t)
      os << fmt(result.final_quad.Z[t]) << " " << fmt(result.final_quad.Lambda[t]) << " "
         << label_name(result.final_labels[t]) << "\n";
    man.artifacts.push_back("control_final.txt");
  }
  if (config.vtk) {
    auto os = open_out("control_final.vtk");
    write_vtk(os, result.final_base,
              {{"Z", result.final_quad.Z}, {"Lambda", result.final_quad.Lambda}});
    man.artifacts.push_back("control_final.vtk");
  }

  man.finished = utc_now();
  {
    auto os = open_out("manifest.txt");
    os << "fracopt run manifest\n";
    os << "version: " << man.version << "\n";
    os << "started: " << man.started << "\n";
    os << "finished: " << man.finished << "\n";
    os << "iterations: " << result.trace.size() << "\n";
    os << "all_zero_stop: " << (result.all_zero_stop ? "true" : "false") << "\n";
    os << "artifacts:\n";
    for (const auto& a : man.artifacts) os << "  " << a << "\n";
    os << "config:\n";
    std::istringstream cfg(man.config_echo);
    std::string line;
    while (std::getline(cfg, line)) os << "  " << line << "\n";
    man.artifacts.push_back("manifest.txt");
  }

  for (const auto& a : man.artifacts) {
    if (!fs::exists(fs::path(out_dir) / a))
      throw IoError("manifest artifact missing: " + a);
  }
  return man;
}

}  // namespace fracopt
