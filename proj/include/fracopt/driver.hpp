#ifndef FRACOPT_DRIVER_HPP
#define FRACOPT_DRIVER_HPP

#include <iosfwd>

#include "fracopt/config.hpp"

namespace fracopt {

// trace.csv column order; doubles are printed with %.17g so that reading the
// file back reproduces the values exactly.
inline constexpr const char* kTraceHeader =
    "iter,nT_base,nT_cyl,dofs,Y,M,E_V,E_P,E_Z,E_Lambda,osc,total,J,as_iters,seconds";

// The seconds column carries measured wall time only when timing is enabled;
// it is written as 0 otherwise so that reruns are byte-identical.
void write_trace_csv(std::ostream& os, const AfemTrace& trace, bool include_timing);
AfemTrace read_trace_csv(std::istream& is);

struct RateRow {
  std::string name;
  bool defined = false;  // false when the window contains nonpositive values
  double slope = 0.0;
  bool in_range = false;
};

struct RateReport {
  int window = 5;
  std::vector<RateRow> rows;  // total, E_V, E_P, E_Z, E_Lambda
  bool pass = false;
  std::string text() const;
};

// Fitted decay rates against #T_Y over the trailing window, judged against
// the -1/(n+1) = -1/3 target with tolerance 0.1.
RateReport report_trace(const AfemTrace& trace, int window = 5);
RateReport report_csv_file(const std::string& path, int window = 5);

struct Manifest {
  std::string version;
  std::string started, finished;  // UTC timestamps
  std::string config_echo;
  std::vector<std::string> artifacts;  // paths relative to the output directory
};

// Runs the adaptive loop and writes trace.csv, the final mesh and control
// dumps, optional VTK output, and manifest.txt into out_dir.
Manifest run_to_directory(const AfemConfig& config, const std::string& out_dir);

const char* version_string();

}  // namespace fracopt

#endif
