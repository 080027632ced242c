#pragma once

// Command-line interface: argument parsing, engine dispatch, and CSV/JSON
// serialization.  Kept as a library so the behavior is testable without
// spawning processes.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "casray/assembly.hpp"

namespace casray {
namespace cli {

enum class Command { Energy, Force, SweepH, SweepA, Piston, Convergence };
enum class Format { Csv, Json };

struct RunConfig {
  Command command = Command::Force;
  double a = 1.0;
  double s = 1.0;
  double h = 0.25;
  std::vector<double> hGrid;
  std::vector<double> aGrid;
  double tolerance = 1e-4;
  int maxOrder = 0;  // 0 = tolerance-driven; > 0 caps both channels
  Format format = Format::Csv;
  std::string outPath;  // empty = stdout
  int threads = 0;      // 0 = hardware concurrency
  assembly::Normalization normalize = assembly::Normalization::Pfa;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "lo:hi:step" -> {lo, lo+step, ..., <= hi}; throws UsageError.
std::vector<double> parseGrid(const std::string& spec);

// Throws UsageError on bad input; throws HelpRequested (below) for --help.
struct HelpRequested {
  std::string text;
};
RunConfig parseArgs(const std::vector<std::string>& args);

// CSV (fixed header, 12 significant digits, byte-stable) or JSON array.
void writeRecords(const std::vector<assembly::SweepRecord>& records,
                  Format format, std::ostream& out);

// Exit status: 0 all converged, 2 partial convergence, 1 usage/I-O error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int run(int argc, char** argv);

}  // namespace cli
}  // namespace casray
