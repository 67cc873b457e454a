#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fermobius/chain_model.hpp"
#include "fermobius/correlation.hpp"
#include "fermobius/mobius.hpp"

namespace fm::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::optional<CouplingSet> chain;
  std::string chain_label;  // canonical text of the chain source, hashed into provenance
  std::optional<XYDM> xydm;
  std::vector<double> alphas{1.0};
  std::vector<long> X{100};
  bool X_given = false;
  std::vector<double> zetas{0.0};
  bool zetas_given = false;
  std::vector<std::pair<long, long>> intervals;
  Mode mode = Mode::thermo();
  std::string out_dir = ".";
  std::optional<std::string> json_path;
  int jobs = 1;
  double tol = 1e-10;
  std::optional<MobiusMap> mobius;
  std::vector<int> which{3, 4, 5};
  bool check_direct = false;
};

// Flags override values read from --config <file.json>. Throws UsageError.
RunConfig parse_config(const std::vector<std::string>& args);

// Returns the exit code; diagnostics go to err.
int run(const RunConfig& cfg, std::ostream& err);

// argv front end: 0 success, 1 computation error, 2 usage error.
int main_entry(int argc, char** argv);

// Parsers shared with the Python bindings.
std::vector<double> parse_zeta_grid(const std::string& s);
std::vector<std::pair<long, long>> parse_intervals(const std::string& s);
Mode parse_mode(const std::string& s, double tol);
// Chain JSON: {"xydm": [g, s, h]} or {"xydm": {"gamma", "s", "h"}}, {"fplus": [...]}, or
// {"L", "A", "B"} (l = 0..L, entries number or [re, im]) with A_re/A_im/B_re/B_im as an alternative.
CouplingSet load_chain_file(const std::string& path, std::string* label = nullptr,
                            std::optional<XYDM>* xydm = nullptr);

// Built-in chains used by the figure protocols.
CouplingSet parity_preserving_l2();
CouplingSet dirac_sea_l2();

}  // namespace fm::cli
