#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "magband/bundle.hpp"
#include "magband/effective.hpp"
#include "magband/errors.hpp"
#include "magband/hofstadter.hpp"
#include "magband/io.hpp"
#include "magband/peierls.hpp"
#include "magband/topology.hpp"

using namespace magband;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_text_file(path, content);
  }
}

std::string join(const std::vector<std::string>& parts, const char* sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Turns a flat key=value file into command-line arguments. Lines starting
// with '#' are comments; `command` selects the subcommand; boolean flags take
// true/false.
std::vector<std::string> config_arguments(const std::string& path, std::string& command) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "command") {
      command = value;
    } else if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

// ---------------------------------------------------------------- commands

struct ButterflyArgs {
  int max_q = 0;
  int density = kSweepGridDensity;
  bool no_refine = false;
  bool color = false;
  std::string out, gaps, svg, json;
  int width = 800;
  int height = 600;
};

int run_butterfly(const ButterflyArgs& a) {
  if (a.max_q < 1) throw UsageError("--max-q must be at least 1");
  ButterflyData data = butterfly(a.max_q, a.density, !a.no_refine);
  if (a.color || !a.gaps.empty()) data = colored_butterfly(std::move(data));
  emit(a.out, butterfly_csv(data));
  if (!a.gaps.empty()) emit(a.gaps, gaps_csv(data));
  if (!a.json.empty()) emit(a.json, butterfly_json(data));
  if (!a.svg.empty()) emit(a.svg, render_svg(data, {a.width, a.height, a.color}));
  return kExitOk;
}

struct FluxArgs {
  long p = 0;
  long q = 0;
  int density = 0;
  bool no_refine = false;
  std::string json;
};

RationalFlux flux_of(const FluxArgs& a) {
  if (a.q == 0) throw UsageError("--q must be nonzero");
  return rational_flux(a.p, a.q);
}

int run_spectrum(const FluxArgs& a) {
  const RationalFlux flux = flux_of(a);
  ButterflyData data;
  data.rows.push_back({flux, hofstadter_intervals(flux, a.density, !a.no_refine), std::nullopt});
  std::cout << "flux " << flux.p << "/" << flux.q << ": " << data.rows[0].intervals.size() << " intervals\n";
  for (std::size_t i = 0; i < data.rows[0].intervals.size(); ++i) {
    const Interval& iv = data.rows[0].intervals[i];
    std::cout << i << " " << format_real(iv.lo) << " " << format_real(iv.hi) << " bands " << iv.first_band + 1
              << "-" << iv.last_band + 1 << "\n";
  }
  if (!a.json.empty()) emit(a.json, butterfly_json(data));
  return kExitOk;
}

int run_chern(const FluxArgs& a) {
  const RationalFlux flux = flux_of(a);
  const ChernReport rep = hofstadter_chern(flux, a.density);
  std::vector<std::string> cherns;
  for (std::size_t g = 0; g < rep.groups.size(); ++g) {
    const std::string c = std::to_string(rep.group_chern[g]);
    cherns.push_back(rep.groups[g].size() == 1 ? c : "[" + c + "]");
  }
  std::cout << join(cherns) << "\n";

  // top-down listing: each gap carries the Chern sum of the bands above it
  std::vector<std::string> top_down{"0"};
  int above = 0;
  for (std::size_t g = rep.groups.size(); g-- > 0;) {
    above += rep.group_chern[g];
    top_down.push_back(std::to_string(above));
  }
  std::cout << "gap labels, top to bottom: " << join(top_down) << "\n";

  const GapLabelSet labels = gap_labels_diophantine(flux);
  const auto expected = group_chern_from_gaps(labels, rep.groups);
  bool agree = true;
  for (std::size_t g = 0; g < expected.size(); ++g) agree = agree && expected[g] && *expected[g] == rep.group_chern[g];
  std::cout << "diophantine agreement: " << (agree ? "yes" : "no") << "\n";
  std::cout << "grid " << rep.grid.count1 << "x" << rep.grid.count2 << ", max plaquette phase "
            << format_real(rep.max_plaquette_phase) << ", max integrality defect "
            << format_real(rep.max_integrality_defect) << "\n";

  if (!a.json.empty()) {
    nlohmann::ordered_json j;
    j["flux_p"] = flux.p;
    j["flux_q"] = flux.q;
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < rep.groups.size(); ++g) {
      groups.push_back({{"first_band", rep.groups[g].first},
                        {"last_band", rep.groups[g].last},
                        {"chern", rep.group_chern[g]}});
    }
    j["groups"] = groups;
    j["per_gap"] = rep.per_gap;
    j["diophantine_agreement"] = agree;
    emit(a.json, j.dump(2) + "\n");
  }
  return kExitOk;
}

struct FrameArgs {
  FluxArgs flux;
  int band = 0;
  int n1 = 200;
  int n2 = 200;
};

int run_frame(const FrameArgs& a) {
  const RationalFlux flux = flux_of(a.flux);
  if (a.band < 1 || a.band > flux.q) throw UsageError("--band must lie in 1..q");
  const BlochMatrixFamily fam = hofstadter_family(flux);
  const ProjectorFamily proj = projector_family(fam, {a.band - 1, a.band - 1});
  const LineFrame line = initial_line_frame(proj, a.n2, a.n1);
  const Frame frame = extend_frame(line, proj, a.n1);
  const TransitionFunction alpha = transition_function(frame);
  const MeanCurvature omega = mean_curvature(frame);
  const Frame canonical = canonical_gauge(frame, omega.theta, omega);
  const TransitionFunction alpha_c = transition_function(canonical);
  const ChernReport fhs = hofstadter_chern(flux);
  std::optional<int> fhs_band;
  for (std::size_t g = 0; g < fhs.groups.size(); ++g) {
    if (fhs.groups[g] == BandGroup{a.band - 1, a.band - 1}) fhs_band = fhs.group_chern[g];
  }
  double drift = 0.0;
  for (double d : frame.column_drift) drift = std::max(drift, d);

  std::cout << "flux " << flux.p << "/" << flux.q << " band " << a.band << " grid " << a.n1 << "x" << a.n2
            << " origin kappa1 " << format_real(frame.offset) << "\n";
  std::cout << "theta (transition winding): " << alpha.theta << "\n";
  std::cout << "Omega(1)/2pi: " << format_real(omega.chern_real) << "\n";
  std::cout << "plaquette Chern: " << (fhs_band ? std::to_string(*fhs_band) : std::string("n/a")) << "\n";
  std::cout << "canonical residual: " << format_real(canonical_residual(alpha_c, omega.theta)) << "\n";
  std::cout << "max column drift: " << format_real(drift) << "\n";
  return kExitOk;
}

struct PeierlsArgs {
  int theta = 0;
  int q = 0;
  int ptilde = 0;
  int qtilde = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  bool isospec = false;
  bool chern = false;
  int density = kInteractiveGridDensity;
};

int run_peierls(const PeierlsArgs& a) {
  const PeierlsParams p = peierls_params(a.theta, a.q, a.ptilde, a.qtilde);
  std::cout << "theta " << p.theta << " q " << p.q << " ptilde/qtilde " << p.ptilde << "/" << p.qtilde
            << " B/2pi " << p.field() << "\n";
  const CMatrix h = peierls_matrix(p, {a.k1, a.k2});
  std::cout << "H(" << format_real(a.k1) << ", " << format_real(a.k2) << "):\n";
  for (int i = 0; i < h.rows(); ++i) {
    std::vector<std::string> row;
    for (int j = 0; j < h.cols(); ++j) row.push_back(format_real(h(i, j).real()) + (h(i, j).imag() < 0 ? "" : "+") + format_real(h(i, j).imag()) + "i");
    std::cout << "  " << join(row) << "\n";
  }
  const bool both = !a.isospec && !a.chern;
  if (a.isospec || both) {
    const IsospectralityReport r = isospectrality_report(p, a.density);
    std::cout << "isospectrality deviation: " << format_real(r.distance) << "\n";
  }
  if (a.chern || both) {
    const ChernReport rep = theta_chern_numbers(p);
    std::vector<std::string> cherns;
    for (std::size_t g = 0; g < rep.groups.size(); ++g) {
      const std::string c = std::to_string(rep.group_chern[g]);
      cherns.push_back(rep.groups[g].size() == 1 ? c : "[" + c + "]");
    }
    std::cout << "subband Chern numbers: " << join(cherns) << "\n";
    std::cout << "sum " << rep.total() << " theta " << p.theta << "\n";
  }
  return kExitOk;
}

struct MatchArgs {
  PeierlsArgs peierls;
  int parent_p = 0;
  int parent_band = 0;
};

int run_matchbands(const MatchArgs& a) {
  std::optional<ParentBand> parent;
  if (a.parent_p != 0 || a.parent_band != 0) {
    if (a.parent_p == 0 || a.parent_band == 0) throw UsageError("--parent-p and --parent-band go together");
    parent = ParentBand{rational_flux(a.parent_p, a.peierls.q), a.parent_band - 1};
  }
  const SubbandExperiment ex =
      subband_chern_experiment(a.peierls.theta, a.peierls.q, a.peierls.ptilde, a.peierls.qtilde, parent);
  const auto list = [](const std::vector<int>& v) {
    std::vector<std::string> s;
    for (int x : v) s.push_back(std::to_string(x));
    return join(s);
  };
  std::cout << "parent flux " << ex.parent.flux.p << "/" << ex.parent.flux.q << " band " << ex.parent.band + 1
            << " window [" << format_real(ex.window_lo) << ", " << format_real(ex.window_hi) << "]\n";
  std::cout << "Btilde/2pi " << ex.tilde_b << ", Hofstadter flux " << ex.flux.p << "/" << ex.flux.q << "\n";
  std::cout << "Peierls subbands: " << list(ex.peierls_chern) << "\n";
  std::cout << "Hofstadter window bands: " << list(ex.hofstadter_chern) << "\n";
  std::cout << "status: " << to_string(ex.status);
  if (!ex.note.empty()) std::cout << " (" << ex.note << ")";
  std::cout << "\n";
  return kExitOk;
}

struct SymbolArgs {
  FluxArgs flux;
  int band = 0;
  int count = 64;
  double b = 0.0;
  double phi0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  int samples = 16;
  double epsilon = 0.0;
  std::string out;
};

int run_symbol(const SymbolArgs& a) {
  const RationalFlux flux = flux_of(a.flux);
  if (a.band < 1 || a.band > flux.q) throw UsageError("--band must lie in 1..q");
  if (a.samples < 1) throw UsageError("--samples must be positive");
  const BlochMatrixFamily fam = hofstadter_family(flux);
  const EffectiveSymbol sym = effective_symbol(fam, a.band - 1, a.count, a.epsilon);
  SlowFields fields = uniform_field(a.b);
  const double phi0 = a.phi0, e1 = a.e1, e2 = a.e2;
  fields.phi = [=](Vec2 r) { return phi0 + e1 * r.x + e2 * r.y; };
  fields.grad_phi = [=](Vec2) { return Vec2{e1, e2}; };
  const SymbolEvaluator h0 = principal_symbol(sym, fields);
  const SymbolEvaluator h1 = subprincipal_symbol(sym, fields);
  const Vec2 r{a.r1, a.r2};
  std::ostringstream out;
  out << "k1,k2,h0,h1\n";
  for (int i = 0; i < a.samples; ++i) {
    for (int j = 0; j < a.samples; ++j) {
      const Vec2 k{fam.period1 * i / a.samples, fam.period2 * j / a.samples};
      out << format_real(k.x) << ',' << format_real(k.y) << ',' << format_real(h0(k, r)) << ','
          << format_real(h1(k, r)) << '\n';
    }
  }
  emit(a.out, out.str());
  return kExitOk;
}

void add_flux_options(CLI::App* cmd, FluxArgs& f, int default_density) {
  f.density = default_density;
  cmd->add_option("--p", f.p, "flux numerator")->required();
  cmd->add_option("--q", f.q, "flux denominator")->required();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  // Config file: its entries go first so explicit flags override them.
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] != "--config") continue;
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      std::string command;
      std::vector<std::string> extra = config_arguments(args[i + 1], command);
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      const bool has_command = !args.empty() && args[0].rfind("--", 0) != 0;
      if (!has_command) {
        if (command.empty()) throw UsageError("config file names no command");
        args.insert(args.begin(), command);
      }
      args.insert(args.begin() + 1, extra.begin(), extra.end());
      break;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  CLI::App app{"Magnetic Bloch bands: Hofstadter spectra, Chern numbers and Peierls symbols", "magband"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");
  std::string config_unused;
  app.add_option("--config", config_unused, "Flat key=value file with the same keys as the flags");

  ButterflyArgs bf;
  auto* c_bf = app.add_subcommand("butterfly", "Spectral intervals for every Farey flux p/q, q <= max-q");
  c_bf->add_option("--max-q", bf.max_q, "largest denominator")->required();
  c_bf->add_option("--density", bf.density, "k-grid points per direction")->capture_default_str();
  c_bf->add_flag("--no-refine", bf.no_refine, "skip extremum refinement");
  c_bf->add_flag("--color", bf.color, "label gaps (and color them in the SVG)");
  c_bf->add_option("--out", bf.out, "interval CSV path (default stdout)");
  c_bf->add_option("--gaps", bf.gaps, "gap-label CSV path");
  c_bf->add_option("--svg", bf.svg, "SVG path");
  c_bf->add_option("--json", bf.json, "JSON path");
  c_bf->add_option("--width", bf.width, "SVG width")->capture_default_str();
  c_bf->add_option("--height", bf.height, "SVG height")->capture_default_str();

  FluxArgs sp;
  auto* c_sp = app.add_subcommand("spectrum", "Spectral intervals at one flux");
  add_flux_options(c_sp, sp, kInteractiveGridDensity);
  c_sp->add_option("--density", sp.density, "k-grid points per direction")->capture_default_str();
  c_sp->add_flag("--no-refine", sp.no_refine, "skip extremum refinement");
  c_sp->add_option("--json", sp.json, "JSON path");

  FluxArgs ch;
  auto* c_ch = app.add_subcommand("chern", "Band Chern numbers at one flux");
  add_flux_options(c_ch, ch, kChernGridDensity);
  c_ch->add_option("--density", ch.density, "plaquette grid per direction")->capture_default_str();
  c_ch->add_option("--json", ch.json, "JSON path");

  FrameArgs fr;
  auto* c_fr = app.add_subcommand("frame", "Transported frame, transition function and canonical gauge");
  add_flux_options(c_fr, fr.flux, 0);
  c_fr->add_option("--band", fr.band, "band number, 1 = lowest")->required();
  c_fr->add_option("--n1", fr.n1, "grid columns")->capture_default_str();
  c_fr->add_option("--n2", fr.n2, "grid rows")->capture_default_str();

  PeierlsArgs pe;
  auto* c_pe = app.add_subcommand("peierls", "The theta-quantized model family");
  const auto add_peierls = [](CLI::App* cmd, PeierlsArgs& p) {
    cmd->add_option("--theta", p.theta, "Chern number of the parent band")->required();
    cmd->add_option("--q", p.q, "flux denominator of the parent")->required();
    cmd->add_option("--ptilde", p.ptilde, "numerator of q^2 B / 2pi")->required();
    cmd->add_option("--qtilde", p.qtilde, "denominator of q^2 B / 2pi")->required();
  };
  add_peierls(c_pe, pe);
  c_pe->add_option("--k1", pe.k1, "matrix dump point");
  c_pe->add_option("--k2", pe.k2, "matrix dump point");
  c_pe->add_flag("--isospec", pe.isospec, "compare with the Hofstadter spectrum at ptilde/qtilde");
  c_pe->add_flag("--chern", pe.chern, "subband Chern numbers");
  c_pe->add_option("--density", pe.density, "k-grid points per direction")->capture_default_str();

  MatchArgs ma;
  auto* c_ma = app.add_subcommand("matchbands", "Subband Chern numbers against Hofstadter at B0 + Btilde");
  add_peierls(c_ma, ma.peierls);
  c_ma->add_option("--parent-p", ma.parent_p, "parent flux numerator (default: search)");
  c_ma->add_option("--parent-band", ma.parent_band, "parent band number, 1 = lowest");

  SymbolArgs sy;
  auto* c_sy = app.add_subcommand("symbol", "Dump h0 and h1 over the reduced zone at one point r");
  add_flux_options(c_sy, sy.flux, 0);
  c_sy->add_option("--band", sy.band, "band number, 1 = lowest")->required();
  c_sy->add_option("--count", sy.count, "frame grid per direction")->capture_default_str();
  c_sy->add_option("--b", sy.b, "uniform field B");
  c_sy->add_option("--phi0", sy.phi0, "potential offset");
  c_sy->add_option("--e1", sy.e1, "potential gradient, first component");
  c_sy->add_option("--e2", sy.e2, "potential gradient, second component");
  c_sy->add_option("--r1", sy.r1, "evaluation point r");
  c_sy->add_option("--r2", sy.r2, "evaluation point r");
  c_sy->add_option("--samples", sy.samples, "k samples per direction")->capture_default_str();
  c_sy->add_option("--epsilon", sy.epsilon, "semiclassical weight");
  c_sy->add_option("--out", sy.out, "CSV path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_bf) return run_butterfly(bf);
    if (*c_sp) return run_spectrum(sp);
    if (*c_ch) return run_chern(ch);
    if (*c_fr) return run_frame(fr);
    if (*c_pe) return run_peierls(pe);
    if (*c_ma) return run_matchbands(ma);
    if (*c_sy) return run_symbol(sy);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const RefinementRequired& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericalError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
