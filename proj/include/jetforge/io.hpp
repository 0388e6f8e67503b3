#pragma once
// Persistence and export: the PF1 binary field dump, legacy-VTK structured
// points for offline viewers, RFC-4180 CSV helpers, the structured-text run
// configuration, and the energy-profile selectors.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jetforge/field.hpp"
#include "jetforge/jets.hpp"
#include "jetforge/params.hpp"
#include "jetforge/profiles.hpp"

namespace jetforge {

// ---------------------------------------------------------------------------
// field export

enum class ExportFormat { pf1, vtk_legacy, csv_slice };
ExportFormat export_format_from_string(const std::string& s);
const char* export_format_name(ExportFormat f);

// PF1: little-endian; magic "PF1\0", u32 rank code, u32 samples per axis,
// u32 component count, f64 box edge; body float64, row-major (x fastest),
// component-interleaved.
void write_pf1(const std::string& path, const Field& f);
Field read_pf1(const std::string& path);

// Legacy-VTK STRUCTURED_POINTS, ASCII, float64 point data. Scalars export a
// SCALARS array, three components a VECTORS array, six a FIELD block.
void write_vtk_legacy(const std::string& path, const Field& f,
                      const std::string& name = "field");

// One z-plane as CSV: for each component in order, n rows of n x-samples
// (row = fixed y, columns sweep x).
void write_csv_slice(const std::string& path, const Field& f, int iz = 0);

void export_field(const std::string& path, const Field& f, ExportFormat fmt);

// ---------------------------------------------------------------------------
// CSV helpers

// fixed 17-significant-digit formatting so reruns are byte-identical
std::string fmt_real17(Real v);
// RFC-4180: quote when the cell holds a comma, quote, or line break
std::string csv_quote(const std::string& cell);
void write_text_file(const std::string& path, const std::string& body);
std::string read_text_file(const std::string& path);

// ---------------------------------------------------------------------------
// energy profile

// selector: "one_minus_cos_k" -> value * (1 - cos(k t)); "constant" ->
// value; "tabulated" -> linear interpolation of a two-column (t, e) CSV
struct EnergySpec {
  std::string selector = "one_minus_cos_k";
  Real k = 1.0;
  Real value = 1.0;
  std::string table_path;
};

std::function<Real(Real)> energy_function(const EnergySpec& spec);
std::vector<Real> sample_energy(const EnergySpec& spec, Real t0, Real t1,
                                int n_t);

// ---------------------------------------------------------------------------
// run configuration

struct OutputSpec {
  std::string directory = ".";
  std::vector<std::string> formats = {"pf1"};
};

struct RunConfig {
  ParamLedger ledger;
  JetParams jets;
  std::string profile_shape = "poly_bump";
  int family = 0;
  long long grid_n = 32;
  long long n_t = 9;
  Real T = kTwoPi;
  EnergySpec energy;
  OutputSpec output;
  std::uint64_t seed = 0;
};

// INI-like sections ([ledger] [jets] [grid] [energy] [output]); values are
// decimal or rational "p/q" literals; parse(serialize(c)) == c
std::string run_config_to_text(const RunConfig& c);
RunConfig run_config_from_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace jetforge
